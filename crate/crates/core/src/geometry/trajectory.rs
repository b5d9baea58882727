use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CameraIntrinsics, GeometryError, Pose};

/// Ordered camera path sharing one set of intrinsics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryFile")]
pub struct Trajectory {
    intrinsics: CameraIntrinsics,
    poses: Vec<Pose>,
}

#[derive(Deserialize)]
struct TrajectoryFile {
    intrinsics: CameraIntrinsics,
    poses: Vec<Pose>,
}

impl TryFrom<TrajectoryFile> for Trajectory {
    type Error = GeometryError;

    fn try_from(f: TrajectoryFile) -> Result<Self, Self::Error> {
        Trajectory::new(f.poses, f.intrinsics)
    }
}

impl Trajectory {
    pub fn new(poses: Vec<Pose>, intrinsics: CameraIntrinsics) -> Result<Self, GeometryError> {
        if poses.is_empty() {
            return Err(GeometryError::EmptyTrajectory);
        }
        intrinsics.validate()?;
        Ok(Self { intrinsics, poses })
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn intrinsics(&self) -> &CameraIntrinsics {
        &self.intrinsics
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> &Pose {
        &self.poses[0]
    }

    pub fn last(&self) -> &Pose {
        &self.poses[self.poses.len() - 1]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(s).map_err(|e| GeometryError::Format(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, GeometryError> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }

    pub fn write(&self, path: &Path) -> Result<(), GeometryError> {
        std::fs::write(path, self.to_json())
            .map_err(|e| GeometryError::Format(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_rejected() {
        let k = CameraIntrinsics::centered(50.0, 8, 8).unwrap();
        assert_eq!(Trajectory::new(vec![], k), Err(GeometryError::EmptyTrajectory));
        let bad = r#"{"intrinsics":{"focal_px":1,"cx":1,"cy":1,"width":4,"height":4},"poses":[]}"#;
        assert!(Trajectory::from_json(bad).is_err());
    }

    #[test]
    fn json_layout() {
        let k = CameraIntrinsics::centered(50.0, 8, 6).unwrap();
        let t = Trajectory::new(vec![Pose::identity()], k).unwrap();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["intrinsics"]["cx"], 4.0);
        assert_eq!(v["intrinsics"]["height"], 6);
        assert_eq!(v["poses"][0]["rotation"].as_array().unwrap().len(), 9);
        assert_eq!(v["poses"][0]["translation"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn non_rotation_rejected_on_read() {
        let bad = r#"{"intrinsics":{"focal_px":1,"cx":1,"cy":1,"width":4,"height":4},
            "poses":[{"rotation":[2,0,0,0,1,0,0,0,1],"translation":[0,0,0]}]}"#;
        assert!(Trajectory::from_json(bad).is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..6, f in 1.0f64..5000.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let poses = (0..n).map(|_| Pose::random(&mut rng, 100.0)).collect();
            let k = CameraIntrinsics::new(f, f / 3.0, f / 7.0, 640, 480).unwrap();
            let t = Trajectory::new(poses, k).unwrap();
            let back = Trajectory::from_json(&t.to_json()).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
