use nalgebra::Point3;

use super::{CloudError, PointMap, Rgb8};
use crate::geometry::Pose;

/// Unstructured world-space points with 8-bit colors and optional confidences.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ColoredPointCloud {
    positions: Vec<Point3<f64>>,
    colors: Vec<Rgb8>,
    confidences: Option<Vec<f32>>,
}

impl ColoredPointCloud {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(
        positions: Vec<Point3<f64>>,
        colors: Vec<Rgb8>,
        confidences: Option<Vec<f32>>,
    ) -> Result<Self, CloudError> {
        if positions.len() != colors.len() {
            return Err(CloudError::ShapeMismatch(format!(
                "{} positions but {} colors",
                positions.len(),
                colors.len()
            )));
        }
        if let Some(c) = &confidences {
            if c.len() != positions.len() {
                return Err(CloudError::ShapeMismatch(format!(
                    "{} positions but {} confidences",
                    positions.len(),
                    c.len()
                )));
            }
            if let Some(bad) = c.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(CloudError::Invalid(format!("confidence {bad}")));
            }
        }
        if let Some(i) = positions.iter().position(|p| !p.iter().all(|x| x.is_finite())) {
            return Err(CloudError::Invalid(format!("point {i} has non-finite coordinates")));
        }
        Ok(Self {
            positions,
            colors,
            confidences,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3<f64>] {
        &self.positions
    }

    pub fn colors(&self) -> &[Rgb8] {
        &self.colors
    }

    pub fn confidences(&self) -> Option<&[f32]> {
        self.confidences.as_deref()
    }

    /// First `n` points. Fusion only appends, so this recovers earlier states
    /// of a grown cloud.
    pub fn prefix(&self, n: usize) -> ColoredPointCloud {
        let n = n.min(self.len());
        ColoredPointCloud {
            positions: self.positions[..n].to_vec(),
            colors: self.colors[..n].to_vec(),
            confidences: self.confidences.as_ref().map(|c| c[..n].to_vec()),
        }
    }

    pub(crate) fn push(&mut self, p: Point3<f64>, color: Rgb8, confidence: f32) {
        debug_assert!(p.iter().all(|x| x.is_finite()));
        self.positions.push(p);
        self.colors.push(color);
        if let Some(c) = &mut self.confidences {
            c.push(confidence);
        }
    }

    pub fn bit_eq(&self, other: &ColoredPointCloud) -> bool {
        self.len() == other.len()
            && self.colors == other.colors
            && self
                .positions
                .iter()
                .zip(&other.positions)
                .all(|(a, b)| a.iter().zip(b.iter()).all(|(x, y)| x.to_bits() == y.to_bits()))
            && match (&self.confidences, &other.confidences) {
                (None, None) => true,
                (Some(a), Some(b)) => a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()),
                _ => false,
            }
    }
}

/// Concatenates every pixel with confidence above `min_confidence`, moved to
/// world space by its map's camera-to-world pose.
pub fn cloud_from_pointmaps(
    maps: &[(PointMap, Pose)],
    min_confidence: f64,
) -> Result<ColoredPointCloud, CloudError> {
    if maps.is_empty() {
        return Err(CloudError::EmptyInput);
    }
    let mut cloud = ColoredPointCloud {
        confidences: Some(Vec::new()),
        ..Default::default()
    };
    for (map, pose) in maps {
        for ((p, &conf), &color) in map.points().iter().zip(map.confidence()).zip(map.colors()) {
            if conf > min_confidence && p.iter().all(|x| x.is_finite()) {
                cloud.push(pose.camera_to_world(p), color, conf as f32);
            }
        }
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn map_2x2(conf: [f64; 4]) -> PointMap {
        let pts = vec![
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(1.0, 0.0, 1.0),
            Point3::new(0.0, 1.0, 2.0),
            Point3::new(1.0, 1.0, 2.0),
        ];
        PointMap::new(2, 2, pts, conf.to_vec(), vec![[10, 20, 30]; 4]).unwrap()
    }

    #[test]
    fn identity_pose_copies_points() {
        let m = map_2x2([1.0; 4]);
        let c = cloud_from_pointmaps(&[(m.clone(), Pose::identity())], 0.0).unwrap();
        assert_eq!(c.positions(), m.points());
        assert_eq!(c.colors(), m.colors());
    }

    #[test]
    fn confidence_threshold_filters() {
        let m = map_2x2([1.0, 1.0, 0.0, 0.0]);
        let c = cloud_from_pointmaps(&[(m, Pose::identity())], 0.5).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(cloud_from_pointmaps(&[], 0.0), Err(CloudError::EmptyInput)));
    }

    #[test]
    fn two_views_of_one_surface_coincide() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pose_a = Pose::random(&mut rng, 1.0);
        let pose_b = Pose::random(&mut rng, 1.0);
        // points on the world plane z = 3
        let world: Vec<Point3<f64>> = (0..25)
            .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 3.0))
            .collect();
        let to_map = |pose: &Pose| {
            let pts: Vec<_> = world.iter().map(|p| pose.world_to_camera(p)).collect();
            PointMap::new(5, 5, pts, vec![1.0; 25], vec![[0; 3]; 25]).unwrap()
        };
        let fused = cloud_from_pointmaps(
            &[(to_map(&pose_a), pose_a), (to_map(&pose_b), pose_b)],
            0.0,
        )
        .unwrap();
        let (a, b) = fused.positions().split_at(25);
        for p in a {
            let nn = b.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min);
            assert!(nn < 1e-6, "{nn}");
            assert!((p.z - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_mismatched_lengths() {
        assert!(ColoredPointCloud::new(vec![Point3::origin()], vec![], None).is_err());
        assert!(ColoredPointCloud::new(vec![Point3::origin()], vec![[0; 3]], Some(vec![])).is_err());
        assert!(ColoredPointCloud::new(vec![Point3::new(f64::NAN, 0.0, 0.0)], vec![[0; 3]], None).is_err());
    }

    fn sorted_keys(c: &ColoredPointCloud) -> Vec<[u64; 3]> {
        let mut v: Vec<_> = c
            .positions()
            .iter()
            .map(|p| [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()])
            .collect();
        v.sort();
        v
    }

    proptest! {
        #[test]
        fn permutation_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let maps: Vec<(PointMap, Pose)> = (0..3)
                .map(|_| {
                    let pts = (0..6)
                        .map(|_| Point3::new(rng.random(), rng.random(), rng.random::<f64>() + 1.0))
                        .collect();
                    let conf = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
                    (PointMap::new(3, 2, pts, conf, vec![[1; 3]; 6]).unwrap(), Pose::random(&mut rng, 2.0))
                })
                .collect();
            let fwd = cloud_from_pointmaps(&maps, 0.3).unwrap();
            let rev: Vec<_> = maps.iter().rev().cloned().collect();
            let bwd = cloud_from_pointmaps(&rev, 0.3).unwrap();
            prop_assert_eq!(sorted_keys(&fwd), sorted_keys(&bwd));
        }
    }
}
