use nalgebra::{Matrix3, Vector3};

use crate::geometry::{Pose, Trajectory};

use super::MetricsError;

/// Furthest-frame distances below this are treated as a static trajectory.
pub const DEGENERATE_SCALE: f64 = 1e-12;

/// Poses relative to the first frame with translations scaled so the furthest
/// frame is at distance 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTrajectory {
    pub poses: Vec<Pose>,
    /// Divisor applied to translations.
    pub scale: f64,
    /// Set when every frame sits at the first camera's position; `scale` is 1.
    pub degenerate: bool,
}

impl NormalizedTrajectory {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

pub fn normalize_trajectory(traj: &Trajectory) -> NormalizedTrajectory {
    let to_first = traj.first().inverse();
    let relative: Vec<Pose> = traj.poses().iter().map(|p| to_first.compose(p)).collect();
    let furthest = relative
        .iter()
        .map(|p| p.translation().norm())
        .fold(0.0, f64::max);
    let degenerate = furthest < DEGENERATE_SCALE;
    let scale = if degenerate { 1.0 } else { furthest };
    let poses = relative
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if i == 0 {
                // exact identity rather than R Rᵀ round-off
                Pose::identity()
            } else {
                Pose::new(*p.rotation(), p.translation() / scale).expect("composition of valid poses")
            }
        })
        .collect();
    NormalizedTrajectory {
        poses,
        scale,
        degenerate,
    }
}

fn check_len(a: &NormalizedTrajectory, b: &NormalizedTrajectory) -> Result<(), MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Per-frame rotation geodesic `arccos((tr(R_gen R_gtᵀ) − 1) / 2)`.
///
/// Evaluated as `atan2(sin, cos)` with the sine taken from the skew part of
/// `R_gen R_gtᵀ`, which keeps full precision for small angles where `arccos`
/// loses about half the digits. Identical rotations give exactly 0.
pub fn rotation_distances(
    generated: &NormalizedTrajectory,
    ground_truth: &NormalizedTrajectory,
) -> Result<Vec<f64>, MetricsError> {
    check_len(generated, ground_truth)?;
    Ok(generated
        .poses
        .iter()
        .zip(&ground_truth.poses)
        .map(|(g, t)| rotation_geodesic(g.rotation(), t.rotation()))
        .collect())
}

fn rotation_geodesic(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = a * b.transpose();
    let skew = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    (0.5 * skew.norm()).atan2(0.5 * (m.trace() - 1.0))
}

/// Sum of per-frame rotation distances, in radians.
pub fn rotation_distance(
    generated: &NormalizedTrajectory,
    ground_truth: &NormalizedTrajectory,
) -> Result<f64, MetricsError> {
    Ok(rotation_distances(generated, ground_truth)?.iter().sum())
}

pub fn translation_distances(
    generated: &NormalizedTrajectory,
    ground_truth: &NormalizedTrajectory,
) -> Result<Vec<f64>, MetricsError> {
    check_len(generated, ground_truth)?;
    Ok(generated
        .poses
        .iter()
        .zip(&ground_truth.poses)
        .map(|(g, t)| (t.translation() - g.translation()).norm())
        .collect())
}

/// Sum over frames of `‖T_gt − T_gen‖₂`.
pub fn translation_distance(
    generated: &NormalizedTrajectory,
    ground_truth: &NormalizedTrajectory,
) -> Result<f64, MetricsError> {
    Ok(translation_distances(generated, ground_truth)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CameraIntrinsics;
    use nalgebra::{Rotation3, Vector3};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::centered(100.0, 64, 64).unwrap()
    }

    fn traj(poses: Vec<Pose>) -> Trajectory {
        Trajectory::new(poses, k()).unwrap()
    }

    fn translated(t: [f64; 3]) -> Pose {
        Pose::new(nalgebra::Matrix3::identity(), Vector3::from(t)).unwrap()
    }

    #[test]
    fn static_trajectory_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = Pose::random(&mut rng, 3.0);
        let n = normalize_trajectory(&traj(vec![p; 4]));
        assert!(n.degenerate);
        assert_eq!(n.scale, 1.0);
        for q in &n.poses {
            assert!(q.approx_eq(&Pose::identity(), 1e-12));
        }
    }

    #[test]
    fn furthest_frame_scaling() {
        let n = normalize_trajectory(&traj(vec![Pose::identity(), translated([0.0, 0.0, 4.0])]));
        assert_eq!(n.scale, 4.0);
        assert!(!n.degenerate);
        assert_eq!(*n.poses[1].translation(), Vector3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn first_frame_is_identity_and_max_norm_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let poses: Vec<Pose> = (0..7).map(|_| Pose::random(&mut rng, 5.0)).collect();
            let n = normalize_trajectory(&traj(poses.clone()));
            assert_eq!(n.poses[0], Pose::identity());
            // independent recomputation of the relative translations
            let c0 = poses[0].position();
            let r0t = poses[0].rotation().transpose();
            let max = poses
                .iter()
                .map(|p| (r0t * (p.position() - c0)).norm())
                .fold(0.0, f64::max);
            assert!((n.scale - max).abs() < 1e-9 * max);
            let furthest = n.poses.iter().map(|p| p.translation().norm()).fold(0.0, f64::max);
            assert!((furthest - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rotation_distance_examples() {
        let a = normalize_trajectory(&traj(vec![Pose::identity(), translated([1.0, 0.0, 0.0])]));
        assert_eq!(rotation_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(translation_distance(&a, &a).unwrap(), 0.0);

        let rz = Rotation3::from_axis_angle(&Vector3::z_axis(), std::f64::consts::FRAC_PI_2);
        let gen = NormalizedTrajectory {
            poses: vec![Pose::new(rz.into_inner(), Vector3::zeros()).unwrap()],
            scale: 1.0,
            degenerate: true,
        };
        let gt = NormalizedTrajectory {
            poses: vec![Pose::identity()],
            scale: 1.0,
            degenerate: true,
        };
        let d = rotation_distance(&gen, &gt).unwrap();
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn translation_example_three_four_five() {
        let gt = normalize_trajectory(&traj(vec![Pose::identity(), translated([3.0, 4.0, 0.0])]));
        let gen = normalize_trajectory(&traj(vec![Pose::identity(), Pose::identity()]));
        assert_eq!(gt.scale, 5.0);
        assert!((translation_distance(&gen, &gt).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let a = normalize_trajectory(&traj(vec![Pose::identity()]));
        let b = normalize_trajectory(&traj(vec![Pose::identity(); 2]));
        assert_eq!(rotation_distance(&a, &b), Err(MetricsError::LengthMismatch(1, 2)));
        assert_eq!(translation_distance(&a, &b), Err(MetricsError::LengthMismatch(1, 2)));
    }

    proptest! {
        #[test]
        fn symmetric_and_globally_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<Pose> = (0..5).map(|_| Pose::random(&mut rng, 2.0)).collect();
            let b: Vec<Pose> = (0..5).map(|_| Pose::random(&mut rng, 2.0)).collect();
            let (na, nb) = (normalize_trajectory(&traj(a.clone())), normalize_trajectory(&traj(b.clone())));
            let r_ab = rotation_distance(&na, &nb).unwrap();
            let r_ba = rotation_distance(&nb, &na).unwrap();
            prop_assert!((r_ab - r_ba).abs() < 1e-9);
            let t_ab = translation_distance(&na, &nb).unwrap();
            prop_assert!((t_ab - translation_distance(&nb, &na).unwrap()).abs() < 1e-12);
            prop_assert!(r_ab.is_finite() && t_ab.is_finite());

            let g = Pose::random(&mut rng, 3.0);
            let ga: Vec<Pose> = a.iter().map(|p| g.compose(p)).collect();
            let gb: Vec<Pose> = b.iter().map(|p| g.compose(p)).collect();
            let r_g = rotation_distance(&normalize_trajectory(&traj(ga)), &normalize_trajectory(&traj(gb))).unwrap();
            prop_assert!((r_g - r_ab).abs() < 1e-7);
        }

        #[test]
        fn zero_iff_equal(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a: Vec<Pose> = (0..4).map(|_| Pose::random(&mut rng, 2.0)).collect();
            let na = normalize_trajectory(&traj(a));
            prop_assert_eq!(rotation_distance(&na, &na).unwrap(), 0.0);
            prop_assert_eq!(translation_distance(&na, &na).unwrap(), 0.0);
        }
    }
}
