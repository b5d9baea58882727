use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::geometry::{CameraIntrinsics, Pose};
use crate::pointcloud::ColoredPointCloud;
use crate::renderer::render;

/// Piecewise utility of a hole ratio: rising up to `theta`, then `1 - ratio`.
/// The boundary `ratio == theta` takes the first branch.
pub fn utility(ratio: f64, theta: f64) -> f64 {
    if ratio <= theta {
        ratio
    } else {
        1.0 - ratio
    }
}

/// Index of the largest utility; the lowest index wins ties.
pub fn argmax_utility(utilities: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &u) in utilities.iter().enumerate() {
        match best {
            Some(b) if utilities[b] >= u => {}
            _ => best = Some(i),
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub chosen_index: usize,
    pub ratios: Vec<f64>,
    pub utilities: Vec<f64>,
}

/// Renders every candidate and picks the one with the highest utility.
pub fn select_nbv(
    cloud: &ColoredPointCloud,
    candidates: &[Pose],
    k: &CameraIntrinsics,
    theta: f64,
    splat_radius_px: u32,
) -> Result<Selection, PlanError> {
    if candidates.is_empty() {
        return Err(PlanError::NoCandidates);
    }
    let ratios: Vec<f64> = candidates
        .par_iter()
        .map(|pose| render(cloud, pose, k, splat_radius_px).hole_ratio())
        .collect();
    let utilities: Vec<f64> = ratios.iter().map(|&r| utility(r, theta)).collect();
    let chosen_index = argmax_utility(&utilities).ok_or(PlanError::NoCandidates)?;
    Ok(Selection {
        chosen_index,
        ratios,
        utilities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn utility_examples() {
        assert_eq!(utility(0.2, 0.6), 0.2);
        assert!((utility(0.8, 0.6) - 0.2).abs() < 1e-15);
        assert_eq!(utility(0.0, 0.3), 0.0);
        assert_eq!(utility(0.6, 0.6), 0.6);
    }

    #[test]
    fn argmax_examples() {
        let u: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|&r| utility(r, 0.6)).collect();
        assert_eq!(argmax_utility(&u), Some(2));
        assert_eq!(argmax_utility(&[0.4; 6]), Some(0));
        assert_eq!(argmax_utility(&[]), None);
    }

    proptest! {
        #[test]
        fn utility_is_the_piecewise_formula(r in 0.0f64..=1.0, theta in 0.001f64..0.999) {
            let u = utility(r, theta);
            if r <= theta { prop_assert_eq!(u, r) } else { prop_assert_eq!(u, 1.0 - r) }
            prop_assert!(u <= theta.max(1.0 - theta) + 1e-15);
        }

        #[test]
        fn utility_peaks_at_theta(theta in 0.5f64..0.999, r in 0.0f64..=1.0) {
            prop_assert!(utility(r, theta) <= utility(theta, theta));
        }

        #[test]
        fn chosen_utility_dominates(us in proptest::collection::vec(0.0f64..1.0, 1..20)) {
            let i = argmax_utility(&us).unwrap();
            prop_assert!(us.iter().all(|&u| u <= us[i]));
            prop_assert!(us[..i].iter().all(|&u| u < us[i]));
        }

        #[test]
        fn argmax_invariant_under_resolution_scaling(
            holes in proptest::collection::vec(0u64..=100, 1..12),
            scale in 1u64..8,
            theta in 0.05f64..0.95,
        ) {
            let pick = |n: u64| {
                let u: Vec<f64> = holes.iter().map(|&h| utility((h * n) as f64 / (100 * n) as f64, theta)).collect();
                argmax_utility(&u)
            };
            prop_assert_eq!(pick(1), pick(scale));
        }
    }
}
