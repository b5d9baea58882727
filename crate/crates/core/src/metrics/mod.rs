//! Pose accuracy, image quality and surface coverage.

mod coverage;
mod image;
mod trajectory;

pub use coverage::{surface_coverage, surface_coverage_brute_force, CoverageGrid};
pub use image::psnr;
pub use trajectory::{
    normalize_trajectory, rotation_distance, rotation_distances, translation_distance,
    translation_distances, NormalizedTrajectory,
};

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum MetricsError {
    #[error("trajectory lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("image shapes differ: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(u32, u32, u32, u32),
}
