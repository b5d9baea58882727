//! Pinhole camera model, rigid camera poses, trajectories and focal recovery.
//!
//! Conventions: right-handed camera frame looking down +Z with x to the right
//! and y pointing down. Poses are stored camera-to-world.

mod camera;
mod focal;
mod pose;
mod trajectory;

pub use camera::{project, unproject, CameraIntrinsics, Projection};
pub use focal::{
    estimate_focal_weiszfeld, estimate_focal_weiszfeld_traced, focal_objective, FocalEstimate,
    WeiszfeldOptions,
};
pub use pose::{interpolate_poses, Pose};
pub use trajectory::Trajectory;

/// Camera-frame depths at or below this are treated as behind the camera.
pub const EPS_Z: f64 = 1e-9;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("rotation is not orthonormal with det +1 (max deviation {0:e})")]
    InvalidRotation(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("depth must be positive, got {0}")]
    InvalidDepth(f64),
    #[error("interpolation needs at least 2 poses, got {0}")]
    InvalidCount(usize),
    #[error("trajectory must contain at least one pose")]
    EmptyTrajectory,
    #[error("point map has no usable pixels")]
    DegeneratePointMap,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("trajectory file: {0}")]
    Format(String),
}
