//! Geometric and planning core for point-cloud-conditioned novel view synthesis.
//!
//! The pipeline is: ingest point maps into a [`ColoredPointCloud`], render it
//! with a z-buffer point splatter to get frames, depth and hole masks, plan a
//! next-best-view camera path over a spherical search space, hand each rendered
//! segment to a [`ViewCompleter`](completer::ViewCompleter) and fuse the
//! completed views back into the cloud.

pub mod completer;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod planner;
pub mod pointcloud;
pub mod renderer;

pub use geometry::{CameraIntrinsics, GeometryError, Pose, Trajectory};
pub use image::{DepthMap, HoleMask, RgbImage};
pub use pointcloud::{ColoredPointCloud, PointMap, SyntheticScene};
pub use renderer::RenderOutput;
