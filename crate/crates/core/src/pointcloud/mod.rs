//! Point maps, colored point clouds, fusion of completed views, synthetic
//! test scenes and PLY I/O.

mod cloud;
mod fusion;
pub mod ply;
mod pointmap;
pub mod scene;

pub use cloud::{cloud_from_pointmaps, ColoredPointCloud};
pub use fusion::{fuse_novel_view, FuseOptions};
pub use pointmap::PointMap;
pub use scene::{make_synthetic_scene, SceneRecipe, Surface, SyntheticScene, Texture};

/// 8-bit RGB; channel value c stands for c / 255 in [0, 1].
pub type Rgb8 = [u8; 3];

#[derive(thiserror::Error, Debug)]
pub enum CloudError {
    #[error("no point maps given")]
    EmptyInput,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid point cloud: {0}")]
    Invalid(String),
    #[error("unknown scene recipe '{0}' (expected box_room, occluder or spheres)")]
    UnknownRecipe(String),
    #[error("invalid scene recipe: {0}")]
    InvalidRecipe(String),
    #[error("ply: {0}")]
    Ply(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
