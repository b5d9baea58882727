use std::collections::HashSet;

use nalgebra::Point3;

use super::{CloudError, ColoredPointCloud};
use crate::geometry::{unproject, CameraIntrinsics, Pose};
use crate::image::{channel_to_u8, DepthMap, HoleMask, RgbImage};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FuseOptions {
    /// Voxel edge length for deduplication of added points; 0 disables it.
    pub voxel_rho: f64,
}

/// Confidence assigned to fused points when the cloud tracks confidences.
const FUSED_CONFIDENCE: f32 = 1.0;

fn voxel_key(p: &Point3<f64>, rho: f64) -> [i64; 3] {
    [
        (p.x / rho).floor() as i64,
        (p.y / rho).floor() as i64,
        (p.z / rho).floor() as i64,
    ]
}

/// Back-projects the hole pixels (mask = 1) of a completed view and appends
/// them to `cloud`. Covered pixels are never added. Hole pixels whose depth is
/// not finite and positive (the completed view saw nothing there) are skipped.
///
/// With `voxel_rho > 0`, a new point is dropped when its voxel already holds a
/// point; existing points are never removed.
pub fn fuse_novel_view(
    cloud: &ColoredPointCloud,
    frame: &RgbImage,
    depth: &DepthMap,
    mask: &HoleMask,
    pose: &Pose,
    k: &CameraIntrinsics,
    opts: FuseOptions,
) -> Result<ColoredPointCloud, CloudError> {
    let dims = (k.width, k.height);
    let shapes = [
        ("frame", (frame.width(), frame.height())),
        ("depth", (depth.width(), depth.height())),
        ("mask", (mask.width(), mask.height())),
    ];
    for (name, s) in shapes {
        if s != dims {
            return Err(CloudError::ShapeMismatch(format!(
                "{name} is {}x{}, camera is {}x{}",
                s.0, s.1, dims.0, dims.1
            )));
        }
    }

    let mut out = cloud.clone();
    let dedup = opts.voxel_rho > 0.0;
    let mut occupied: HashSet<[i64; 3]> = if dedup {
        cloud
            .positions()
            .iter()
            .map(|p| voxel_key(p, opts.voxel_rho))
            .collect()
    } else {
        HashSet::new()
    };

    for j in 0..k.height {
        for i in 0..k.width {
            if !mask.is_hole(i, j) {
                continue;
            }
            let d = depth.get(i, j) as f64;
            if !(d.is_finite() && d > 0.0) {
                continue;
            }
            let p = unproject(i as f64 + 0.5, j as f64 + 0.5, d, pose, k)
                .expect("depth checked positive");
            if dedup && !occupied.insert(voxel_key(&p, opts.voxel_rho)) {
                continue;
            }
            out.push(p, frame.get(i, j).map(channel_to_u8), FUSED_CONFIDENCE);
        }
    }
    Ok(out)
}
