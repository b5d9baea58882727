use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Pose, EPS_Z};

/// Square-pixel pinhole intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub focal_px: f64,
    #[serde(rename = "cx")]
    pub principal_x: f64,
    #[serde(rename = "cy")]
    pub principal_y: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    /// Intrinsics with the principal point at the image center.
    pub fn centered(focal_px: f64, width: u32, height: u32) -> Result<Self, GeometryError> {
        Self::new(
            focal_px,
            width as f64 / 2.0,
            height as f64 / 2.0,
            width,
            height,
        )
    }

    pub fn new(
        focal_px: f64,
        principal_x: f64,
        principal_y: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, GeometryError> {
        let k = Self {
            focal_px,
            principal_x,
            principal_y,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.focal_px.is_finite() && self.focal_px > 0.0) {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "focal_px must be positive, got {}",
                self.focal_px
            )));
        }
        if !(self.principal_x.is_finite() && self.principal_y.is_finite()) {
            return Err(GeometryError::NonFinite("principal point"));
        }
        if self.width < 2 || self.height < 2 {
            return Err(GeometryError::InvalidIntrinsics(format!(
                "image must be at least 2x2, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width as usize * self.height as usize
    }

    /// Camera-frame ray direction (z = 1) through image coordinate (u, v).
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new(
            (u - self.principal_x) / self.focal_px,
            (v - self.principal_y) / self.focal_px,
            1.0,
        )
    }
}

/// A point projected into the image: continuous pixel coordinates plus
/// camera-frame depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub depth: f64,
}

impl Projection {
    /// Integer pixel containing the projection. Pixel (i, j) spans
    /// [i, i+1) x [j, j+1).
    pub fn pixel(&self) -> (u32, u32) {
        (self.u.floor() as u32, self.v.floor() as u32)
    }
}

/// Projects a world point. Returns `None` when the point is behind the camera
/// or lands outside the image.
pub fn project(point: &Point3<f64>, pose: &Pose, k: &CameraIntrinsics) -> Option<Projection> {
    let pc = pose.world_to_camera(point);
    if !(pc.z > EPS_Z) {
        return None;
    }
    let u = k.focal_px * pc.x / pc.z + k.principal_x;
    let v = k.focal_px * pc.y / pc.z + k.principal_y;
    if !(u >= 0.0 && u < k.width as f64 && v >= 0.0 && v < k.height as f64) {
        return None;
    }
    Some(Projection { u, v, depth: pc.z })
}

/// Lifts image coordinate (u, v) at camera-frame depth `depth` to world space.
pub fn unproject(
    u: f64,
    v: f64,
    depth: f64,
    pose: &Pose,
    k: &CameraIntrinsics,
) -> Result<Point3<f64>, GeometryError> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(GeometryError::InvalidDepth(depth));
    }
    let pc = Point3::from(k.ray(u, v) * depth);
    Ok(pose.camera_to_world(&pc))
}
