use nalgebra::Point3;

use super::{CloudError, Rgb8};
use crate::geometry::CameraIntrinsics;
use crate::image::{channel_to_u8, DepthMap, RgbImage};

/// H×W grid of camera-frame points with per-pixel confidence and color,
/// stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointMap {
    width: u32,
    height: u32,
    points: Vec<Point3<f64>>,
    confidence: Vec<f64>,
    colors: Vec<Rgb8>,
}

impl PointMap {
    pub fn new(
        width: u32,
        height: u32,
        points: Vec<Point3<f64>>,
        confidence: Vec<f64>,
        colors: Vec<Rgb8>,
    ) -> Result<Self, CloudError> {
        let n = width as usize * height as usize;
        if points.len() != n || confidence.len() != n || colors.len() != n {
            return Err(CloudError::ShapeMismatch(format!(
                "point map {width}x{height} needs {n} entries, got points={} confidence={} colors={}",
                points.len(),
                confidence.len(),
                colors.len()
            )));
        }
        if let Some(c) = confidence.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return Err(CloudError::Invalid(format!("confidence {c} is not finite and >= 0")));
        }
        Ok(Self {
            width,
            height,
            points,
            confidence,
            colors,
        })
    }

    /// Back-projects a depth map through pixel centers. Pixels without finite
    /// positive depth get confidence 0.
    pub fn from_depth(depth: &DepthMap, rgb: &RgbImage, k: &CameraIntrinsics) -> Result<Self, CloudError> {
        let (w, h) = (depth.width(), depth.height());
        if (rgb.width(), rgb.height()) != (w, h) || (k.width, k.height) != (w, h) {
            return Err(CloudError::ShapeMismatch(format!(
                "depth {w}x{h}, rgb {}x{}, camera {}x{}",
                rgb.width(),
                rgb.height(),
                k.width,
                k.height
            )));
        }
        let n = w as usize * h as usize;
        let mut points = Vec::with_capacity(n);
        let mut confidence = Vec::with_capacity(n);
        for j in 0..h {
            for i in 0..w {
                let d = depth.get(i, j) as f64;
                if d.is_finite() && d > 0.0 {
                    points.push(Point3::from(k.ray(i as f64 + 0.5, j as f64 + 0.5) * d));
                    confidence.push(1.0);
                } else {
                    points.push(Point3::origin());
                    confidence.push(0.0);
                }
            }
        }
        let colors = rgb.pixels().iter().map(|p| p.map(channel_to_u8)).collect();
        Self::new(w, h, points, confidence, colors)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn points(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn confidence(&self) -> &[f64] {
        &self.confidence
    }

    pub fn colors(&self) -> &[Rgb8] {
        &self.colors
    }

    fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn point_at(&self, x: u32, y: u32) -> Point3<f64> {
        self.points[self.index(x, y)]
    }

    pub fn confidence_at(&self, x: u32, y: u32) -> f64 {
        self.confidence[self.index(x, y)]
    }
}
