//! Z-buffer point splatting.
//!
//! Each point covers the square of pixels within Chebyshev distance
//! `splat_radius_px` of the pixel it projects into. Per pixel the nearest
//! point wins; depths within [`DEPTH_TIE_EPS`] of the current winner do not
//! displace it, so ties go to the lowest point index. No blending.

use rayon::prelude::*;

use crate::geometry::{project, CameraIntrinsics, Pose, Trajectory};
use crate::image::{u8_to_channel, DepthMap, HoleMask, RgbImage};
use crate::pointcloud::ColoredPointCloud;

pub const DEPTH_TIE_EPS: f64 = 1e-12;

/// Default splat footprint radius in pixels.
pub const DEFAULT_SPLAT_RADIUS: u32 = 1;

/// Rendered frame: colors, depth (`+∞` where uncovered) and hole mask.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub rgb: RgbImage,
    pub depth: DepthMap,
    pub mask: HoleMask,
}

impl RenderOutput {
    pub fn width(&self) -> u32 {
        self.rgb.width()
    }

    pub fn height(&self) -> u32 {
        self.rgb.height()
    }

    pub fn hole_ratio(&self) -> f64 {
        hole_ratio(&self.mask)
    }

    /// Checks that mask = 1 exactly where depth is `+∞` and that covered
    /// depths are positive.
    pub fn is_consistent(&self) -> bool {
        let dims = (self.width(), self.height());
        dims == (self.depth.width(), self.depth.height())
            && dims == (self.mask.width(), self.mask.height())
            && self
                .depth
                .values()
                .iter()
                .zip(self.mask.values())
                .all(|(&d, &m)| if m == 1 { d == f32::INFINITY } else { d.is_finite() && d > 0.0 })
    }

    pub fn bit_eq(&self, other: &RenderOutput) -> bool {
        self.rgb.bit_eq(&other.rgb) && self.depth.bit_eq(&other.depth) && self.mask == other.mask
    }
}

pub fn render(
    cloud: &ColoredPointCloud,
    pose: &Pose,
    k: &CameraIntrinsics,
    splat_radius_px: u32,
) -> RenderOutput {
    let (w, h) = (k.width as usize, k.height as usize);
    let mut zbuf = vec![f64::INFINITY; w * h];
    let mut owner = vec![u32::MAX; w * h];
    let r = splat_radius_px as i64;

    for (idx, p) in cloud.positions().iter().enumerate() {
        let Some(proj) = project(p, pose, k) else {
            continue;
        };
        let (px, py) = proj.pixel();
        let (px, py) = (px as i64, py as i64);
        let x0 = (px - r).max(0) as usize;
        let x1 = (px + r).min(w as i64 - 1) as usize;
        let y0 = (py - r).max(0) as usize;
        let y1 = (py + r).min(h as i64 - 1) as usize;
        for y in y0..=y1 {
            let row = y * w;
            for x in x0..=x1 {
                let slot = row + x;
                if proj.depth < zbuf[slot] - DEPTH_TIE_EPS {
                    zbuf[slot] = proj.depth;
                    owner[slot] = idx as u32;
                }
            }
        }
    }

    let colors = cloud.colors();
    let pixels = owner
        .iter()
        .map(|&o| {
            if o == u32::MAX {
                [0.0; 3]
            } else {
                colors[o as usize].map(u8_to_channel)
            }
        })
        .collect();
    let depth: Vec<f32> = zbuf.iter().map(|&z| z as f32).collect();
    let mask: Vec<u8> = owner.iter().map(|&o| (o == u32::MAX) as u8).collect();
    RenderOutput {
        rgb: RgbImage::from_pixels(k.width, k.height, pixels).expect("sized from intrinsics"),
        depth: DepthMap::from_values(k.width, k.height, depth).expect("sized from intrinsics"),
        mask: HoleMask::from_values(k.width, k.height, mask).expect("sized from intrinsics"),
    }
}

/// Renders every pose of `traj`, in order. Frames are rendered in parallel;
/// each frame is identical to a sequential [`render`] call.
pub fn render_trajectory(
    cloud: &ColoredPointCloud,
    traj: &Trajectory,
    splat_radius_px: u32,
) -> Vec<RenderOutput> {
    traj.poses()
        .par_iter()
        .map(|pose| render(cloud, pose, traj.intrinsics(), splat_radius_px))
        .collect()
}

/// Fraction of hole pixels, `sum(M) / (W·H)`.
pub fn hole_ratio(mask: &HoleMask) -> f64 {
    let total = mask.width() as usize * mask.height() as usize;
    if total == 0 {
        return 0.0;
    }
    mask.hole_count() as f64 / total as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Point3;

    fn k100() -> CameraIntrinsics {
        CameraIntrinsics::centered(100.0, 100, 100).unwrap()
    }

    #[test]
    fn empty_cloud_is_all_holes() {
        let r = render(&ColoredPointCloud::empty(), &Pose::identity(), &k100(), 1);
        assert_eq!(r.mask, HoleMask::all_holes(100, 100));
        assert!(r.depth.values().iter().all(|d| *d == f32::INFINITY));
        assert!(r.rgb.pixels().iter().all(|p| *p == [0.0; 3]));
        assert!(r.is_consistent());
        assert_eq!(r.hole_ratio(), 1.0);
    }

    #[test]
    fn single_point_single_pixel() {
        let c = ColoredPointCloud::new(vec![Point3::new(0.0, 0.0, 2.0)], vec![[255, 0, 0]], None).unwrap();
        let r = render(&c, &Pose::identity(), &k100(), 0);
        assert_eq!(r.mask.hole_count(), 100 * 100 - 1);
        assert!(!r.mask.is_hole(50, 50));
        assert_eq!(r.depth.get(50, 50), 2.0);
        assert_eq!(r.rgb.get(50, 50), [1.0, 0.0, 0.0]);

        let r1 = render(&c, &Pose::identity(), &k100(), 1);
        assert_eq!(r1.mask.hole_count(), 100 * 100 - 9);
        assert!(!r1.mask.is_hole(49, 51));
    }

    #[test]
    fn splat_clipped_at_border() {
        let c = ColoredPointCloud::new(vec![Point3::new(-0.499, -0.499, 1.0)], vec![[9; 3]], None).unwrap();
        let r = render(&c, &Pose::identity(), &k100(), 2);
        // projects to pixel (0, 0); only the in-image quarter of the 5x5 square
        assert_eq!(r.mask.hole_count(), 100 * 100 - 9);
    }

    #[test]
    fn nearest_wins_and_ties_keep_lowest_index() {
        let c = ColoredPointCloud::new(
            vec![
                Point3::new(0.0, 0.0, 3.0),
                Point3::new(0.0, 0.0, 2.0),
                Point3::new(0.0, 0.0, 2.0 + 1e-13),
                Point3::new(0.0, 0.0, 2.0),
            ],
            vec![[1; 3], [2; 3], [3; 3], [4; 3]],
            None,
        )
        .unwrap();
        let r = render(&c, &Pose::identity(), &k100(), 0);
        assert_eq!(r.rgb.get(50, 50), [2.0 / 255.0; 3]);
    }

    #[test]
    fn hole_ratio_examples() {
        assert_eq!(hole_ratio(&HoleMask::no_holes(3, 3)), 0.0);
        assert_eq!(hole_ratio(&HoleMask::all_holes(3, 3)), 1.0);
        assert_eq!(hole_ratio(&HoleMask::from_values(2, 2, vec![1, 0, 0, 1]).unwrap()), 0.5);
    }

    #[test]
    fn trajectory_matches_per_pose_render() {
        let c = ColoredPointCloud::new(
            vec![Point3::new(0.1, 0.0, 2.0), Point3::new(-0.2, 0.1, 3.0)],
            vec![[10; 3], [20; 3]],
            None,
        )
        .unwrap();
        let k = k100();
        let single = Trajectory::new(vec![Pose::identity()], k).unwrap();
        let out = render_trajectory(&c, &single, 1);
        assert_eq!(out.len(), 1);
        assert!(out[0].bit_eq(&render(&c, &Pose::identity(), &k, 1)));

        let repeated = Trajectory::new(vec![Pose::identity(); 6], k).unwrap();
        let out = render_trajectory(&c, &repeated, 1);
        assert!(out.windows(2).all(|w| w[0].bit_eq(&w[1])));
    }
}
