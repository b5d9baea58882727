use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::geometry::{unproject, CameraIntrinsics, Pose, Trajectory};
use crate::renderer::RenderOutput;

/// The quarter sphere of camera positions around the scene center.
///
/// Angles are relative to the reference camera: azimuth turns right (+) or
/// left (-) about the reference up axis, elevation rises toward it. Every
/// grid pose looks at `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub center: Point3<f64>,
    pub radius: f64,
    pub azimuth_range: (f64, f64),
    pub elevation_range: (f64, f64),
    pub grid_azimuth: usize,
    pub grid_elevation: usize,
    /// Reference forward, right and up directions in world coordinates.
    pub forward: Vector3<f64>,
    pub right: Vector3<f64>,
    pub up: Vector3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPose {
    pub azimuth: f64,
    pub elevation: f64,
    pub pose: Pose,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Centers the sphere on the scene point seen through the principal point,
/// with radius equal to its depth. When that pixel is a hole the radius falls
/// back to the median finite depth, still along the principal ray.
pub fn build_search_space(
    reference_render: &RenderOutput,
    reference_pose: &Pose,
    k: &CameraIntrinsics,
    grid_azimuth: usize,
    grid_elevation: usize,
) -> Result<SearchSpace, PlanError> {
    if grid_azimuth == 0 || grid_elevation == 0 {
        return Err(PlanError::InvalidConfig("grid dimensions must be positive".into()));
    }
    let i = (k.principal_x.floor().max(0.0) as u32).min(k.width - 1);
    let j = (k.principal_y.floor().max(0.0) as u32).min(k.height - 1);
    let d = reference_render.depth.get(i, j);
    let radius = if !reference_render.mask.is_hole(i, j) && d.is_finite() && d > 0.0 {
        d as f64
    } else {
        let finite: Vec<f64> = reference_render
            .depth
            .values()
            .iter()
            .filter(|z| z.is_finite() && **z > 0.0)
            .map(|&z| z as f64)
            .collect();
        if finite.is_empty() {
            return Err(PlanError::DegenerateRender);
        }
        median(finite)
    };
    let center = unproject(k.principal_x, k.principal_y, radius, reference_pose, k)?;
    let r = reference_pose.rotation();
    Ok(SearchSpace {
        center,
        radius,
        azimuth_range: (-FRAC_PI_2, FRAC_PI_2),
        elevation_range: (0.0, FRAC_PI_2),
        grid_azimuth,
        grid_elevation,
        forward: r.column(2).into_owned(),
        right: r.column(0).into_owned(),
        up: -r.column(1).into_owned(),
    })
}

impl SearchSpace {
    /// Same sphere restricted to another azimuth interval (radians).
    pub fn with_azimuth_range(&self, lo: f64, hi: f64) -> Self {
        Self {
            azimuth_range: (lo, hi),
            ..self.clone()
        }
    }

    pub fn left_half(&self) -> Self {
        self.with_azimuth_range(-FRAC_PI_2, 0.0)
    }

    pub fn right_half(&self) -> Self {
        self.with_azimuth_range(0.0, FRAC_PI_2)
    }

    /// Unit vector from the center toward the camera at these angles.
    pub fn direction(&self, azimuth: f64, elevation: f64) -> Vector3<f64> {
        let (sa, ca) = azimuth.sin_cos();
        let (se, ce) = elevation.sin_cos();
        (-ce * ca * self.forward + ce * sa * self.right + se * self.up).normalize()
    }

    pub fn pose_at(&self, azimuth: f64, elevation: f64) -> Result<Pose, PlanError> {
        let eye = self.center + self.radius * self.direction(azimuth, elevation);
        Ok(Pose::look_at(&eye, &self.center, &self.up)?)
    }

    /// Azimuths run over the closed interval; elevations start at the lower
    /// bound and stop one step short of the upper one, so the grid never
    /// lands on the pole where all azimuths coincide.
    pub fn azimuth_levels(&self) -> Vec<f64> {
        let (lo, hi) = self.azimuth_range;
        if self.grid_azimuth == 1 {
            return vec![0.5 * (lo + hi)];
        }
        let step = (hi - lo) / (self.grid_azimuth - 1) as f64;
        (0..self.grid_azimuth).map(|i| lo + i as f64 * step).collect()
    }

    pub fn elevation_levels(&self) -> Vec<f64> {
        let (lo, hi) = self.elevation_range;
        let step = (hi - lo) / self.grid_elevation as f64;
        (0..self.grid_elevation).map(|j| lo + j as f64 * step).collect()
    }

    /// All grid poses, elevation-major.
    pub fn grid_poses(&self) -> Result<Vec<GridPose>, PlanError> {
        let azs = self.azimuth_levels();
        let mut out = Vec::with_capacity(azs.len() * self.grid_elevation);
        for el in self.elevation_levels() {
            for &az in &azs {
                out.push(GridPose {
                    azimuth: az,
                    elevation: el,
                    pose: self.pose_at(az, el)?,
                });
            }
        }
        Ok(out)
    }

    /// Direction from the center toward a camera.
    pub fn radial(&self, pose: &Pose) -> Vector3<f64> {
        let v = pose.position() - self.center;
        let n = v.norm();
        if n > 1e-12 {
            v / n
        } else {
            -pose.forward()
        }
    }

    /// Azimuth and elevation of a camera position on (or off) the sphere.
    pub fn angles_of(&self, position: &Point3<f64>) -> (f64, f64) {
        let v = (position - self.center).normalize();
        let (f, r, u) = (-v.dot(&self.forward), v.dot(&self.right), v.dot(&self.up));
        (r.atan2(f), u.clamp(-1.0, 1.0).asin())
    }
}

fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Grid indices of the candidates around `current`.
///
/// The grid pose nearest `current` is excluded. The pool is every other grid
/// pose within `neighborhood_deg` of `current` on the sphere, widened to the
/// nearest `k` when too small. The pool is split into `k` bearing sectors
/// around `current` and poses are drawn round-robin, nearest first, so the
/// picks spread out in every direction. The result is sorted by grid index.
pub fn sample_candidate_indices(
    space: &SearchSpace,
    grid: &[GridPose],
    current: &Pose,
    k: usize,
    neighborhood_deg: f64,
) -> Result<Vec<usize>, PlanError> {
    if k == 0 {
        return Err(PlanError::InvalidConfig("K must be at least 1".into()));
    }
    let available = grid.len().saturating_sub(1);
    if k > available {
        return Err(PlanError::NotEnoughCandidates { requested: k, available });
    }
    let dc = space.radial(current);
    let dirs: Vec<Vector3<f64>> = grid.iter().map(|g| space.radial(&g.pose)).collect();
    let angles: Vec<f64> = dirs.iter().map(|d| angle_between(&dc, d)).collect();
    let nearest = (0..grid.len())
        .min_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)))
        .expect("grid is non-empty");

    let mut by_distance: Vec<usize> = (0..grid.len()).filter(|&i| i != nearest).collect();
    by_distance.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]).then(a.cmp(&b)));
    let limit = neighborhood_deg.to_radians() + 1e-12;
    let within = by_distance.iter().take_while(|&&i| angles[i] <= limit).count();
    let pool = &by_distance[..within.max(k)];

    // tangent frame at the current direction, for bearings
    let mut e_up = space.up - space.up.dot(&dc) * dc;
    if e_up.norm() < 1e-9 {
        e_up = space.forward - space.forward.dot(&dc) * dc;
    }
    let e_up = e_up.normalize();
    let e_side = e_up.cross(&dc);
    let mut sectors: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &i in pool {
        let v = dirs[i];
        let bearing = v.dot(&e_up).atan2(v.dot(&e_side)).rem_euclid(TAU);
        let s = ((bearing / TAU * k as f64) as usize).min(k - 1);
        sectors[s].push(i);
    }

    let mut picked = Vec::with_capacity(k);
    let mut round = 0;
    while picked.len() < k {
        for sector in &sectors {
            if let Some(&i) = sector.get(round) {
                picked.push(i);
                if picked.len() == k {
                    break;
                }
            }
        }
        round += 1;
    }
    picked.sort_unstable();
    Ok(picked)
}

pub fn sample_candidates(
    space: &SearchSpace,
    current: &Pose,
    k: usize,
    neighborhood_deg: f64,
) -> Result<Vec<Pose>, PlanError> {
    let grid = space.grid_poses()?;
    let idx = sample_candidate_indices(space, &grid, current, k, neighborhood_deg)?;
    Ok(idx.into_iter().map(|i| grid[i].pose).collect())
}

/// Orbits the reference camera about the vertical axis through the center in
/// `steps` equal increments of `step_deg` (positive turns right), looking at
/// the center throughout. Pose `i` is rotated by `(i + 1) * step_deg`.
pub fn circular_baseline_trajectory(
    reference_pose: &Pose,
    space: &SearchSpace,
    k: &CameraIntrinsics,
    steps: usize,
    step_deg: f64,
) -> Result<Trajectory, PlanError> {
    if steps == 0 {
        return Err(PlanError::InvalidConfig("baseline needs at least one step".into()));
    }
    let v = reference_pose.position() - space.center;
    let (vf, vr, vu) = (v.dot(&space.forward), v.dot(&space.right), v.dot(&space.up));
    let poses = (1..=steps)
        .map(|i| {
            let (s, c) = (i as f64 * step_deg).to_radians().sin_cos();
            let offset = (vf * c + vr * s) * space.forward + (vr * c - vf * s) * space.right + vu * space.up;
            Ok(Pose::look_at(&(space.center + offset), &space.center, &space.up)?)
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    Ok(Trajectory::new(poses, *k)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{DepthMap, HoleMask, RgbImage};
    use proptest::prelude::*;

    fn k() -> CameraIntrinsics {
        CameraIntrinsics::centered(50.0, 32, 24).unwrap()
    }

    fn flat_render(depth: f32) -> RenderOutput {
        let k = k();
        RenderOutput {
            rgb: RgbImage::black(k.width, k.height),
            depth: DepthMap::from_values(k.width, k.height, vec![depth; k.pixel_count()]).unwrap(),
            mask: HoleMask::no_holes(k.width, k.height),
        }
    }

    fn space() -> SearchSpace {
        build_search_space(&flat_render(3.0), &Pose::identity(), &k(), 12, 4).unwrap()
    }

    #[test]
    fn radius_is_center_depth() {
        let s = space();
        assert_eq!(s.radius, 3.0);
        assert!((s.center - Point3::new(0.0, 0.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn median_fallback_when_center_is_hole() {
        let k = CameraIntrinsics::centered(10.0, 3, 3).unwrap();
        let vals = vec![1.0, 2.0, f32::INFINITY, 3.0, f32::INFINITY, 4.0, 5.0, f32::INFINITY, f32::INFINITY];
        let mask: Vec<u8> = vals.iter().map(|v| u8::from(!v.is_finite())).collect();
        let render = RenderOutput {
            rgb: RgbImage::black(3, 3),
            depth: DepthMap::from_values(3, 3, vals).unwrap(),
            mask: HoleMask::from_values(3, 3, mask).unwrap(),
        };
        let s = build_search_space(&render, &Pose::identity(), &k, 4, 2).unwrap();
        assert_eq!(s.radius, 3.0);
    }

    #[test]
    fn all_holes_is_degenerate() {
        let k = k();
        let render = RenderOutput {
            rgb: RgbImage::black(k.width, k.height),
            depth: DepthMap::empty(k.width, k.height),
            mask: HoleMask::all_holes(k.width, k.height),
        };
        assert!(matches!(
            build_search_space(&render, &Pose::identity(), &k, 12, 4),
            Err(PlanError::DegenerateRender)
        ));
    }

    #[test]
    fn grid_on_sphere_and_looking_at_center() {
        let s = space();
        let grid = s.grid_poses().unwrap();
        assert_eq!(grid.len(), 48);
        for g in &grid {
            assert!(((g.pose.position() - s.center).norm() - s.radius).abs() < 1e-9);
            let to_center = (s.center - g.pose.position()).normalize();
            assert!((g.pose.forward() - to_center).norm() < 1e-9);
            assert!(g.pose.orthonormality_error() < 1e-9);
            let (az, el) = s.angles_of(&g.pose.position());
            assert!((az - g.azimuth).abs() < 1e-9 && (el - g.elevation).abs() < 1e-9);
        }
        // the (0, 0) node reproduces the reference camera
        let g0 = grid.iter().find(|g| g.azimuth.abs() < 1e-12 && g.elevation == 0.0);
        assert!(g0.is_none(), "12 azimuths over a closed interval skip zero");
        let p = s.pose_at(0.0, 0.0).unwrap();
        assert!(p.approx_eq(&Pose::identity(), 1e-12));
    }

    #[test]
    fn candidates_exclude_current_and_are_deterministic() {
        let s = space();
        let grid = s.grid_poses().unwrap();
        let current = grid[17].pose;
        let a = sample_candidate_indices(&s, &grid, &current, 5, 30.0).unwrap();
        let b = sample_candidate_indices(&s, &grid, &current, 5, 30.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert!(!a.contains(&17));
        let mut dedup = a.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 5);
        for p in sample_candidates(&s, &current, 5, 30.0).unwrap() {
            assert!(((p.position() - s.center).norm() - s.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn candidates_surround_current() {
        let s = space();
        let grid = s.grid_poses().unwrap();
        // an interior node: picks should not all sit on one side in azimuth
        let current = grid[12 + 5].pose;
        let idx = sample_candidate_indices(&s, &grid, &current, 4, 40.0).unwrap();
        let az0 = grid[17].azimuth;
        assert!(idx.iter().any(|&i| grid[i].azimuth < az0));
        assert!(idx.iter().any(|&i| grid[i].azimuth > az0));
    }

    #[test]
    fn too_many_candidates() {
        let s = space().with_azimuth_range(-0.5, 0.5);
        let s = SearchSpace {
            grid_azimuth: 2,
            grid_elevation: 2,
            ..s
        };
        let grid = s.grid_poses().unwrap();
        assert!(matches!(
            sample_candidate_indices(&s, &grid, &Pose::identity(), 4, 30.0),
            Err(PlanError::NotEnoughCandidates { requested: 4, available: 3 })
        ));
        assert_eq!(sample_candidate_indices(&s, &grid, &Pose::identity(), 3, 1.0).unwrap().len(), 3);
    }

    #[test]
    fn baseline_sixty_degrees() {
        let s = space();
        let traj = circular_baseline_trajectory(&Pose::identity(), &s, &k(), 3, 20.0).unwrap();
        assert_eq!(traj.len(), 3);
        let (az, el) = s.angles_of(&traj.last().position());
        assert!((az - 60f64.to_radians()).abs() < 1e-9);
        assert!(el.abs() < 1e-9);
        let left = circular_baseline_trajectory(&Pose::identity(), &s, &k(), 2, -20.0).unwrap();
        assert!((s.angles_of(&left.last().position()).0 + 40f64.to_radians()).abs() < 1e-9);
    }

    #[test]
    fn baseline_zero_step_is_reference() {
        let s = space();
        let traj = circular_baseline_trajectory(&Pose::identity(), &s, &k(), 3, 0.0).unwrap();
        assert!(traj.poses().iter().all(|p| p.approx_eq(&Pose::identity(), 1e-12)));
    }

    proptest! {
        #[test]
        fn baseline_preserves_radius(steps in 1usize..8, step in -45.0f64..45.0) {
            let s = space();
            let traj = circular_baseline_trajectory(&Pose::identity(), &s, &k(), steps, step).unwrap();
            for p in traj.poses() {
                prop_assert!(((p.position() - s.center).norm() - s.radius).abs() < 1e-9);
            }
        }

        #[test]
        fn candidates_valid_from_any_node(node in 0usize..48, kk in 1usize..10, nb in 5.0f64..90.0) {
            let s = space();
            let grid = s.grid_poses().unwrap();
            let idx = sample_candidate_indices(&s, &grid, &grid[node].pose, kk, nb).unwrap();
            prop_assert_eq!(idx.len(), kk);
            prop_assert!(!idx.contains(&node));
            prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
