//! Procedural test worlds built from textured axis-aligned rectangles and
//! spheres. The analytic description doubles as ground truth: it can be
//! ray-cast for exact renders, measured for point-to-surface distance, and
//! sampled for coverage scoring.

use std::path::Path;

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CloudError, ColoredPointCloud, Rgb8};
use crate::geometry::{CameraIntrinsics, Pose};
use crate::image::{u8_to_channel, DepthMap, HoleMask, RgbImage};
use crate::renderer::RenderOutput;

/// Upper bound on generated points, to fail fast on absurd densities.
const MAX_POINTS: f64 = 2.0e7;

/// Smooth procedural color: `base + amplitude * sin(frequency * s + phase_c)`
/// with `s = x + 0.7 y + 1.3 z` and a 120° phase shift per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Texture {
    pub base: [f64; 3],
    pub amplitude: f64,
    pub frequency: f64,
}

impl Texture {
    pub fn color_at(&self, p: &Point3<f64>) -> Rgb8 {
        let s = p.x + 0.7 * p.y + 1.3 * p.z;
        let mut out = [0u8; 3];
        for (c, o) in out.iter_mut().enumerate() {
            let phase = c as f64 * std::f64::consts::TAU / 3.0;
            let v = self.base[c] + self.amplitude * (self.frequency * s + phase).sin();
            *o = (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Surface {
    /// Rectangle in the plane `coord[axis] = offset`; `lo`/`hi` bound the two
    /// remaining axes in increasing axis order.
    Rect {
        axis: usize,
        offset: f64,
        lo: [f64; 2],
        hi: [f64; 2],
        texture: Texture,
    },
    Sphere {
        center: [f64; 3],
        radius: f64,
        texture: Texture,
    },
}

fn in_plane_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

const RAY_EPS: f64 = 1e-9;

impl Surface {
    pub fn texture(&self) -> &Texture {
        match self {
            Surface::Rect { texture, .. } | Surface::Sphere { texture, .. } => texture,
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            Surface::Rect { lo, hi, .. } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Surface::Sphere { radius, .. } => 4.0 * std::f64::consts::PI * radius * radius,
        }
    }

    pub fn distance(&self, p: &Point3<f64>) -> f64 {
        match self {
            Surface::Rect {
                axis, offset, lo, hi, ..
            } => {
                let (a, b) = in_plane_axes(*axis);
                let mut q = *p;
                q[*axis] = *offset;
                q[a] = q[a].clamp(lo[0], hi[0]);
                q[b] = q[b].clamp(lo[1], hi[1]);
                (p - q).norm()
            }
            Surface::Sphere { center, radius, .. } => {
                ((p - Point3::from(*center)).norm() - radius).abs()
            }
        }
    }

    /// Smallest ray parameter t > 0 with `origin + t * dir` on the surface.
    pub fn intersect(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        match self {
            Surface::Rect {
                axis, offset, lo, hi, ..
            } => {
                let d = dir[*axis];
                if d.abs() < 1e-15 {
                    return None;
                }
                let t = (offset - origin[*axis]) / d;
                if !(t > RAY_EPS) {
                    return None;
                }
                let hit = origin + dir * t;
                let (a, b) = in_plane_axes(*axis);
                let inside = hit[a] >= lo[0] && hit[a] <= hi[0] && hit[b] >= lo[1] && hit[b] <= hi[1];
                inside.then_some(t)
            }
            Surface::Sphere { center, radius, .. } => {
                let oc = origin - Point3::from(*center);
                let a = dir.dot(dir);
                let half_b = oc.dot(dir);
                let c = oc.dot(&oc) - radius * radius;
                let disc = half_b * half_b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let sq = disc.sqrt();
                let near = (-half_b - sq) / a;
                if near > RAY_EPS {
                    return Some(near);
                }
                let far = (-half_b + sq) / a;
                (far > RAY_EPS).then_some(far)
            }
        }
    }

    /// Maps (s, t) in [0,1)² to a point on the surface, uniform in area.
    fn point_from_unit(&self, s: f64, t: f64) -> Point3<f64> {
        match self {
            Surface::Rect {
                axis, offset, lo, hi, ..
            } => {
                let (a, b) = in_plane_axes(*axis);
                let mut q = Point3::origin();
                q[*axis] = *offset;
                q[a] = lo[0] + s * (hi[0] - lo[0]);
                q[b] = lo[1] + t * (hi[1] - lo[1]);
                q
            }
            Surface::Sphere { center, radius, .. } => {
                let z = 1.0 - 2.0 * s;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = std::f64::consts::TAU * t;
                Point3::from(*center) + Vector3::new(r * phi.cos(), r * phi.sin(), z) * *radius
            }
        }
    }

    fn sample_into(&self, density: f64, rng: &mut ChaCha8Rng, out: &mut Vec<Point3<f64>>) {
        match self {
            Surface::Rect { lo, hi, .. } => {
                // one jittered sample per cell, cells no larger than the pitch
                let pitch = 1.0 / density.sqrt();
                let nu = ((hi[0] - lo[0]) / pitch).ceil().max(1.0) as usize;
                let nv = ((hi[1] - lo[1]) / pitch).ceil().max(1.0) as usize;
                for iv in 0..nv {
                    for iu in 0..nu {
                        let s = (iu as f64 + rng.random::<f64>()) / nu as f64;
                        let t = (iv as f64 + rng.random::<f64>()) / nv as f64;
                        out.push(self.point_from_unit(s, t));
                    }
                }
            }
            Surface::Sphere { center, radius, .. } => {
                // Fibonacci lattice under a random rotation
                let n = (self.area() * density).ceil().max(1.0) as usize;
                let rot = *Pose::random(rng, 0.0).rotation();
                let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
                let c = Point3::from(*center);
                for i in 0..n {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    let dir = rot * Vector3::new(r * phi.cos(), r * phi.sin(), z);
                    out.push(c + dir.normalize() * *radius);
                }
            }
        }
    }

    fn sample_count(&self, density: f64) -> f64 {
        match self {
            Surface::Rect { lo, hi, .. } => {
                let pitch = 1.0 / density.sqrt();
                ((hi[0] - lo[0]) / pitch).ceil().max(1.0) * ((hi[1] - lo[1]) / pitch).ceil().max(1.0)
            }
            Surface::Sphere { .. } => (self.area() * density).ceil().max(1.0),
        }
    }
}

/// Scene recipe file: `{ "recipe": name, "dimensions": [a, b, c]?, "density": d, "seed": s }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneRecipe {
    pub recipe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<[f64; 3]>,
    pub density: f64,
    pub seed: u64,
}

impl SceneRecipe {
    pub fn named(recipe: &str, density: f64, seed: u64) -> Self {
        Self {
            recipe: recipe.to_string(),
            dimensions: None,
            density,
            seed,
        }
    }
}

/// Analytic ground truth plus a point sampling of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub recipe: SceneRecipe,
    pub surfaces: Vec<Surface>,
    /// Camera pose the recipe is designed to be viewed from.
    pub reference_pose: Pose,
    pub cloud: ColoredPointCloud,
}

/// On-disk form of a scene: everything except the sampled cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDescription {
    pub recipe: SceneRecipe,
    pub reference_pose: Pose,
    pub surfaces: Vec<Surface>,
}

fn tex(base: [f64; 3], amplitude: f64, frequency: f64) -> Texture {
    Texture {
        base,
        amplitude,
        frequency,
    }
}

fn rect(axis: usize, offset: f64, lo: [f64; 2], hi: [f64; 2], texture: Texture) -> Surface {
    Surface::Rect {
        axis,
        offset,
        lo,
        hi,
        texture,
    }
}

fn recipe_surfaces(recipe: &SceneRecipe) -> Result<Vec<Surface>, CloudError> {
    let dims = |default: [f64; 3]| -> Result<[f64; 3], CloudError> {
        let d = recipe.dimensions.unwrap_or(default);
        if d.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(d)
        } else {
            Err(CloudError::InvalidRecipe(format!("dimensions must be positive, got {d:?}")))
        }
    };
    let surfaces = match recipe.recipe.as_str() {
        "box_room" => {
            // interior of a box, camera at the origin, the face behind it open
            let [w, h, d] = dims([4.0, 3.0, 5.0])?;
            let (x, y, z0, z1) = (w / 2.0, h / 2.0, -1.0, d - 1.0);
            vec![
                rect(2, z1, [-x, -y], [x, y], tex([0.55, 0.45, 0.35], 0.25, 1.3)),
                rect(0, -x, [-y, z0], [y, z1], tex([0.3, 0.5, 0.7], 0.2, 1.1)),
                rect(0, x, [-y, z0], [y, z1], tex([0.7, 0.35, 0.3], 0.2, 1.1)),
                rect(1, -y, [-x, z0], [x, z1], tex([0.8, 0.8, 0.75], 0.1, 0.9)),
                rect(1, y, [-x, z0], [x, z1], tex([0.4, 0.6, 0.3], 0.2, 1.5)),
            ]
        }
        "occluder" => {
            // closed room with a narrow panel hiding a band of the back wall
            let [w, h, d] = dims([7.0, 6.0, 4.5])?;
            let (x, y, z0) = (w / 2.0, h / 2.0, -d / 3.0);
            let front = d * 5.0 / 9.0;
            let (fx, fy) = (w / 14.0, 0.2 * h);
            vec![
                rect(2, d, [-x, -y], [x, y], tex([0.35, 0.55, 0.65], 0.3, 1.2)),
                rect(2, front, [-fx, -fy], [fx, fy], tex([0.85, 0.4, 0.2], 0.12, 2.0)),
                rect(0, -x, [-y, z0], [y, d], tex([0.3, 0.5, 0.7], 0.2, 1.1)),
                rect(0, x, [-y, z0], [y, d], tex([0.7, 0.35, 0.3], 0.2, 1.1)),
                rect(1, -y, [-x, z0], [x, d], tex([0.8, 0.8, 0.75], 0.1, 0.9)),
                rect(1, y, [-x, z0], [x, d], tex([0.4, 0.6, 0.3], 0.2, 1.5)),
                rect(2, z0, [-x, -y], [x, y], tex([0.6, 0.5, 0.6], 0.15, 1.0)),
            ]
        }
        "spheres" => {
            let [w, depth, r] = dims([6.0, 6.0, 0.6])?;
            let ground = 1.0;
            let mut s = vec![rect(
                1,
                ground,
                [-w / 2.0, 1.0],
                [w / 2.0, 1.0 + depth],
                tex([0.5, 0.5, 0.45], 0.2, 1.4),
            )];
            let balls = [
                (-0.2 * w, 0.35 * depth, 1.0, [0.8, 0.2, 0.2]),
                (0.07 * w, 0.55 * depth, 1.3, [0.2, 0.7, 0.3]),
                (0.25 * w, 0.27 * depth, 0.8, [0.25, 0.3, 0.85]),
            ];
            for (x, z, scale, base) in balls {
                let radius = r * scale;
                s.push(Surface::Sphere {
                    center: [x, ground - radius, 1.0 + z],
                    radius,
                    texture: tex(base, 0.15, 3.0),
                });
            }
            s
        }
        other => return Err(CloudError::UnknownRecipe(other.to_string())),
    };
    Ok(surfaces)
}

/// Builds a scene from a named recipe. Sampling is single-threaded and fully
/// determined by the recipe (seed included).
pub fn make_synthetic_scene(recipe: &SceneRecipe) -> Result<SyntheticScene, CloudError> {
    if !(recipe.density.is_finite() && recipe.density > 0.0) {
        return Err(CloudError::InvalidRecipe(format!(
            "density must be positive, got {}",
            recipe.density
        )));
    }
    let surfaces = recipe_surfaces(recipe)?;
    let total: f64 = surfaces.iter().map(|s| s.sample_count(recipe.density)).sum();
    if total > MAX_POINTS {
        return Err(CloudError::InvalidRecipe(format!(
            "density {} would generate {total:.0} points",
            recipe.density
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);
    let mut positions = Vec::with_capacity(total as usize);
    let mut colors = Vec::with_capacity(total as usize);
    for s in &surfaces {
        let start = positions.len();
        s.sample_into(recipe.density, &mut rng, &mut positions);
        colors.extend(positions[start..].iter().map(|p| s.texture().color_at(p)));
    }
    let cloud = ColoredPointCloud::new(positions, colors, None)?;
    Ok(SyntheticScene {
        recipe: recipe.clone(),
        surfaces,
        reference_pose: Pose::identity(),
        cloud,
    })
}

/// Nearest surface hit along a world-space ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    pub surface: usize,
    pub point: Point3<f64>,
}

impl SyntheticScene {
    pub fn description(&self) -> SceneDescription {
        SceneDescription {
            recipe: self.recipe.clone(),
            reference_pose: self.reference_pose,
            surfaces: self.surfaces.clone(),
        }
    }

    /// Rebuilds a scene from its description. The recipe is re-run to get the
    /// cloud; the stored surfaces must match what the recipe produces.
    pub fn from_description(desc: &SceneDescription) -> Result<Self, CloudError> {
        let mut scene = make_synthetic_scene(&desc.recipe)?;
        if scene.surfaces != desc.surfaces {
            return Err(CloudError::InvalidRecipe(
                "surfaces do not match the recipe they claim to come from".into(),
            ));
        }
        scene.reference_pose = desc.reference_pose;
        Ok(scene)
    }

    pub fn write_description(&self, path: &Path) -> Result<(), CloudError> {
        let s = serde_json::to_string_pretty(&self.description()).expect("scene serializes");
        std::fs::write(path, s).map_err(|source| CloudError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn read_description(path: &Path) -> Result<Self, CloudError> {
        let s = std::fs::read_to_string(path).map_err(|source| CloudError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let desc: SceneDescription = serde_json::from_str(&s)
            .map_err(|e| CloudError::InvalidRecipe(format!("{}: {e}", path.display())))?;
        Self::from_description(&desc)
    }

    pub fn distance_to_surfaces(&self, p: &Point3<f64>) -> f64 {
        self.surfaces
            .iter()
            .map(|s| s.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn raycast(&self, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        for (i, s) in self.surfaces.iter().enumerate() {
            if let Some(t) = s.intersect(origin, dir) {
                if best.is_none_or(|b| t < b.t) {
                    best = Some(RayHit {
                        t,
                        surface: i,
                        point: origin + dir * t,
                    });
                }
            }
        }
        best
    }

    /// Exact render: one ray per pixel center, colored by the surface texture.
    /// Pixels whose ray escapes the scene are holes.
    pub fn render_analytic(&self, pose: &Pose, k: &CameraIntrinsics) -> RenderOutput {
        let (w, h) = (k.width, k.height);
        let mut rgb = RgbImage::black(w, h);
        let mut depth = DepthMap::empty(w, h);
        let mut mask = HoleMask::all_holes(w, h);
        let origin = pose.position();
        for j in 0..h {
            for i in 0..w {
                // camera ray has z = 1, so the hit parameter is the camera depth
                let dir = pose.rotation() * k.ray(i as f64 + 0.5, j as f64 + 0.5);
                if let Some(hit) = self.raycast(&origin, &dir) {
                    let c = self.surfaces[hit.surface].texture().color_at(&hit.point);
                    rgb.set(i, j, c.map(u8_to_channel));
                    depth.values_mut()[(j * w + i) as usize] = hit.t as f32;
                    mask.set(i, j, false);
                }
            }
        }
        RenderOutput { rgb, depth, mask }
    }

    /// `count` quasi-uniform points over all surfaces, allotted by area.
    /// Uses a Halton (2, 3) sequence with a seeded random shift.
    pub fn surface_samples(&self, count: usize, seed: u64) -> Vec<Point3<f64>> {
        let areas: Vec<f64> = self.surfaces.iter().map(Surface::area).collect();
        let total: f64 = areas.iter().sum();
        // largest-remainder apportionment
        let quotas: Vec<f64> = areas.iter().map(|a| a / total * count as f64).collect();
        let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut rest = count - alloc.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if rest == 0 {
                break;
            }
            alloc[i] += 1;
            rest -= 1;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for (s, &n) in self.surfaces.iter().zip(&alloc) {
            let (shift_s, shift_t): (f64, f64) = (rng.random(), rng.random());
            for i in 0..n {
                let a = (halton(i as u64 + 1, 2) + shift_s).fract();
                let b = (halton(i as u64 + 1, 3) + shift_t).fract();
                out.push(s.point_from_unit(a, b));
            }
        }
        out
    }
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renderer::render;

    #[test]
    fn unknown_recipe() {
        let err = make_synthetic_scene(&SceneRecipe::named("castle", 10.0, 0)).unwrap_err();
        assert!(matches!(err, CloudError::UnknownRecipe(ref n) if n == "castle"));
    }

    #[test]
    fn zero_density_rejected() {
        assert!(matches!(
            make_synthetic_scene(&SceneRecipe::named("occluder", 0.0, 0)),
            Err(CloudError::InvalidRecipe(_))
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = make_synthetic_scene(&SceneRecipe::named("occluder", 300.0, 7)).unwrap();
        let b = make_synthetic_scene(&SceneRecipe::named("occluder", 300.0, 7)).unwrap();
        assert!(a.cloud.bit_eq(&b.cloud));
        let c = make_synthetic_scene(&SceneRecipe::named("occluder", 300.0, 8)).unwrap();
        assert!(!a.cloud.bit_eq(&c.cloud));
    }

    #[test]
    fn samples_lie_on_surfaces() {
        for name in ["box_room", "occluder", "spheres"] {
            let s = make_synthetic_scene(&SceneRecipe::named(name, 150.0, 3)).unwrap();
            assert!(!s.cloud.is_empty());
            for p in s.cloud.positions() {
                assert!(s.distance_to_surfaces(p) < 1e-6, "{name}: {p:?}");
            }
            for p in s.surface_samples(500, 1) {
                assert!(s.distance_to_surfaces(&p) < 1e-9);
            }
        }
    }

    #[test]
    fn surface_samples_apportioned_by_area() {
        let s = make_synthetic_scene(&SceneRecipe::named("occluder", 10.0, 0)).unwrap();
        let pts = s.surface_samples(1000, 4);
        assert_eq!(pts.len(), 1000);
        let back = pts.iter().filter(|p| (p.z - 4.5).abs() < 1e-12 && p.x.abs() < 3.5 && p.y.abs() < 3.0).count();
        let total: f64 = s.surfaces.iter().map(Surface::area).sum();
        assert!((back as f64 - 1000.0 * 42.0 / total).abs() <= 1.0, "{back}");
    }

    #[test]
    fn description_round_trip() {
        let s = make_synthetic_scene(&SceneRecipe::named("spheres", 50.0, 2)).unwrap();
        let json = serde_json::to_string(&s.description()).unwrap();
        let desc: SceneDescription = serde_json::from_str(&json).unwrap();
        assert_eq!(SyntheticScene::from_description(&desc).unwrap(), s);
    }

    #[test]
    fn sphere_ray_hits_front() {
        let s = Surface::Sphere {
            center: [0.0, 0.0, 5.0],
            radius: 1.0,
            texture: tex([0.0; 3], 0.0, 0.0),
        };
        let t = s.intersect(&Point3::origin(), &Vector3::z()).unwrap();
        assert!((t - 4.0).abs() < 1e-12);
        assert!(s.intersect(&Point3::origin(), &Vector3::x()).is_none());
    }

    /// Pixels whose center ray hits the front panel at least `margin` pixels
    /// away from its silhouette.
    fn occluded_band(scene: &SyntheticScene, k: &CameraIntrinsics, margin: i64) -> Vec<(u32, u32)> {
        let pose = scene.reference_pose;
        let hits_front = |i: i64, j: i64| {
            if i < 0 || j < 0 || i >= k.width as i64 || j >= k.height as i64 {
                return false;
            }
            let dir = pose.rotation() * k.ray(i as f64 + 0.5, j as f64 + 0.5);
            scene.raycast(&pose.position(), &dir).is_some_and(|h| h.surface == 1)
        };
        let mut out = Vec::new();
        for j in 0..k.height as i64 {
            for i in 0..k.width as i64 {
                let all = (-margin..=margin)
                    .all(|dj| (-margin..=margin).all(|di| hits_front(i + di, j + dj)));
                if all {
                    out.push((i as u32, j as u32));
                }
            }
        }
        out
    }

    #[test]
    fn occluder_hides_back_wall_band() {
        let scene = make_synthetic_scene(&SceneRecipe::named("occluder", 2000.0, 7)).unwrap();
        let k = CameraIntrinsics::centered(100.0, 128, 128).unwrap();
        let band = occluded_band(&scene, &k, 2);
        assert!(band.len() > 500, "band too small: {}", band.len());
        let r = render(&scene.cloud, &scene.reference_pose, &k, 1);
        let front_depth = 4.5 * 5.0 / 9.0;
        for (i, j) in band {
            let d = r.depth.get(i, j) as f64;
            assert!((d - front_depth).abs() < 1e-5, "pixel ({i},{j}) shows depth {d}");
        }
    }
}
