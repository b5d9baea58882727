use std::collections::HashMap;

use nalgebra::Point3;
use rayon::prelude::*;

use crate::pointcloud::{ColoredPointCloud, SyntheticScene};

/// Uniform hash grid over cloud points answering "is any point within eps".
pub struct CoverageGrid<'a> {
    points: &'a [Point3<f64>],
    cell: f64,
    eps_sq: f64,
    cells: HashMap<[i64; 3], Vec<u32>>,
}

impl<'a> CoverageGrid<'a> {
    pub fn new(points: &'a [Point3<f64>], eps: f64) -> Self {
        // slightly larger than eps so neighbors are always in adjacent cells
        let cell = eps * (1.0 + 1e-9);
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p, cell)).or_default().push(i as u32);
        }
        Self {
            points,
            cell,
            eps_sq: eps * eps,
            cells,
        }
    }

    pub fn has_neighbor(&self, q: &Point3<f64>) -> bool {
        let [x, y, z] = key(q, self.cell);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.cells.get(&[x + dx, y + dy, z + dz]) {
                        if ids
                            .iter()
                            .any(|&i| (self.points[i as usize] - q).norm_squared() <= self.eps_sq)
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

fn key(p: &Point3<f64>, cell: f64) -> [i64; 3] {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}

/// Fraction of `samples` quasi-uniform ground-truth surface points that have
/// a cloud point within `eps`.
pub fn surface_coverage(
    cloud: &ColoredPointCloud,
    scene: &SyntheticScene,
    samples: usize,
    eps: f64,
    seed: u64,
) -> f64 {
    let probes = scene.surface_samples(samples.max(1), seed);
    if cloud.is_empty() {
        return 0.0;
    }
    let grid = CoverageGrid::new(cloud.positions(), eps);
    let hit = probes.par_iter().filter(|q| grid.has_neighbor(q)).count();
    hit as f64 / probes.len() as f64
}

/// Same as [`surface_coverage`] with an O(samples × points) scan.
pub fn surface_coverage_brute_force(
    cloud: &ColoredPointCloud,
    scene: &SyntheticScene,
    samples: usize,
    eps: f64,
    seed: u64,
) -> f64 {
    let probes = scene.surface_samples(samples.max(1), seed);
    let eps_sq = eps * eps;
    let hit = probes
        .par_iter()
        .filter(|q| cloud.positions().iter().any(|p| (p - *q).norm_squared() <= eps_sq))
        .count();
    hit as f64 / probes.len() as f64
}
