//! Focal length recovery from a point map.
//!
//! With a centered principal point and square pixels, the focal length is the
//! minimizer of the confidence-weighted sum of reprojection distances
//!
//! ```text
//! F(f) = Σ_i D_i ‖p_i − f q_i‖,   p_i = pixel − principal point,  q_i = (X, Y) / Z
//! ```
//!
//! which is solved with the Weiszfeld (IRLS) iteration
//! `f ← Σ w_i D_i (p_i·q_i) / Σ w_i D_i (q_i·q_i)` with `w_i = 1 / max(‖p_i − f q_i‖, ε_r)`.
//!
//! Pixel (i, j) of the map is sampled at image coordinate (i + ½, j + ½).

use crate::pointcloud::PointMap;

use super::{GeometryError, EPS_Z};

/// Residual floor that keeps the reweighting finite.
pub const EPS_RESIDUAL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiszfeldOptions {
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for WeiszfeldOptions {
    fn default() -> Self {
        Self {
            max_iters: 10,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalEstimate {
    pub focal_px: f64,
    pub iterations: usize,
    /// Objective at f_0, f_1, ... (one entry per iterate, including the start).
    pub objective: Vec<f64>,
}

struct Sample {
    p: [f64; 2],
    q: [f64; 2],
    weight: f64,
}

fn collect_samples(pm: &PointMap) -> Vec<Sample> {
    let cx = pm.width() as f64 / 2.0;
    let cy = pm.height() as f64 / 2.0;
    let mut out = Vec::new();
    for j in 0..pm.height() {
        for i in 0..pm.width() {
            let d = pm.confidence_at(i, j);
            if !(d > 0.0) {
                continue;
            }
            let o = pm.point_at(i, j);
            if !(o.x.is_finite() && o.y.is_finite() && o.z.is_finite()) || o.z <= EPS_Z {
                continue;
            }
            out.push(Sample {
                p: [i as f64 + 0.5 - cx, j as f64 + 0.5 - cy],
                q: [o.x / o.z, o.y / o.z],
                weight: d,
            });
        }
    }
    out
}

fn residual(s: &Sample, f: f64) -> f64 {
    let dx = s.p[0] - f * s.q[0];
    let dy = s.p[1] - f * s.q[1];
    (dx * dx + dy * dy).sqrt()
}

fn objective_over(samples: &[Sample], f: f64) -> f64 {
    samples.iter().map(|s| s.weight * residual(s, f)).sum()
}

/// Evaluates the weighted reprojection objective at focal length `f`, using the
/// same pixel filtering as the estimator.
pub fn focal_objective(pm: &PointMap, f: f64) -> f64 {
    objective_over(&collect_samples(pm), f)
}

pub fn estimate_focal_weiszfeld(pm: &PointMap, opts: WeiszfeldOptions) -> Result<f64, GeometryError> {
    estimate_focal_weiszfeld_traced(pm, opts).map(|e| e.focal_px)
}

/// Like [`estimate_focal_weiszfeld`] but also reports the objective trace.
pub fn estimate_focal_weiszfeld_traced(
    pm: &PointMap,
    opts: WeiszfeldOptions,
) -> Result<FocalEstimate, GeometryError> {
    let samples = collect_samples(pm);
    if samples.len() < 2 {
        return Err(GeometryError::DegeneratePointMap);
    }
    let qq: f64 = samples
        .iter()
        .map(|s| s.weight * (s.q[0] * s.q[0] + s.q[1] * s.q[1]))
        .sum();
    if !(qq > 0.0) {
        // Every ray is on the optical axis; the objective is flat in f.
        return Err(GeometryError::DegeneratePointMap);
    }

    let mut f = pm.width().max(pm.height()) as f64;
    let mut trace = vec![objective_over(&samples, f)];
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let (mut num, mut den) = (0.0, 0.0);
        for s in &samples {
            let w = s.weight / residual(s, f).max(EPS_RESIDUAL);
            num += w * (s.p[0] * s.q[0] + s.p[1] * s.q[1]);
            den += w * (s.q[0] * s.q[0] + s.q[1] * s.q[1]);
        }
        let next = num / den;
        if !next.is_finite() {
            return Err(GeometryError::NumericalFailure(format!(
                "Weiszfeld update produced {next} at iteration {iterations}"
            )));
        }
        iterations += 1;
        let step = (next - f).abs();
        f = next;
        trace.push(objective_over(&samples, f));
        if step < opts.tol {
            break;
        }
    }
    Ok(FocalEstimate {
        focal_px: f,
        iterations,
        objective: trace,
    })
}
