use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use nbvsynth_core::metrics::{
    normalize_trajectory, psnr, rotation_distances, surface_coverage, translation_distances,
};

use super::{load_cloud, load_png, load_scene, load_trajectory};
use crate::args::{EvalArgs, EvalCommand};
use crate::error::CliError;
use crate::manifest::Run;

/// JSON has no infinity; identical images report PSNR as the string "inf".
fn db(v: f64) -> Value {
    if v.is_infinite() {
        json!("inf")
    } else {
        json!(v)
    }
}

fn png_list(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "png"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn run(run: &mut Run, a: &EvalArgs) -> Result<(), CliError> {
    let (report, out) = match &a.what {
        EvalCommand::Trajectory {
            generated,
            ground_truth,
            out,
        } => {
            let gen = normalize_trajectory(&load_trajectory(run, generated)?);
            let gt = normalize_trajectory(&load_trajectory(run, ground_truth)?);
            let r = rotation_distances(&gen, &gt)?;
            let t = translation_distances(&gen, &gt)?;
            let (r_sum, t_sum) = (r.iter().sum::<f64>(), t.iter().sum::<f64>());
            let n = r.len().max(1) as f64;
            let report = json!({
                "metric": "trajectory",
                "frames": r.len(),
                "r_dist": r_sum,
                "t_dist": t_sum,
                "r_dist_mean": r_sum / n,
                "t_dist_mean": t_sum / n,
                "r_per_frame": r,
                "t_per_frame": t,
                "generated_degenerate": gen.degenerate,
                "ground_truth_degenerate": gt.degenerate,
            });
            (report, out)
        }
        EvalCommand::Frames {
            generated,
            ground_truth,
            out,
        } => {
            let (g, t) = (png_list(generated)?, png_list(ground_truth)?);
            if g.len() != t.len() {
                return Err(CliError::Validation(format!(
                    "{} generated frames vs {} ground-truth frames",
                    g.len(),
                    t.len()
                )));
            }
            let mut per_frame = Vec::with_capacity(g.len());
            let mut finite = Vec::new();
            for (i, (gp, tp)) in g.iter().zip(&t).enumerate() {
                let (gi, ti) = (load_png(run, gp)?, load_png(run, tp)?);
                let v = psnr(&gi, &ti).map_err(|e| CliError::Validation(format!("frame {i}: {e}")))?;
                if v.is_finite() {
                    finite.push(v);
                }
                per_frame.push(db(v));
            }
            let mean = if finite.len() == per_frame.len() && !finite.is_empty() {
                db(finite.iter().sum::<f64>() / finite.len() as f64)
            } else if per_frame.is_empty() {
                Value::Null
            } else {
                // any identical frame makes the mean unbounded
                db(f64::INFINITY)
            };
            (json!({ "metric": "psnr", "frames": per_frame.len(), "psnr_db": per_frame, "mean_psnr_db": mean }), out)
        }
        EvalCommand::Coverage {
            clouds,
            scene,
            samples,
            eps,
            seed,
            out,
        } => {
            if !(*eps > 0.0 && eps.is_finite()) || *samples == 0 {
                return Err(CliError::Validation("--eps must be positive and --samples non-zero".into()));
            }
            let scene = load_scene(run, scene)?;
            run.seed = Some(*seed);
            let mut rows = Vec::new();
            for path in clouds {
                let cloud = load_cloud(run, path)?;
                let c = run.time("coverage", |_| surface_coverage(&cloud, &scene, *samples, *eps, *seed));
                rows.push(json!({ "cloud": path, "points": cloud.len(), "coverage": c }));
            }
            (
                json!({ "metric": "coverage", "samples": samples, "eps": eps, "seed": seed, "clouds": rows }),
                out,
            )
        }
    };
    run.config = json!({ "metric": report["metric"] });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if let Some(dir) = out {
        run.open_output(dir)?;
        run.write_json("report.json", &report)?;
    }
    Ok(())
}
