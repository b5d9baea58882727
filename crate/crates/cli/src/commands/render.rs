use serde_json::json;

use nbvsynth_core::renderer::render_trajectory;

use super::{load_cloud, load_trajectory};
use crate::args::RenderArgs;
use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &mut Run, a: &RenderArgs) -> Result<(), CliError> {
    let cloud = load_cloud(run, &a.cloud)?;
    let traj = load_trajectory(run, &a.trajectory)?;
    run.config = json!({ "splat_radius_px": a.splat_radius });
    run.open_output(&a.out)?;
    let renders = run.time("render", |_| render_trajectory(&cloud, &traj, a.splat_radius));
    let mut ratios = Vec::with_capacity(renders.len());
    for (i, r) in renders.iter().enumerate() {
        run.write_png(&format!("frames/{i:04}.png"), &r.rgb)?;
        run.write_pfm(&format!("depth/{i:04}.pfm"), &r.depth)?;
        run.write_mask(&format!("masks/{i:04}.png"), &r.mask)?;
        ratios.push(r.hole_ratio());
    }
    run.write_json("render.json", &json!({ "frames": renders.len(), "hole_ratios": ratios }))?;
    println!("rendered {} frames", renders.len());
    Ok(())
}
