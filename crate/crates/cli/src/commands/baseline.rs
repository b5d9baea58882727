use serde_json::json;

use nbvsynth_core::planner::{baseline_and_synthesize, build_search_space, circular_baseline_trajectory, Reference};
use nbvsynth_core::renderer::render;
use nbvsynth_core::Trajectory;

use super::{build_completer, frame_name, halves, load_start, planner_config, Half};
use crate::args::BaselineArgs;
use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &mut Run, a: &BaselineArgs) -> Result<(), CliError> {
    if a.steps == 0 {
        return Err(CliError::Validation("--steps must be at least 1".into()));
    }
    if !a.step_deg.is_finite() {
        return Err(CliError::Validation("--step-deg must be finite".into()));
    }
    let cfg = planner_config(run, &a.planner)?;
    let start = load_start(run, &a.inputs)?;
    let (completer, completer_info) = build_completer(run, &a.completer)?;
    run.seed = Some(cfg.seed);
    run.config = json!({
        "planner": cfg,
        "completer": completer_info,
        "steps": a.steps,
        "step_deg": a.step_deg,
        "halves": format!("{:?}", a.halves).to_lowercase(),
    });

    let k = start.k;
    let r0 = render(&start.cloud, &start.reference.pose, &k, cfg.splat_radius_px);
    let space = build_search_space(&r0, &start.reference.pose, &k, cfg.grid_azimuth, cfg.grid_elevation)?;
    run.open_output(&a.out)?;

    let mut cloud = start.cloud.clone();
    let mut report = Vec::new();
    for half in halves(a.halves) {
        let step_deg = match half {
            Half::Left => -a.step_deg,
            Half::Right => a.step_deg,
        };
        let reference: &Reference = &start.reference;
        let waypoints = circular_baseline_trajectory(&reference.pose, &space, &k, a.steps, step_deg)?;
        let azimuths: Vec<f64> = waypoints
            .poses()
            .iter()
            .map(|p| space.angles_of(&p.position()).0.to_degrees())
            .collect();
        let out = run.time(&format!("baseline_{}", half.name()), |_| {
            baseline_and_synthesize(&cloud, reference, &k, &cfg, &space, completer.as_ref(), a.steps, step_deg)
        })?;
        for (i, (frame, mask)) in out.frames.iter().zip(&out.masks).enumerate() {
            run.write_png(&frame_name("frames", half.name(), i), frame)?;
            run.write_mask(&frame_name("masks", half.name(), i), mask)?;
        }
        let l = cfg.frames_per_segment;
        for r in &out.records {
            let files = (r.step * l..(r.step + 1) * l).map(|i| frame_name("frames", half.name(), i)).collect();
            run.group(&format!("{}/step{}", half.name(), r.step), files);
        }
        let poses: Vec<_> = out.records.iter().flat_map(|r| r.segment_trajectory.poses().to_vec()).collect();
        run.write(
            &format!("trajectory_{}.json", half.name()),
            Trajectory::new(poses, k)?.to_json().as_bytes(),
        )?;
        run.write(&format!("waypoints_{}.json", half.name()), waypoints.to_json().as_bytes())?;
        cloud = out.cloud;
        println!(
            "{} half: {} movements of {step_deg} deg, {} frames, cloud {} points",
            half.name(),
            a.steps,
            out.frames.len(),
            cloud.len()
        );
        report.push(json!({
            "half": half.name(),
            "step_deg": step_deg,
            "waypoint_azimuths_deg": azimuths,
            "frames": out.frames.len(),
            "segments": out.records,
        }));
    }
    run.write_json(
        "baseline.json",
        &json!({
            "config": cfg,
            "search_space": space,
            "initial_cloud_len": start.cloud.len(),
            "halves": report,
        }),
    )?;
    run.write_ply("fused.ply", &cloud)?;
    Ok(())
}
