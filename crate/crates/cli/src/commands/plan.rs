use serde::Serialize;
use serde_json::json;

use nbvsynth_core::planner::{build_search_space, plan_and_synthesize, PlanStepRecord, Reference, SearchSpace};
use nbvsynth_core::renderer::render;
use nbvsynth_core::Trajectory;

use super::{build_completer, frame_name, halves, load_start, planner_config, Half};
use crate::args::PlanArgs;
use crate::error::CliError;
use crate::manifest::Run;

#[derive(Serialize)]
struct StepReport<'a> {
    #[serde(flatten)]
    record: &'a PlanStepRecord,
    chosen_grid_index: usize,
    frames: Vec<String>,
}

#[derive(Serialize)]
struct HalfReport<'a> {
    half: &'static str,
    azimuth_range_deg: [f64; 2],
    steps: Vec<StepReport<'a>>,
}

pub fn run(run: &mut Run, a: &PlanArgs) -> Result<(), CliError> {
    let cfg = planner_config(run, &a.planner)?;
    let start = load_start(run, &a.inputs)?;
    let (completer, completer_info) = build_completer(run, &a.completer)?;
    run.seed = Some(cfg.seed);
    run.config = json!({
        "planner": cfg,
        "completer": completer_info,
        "halves": format!("{:?}", a.halves).to_lowercase(),
        "reset_between_halves": !a.no_reset,
    });

    let k = start.k;
    let r0 = render(&start.cloud, &start.reference.pose, &k, cfg.splat_radius_px);
    let space = build_search_space(&r0, &start.reference.pose, &k, cfg.grid_azimuth, cfg.grid_elevation)?;
    run.open_output(&a.out)?;

    let mut cloud = start.cloud.clone();
    let mut from = start.reference.clone();
    let mut outcomes = Vec::new();
    for half in halves(a.halves) {
        let sub: SearchSpace = match half {
            Half::Left => space.left_half(),
            Half::Right => space.right_half(),
        };
        if !a.no_reset {
            from = start.reference.clone();
        }
        let out = run.time(&format!("plan_{}", half.name()), |_| {
            plan_and_synthesize(&cloud, &from, &k, &cfg, &sub, completer.as_ref())
        });
        let out = match out {
            Ok(o) => o,
            Err(e) => {
                // keep what earlier halves produced
                if !outcomes.is_empty() {
                    run.write_ply("fused_partial.ply", &cloud)?;
                }
                return Err(e.into());
            }
        };
        let l = cfg.frames_per_segment;
        for (i, (frame, mask)) in out.frames.iter().zip(&out.masks).enumerate() {
            run.write_png(&frame_name("frames", half.name(), i), frame)?;
            run.write_mask(&frame_name("masks", half.name(), i), mask)?;
        }
        for r in &out.records {
            let files = (r.step * l..(r.step + 1) * l).map(|i| frame_name("frames", half.name(), i)).collect();
            run.group(&format!("{}/step{}", half.name(), r.step), files);
        }
        let poses: Vec<_> = out.records.iter().flat_map(|r| r.segment_trajectory.poses().to_vec()).collect();
        run.write(
            &format!("trajectory_{}.json", half.name()),
            Trajectory::new(poses, k)?.to_json().as_bytes(),
        )?;
        cloud = out.cloud.clone();
        from = Reference {
            image: out.frames.last().expect("at least one frame").clone(),
            pose: out.records.last().expect("at least one step").chosen_pose,
        };
        println!(
            "{} half: {} steps, {} frames, cloud {} points",
            half.name(),
            out.records.len(),
            out.frames.len(),
            cloud.len()
        );
        outcomes.push((half, sub, out));
    }

    let report: Vec<HalfReport> = outcomes
        .iter()
        .map(|(half, sub, out)| HalfReport {
            half: half.name(),
            azimuth_range_deg: [sub.azimuth_range.0.to_degrees(), sub.azimuth_range.1.to_degrees()],
            steps: out
                .records
                .iter()
                .map(|r| StepReport {
                    record: r,
                    chosen_grid_index: r.candidate_grid_indices[r.chosen_index],
                    frames: (r.step * cfg.frames_per_segment..(r.step + 1) * cfg.frames_per_segment)
                        .map(|i| frame_name("frames", half.name(), i))
                        .collect(),
                })
                .collect(),
        })
        .collect();
    run.write_json(
        "plan.json",
        &json!({
            "config": cfg,
            "search_space": space,
            "reset_between_halves": !a.no_reset,
            "initial_cloud_len": start.cloud.len(),
            "halves": report,
        }),
    )?;
    run.write_ply("fused.ply", &cloud)?;
    Ok(())
}
