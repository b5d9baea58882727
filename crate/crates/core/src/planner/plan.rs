use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use log::info;
use serde::{Deserialize, Serialize};

use super::{
    circular_baseline_trajectory, sample_candidate_indices, select_nbv, PlanError, PlannerConfig, SearchSpace,
};
use crate::completer::{validate_response, CompletionRequest, ReferenceImage, ViewCompleter};
use crate::geometry::{interpolate_poses, CameraIntrinsics, Pose, Trajectory};
use crate::image::{HoleMask, RgbImage};
use crate::pointcloud::{fuse_novel_view, ColoredPointCloud, FuseOptions};
use crate::renderer::render_trajectory;

/// Where a run starts: a camera pose and the image it sees.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub image: RgbImage,
    pub pose: Pose,
}

/// One iteration of the planning loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanStepRecord {
    pub step: usize,
    pub start_pose: Pose,
    pub candidate_grid_indices: Vec<usize>,
    pub candidate_poses: Vec<Pose>,
    pub candidate_ratios: Vec<f64>,
    pub candidate_utilities: Vec<f64>,
    pub chosen_index: usize,
    pub chosen_pose: Pose,
    pub segment_trajectory: Trajectory,
    /// Cloud size after fusing this step's frames.
    pub cloud_len: usize,
}

/// One camera movement of a fixed (non-planned) path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub step: usize,
    pub segment_trajectory: Trajectory,
    pub cloud_len: usize,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome<R> {
    pub cloud: ColoredPointCloud,
    pub records: Vec<R>,
    pub frames: Vec<RgbImage>,
    /// Hole masks of the point-cloud renders the frames were completed from.
    pub masks: Vec<HoleMask>,
}

fn request_id(seed: u64, step: usize, segment: &[Pose]) -> String {
    let mut h = DefaultHasher::new();
    for p in segment {
        p.rotation_row_major().iter().for_each(|x| x.to_bits().hash(&mut h));
        p.translation().iter().for_each(|x| x.to_bits().hash(&mut h));
    }
    format!("{seed:016x}-{step}-{:016x}", h.finish())
}

struct Segment {
    cloud: ColoredPointCloud,
    frames: Vec<RgbImage>,
    masks: Vec<HoleMask>,
    trajectory: Trajectory,
}

/// Renders a segment from the cloud, completes it, and fuses the new views.
fn synthesize_segment(
    cloud: ColoredPointCloud,
    poses: Vec<Pose>,
    k: &CameraIntrinsics,
    reference: &RgbImage,
    config: &PlannerConfig,
    completer: &dyn ViewCompleter,
    step: usize,
) -> Result<Segment, PlanError> {
    let id = request_id(config.seed, step, &poses);
    let trajectory = Trajectory::new(poses, *k)?;
    let renders = render_trajectory(&cloud, &trajectory, config.splat_radius_px);
    let at_step = |source| PlanError::Completer { step, source };
    let req = CompletionRequest::new(
        id,
        renders,
        trajectory.clone(),
        vec![ReferenceImage {
            index: 0,
            image: reference.clone(),
        }],
    )
    .map_err(at_step)?;
    let resp = completer.complete(&req).map_err(at_step)?;
    validate_response(&req, &resp).map_err(at_step)?;

    let opts = FuseOptions {
        voxel_rho: config.voxel_rho,
    };
    let mut cloud = cloud;
    for (i, (pose, render)) in trajectory.poses().iter().zip(&req.renders).enumerate() {
        let depth = resp.depths.as_ref().map_or(&render.depth, |d| &d[i]);
        cloud = fuse_novel_view(&cloud, &resp.frames[i], depth, &render.mask, pose, k, opts)?;
    }
    Ok(Segment {
        cloud,
        frames: resp.frames,
        masks: req.renders.into_iter().map(|r| r.mask).collect(),
        trajectory,
    })
}

/// The full planning loop.
///
/// Starting at the reference pose, each of the `N + 1` steps samples `K`
/// candidates, moves to the one with the best utility along `L` interpolated
/// poses, completes those views and fuses them into the cloud. The first frame
/// of every segment is pinned to the previous view: the reference image on the
/// first step, afterwards the last completed frame.
pub fn plan_and_synthesize(
    scene_init: &ColoredPointCloud,
    reference: &Reference,
    k: &CameraIntrinsics,
    config: &PlannerConfig,
    space: &SearchSpace,
    completer: &dyn ViewCompleter,
) -> Result<PlanOutcome<PlanStepRecord>, PlanError> {
    config.validate()?;
    let grid = space.grid_poses()?;
    let mut cloud = scene_init.clone();
    let mut current = reference.pose;
    let mut pinned = reference.image.clone();
    let mut records = Vec::with_capacity(config.max_steps + 1);
    let mut frames = Vec::new();
    let mut masks = Vec::new();

    for step in 0..=config.max_steps {
        let idx = sample_candidate_indices(space, &grid, &current, config.candidates_per_step, config.neighborhood_deg)?;
        let candidates: Vec<Pose> = idx.iter().map(|&i| grid[i].pose).collect();
        let sel = select_nbv(&cloud, &candidates, k, config.theta, config.splat_radius_px)?;
        let nbv = candidates[sel.chosen_index];
        info!(
            "step {step}: chose grid pose {} (hole ratio {:.4}, utility {:.4})",
            idx[sel.chosen_index], sel.ratios[sel.chosen_index], sel.utilities[sel.chosen_index]
        );
        let poses = interpolate_poses(&current, &nbv, config.frames_per_segment)?;
        let seg = synthesize_segment(cloud, poses, k, &pinned, config, completer, step)?;
        cloud = seg.cloud;
        pinned = seg.frames.last().expect("segment is non-empty").clone();
        records.push(PlanStepRecord {
            step,
            start_pose: current,
            candidate_grid_indices: idx,
            candidate_poses: candidates,
            candidate_ratios: sel.ratios,
            candidate_utilities: sel.utilities,
            chosen_index: sel.chosen_index,
            chosen_pose: nbv,
            segment_trajectory: seg.trajectory,
            cloud_len: cloud.len(),
        });
        frames.extend(seg.frames);
        masks.extend(seg.masks);
        current = nbv;
    }
    Ok(PlanOutcome {
        cloud,
        records,
        frames,
        masks,
    })
}

/// The fixed-orbit comparison run: `steps` movements of `step_deg` each about
/// the vertical axis, each interpolated over `L` poses, completed and fused
/// exactly like a planning step.
#[allow(clippy::too_many_arguments)]
pub fn baseline_and_synthesize(
    scene_init: &ColoredPointCloud,
    reference: &Reference,
    k: &CameraIntrinsics,
    config: &PlannerConfig,
    space: &SearchSpace,
    completer: &dyn ViewCompleter,
    steps: usize,
    step_deg: f64,
) -> Result<PlanOutcome<SegmentRecord>, PlanError> {
    config.validate()?;
    let waypoints = circular_baseline_trajectory(&reference.pose, space, k, steps, step_deg)?;
    let mut cloud = scene_init.clone();
    let mut current = reference.pose;
    let mut pinned = reference.image.clone();
    let mut records = Vec::with_capacity(steps);
    let mut frames = Vec::new();
    let mut masks = Vec::new();
    for (step, next) in waypoints.poses().iter().enumerate() {
        let poses = interpolate_poses(&current, next, config.frames_per_segment)?;
        let seg = synthesize_segment(cloud, poses, k, &pinned, config, completer, step)?;
        cloud = seg.cloud;
        pinned = seg.frames.last().expect("segment is non-empty").clone();
        records.push(SegmentRecord {
            step,
            segment_trajectory: seg.trajectory,
            cloud_len: cloud.len(),
        });
        frames.extend(seg.frames);
        masks.extend(seg.masks);
        current = *next;
    }
    Ok(PlanOutcome {
        cloud,
        records,
        frames,
        masks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completer::{CompleterError, CompletionResponse, OracleCompleter, PassthroughCompleter};
    use crate::planner::build_search_space;
    use crate::pointcloud::{cloud_from_pointmaps, make_synthetic_scene, PointMap, SceneRecipe, SyntheticScene};
    use std::sync::Arc;

    struct Setup {
        scene: Arc<SyntheticScene>,
        k: CameraIntrinsics,
        init: ColoredPointCloud,
        reference: Reference,
        space: SearchSpace,
    }

    fn setup() -> Setup {
        let scene = make_synthetic_scene(&SceneRecipe::named("occluder", 50.0, 5)).unwrap();
        let k = CameraIntrinsics::centered(40.0, 40, 30).unwrap();
        let pose = scene.reference_pose;
        let view = scene.render_analytic(&pose, &k);
        let pm = PointMap::from_depth(&view.depth, &view.rgb, &k).unwrap();
        let init = cloud_from_pointmaps(&[(pm, pose)], 0.0).unwrap();
        let space = build_search_space(&view, &pose, &k, 12, 4).unwrap().left_half();
        Setup {
            scene: Arc::new(scene),
            k,
            init,
            reference: Reference { image: view.rgb, pose },
            space,
        }
    }

    fn config(n: usize) -> PlannerConfig {
        PlannerConfig {
            max_steps: n,
            frames_per_segment: 4,
            ..Default::default()
        }
    }

    #[test]
    fn zero_steps_runs_once() {
        let s = setup();
        let out = plan_and_synthesize(&s.init, &s.reference, &s.k, &config(0), &s.space, &PassthroughCompleter)
            .unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.frames.len(), 4);
        assert_eq!(out.records[0].segment_trajectory.len(), 4);
        assert!(out.frames[0].bit_eq(&s.reference.image));
    }

    #[test]
    fn passthrough_leaves_cloud_unchanged() {
        let s = setup();
        let out = plan_and_synthesize(&s.init, &s.reference, &s.k, &config(2), &s.space, &PassthroughCompleter)
            .unwrap();
        assert!(out.cloud.bit_eq(&s.init));
        assert_eq!(out.records.len(), 3);
        for r in &out.records {
            assert!(r.candidate_utilities.iter().all(|&u| u <= r.candidate_utilities[r.chosen_index]));
            assert_eq!(r.chosen_pose, r.candidate_poses[r.chosen_index]);
            assert_eq!(r.segment_trajectory.first(), &r.start_pose);
            assert_eq!(r.segment_trajectory.last(), &r.chosen_pose);
        }
        for w in out.records.windows(2) {
            assert_eq!(w[1].start_pose, w[0].chosen_pose);
        }
    }

    #[test]
    fn oracle_grows_cloud_and_is_deterministic() {
        let s = setup();
        let oracle = OracleCompleter::new(Arc::clone(&s.scene));
        let a = plan_and_synthesize(&s.init, &s.reference, &s.k, &config(1), &s.space, &oracle).unwrap();
        let b = plan_and_synthesize(&s.init, &s.reference, &s.k, &config(1), &s.space, &oracle).unwrap();
        assert!(a.cloud.bit_eq(&b.cloud));
        assert_eq!(a.records, b.records);
        assert!(a.cloud.len() > s.init.len());
        assert!(a.records.windows(2).all(|w| w[0].cloud_len <= w[1].cloud_len));
        for p in &a.cloud.positions()[s.init.len()..] {
            assert!(s.scene.distance_to_surfaces(p) < 1e-4);
        }
    }

    #[test]
    fn completer_failure_reports_step() {
        struct Broken;
        impl ViewCompleter for Broken {
            fn name(&self) -> &str {
                "broken"
            }
            fn complete(&self, _: &CompletionRequest) -> Result<CompletionResponse, CompleterError> {
                Err(CompleterError::TransportError("down".into()))
            }
        }
        let s = setup();
        let err = plan_and_synthesize(&s.init, &s.reference, &s.k, &config(1), &s.space, &Broken).unwrap_err();
        assert!(matches!(err, PlanError::Completer { step: 0, .. }));
    }

    #[test]
    fn baseline_segments() {
        let s = setup();
        let oracle = OracleCompleter::new(Arc::clone(&s.scene));
        let out =
            baseline_and_synthesize(&s.init, &s.reference, &s.k, &config(0), &s.space, &oracle, 3, -20.0).unwrap();
        assert_eq!(out.records.len(), 3);
        assert_eq!(out.frames.len(), 12);
        let (az, _) = s.space.angles_of(&out.records[2].segment_trajectory.last().position());
        assert!((az + 60f64.to_radians()).abs() < 1e-9);
    }
}
