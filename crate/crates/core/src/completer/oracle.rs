use std::sync::Arc;

use rayon::prelude::*;

use super::{apply_references, CompleterError, CompletionRequest, CompletionResponse, ViewCompleter};
use crate::pointcloud::SyntheticScene;

/// A perfect completer for synthetic scenes.
///
/// Covered pixels (mask = 0) keep the input render; hole pixels take the exact
/// ray-cast color and depth of the ground-truth surfaces. Rays that escape the
/// scene stay black with infinite depth.
#[derive(Debug, Clone)]
pub struct OracleCompleter {
    scene: Arc<SyntheticScene>,
}

impl OracleCompleter {
    pub fn new(scene: Arc<SyntheticScene>) -> Self {
        Self { scene }
    }

    pub fn scene(&self) -> &SyntheticScene {
        &self.scene
    }
}

impl ViewCompleter for OracleCompleter {
    fn name(&self) -> &str {
        "oracle"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, CompleterError> {
        req.validate()?;
        let k = req.trajectory.intrinsics();
        let (mut frames, depths): (Vec<_>, Vec<_>) = req
            .trajectory
            .poses()
            .par_iter()
            .zip(req.renders.par_iter())
            .map(|(pose, input)| {
                let truth = self.scene.render_analytic(pose, k);
                let mut rgb = input.rgb.clone();
                let mut depth = input.depth.clone();
                let holes = input.mask.values();
                for (idx, &m) in holes.iter().enumerate() {
                    if m == 1 {
                        rgb.pixels_mut()[idx] = truth.rgb.pixels()[idx];
                        depth.values_mut()[idx] = truth.depth.values()[idx];
                    }
                }
                (rgb, depth)
            })
            .unzip();
        apply_references(&mut frames, &req.references);
        Ok(CompletionResponse {
            frames,
            depths: Some(depths),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completer::{validate_response, ReferenceImage};
    use crate::geometry::{CameraIntrinsics, Pose, Trajectory};
    use crate::pointcloud::{make_synthetic_scene, SceneRecipe};
    use crate::renderer::render;
    use nalgebra::{Point3, Vector3};

    fn setup() -> (OracleCompleter, CompletionRequest) {
        let scene = make_synthetic_scene(&SceneRecipe::named("box_room", 300.0, 3)).unwrap();
        let k = CameraIntrinsics::centered(40.0, 48, 36).unwrap();
        let poses = vec![
            Pose::identity(),
            Pose::look_at(&Point3::new(0.4, -0.2, 0.1), &Point3::new(0.0, 0.0, 3.0), &Vector3::new(0.0, -1.0, 0.0))
                .unwrap(),
        ];
        let renders: Vec<_> = poses.iter().map(|p| render(&scene.cloud, p, &k, 0)).collect();
        let reference = scene.render_analytic(&poses[0], &k).rgb;
        let traj = Trajectory::new(poses, k).unwrap();
        let req = CompletionRequest::new(
            "o",
            renders,
            traj,
            vec![ReferenceImage {
                index: 0,
                image: reference,
            }],
        )
        .unwrap();
        (OracleCompleter::new(Arc::new(scene)), req)
    }

    #[test]
    fn holes_match_analytic_render() {
        let (oracle, req) = setup();
        let resp = oracle.complete(&req).unwrap();
        validate_response(&req, &resp).unwrap();
        let depths = resp.depths.as_ref().unwrap();
        for (i, pose) in req.trajectory.poses().iter().enumerate() {
            let truth = oracle.scene().render_analytic(pose, req.trajectory.intrinsics());
            let input = &req.renders[i];
            for (idx, &m) in input.mask.values().iter().enumerate() {
                if m == 1 && i != 0 {
                    assert_eq!(resp.frames[i].pixels()[idx], truth.rgb.pixels()[idx]);
                    assert_eq!(depths[i].values()[idx].to_bits(), truth.depth.values()[idx].to_bits());
                }
                if m == 0 && i != 0 {
                    let (a, b) = (resp.frames[i].pixels()[idx], input.rgb.pixels()[idx]);
                    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 2.0 / 255.0));
                }
            }
        }
    }

    #[test]
    fn deterministic() {
        let (oracle, req) = setup();
        let a = oracle.complete(&req).unwrap();
        let b = oracle.complete(&req).unwrap();
        assert_eq!(a, b);
    }
}
