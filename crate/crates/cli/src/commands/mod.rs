pub mod baseline;
pub mod eval;
pub mod plan;
pub mod render;
pub mod replay;
pub mod serve;
pub mod synth;

use std::io::Cursor;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde_json::json;

use nbvsynth_core::completer::{OracleCompleter, PassthroughCompleter, RemoteCompleter, ViewCompleter};
use nbvsynth_core::planner::{PlannerConfig, Reference};
use nbvsynth_core::pointcloud::ply::read_ply;
use nbvsynth_core::pointcloud::scene::SceneDescription;
use nbvsynth_core::{CameraIntrinsics, ColoredPointCloud, RgbImage, SyntheticScene, Trajectory};

use crate::args::{CompleterArgs, CompleterKind, Halves, PlannerArgs, SceneInputs};
use crate::error::CliError;
use crate::manifest::Run;

pub(crate) fn load_cloud(run: &mut Run, path: &Path) -> Result<ColoredPointCloud, CliError> {
    let bytes = run.read_input(path)?;
    read_ply(Cursor::new(bytes)).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub(crate) fn load_trajectory(run: &mut Run, path: &Path) -> Result<Trajectory, CliError> {
    let bytes = run.read_input(path)?;
    let s = String::from_utf8(bytes).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Trajectory::from_json(&s).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub(crate) fn load_png(run: &mut Run, path: &Path) -> Result<RgbImage, CliError> {
    let bytes = run.read_input(path)?;
    RgbImage::decode_png(&bytes).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub(crate) fn load_scene_bytes(bytes: &[u8], path: &Path) -> Result<SyntheticScene, CliError> {
    let desc: SceneDescription =
        serde_json::from_slice(bytes).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    Ok(SyntheticScene::from_description(&desc)?)
}

pub(crate) fn load_scene(run: &mut Run, path: &Path) -> Result<SyntheticScene, CliError> {
    let bytes = run.read_input(path)?;
    load_scene_bytes(&bytes, path)
}

/// Initial cloud, camera and reference image shared by `plan` and `baseline`.
pub(crate) struct Start {
    pub cloud: ColoredPointCloud,
    pub k: CameraIntrinsics,
    pub reference: Reference,
}

pub(crate) fn load_start(run: &mut Run, inputs: &SceneInputs) -> Result<Start, CliError> {
    let cloud = load_cloud(run, &inputs.cloud)?;
    let camera = load_trajectory(run, &inputs.camera)?;
    let image = load_png(run, &inputs.reference)?;
    let k = *camera.intrinsics();
    if (image.width(), image.height()) != (k.width, k.height) {
        return Err(CliError::Validation(format!(
            "reference image is {}x{} but the camera is {}x{}",
            image.width(),
            image.height(),
            k.width,
            k.height
        )));
    }
    Ok(Start {
        cloud,
        k,
        reference: Reference {
            image,
            pose: *camera.first(),
        },
    })
}

pub(crate) fn planner_config(run: &mut Run, a: &PlannerArgs) -> Result<PlannerConfig, CliError> {
    let mut cfg = match &a.config {
        Some(path) => {
            let bytes = run.read_input(path)?;
            let s = String::from_utf8(bytes).map_err(|e| CliError::Validation(e.to_string()))?;
            PlannerConfig::from_json(&s)?
        }
        None => PlannerConfig::default(),
    };
    macro_rules! set {
        ($flag:ident => $field:ident) => {
            if let Some(v) = a.$flag {
                cfg.$field = v;
            }
        };
    }
    set!(max_steps => max_steps);
    set!(candidates => candidates_per_step);
    set!(theta => theta);
    set!(frames_per_segment => frames_per_segment);
    set!(neighborhood_deg => neighborhood_deg);
    set!(grid_azimuth => grid_azimuth);
    set!(grid_elevation => grid_elevation);
    set!(splat_radius => splat_radius_px);
    set!(voxel_rho => voxel_rho);
    set!(seed => seed);
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn build_completer(
    run: &mut Run,
    a: &CompleterArgs,
) -> Result<(Arc<dyn ViewCompleter>, serde_json::Value), CliError> {
    Ok(match a.completer {
        CompleterKind::Passthrough => (Arc::new(PassthroughCompleter), json!({"kind": "passthrough"})),
        CompleterKind::Oracle => {
            let path = a
                .scene
                .as_ref()
                .ok_or_else(|| CliError::Validation("--scene is required for the oracle completer".into()))?;
            let scene = load_scene(run, path)?;
            (
                Arc::new(OracleCompleter::new(Arc::new(scene))),
                json!({"kind": "oracle", "scene": path}),
            )
        }
        CompleterKind::Remote => {
            let endpoint = a.endpoint.clone().ok_or_else(|| {
                CliError::Validation(format!(
                    "--endpoint (or {}) is required for the remote completer",
                    crate::args::ENDPOINT_ENV
                ))
            })?;
            if !(a.timeout_s > 0.0 && a.timeout_s.is_finite()) {
                return Err(CliError::Validation("--timeout-s must be positive".into()));
            }
            let info = json!({"kind": "remote", "endpoint": endpoint, "timeout_s": a.timeout_s, "retries": a.retries});
            (
                Arc::new(RemoteCompleter::new(endpoint, Duration::from_secs_f64(a.timeout_s)).with_retries(a.retries)),
                info,
            )
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Half {
    Left,
    Right,
}

impl Half {
    pub fn name(self) -> &'static str {
        match self {
            Half::Left => "left",
            Half::Right => "right",
        }
    }
}

pub(crate) fn halves(h: Halves) -> Vec<Half> {
    match h {
        Halves::Left => vec![Half::Left],
        Halves::Right => vec![Half::Right],
        Halves::Both => vec![Half::Left, Half::Right],
    }
}

pub(crate) fn frame_name(dir: &str, half: &str, i: usize) -> String {
    format!("{dir}/{half}_{i:04}.png")
}
