use serde_json::json;

use nbvsynth_core::pointcloud::{cloud_from_pointmaps, make_synthetic_scene, SceneRecipe};
use nbvsynth_core::{CameraIntrinsics, PointMap, Trajectory};

use crate::args::SynthArgs;
use crate::error::CliError;
use crate::manifest::Run;

pub fn run(run: &mut Run, a: &SynthArgs) -> Result<(), CliError> {
    let dimensions = a.dims.as_ref().map(|d| [d[0], d[1], d[2]]);
    let recipe = SceneRecipe {
        recipe: a.recipe.clone(),
        dimensions,
        density: a.density,
        seed: a.seed,
    };
    let k = CameraIntrinsics::centered(a.camera.focal, a.camera.width, a.camera.height)?;
    run.seed = Some(a.seed);
    run.config = json!({ "recipe": recipe, "intrinsics": k });

    let scene = run.time("sample_scene", |_| make_synthetic_scene(&recipe))?;
    run.open_output(&a.out)?;

    let pose = scene.reference_pose;
    let view = run.time("render_reference", |_| scene.render_analytic(&pose, &k));
    let pm = PointMap::from_depth(&view.depth, &view.rgb, &k)?;
    let initial = cloud_from_pointmaps(&[(pm, pose)], 0.0)?;

    run.write_ply("scene.ply", &scene.cloud)?;
    run.write_json("scene.json", &scene.description())?;
    run.write("camera.json", Trajectory::new(vec![pose], k)?.to_json().as_bytes())?;
    run.write_png("reference.png", &view.rgb)?;
    run.write_pfm("reference_depth.pfm", &view.depth)?;
    run.write_mask("reference_mask.png", &view.mask)?;
    run.write_ply("initial.ply", &initial)?;
    println!(
        "{}: {} scene points, {} initial points, reference hole ratio {:.4}",
        a.recipe,
        scene.cloud.len(),
        initial.len(),
        view.hole_ratio()
    );
    Ok(())
}
