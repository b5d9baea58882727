use std::sync::Arc;
use std::time::Duration;

use nbvsynth_core::completer::{service, OracleCompleter, RemoteCompleter};
use nbvsynth_core::geometry::{estimate_focal_weiszfeld, CameraIntrinsics, WeiszfeldOptions};
use nbvsynth_core::metrics::surface_coverage;
use nbvsynth_core::planner::{build_search_space, plan_and_synthesize, PlannerConfig, Reference};
use nbvsynth_core::pointcloud::ply::{read_ply_file, write_ply_file};
use nbvsynth_core::pointcloud::{cloud_from_pointmaps, make_synthetic_scene, SceneRecipe};
use nbvsynth_core::renderer::render;
use nbvsynth_core::PointMap;

#[test]
fn scene_to_cloud_to_render() {
    let scene = make_synthetic_scene(&SceneRecipe::named("spheres", 40.0, 2)).unwrap();
    let k = CameraIntrinsics::centered(60.0, 64, 48).unwrap();
    let view = scene.render_analytic(&scene.reference_pose, &k);
    let pm = PointMap::from_depth(&view.depth, &view.rgb, &k).unwrap();

    // the point map carries its own focal length
    let f = estimate_focal_weiszfeld(&pm, WeiszfeldOptions::default()).unwrap();
    assert!((f - 60.0).abs() < 1e-3, "{f}");

    let cloud = cloud_from_pointmaps(&[(pm, scene.reference_pose)], 0.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.ply");
    write_ply_file(&cloud, &path).unwrap();
    let back = read_ply_file(&path).unwrap();
    // positions are stored as float32; a second write is byte-identical
    assert_eq!(back.len(), cloud.len());
    assert_eq!(back.colors(), cloud.colors());
    for (a, b) in back.positions().iter().zip(cloud.positions()) {
        assert!((a - b).amax() <= 1e-6 * b.coords.amax().max(1.0));
    }
    let again = dir.path().join("again.ply");
    write_ply_file(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());

    // re-rendering from the source pose fills every pixel the analytic view saw
    let r = render(&back, &scene.reference_pose, &k, 0);
    for (m, d) in r.mask.values().iter().zip(view.depth.values()) {
        assert_eq!(*m == 0, d.is_finite());
    }
}

#[test]
fn planning_through_a_remote_oracle_matches_local() {
    let scene = Arc::new(make_synthetic_scene(&SceneRecipe::named("occluder", 30.0, 4)).unwrap());
    let k = CameraIntrinsics::centered(40.0, 48, 48).unwrap();
    let pose = scene.reference_pose;
    let view = scene.render_analytic(&pose, &k);
    let pm = PointMap::from_depth(&view.depth, &view.rgb, &k).unwrap();
    let init = cloud_from_pointmaps(&[(pm, pose)], 0.0).unwrap();
    let space = build_search_space(&render(&init, &pose, &k, 1), &pose, &k, 12, 4).unwrap();
    let reference = Reference { image: view.rgb, pose };
    let cfg = PlannerConfig {
        max_steps: 1,
        frames_per_segment: 4,
        ..Default::default()
    };

    let oracle = Arc::new(OracleCompleter::new(Arc::clone(&scene)));
    let local = plan_and_synthesize(&init, &reference, &k, &cfg, &space.left_half(), oracle.as_ref()).unwrap();
    let server = service::spawn("127.0.0.1:0", oracle).unwrap();
    let remote = RemoteCompleter::new(server.endpoint(), Duration::from_secs(30));
    let over_wire = plan_and_synthesize(&init, &reference, &k, &cfg, &space.left_half(), &remote).unwrap();

    // analytic colors and the reference are 8-bit exact, so the wire changes nothing
    assert_eq!(local.records.len(), 2);
    let chosen: Vec<_> = local.records.iter().map(|r| r.chosen_index).collect();
    let chosen_remote: Vec<_> = over_wire.records.iter().map(|r| r.chosen_index).collect();
    assert_eq!(chosen, chosen_remote);
    assert!(local.cloud.bit_eq(&over_wire.cloud));

    let before = surface_coverage(&init, &scene, 5000, 0.05, 1);
    let after = surface_coverage(&local.cloud, &scene, 5000, 0.05, 1);
    assert!(after > before, "{before} -> {after}");
}
