use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const ENDPOINT_ENV: &str = "NBVSYNTH_ENDPOINT";

#[derive(Parser, Debug, Clone)]
#[command(name = "nbvsynth", version, about = "Next-best-view planning and iterative view synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Build a synthetic scene, its reference view and initial cloud.
    Synth(SynthArgs),
    /// Render a point cloud along a trajectory.
    Render(RenderArgs),
    /// Plan next-best views over the left then right half of the search space.
    Plan(PlanArgs),
    /// Run the fixed circular camera path for comparison.
    Baseline(BaselineArgs),
    /// Compute trajectory, image or coverage metrics.
    Eval(EvalArgs),
    /// Serve a completer over HTTP.
    Serve(ServeArgs),
    /// Re-run a recorded command and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CameraArgs {
    #[arg(long, default_value_t = 128)]
    pub width: u32,
    #[arg(long, default_value_t = 128)]
    pub height: u32,
    /// Focal length in pixels; principal point is the image center.
    #[arg(long, default_value_t = 100.0)]
    pub focal: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(long)]
    pub recipe: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scene samples per square unit of surface.
    #[arg(long, default_value_t = 200.0)]
    pub density: f64,
    /// Scene dimensions `w,h,d`, recipe-specific.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub dims: Option<Vec<f64>>,
    #[command(flatten)]
    pub camera: CameraArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RenderArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[arg(long)]
    pub trajectory: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub splat_radius: u32,
    #[arg(long)]
    pub out: PathBuf,
}

/// Planner settings; flags override `--config`, which overrides defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct PlannerArgs {
    /// JSON planner config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "N")]
    pub max_steps: Option<usize>,
    #[arg(long = "K")]
    pub candidates: Option<usize>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long = "L")]
    pub frames_per_segment: Option<usize>,
    #[arg(long)]
    pub neighborhood_deg: Option<f64>,
    #[arg(long)]
    pub grid_azimuth: Option<usize>,
    #[arg(long)]
    pub grid_elevation: Option<usize>,
    #[arg(long)]
    pub splat_radius: Option<u32>,
    #[arg(long)]
    pub voxel_rho: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompleterKind {
    Passthrough,
    Oracle,
    Remote,
}

#[derive(Args, Debug, Clone)]
pub struct CompleterArgs {
    #[arg(long, value_enum, default_value = "passthrough")]
    pub completer: CompleterKind,
    /// Scene description JSON, required by the oracle completer.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Base URL of a remote completion service.
    #[arg(long, env = ENDPOINT_ENV)]
    pub endpoint: Option<String>,
    #[arg(long, default_value_t = 120.0)]
    pub timeout_s: f64,
    #[arg(long, default_value_t = 0)]
    pub retries: u32,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Halves {
    Left,
    Right,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct SceneInputs {
    /// Initial point cloud (PLY).
    #[arg(long)]
    pub cloud: PathBuf,
    /// Trajectory JSON whose first pose is the reference camera.
    #[arg(long)]
    pub camera: PathBuf,
    /// Reference image (PNG).
    #[arg(long)]
    pub reference: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct PlanArgs {
    #[command(flatten)]
    pub inputs: SceneInputs,
    #[command(flatten)]
    pub planner: PlannerArgs,
    #[command(flatten)]
    pub completer: CompleterArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub halves: Halves,
    /// Continue the right half from where the left half ended instead of the reference pose.
    #[arg(long)]
    pub no_reset: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub inputs: SceneInputs,
    #[command(flatten)]
    pub planner: PlannerArgs,
    #[command(flatten)]
    pub completer: CompleterArgs,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    #[arg(long, default_value_t = 20.0)]
    pub step_deg: f64,
    #[arg(long, value_enum, default_value = "both")]
    pub halves: Halves,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub what: EvalCommand,
}

#[derive(Subcommand, Debug, Clone)]
pub enum EvalCommand {
    /// Rotation and translation distance between two trajectories.
    Trajectory {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        /// Directory for `report.json` and the run manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// PSNR between frames; each side is a PNG or a directory of PNGs.
    Frames {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        ground_truth: PathBuf,
        /// Directory for `report.json` and the run manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of ground-truth surface samples near each cloud.
    Coverage {
        #[arg(long = "cloud", required = true)]
        clouds: Vec<PathBuf>,
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value_t = 20000)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for `report.json` and the run manifest.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub bind: String,
    #[arg(long, value_enum, default_value = "passthrough")]
    pub completer: CompleterKind,
    #[arg(long)]
    pub scene: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Where the replayed outputs go.
    #[arg(long)]
    pub out: PathBuf,
}
