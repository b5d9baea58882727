//! Command-line orchestration for nbvsynth: every command reads explicit
//! input files, writes into one output directory, and records a manifest
//! that `replay` can re-run and verify.

pub mod args;
mod commands;
pub mod error;
pub mod manifest;

pub use args::{Cli, Command};
pub use error::CliError;
pub use manifest::{RunManifest, RunStatus};

use manifest::Run;

/// Runs a parsed command. `argv` (without the program name) is recorded in
/// the manifest for replay.
pub fn execute(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    let name = match &cli.command {
        Command::Synth(_) => "synth",
        Command::Render(_) => "render",
        Command::Plan(_) => "plan",
        Command::Baseline(_) => "baseline",
        Command::Eval(_) => "eval",
        Command::Serve(a) => return commands::serve::run(a),
        Command::Replay(a) => return commands::replay::run(a),
    };
    let mut run = Run::new(name, argv);
    let result = match &cli.command {
        Command::Synth(a) => commands::synth::run(&mut run, a),
        Command::Render(a) => commands::render::run(&mut run, a),
        Command::Plan(a) => commands::plan::run(&mut run, a),
        Command::Baseline(a) => commands::baseline::run(&mut run, a),
        Command::Eval(a) => commands::eval::run(&mut run, a),
        Command::Serve(_) | Command::Replay(_) => unreachable!(),
    };
    run.finish(result.as_ref().err())?;
    result
}
