use std::path::{Path, PathBuf};

use clap::Parser;

use crate::args::{Cli, Command, ReplayArgs};
use crate::error::CliError;
use crate::manifest::{sha256_hex, RunManifest, RunStatus, MANIFEST_FILE};

/// `argv` with the value of `--out` replaced.
fn redirect_output(argv: &[String], out: &Path) -> Result<Vec<String>, CliError> {
    let out = out.display().to_string();
    let mut result = Vec::with_capacity(argv.len());
    let mut found = false;
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        if arg == "--out" {
            iter.next();
            result.push(arg.clone());
            result.push(out.clone());
            found = true;
        } else if arg.starts_with("--out=") {
            result.push(format!("--out={out}"));
            found = true;
        } else {
            result.push(arg.clone());
        }
    }
    if !found {
        return Err(CliError::Validation("recorded command has no --out".into()));
    }
    Ok(result)
}

fn absolute(p: &Path) -> Result<PathBuf, CliError> {
    std::path::absolute(p).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
}

pub fn run(a: &ReplayArgs) -> Result<(), CliError> {
    let recorded = RunManifest::read(&a.manifest)?;
    if recorded.status != RunStatus::Complete {
        return Err(CliError::Validation("cannot replay a run that did not complete".into()));
    }
    for (path, sha) in &recorded.inputs {
        let full = recorded.cwd.join(path);
        let bytes =
            std::fs::read(&full).map_err(|e| CliError::Validation(format!("input {}: {e}", full.display())))?;
        if &sha256_hex(&bytes) != sha {
            return Err(CliError::Validation(format!("input {} changed since the recorded run", full.display())));
        }
    }
    let out = absolute(&a.out)?;
    let argv = redirect_output(&recorded.argv, &out)?;
    let cli = Cli::try_parse_from(std::iter::once("nbvsynth".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Validation(format!("recorded arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_) | Command::Serve(_)) {
        return Err(CliError::Validation(format!("{} runs cannot be replayed", recorded.command)));
    }
    std::env::set_current_dir(&recorded.cwd)
        .map_err(|e| CliError::Validation(format!("{}: {e}", recorded.cwd.display())))?;
    crate::execute(cli, argv)?;

    let replayed = RunManifest::read(&out.join(MANIFEST_FILE))?;
    let mut mismatches = Vec::new();
    for (rel, sha) in &recorded.outputs {
        match replayed.outputs.get(rel) {
            Some(s) if s == sha => {}
            Some(_) => mismatches.push(format!("{rel}: hash differs")),
            None => mismatches.push(format!("{rel}: not produced")),
        }
    }
    for rel in replayed.outputs.keys().filter(|k| !recorded.outputs.contains_key(*k)) {
        mismatches.push(format!("{rel}: not in the recorded run"));
    }
    if mismatches.is_empty() {
        println!("replay: {} outputs identical", recorded.outputs.len());
        Ok(())
    } else {
        for m in &mismatches {
            eprintln!("mismatch: {m}");
        }
        Err(CliError::Internal(format!("replay produced {} mismatched outputs", mismatches.len())))
    }
}
