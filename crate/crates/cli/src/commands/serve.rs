use std::net::TcpListener;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use nbvsynth_core::completer::{service, OracleCompleter, PassthroughCompleter, ViewCompleter};

use super::load_scene_bytes;
use crate::args::{CompleterKind, ServeArgs};
use crate::error::CliError;

pub fn run(a: &ServeArgs) -> Result<(), CliError> {
    let completer: Arc<dyn ViewCompleter> = match a.completer {
        CompleterKind::Passthrough => Arc::new(PassthroughCompleter),
        CompleterKind::Oracle => {
            let path = a
                .scene
                .as_ref()
                .ok_or_else(|| CliError::Validation("--scene is required for the oracle completer".into()))?;
            let bytes =
                std::fs::read(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            Arc::new(OracleCompleter::new(Arc::new(load_scene_bytes(&bytes, path)?)))
        }
        CompleterKind::Remote => {
            return Err(CliError::Validation("serve cannot proxy to a remote completer".into()))
        }
    };
    let listener =
        TcpListener::bind(&a.bind).map_err(|e| CliError::Validation(format!("cannot bind {}: {e}", a.bind)))?;
    let addr = listener.local_addr().map_err(|e| CliError::Internal(e.to_string()))?;
    println!("serving {} completer on http://{addr}", completer.name());
    service::serve(listener, completer, Arc::new(AtomicBool::new(false)));
    Ok(())
}
