use super::{apply_references, CompleterError, CompletionRequest, CompletionResponse, ViewCompleter};

/// Returns the renders unchanged apart from the reference frames; depth is
/// the render depth.
#[derive(Debug, Clone, Copy, Default)]
pub struct PassthroughCompleter;

impl ViewCompleter for PassthroughCompleter {
    fn name(&self) -> &str {
        "passthrough"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, CompleterError> {
        req.validate()?;
        let mut frames: Vec<_> = req.renders.iter().map(|r| r.rgb.clone()).collect();
        apply_references(&mut frames, &req.references);
        Ok(CompletionResponse {
            frames,
            depths: Some(req.renders.iter().map(|r| r.depth.clone()).collect()),
        })
    }
}
