//! The view completer: given point-cloud renders along a camera path plus
//! reference images, produce full frames (and optionally depth) for every pose.
//!
//! Contract, enforced by [`validate_response`]:
//! - exactly one frame per pose, each the size of the camera image;
//! - frames at reference indices are bit-identical to the references;
//! - depths, when present, are finite and positive wherever the input render
//!   had coverage.

mod oracle;
mod passthrough;
mod remote;
pub mod service;
pub mod wire;

pub use oracle::OracleCompleter;
pub use passthrough::PassthroughCompleter;
pub use remote::{remote_complete, RemoteCompleter};

use std::collections::HashSet;

use crate::geometry::Trajectory;
use crate::image::{DepthMap, RgbImage};
use crate::renderer::RenderOutput;

#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum CompleterError {
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("transport error: {0}")]
    TransportError(String),
    #[error("protocol error: {0}")]
    ProtocolError(String),
}

/// A reference image pinned to a position in the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceImage {
    pub index: usize,
    pub image: RgbImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub request_id: String,
    pub renders: Vec<RenderOutput>,
    pub trajectory: Trajectory,
    pub references: Vec<ReferenceImage>,
}

impl CompletionRequest {
    pub fn new(
        request_id: impl Into<String>,
        renders: Vec<RenderOutput>,
        trajectory: Trajectory,
        references: Vec<ReferenceImage>,
    ) -> Result<Self, CompleterError> {
        let req = Self {
            request_id: request_id.into(),
            renders,
            trajectory,
            references,
        };
        req.validate()?;
        Ok(req)
    }

    pub fn len(&self) -> usize {
        self.trajectory.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn validate(&self) -> Result<(), CompleterError> {
        let cv = CompleterError::ContractViolation;
        let l = self.trajectory.len();
        if self.renders.len() != l {
            return Err(cv(format!("{} renders for {l} poses", self.renders.len())));
        }
        let k = self.trajectory.intrinsics();
        for (i, r) in self.renders.iter().enumerate() {
            if (r.width(), r.height()) != (k.width, k.height) || !r.is_consistent() {
                return Err(cv(format!("render {i} is malformed or not {}x{}", k.width, k.height)));
            }
        }
        let mut seen = HashSet::new();
        for r in &self.references {
            if r.index >= l {
                return Err(cv(format!("reference index {} out of range 0..{l}", r.index)));
            }
            if !seen.insert(r.index) {
                return Err(cv(format!("duplicate reference index {}", r.index)));
            }
            if (r.image.width(), r.image.height()) != (k.width, k.height) {
                return Err(cv(format!("reference {} has the wrong size", r.index)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResponse {
    pub frames: Vec<RgbImage>,
    pub depths: Option<Vec<DepthMap>>,
}

/// Something that turns point-cloud renders into finished views.
pub trait ViewCompleter: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResponse, CompleterError>;
}

/// Checks a response against the request it answers.
pub fn validate_response(req: &CompletionRequest, resp: &CompletionResponse) -> Result<(), CompleterError> {
    let cv = CompleterError::ContractViolation;
    let l = req.len();
    let k = req.trajectory.intrinsics();
    if resp.frames.len() != l {
        return Err(cv(format!("{} frames for {l} poses", resp.frames.len())));
    }
    for (i, f) in resp.frames.iter().enumerate() {
        if (f.width(), f.height()) != (k.width, k.height) {
            return Err(cv(format!("frame {i} is {}x{}", f.width(), f.height())));
        }
    }
    for r in &req.references {
        if !resp.frames[r.index].bit_eq(&r.image) {
            return Err(cv(format!("frame {} differs from its reference image", r.index)));
        }
    }
    if let Some(depths) = &resp.depths {
        if depths.len() != l {
            return Err(cv(format!("{} depth maps for {l} poses", depths.len())));
        }
        for (i, (d, render)) in depths.iter().zip(&req.renders).enumerate() {
            if (d.width(), d.height()) != (k.width, k.height) {
                return Err(cv(format!("depth {i} is {}x{}", d.width(), d.height())));
            }
            let bad = d
                .values()
                .iter()
                .zip(render.mask.values())
                .position(|(&z, &m)| m == 0 && !(z.is_finite() && z > 0.0));
            if let Some(p) = bad {
                return Err(cv(format!("depth {i} is not positive at covered pixel {p}")));
            }
        }
    }
    Ok(())
}

/// Copies the reference images over their frames.
pub(crate) fn apply_references(frames: &mut [RgbImage], references: &[ReferenceImage]) {
    for r in references {
        frames[r.index] = r.image.clone();
    }
}
