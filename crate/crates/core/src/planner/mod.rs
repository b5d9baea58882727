//! Next-best-view planning over a forward-facing quarter sphere.

mod config;
mod plan;
mod select;
mod space;

pub use config::PlannerConfig;
pub use plan::{
    baseline_and_synthesize, plan_and_synthesize, PlanOutcome, PlanStepRecord, Reference, SegmentRecord,
};
pub use select::{argmax_utility, select_nbv, utility, Selection};
pub use space::{
    build_search_space, circular_baseline_trajectory, sample_candidate_indices, sample_candidates, GridPose,
    SearchSpace,
};

use crate::completer::CompleterError;
use crate::geometry::GeometryError;
use crate::pointcloud::CloudError;

#[derive(thiserror::Error, Debug)]
pub enum PlanError {
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error("reference render has no coverage")]
    DegenerateRender,
    #[error("asked for {requested} candidates but the grid only offers {available}")]
    NotEnoughCandidates { requested: usize, available: usize },
    #[error("no candidate poses to choose from")]
    NoCandidates,
    #[error("completer failed at step {step}: {source}")]
    Completer {
        step: usize,
        #[source]
        source: CompleterError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}
