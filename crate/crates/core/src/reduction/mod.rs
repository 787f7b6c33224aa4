//! Reduction of an analysis: prolongations by depth and clustering matrices.

mod clustering;
mod prolongation;

pub use clustering::{
    build_cluster_matrix, cluster_assignment, cluster_stack, ClusterMatrix, ClusterOptions,
    ClusterStack, Infeasibility, LayerState, LiveNote,
};
pub use prolongation::{
    all_prolongations, export_kirlin_text, prolongations_at_level, Prolongation, ProlongationSet,
};

use thiserror::Error;

use crate::model::NoteRef;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("level {level} outside 1..={max}")]
    Level { level: u32, max: u32 },
    #[error("{note} has nowhere to cluster at layer {layer} ({reason:?})")]
    Infeasible {
        note: NoteRef,
        layer: usize,
        reason: Infeasibility,
    },
    #[error("cannot compose layers {from}..{to} of a {layers}-layer stack")]
    Bounds { from: usize, to: usize, layers: usize },
}

impl ReductionError {
    pub fn code(&self) -> &'static str {
        match self {
            ReductionError::Level { .. } => "E_LEVEL",
            ReductionError::Infeasible { .. } => "E_INFEASIBLE",
            ReductionError::Bounds { .. } => "E_BOUNDS",
        }
    }
}
