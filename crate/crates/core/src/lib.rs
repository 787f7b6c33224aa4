//! Encoding, validation and analysis of Schenkerian analyses.
//!
//! An analysis is four aligned voices whose notes carry a structural depth.
//! From the depths this crate derives prolongations, a stack of clustering
//! matrices, a typed score graph, corpus statistics and rendered notation.

pub mod format;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod pitch;
pub mod reduction;
pub mod render;
pub mod stats;
pub mod validate;

#[cfg(test)]
mod testutil;

pub use format::{parse, serialize, ParseError};
pub use matrix::Matrix;
pub use model::{Analysis, NoteEvent, NoteRef, Part, SlotContent, Voice};
pub use pitch::{midi_number, Letter, PitchError, PitchSpec};
pub use reduction::{cluster_stack, ClusterOptions, ClusterStack, ReductionError};
pub use validate::{validate, Finding, Severity, ValidationReport};
