//! Conversion of an analysis into a stack of clustering matrices.
//!
//! Layer `l` maps the notes still alive at that layer (rows) onto the notes
//! that survive it (columns). A note survives while its depth, decremented
//! once per layer, is positive. Notes reaching depth 0 are absorbed:
//!
//! 1. into the nearest surviving note of the same voice to the left;
//! 2. failing that, the nearest surviving note of the same voice to the right;
//! 3. failing that (inner voices only), half into a soprano survivor and half
//!    into a bass survivor lying on opposite sides of the note (or at it).
//!
//! Rows and columns are ordered by verticality, then soprano to bass.

use super::ReductionError;
use crate::matrix::Matrix;
use crate::model::{Analysis, NoteRef, Part};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClusterOptions {
    /// Lets an outer voice with no survivor fold into the other outer voice.
    pub lenient: bool,
}

/// Why a depth-0 note has nowhere to go.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Infeasibility {
    /// An outer voice has no surviving note of its own.
    NoSurvivor,
    /// An inner voice without survivors lacks a soprano/bass pair around it.
    InnerNeedsOuter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiveNote {
    pub note: NoteRef,
    /// Depth remaining at this layer.
    pub depth: u32,
}

/// The notes alive at one layer of the reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerState {
    layer: usize,
    notes: Vec<LiveNote>,
}

impl LayerState {
    pub fn initial(a: &Analysis) -> Self {
        let notes = a
            .notes()
            .into_iter()
            .map(|note| LiveNote {
                note,
                depth: a.depth(note).unwrap_or(0),
            })
            .collect();
        LayerState { layer: 0, notes }
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn notes(&self) -> &[LiveNote] {
        &self.notes
    }

    pub fn depth_of(&self, note: NoteRef) -> Option<u32> {
        self.notes.iter().find(|n| n.note == note).map(|n| n.depth)
    }

    pub fn survivors(&self) -> Vec<NoteRef> {
        self.notes
            .iter()
            .filter(|n| n.depth > 0)
            .map(|n| n.note)
            .collect()
    }

    pub fn has_zero_depth(&self) -> bool {
        self.notes.iter().any(|n| n.depth == 0)
    }

    /// Drops the absorbed notes and decrements the rest.
    pub fn next(&self) -> LayerState {
        LayerState {
            layer: self.layer + 1,
            notes: self
                .notes
                .iter()
                .filter(|n| n.depth > 0)
                .map(|n| LiveNote {
                    note: n.note,
                    depth: n.depth - 1,
                })
                .collect(),
        }
    }

    fn survivor_indices(&self, part: Part) -> impl Iterator<Item = usize> + '_ {
        self.notes
            .iter()
            .filter(move |n| n.note.part == part && n.depth > 0)
            .map(|n| n.note.index)
    }
}

/// Where the depth-0 note `note` goes at this layer, as (target, weight) pairs.
pub fn cluster_assignment(
    state: &LayerState,
    note: NoteRef,
    options: ClusterOptions,
) -> Result<Vec<(NoteRef, f64)>, ReductionError> {
    let (part, i) = (note.part, note.index);
    let infeasible = |reason| ReductionError::Infeasible {
        note,
        layer: state.layer,
        reason,
    };

    if let Some(j) = state.survivor_indices(part).filter(|&j| j < i).max() {
        return Ok(vec![(NoteRef::new(part, j), 1.0)]);
    }
    if let Some(j) = state.survivor_indices(part).filter(|&j| j > i).min() {
        return Ok(vec![(NoteRef::new(part, j), 1.0)]);
    }

    if part.is_outer() {
        if !options.lenient {
            return Err(infeasible(Infeasibility::NoSurvivor));
        }
        let other = if part == Part::Soprano {
            Part::Bass
        } else {
            Part::Soprano
        };
        return state
            .survivor_indices(other)
            .min_by_key(|&j| (j.abs_diff(i), j))
            .map(|j| vec![(NoteRef::new(other, j), 1.0)])
            .ok_or_else(|| infeasible(Infeasibility::NoSurvivor));
    }

    let sops: Vec<usize> = state.survivor_indices(Part::Soprano).collect();
    let basses: Vec<usize> = state.survivor_indices(Part::Bass).collect();
    // (nearer distance, farther distance, j1, j2), smallest wins
    type Key = (usize, usize, usize, usize);
    let mut best: Option<(Key, (usize, usize))> = None;
    for &j1 in &sops {
        for &j2 in &basses {
            let (d1, d2) = (j1.abs_diff(i), j2.abs_diff(i));
            let opposite = (i as i64 - j1 as i64) * (i as i64 - j2 as i64) <= 0;
            if !opposite {
                continue;
            }
            let key = (d1.min(d2), d1.max(d2), j1, j2);
            if best.is_none_or(|(k, _)| key < k) {
                best = Some((key, (j1, j2)));
            }
        }
    }
    let (_, (j1, j2)) = best.ok_or_else(|| infeasible(Infeasibility::InnerNeedsOuter))?;
    Ok(vec![
        (NoteRef::new(Part::Soprano, j1), 0.5),
        (NoteRef::new(Part::Bass, j2), 0.5),
    ])
}

/// One clustering layer: rows are the live notes, columns the survivors.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMatrix {
    pub matrix: Matrix,
    pub row_labels: Vec<NoteRef>,
    pub col_labels: Vec<NoteRef>,
}

impl ClusterMatrix {
    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }

    /// `{rows, cols, data, rowLabels, colLabels}` with `part:index` labels.
    pub fn to_json(&self) -> serde_json::Value {
        let labels = |l: &[NoteRef]| l.iter().map(|n| n.to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "rows": self.matrix.rows(),
            "cols": self.matrix.cols(),
            "data": self.matrix.to_rows(),
            "rowLabels": labels(&self.row_labels),
            "colLabels": labels(&self.col_labels),
        })
    }
}

pub fn build_cluster_matrix(
    state: &LayerState,
    options: ClusterOptions,
) -> Result<ClusterMatrix, ReductionError> {
    let row_labels: Vec<NoteRef> = state.notes.iter().map(|n| n.note).collect();
    let col_labels = state.survivors();
    let column = |note: NoteRef| {
        col_labels
            .binary_search(&note)
            .expect("assignment targets are survivors")
    };
    let mut matrix = Matrix::zeros(row_labels.len(), col_labels.len());
    for (r, live) in state.notes.iter().enumerate() {
        if live.depth > 0 {
            matrix.set(r, column(live.note), 1.0);
            continue;
        }
        for (target, weight) in cluster_assignment(state, live.note, options)? {
            let c = column(target);
            matrix.set(r, c, matrix.get(r, c) + weight);
        }
    }
    Ok(ClusterMatrix {
        matrix,
        row_labels,
        col_labels,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterStack {
    pub layers: Vec<ClusterMatrix>,
    /// Total number of notes in the analysis.
    pub n0: usize,
}

impl ClusterStack {
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.layers.iter().map(ClusterMatrix::shape).collect()
    }

    /// `{"layers": [...]}` export document.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "layers": self.layers.iter().map(ClusterMatrix::to_json).collect::<Vec<_>>(),
        })
    }

    /// Product of layers `i..j`, mapping layer-`i` notes onto layer-`j` notes.
    pub fn compose(&self, i: usize, j: usize) -> Result<ClusterMatrix, ReductionError> {
        if i >= j || j > self.layers.len() {
            return Err(ReductionError::Bounds {
                from: i,
                to: j,
                layers: self.layers.len(),
            });
        }
        let matrix = self.layers[i + 1..j]
            .iter()
            .fold(self.layers[i].matrix.clone(), |acc, layer| acc.mul(&layer.matrix));
        Ok(ClusterMatrix {
            matrix,
            row_labels: self.layers[i].row_labels.clone(),
            col_labels: self.layers[j - 1].col_labels.clone(),
        })
    }
}

/// Builds one matrix per depth level: build, drop absorbed notes, decrement, repeat.
pub fn cluster_stack(a: &Analysis, options: ClusterOptions) -> Result<ClusterStack, ReductionError> {
    let mut state = LayerState::initial(a);
    let n0 = state.notes.len();
    let mut layers = Vec::with_capacity(a.max_depth() as usize);
    for _ in 0..a.max_depth() {
        layers.push(build_cluster_matrix(&state, options)?);
        state = state.next();
    }
    Ok(ClusterStack { layers, n0 })
}
