//! Heterogeneous directed score graph.
//!
//! Nodes are note onsets (a hold extends the note before it rather than
//! starting a node). Edges come in five kinds:
//!
//! * forward: consecutive onsets in a voice with no rest between them
//! * rest: consecutive onsets in a voice separated by at least one rest
//! * onset: notes in different voices starting on the same verticality (both directions)
//! * sustain: a held note to every note that starts while it is still sounding
//! * linear(k): a note to the nearest later note, within a window, lying `k` semitones away
//!
//! The graph is equivalent to one boolean adjacency matrix per edge kind plus
//! a node feature table.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::model::{Analysis, NoteRef, Part, SlotContent};
use crate::pitch::PitchSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown feature column {0:?}")]
    Feature(String),
    #[error("metric-strength needs a meter")]
    Meter,
}

impl GraphError {
    pub fn code(&self) -> &'static str {
        match self {
            GraphError::Feature(_) => "E_FEATURE",
            GraphError::Meter => "E_METER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Forward,
    Onset,
    Sustain,
    Rest,
    /// Signed semitone distance from source to target.
    Linear(i32),
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Forward => "forward",
            EdgeKind::Onset => "onset",
            EdgeKind::Sustain => "sustain",
            EdgeKind::Rest => "rest",
            EdgeKind::Linear(_) => "linear",
        }
    }

    /// Graphviz line style for the kind.
    pub fn dot_style(self) -> &'static str {
        match self {
            EdgeKind::Forward => "solid",
            EdgeKind::Onset => "dotted",
            EdgeKind::Sustain => "dashed",
            EdgeKind::Rest => "bold",
            EdgeKind::Linear(_) => "tapered",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Linear(k) => write!(f, "linear({k:+})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphConfig {
    pub linear_intervals: BTreeSet<i32>,
    /// How many verticalities ahead a linear edge may reach.
    pub linear_window: usize,
    pub linear_same_voice: bool,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            linear_intervals: [-2, -1, 1, 2].into_iter().collect(),
            linear_window: 8,
            linear_same_voice: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphNode {
    pub note: NoteRef,
    pub pitch: PitchSpec,
    /// Slots covered, including trailing holds.
    pub duration: usize,
}

impl GraphNode {
    pub fn onset(&self) -> usize {
        self.note.index
    }

    pub fn id(&self) -> String {
        self.note.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    PitchClass,
    Octave,
    Duration,
    PositionAbsolute,
    PositionRelative,
    MetricStrength,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::PitchClass,
        Feature::Octave,
        Feature::Duration,
        Feature::PositionAbsolute,
        Feature::PositionRelative,
        Feature::MetricStrength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PitchClass => "pitch-class",
            Feature::Octave => "octave",
            Feature::Duration => "duration",
            Feature::PositionAbsolute => "position-absolute",
            Feature::PositionRelative => "position-relative",
            Feature::MetricStrength => "metric-strength",
        }
    }
}

impl FromStr for Feature {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| GraphError::Feature(s.to_string()))
    }
}

/// Node feature matrix with named columns; row `r` belongs to node `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<Feature>,
    pub rows: Vec<Vec<f64>>,
}

impl FeatureTable {
    pub fn as_matrix(&self) -> Matrix {
        if self.rows.is_empty() {
            return Matrix::zeros(0, self.columns.len());
        }
        Matrix::from_rows(&self.rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    pub features: FeatureTable,
}

impl ScoreGraph {
    pub fn edges_of(&self, kind: EdgeKind) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.kind == kind)
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges_of(kind).count()
    }

    /// Distinct edge kinds present, in a fixed order.
    pub fn kinds(&self) -> Vec<EdgeKind> {
        self.edges.iter().map(|e| e.kind).collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Boolean adjacency matrix (n x n) of one edge kind.
    pub fn adjacency(&self, kind: EdgeKind) -> Matrix {
        let n = self.nodes.len();
        let mut m = Matrix::zeros(n, n);
        for e in self.edges_of(kind) {
            m.set(e.src, e.dst, 1.0);
        }
        m
    }
}

/// Nodes of `a` in verticality-then-part order.
fn graph_nodes(a: &Analysis) -> Vec<GraphNode> {
    a.notes()
        .into_iter()
        .map(|note| {
            let voice = a.voice(note.part);
            GraphNode {
                note,
                pitch: voice.slots[note.index].pitch().expect("notes() yields pitches"),
                duration: voice.duration(note.index),
            }
        })
        .collect()
}

/// The default feature columns: everything, metric strength only with a meter.
pub fn default_features(a: &Analysis) -> Vec<Feature> {
    Feature::ALL
        .into_iter()
        .filter(|f| *f != Feature::MetricStrength || a.meter.is_some())
        .collect()
}

pub fn build_graph(a: &Analysis, cfg: &GraphConfig) -> ScoreGraph {
    let nodes = graph_nodes(a);
    let position: BTreeMap<NoteRef, usize> =
        nodes.iter().enumerate().map(|(k, n)| (n.note, k)).collect();
    let mut edges = Vec::new();

    for part in Part::ALL {
        let voice = a.voice(part);
        let onsets: Vec<usize> = voice.notes().map(|(i, _, _)| i).collect();
        for pair in onsets.windows(2) {
            let rest_between = voice.slots[pair[0] + 1..pair[1]]
                .iter()
                .any(|ev| ev.content == SlotContent::Rest);
            edges.push(Edge {
                src: position[&NoteRef::new(part, pair[0])],
                dst: position[&NoteRef::new(part, pair[1])],
                kind: if rest_between { EdgeKind::Rest } else { EdgeKind::Forward },
            });
        }
    }

    let mut by_onset: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (k, n) in nodes.iter().enumerate() {
        by_onset.entry(n.onset()).or_default().push(k);
    }
    for group in by_onset.values() {
        for &u in group {
            for &v in group {
                if u != v {
                    edges.push(Edge { src: u, dst: v, kind: EdgeKind::Onset });
                }
            }
        }
    }

    for (u, node) in nodes.iter().enumerate() {
        for j in node.onset() + 1..node.onset() + node.duration {
            for &v in by_onset.get(&j).into_iter().flatten() {
                edges.push(Edge { src: u, dst: v, kind: EdgeKind::Sustain });
            }
        }
    }

    for (u, node) in nodes.iter().enumerate() {
        for &k in &cfg.linear_intervals {
            let target = nodes.iter().enumerate().find(|(_, v)| {
                v.onset() > node.onset()
                    && v.onset() - node.onset() <= cfg.linear_window
                    && (!cfg.linear_same_voice || v.note.part == node.note.part)
                    && v.pitch.midi() as i32 - node.pitch.midi() as i32 == k
            });
            if let Some((v, _)) = target {
                edges.push(Edge { src: u, dst: v, kind: EdgeKind::Linear(k) });
            }
        }
    }

    let mut seen = HashSet::new();
    edges.retain(|e| e.src != e.dst && seen.insert(*e));

    let features = feature_table(a, &nodes, &default_features(a));
    ScoreGraph { nodes, edges, features }
}

/// Feature table for the graph nodes of `a` with the named columns.
pub fn node_features(a: &Analysis, columns: &[&str]) -> Result<FeatureTable, GraphError> {
    let columns = columns
        .iter()
        .map(|c| c.parse::<Feature>())
        .collect::<Result<Vec<_>, _>>()?;
    if columns.contains(&Feature::MetricStrength) && a.meter.is_none() {
        return Err(GraphError::Meter);
    }
    Ok(feature_table(a, &graph_nodes(a), &columns))
}

fn feature_table(a: &Analysis, nodes: &[GraphNode], columns: &[Feature]) -> FeatureTable {
    let nv = a.nv();
    let rows = nodes
        .iter()
        .map(|n| {
            columns
                .iter()
                .map(|f| match f {
                    Feature::PitchClass => n.pitch.pitch_class() as f64,
                    Feature::Octave => n.pitch.octave() as f64,
                    Feature::Duration => n.duration as f64,
                    Feature::PositionAbsolute => n.onset() as f64,
                    Feature::PositionRelative if nv <= 1 => 0.0,
                    Feature::PositionRelative => n.onset() as f64 / (nv - 1) as f64,
                    Feature::MetricStrength => {
                        a.meter.map_or(0.0, |m| m.strength(n.onset()) as f64)
                    }
                })
                .collect()
        })
        .collect();
    FeatureTable {
        columns: columns.to_vec(),
        rows,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgelistJson,
    Dot,
}

#[derive(Serialize)]
struct EdgelistDoc<'a> {
    nodes: Vec<EdgelistNode<'a>>,
    edges: Vec<EdgelistEdge>,
}

#[derive(Serialize)]
struct EdgelistNode<'a> {
    id: String,
    part: &'a str,
    index: usize,
    pitch: String,
    features: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct EdgelistEdge {
    src: String,
    dst: String,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    interval: Option<i32>,
}

pub fn export_graph(g: &ScoreGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::EdgelistJson => export_edgelist(g),
        GraphFormat::Dot => export_dot(g),
    }
}

fn export_edgelist(g: &ScoreGraph) -> String {
    let nodes = g
        .nodes
        .iter()
        .enumerate()
        .map(|(k, n)| EdgelistNode {
            id: n.id(),
            part: n.note.part.name(),
            index: n.note.index,
            pitch: n.pitch.to_string(),
            features: g
                .features
                .columns
                .iter()
                .zip(g.features.rows.get(k).into_iter().flatten())
                .map(|(f, v)| (f.name(), *v))
                .collect(),
        })
        .collect();
    let edges = g
        .edges
        .iter()
        .map(|e| EdgelistEdge {
            src: g.nodes[e.src].id(),
            dst: g.nodes[e.dst].id(),
            kind: e.kind.name(),
            interval: match e.kind {
                EdgeKind::Linear(k) => Some(k),
                _ => None,
            },
        })
        .collect();
    serde_json::to_string(&EdgelistDoc { nodes, edges }).expect("edge list serializes")
}

fn export_dot(g: &ScoreGraph) -> String {
    let mut out = String::from("digraph score {\n");
    for n in &g.nodes {
        let _ = writeln!(out, "  \"{}\" [label=\"{} {}\"];", n.id(), n.id(), n.pitch);
    }
    for e in &g.edges {
        let label = match e.kind {
            EdgeKind::Linear(k) => format!("linear {k:+}"),
            other => other.name().to_string(),
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [kind=\"{}\", label=\"{}\", style={}];",
            g.nodes[e.src].id(),
            g.nodes[e.dst].id(),
            e.kind.name(),
            label,
            e.kind.dot_style()
        );
    }
    out.push_str("}\n");
    out
}
