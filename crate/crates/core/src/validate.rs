//! Validation of a parsed analysis.
//!
//! Besides re-checking the structural rules the parser enforces, this walks
//! every clustering layer and reports any depth-0 note that would have no
//! note to cluster into, so a report without errors guarantees that
//! [`cluster_stack`](crate::reduction::cluster_stack) succeeds.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{Analysis, NoteRef, Part, SlotContent};
use crate::reduction::{cluster_assignment, ClusterOptions, Infeasibility, LayerState, ReductionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: String,
    pub location: String,
    pub message: String,
}

impl Finding {
    pub fn error(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            severity: Severity::Error,
            code: code.to_string(),
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn warning(code: &str, location: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            severity: Severity::Warning,
            ..Finding::error(code, location, message)
        }
    }
}

/// `SEVERITY CODE location message`
impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.severity, self.code, self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn codes(&self) -> Vec<&str> {
        self.findings.iter().map(|f| f.code.as_str()).collect()
    }

    fn push(&mut self, finding: Finding) {
        self.findings.push(finding);
    }
}

pub fn validate(a: &Analysis, lenient: bool) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_structure(a, &mut report);
    if report.has_errors() {
        return report;
    }
    check_feasibility(a, lenient, &mut report);

    let has_notes = a.note_count() > 0;
    if has_notes && !a.voices.iter().flat_map(|v| &v.slots).any(|ev| ev.ursatz) {
        report.push(Finding::warning("W_NO_URSATZ", "$", "no note is marked as part of the Ursatz"));
    }
    if a.voice(Part::Soprano).is_empty() && a.voice(Part::Bass).is_empty() {
        report.push(Finding::warning(
            "W_NO_OUTER_NOTE",
            "$",
            "neither soprano nor bass contains a note",
        ));
    }
    report
}

fn check_structure(a: &Analysis, report: &mut ValidationReport) {
    let nv = a.nv();
    if nv == 0 {
        report.push(Finding::error("V_LENGTH", "voices", "an analysis needs at least one verticality"));
    }
    for voice in &a.voices {
        let name = voice.part.name();
        if voice.slots.len() != nv {
            report.push(Finding::error(
                "V_LENGTH",
                name,
                format!("{} slots, expected {nv}", voice.slots.len()),
            ));
            continue;
        }
        for (i, ev) in voice.slots.iter().enumerate() {
            let at = NoteRef::new(voice.part, i).to_string();
            if ev.content == SlotContent::Hold
                && (i == 0 || voice.slots[i - 1].content == SlotContent::Rest)
            {
                report.push(Finding::error("V_HOLD", at.clone(), "hold must follow a note or another hold"));
            }
            if ev.is_note() != ev.depth.is_some() {
                report.push(Finding::error("V_DEPTH", at, "depth must be present exactly on notes"));
            }
        }
    }
    if report.has_errors() {
        return;
    }
    let refs = a
        .cross_voice
        .iter()
        .flat_map(|s| [s.from, s.to])
        .chain(a.custom_prolongations.iter().flat_map(|p| {
            [p.start, p.end].into_iter().chain(p.middles.iter().copied())
        }));
    for note in refs {
        if !a.event(note).is_some_and(|ev| ev.is_note()) {
            report.push(Finding::error("V_INDEX", note.to_string(), "reference does not point at a note"));
        }
    }
}

fn check_feasibility(a: &Analysis, lenient: bool, report: &mut ValidationReport) {
    let max_depth = a.max_depth();
    let positive = |part: Part| a.voice(part).max_depth().is_some_and(|d| d > 0);
    let no_survivor = |location: String, message: String| {
        if lenient {
            Finding::warning("V_NO_SURVIVOR", location, message)
        } else {
            Finding::error("V_NO_SURVIVOR", location, message)
        }
    };
    let mut reported: BTreeSet<(&str, Part)> = BTreeSet::new();

    for part in Part::ALL {
        let voice = a.voice(part);
        let Some((first, _, _)) = voice.notes().next() else { continue };
        if voice.max_depth() != Some(0) {
            continue;
        }
        let at = NoteRef::new(part, first).to_string();
        if part.is_outer() {
            let mut finding = no_survivor(at, format!("every note of the {} has depth 0", part.name()));
            let other = if part == Part::Soprano { Part::Bass } else { Part::Soprano };
            if lenient && !positive(other) {
                finding.severity = Severity::Error;
            }
            report.push(finding);
            reported.insert(("V_NO_SURVIVOR", part));
        } else if !positive(Part::Soprano) || !positive(Part::Bass) {
            report.push(Finding::error(
                "V_INNER_NEEDS_OUTER",
                at,
                format!(
                    "the {} has no depth and needs positive-depth notes in both soprano and bass",
                    part.name()
                ),
            ));
            reported.insert(("V_INNER_NEEDS_OUTER", part));
        }
    }

    let mut state = LayerState::initial(a);
    for layer in 0..max_depth {
        if !state.has_zero_depth() {
            report.push(Finding::warning(
                "W_ALL_POSITIVE",
                format!("layer {layer}"),
                format!("no note reaches depth 0 at layer {layer}; the layer is an identity"),
            ));
        }
        for live in state.notes().iter().filter(|n| n.depth == 0) {
            let strict = cluster_assignment(&state, live.note, ClusterOptions::default());
            let Err(ReductionError::Infeasible { reason, .. }) = strict else { continue };
            let part = live.note.part;
            let at = live.note.to_string();
            match reason {
                Infeasibility::NoSurvivor => {
                    if !reported.insert(("V_NO_SURVIVOR", part)) {
                        continue;
                    }
                    let message = format!("the {} has no surviving note at layer {layer}", part.name());
                    let mut finding = no_survivor(at, message);
                    if lenient
                        && cluster_assignment(&state, live.note, ClusterOptions { lenient: true }).is_err()
                    {
                        finding.severity = Severity::Error;
                        finding.message.push_str(" and the other outer voice has none either");
                    }
                    report.push(finding);
                }
                Infeasibility::InnerNeedsOuter => {
                    if !reported.insert(("V_INNER_NEEDS_OUTER", part)) {
                        continue;
                    }
                    report.push(Finding::error(
                        "V_INNER_NEEDS_OUTER",
                        at,
                        format!(
                            "no soprano and bass survivors on opposite sides of {} at layer {layer}",
                            live.note
                        ),
                    ));
                }
            }
        }
        state = state.next();
    }
}
