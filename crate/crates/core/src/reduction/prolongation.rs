//! Prolongations read off note depths.
//!
//! At level `L` the notes of a voice with depth `>= L` are the structural
//! notes. Each pair of consecutive structural notes `X`, `Z` forms a
//! prolongation `X (Y) Z`, where `Y` are the notes between them (all of depth
//! `< L`).

use serde::Serialize;

use super::ReductionError;
use crate::model::{Analysis, CustomProlongation, NoteRef, Part};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prolongation {
    pub level: u32,
    pub voice: Part,
    pub start: NoteRef,
    pub middles: Vec<NoteRef>,
    pub end: NoteRef,
}

impl Prolongation {
    pub fn is_trivial(&self) -> bool {
        self.middles.is_empty()
    }
}

/// Derived prolongations for every level plus hand-entered ones.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ProlongationSet {
    /// Ordered by level, voice, then start index. Includes empty-middle pairs.
    pub derived: Vec<Prolongation>,
    pub custom: Vec<CustomProlongation>,
}

impl ProlongationSet {
    pub fn non_trivial(&self) -> impl Iterator<Item = &Prolongation> {
        self.derived.iter().filter(|p| !p.is_trivial())
    }
}

pub fn prolongations_at_level(a: &Analysis, level: u32) -> Result<Vec<Prolongation>, ReductionError> {
    let max = a.max_depth();
    if level == 0 || level > max {
        return Err(ReductionError::Level { level, max });
    }
    let mut out = Vec::new();
    for part in Part::ALL {
        let mut last: Option<NoteRef> = None;
        let mut middles = Vec::new();
        for (index, _, depth) in a.voice(part).notes() {
            let note = NoteRef::new(part, index);
            if depth < level {
                // notes before the first structural note belong to no pair
                if last.is_some() {
                    middles.push(note);
                }
                continue;
            }
            if let Some(start) = last {
                out.push(Prolongation {
                    level,
                    voice: part,
                    start,
                    middles: std::mem::take(&mut middles),
                    end: note,
                });
            }
            last = Some(note);
        }
    }
    Ok(out)
}

pub fn all_prolongations(a: &Analysis) -> ProlongationSet {
    let derived = (1..=a.max_depth())
        .flat_map(|level| prolongations_at_level(a, level).expect("level within 1..=max depth"))
        .collect();
    ProlongationSet {
        derived,
        custom: a.custom_prolongations.clone(),
    }
}

/// One `X ( Y ... ) Z` line per prolongation with a non-empty middle.
/// Derived prolongations come first (by level, voice, start), then custom ones.
pub fn export_kirlin_text(a: &Analysis) -> String {
    let set = all_prolongations(a);
    let mut out = String::new();
    let derived = set.non_trivial().map(|p| (p.start, &p.middles, p.end));
    let custom = set
        .custom
        .iter()
        .filter(|p| !p.middles.is_empty())
        .map(|p| (p.start, &p.middles, p.end));
    for (start, middles, end) in derived.chain(custom) {
        let middles = middles.iter().map(NoteRef::to_string).collect::<Vec<_>>().join(" ");
        out.push_str(&format!("{start} ( {middles} ) {end}\n"));
    }
    out
}
