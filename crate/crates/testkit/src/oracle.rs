//! Brute-force reference implementations.
//!
//! Nothing here calls into `scha_core::reduction` or `scha_core::render`; the
//! rules are restated from scratch so the library can be checked against them.

use std::collections::BTreeMap;

use scha_core::model::{Analysis, NoteRef, Part};

/// Weight of every original note on each note of maximal depth, found by
/// pushing each note's weight through the layers one absorption at a time.
///
/// Rows follow `Analysis::notes()`; columns are the notes of depth
/// `max_depth` in the same order.
pub fn ancestor_matrix(a: &Analysis) -> Vec<Vec<f64>> {
    let notes = a.notes();
    let depth: BTreeMap<NoteRef, u32> = notes.iter().map(|&n| (n, a.depth(n).unwrap())).collect();
    let top = a.max_depth();
    let finals: Vec<NoteRef> = notes.iter().copied().filter(|n| depth[n] >= top).collect();

    notes
        .iter()
        .map(|&start| {
            let mut weights: BTreeMap<NoteRef, f64> = BTreeMap::from([(start, 1.0)]);
            for layer in 0..top {
                let alive = |n: &NoteRef| depth[n] > layer;
                let mut next: BTreeMap<NoteRef, f64> = BTreeMap::new();
                for (&n, &w) in &weights {
                    if alive(&n) {
                        *next.entry(n).or_default() += w;
                        continue;
                    }
                    let survivors: Vec<NoteRef> = notes.iter().copied().filter(alive).collect();
                    for (target, share) in absorb(n, &survivors) {
                        *next.entry(target).or_default() += w * share;
                    }
                }
                weights = next;
            }
            finals.iter().map(|f| weights.get(f).copied().unwrap_or(0.0)).collect()
        })
        .collect()
}

/// Targets for one absorbed note given every survivor of the layer.
fn absorb(n: NoteRef, survivors: &[NoteRef]) -> Vec<(NoteRef, f64)> {
    let same: Vec<&NoteRef> = survivors.iter().filter(|s| s.part == n.part).collect();
    let left = same.iter().filter(|s| s.index < n.index).max_by_key(|s| s.index);
    if let Some(s) = left {
        return vec![(**s, 1.0)];
    }
    let right = same.iter().filter(|s| s.index > n.index).min_by_key(|s| s.index);
    if let Some(s) = right {
        return vec![(**s, 1.0)];
    }
    assert!(!n.part.is_outer(), "{n} has no survivor; generator should reject this");

    let in_part = |p: Part| survivors.iter().filter(move |s| s.part == p);
    let i = n.index as i64;
    type Ranked = ((i64, i64, usize, usize), NoteRef, NoteRef);
    let mut candidates: Vec<Ranked> = Vec::new();
    for s in in_part(Part::Soprano) {
        for b in in_part(Part::Bass) {
            let (ds, db) = (s.index as i64 - i, b.index as i64 - i);
            // on opposite sides, or at least one of them in the same verticality
            if ds.signum() * db.signum() > 0 {
                continue;
            }
            let near = ds.abs().min(db.abs());
            let far = ds.abs().max(db.abs());
            candidates.push(((near, far, s.index, b.index), *s, *b));
        }
    }
    candidates.sort_by_key(|c| c.0);
    let (_, s, b) = candidates.first().copied().expect("inner note without outer pair");
    vec![(s, 0.5), (b, 0.5)]
}

/// Maximal runs (length >= 2) of consecutive notes of depth >= `level`, as
/// slot indices of the first and last note of each run.
pub fn depth_runs(a: &Analysis, part: Part, level: u32) -> Vec<(usize, usize)> {
    let notes: Vec<(usize, u32)> = a.voice(part).notes().map(|(i, _, d)| (i, d)).collect();
    let mut runs = Vec::new();
    let mut k = 0;
    while k < notes.len() {
        if notes[k].1 < level {
            k += 1;
            continue;
        }
        let mut e = k;
        while e + 1 < notes.len() && notes[e + 1].1 >= level {
            e += 1;
        }
        if e > k {
            runs.push((notes[k].0, notes[e].0));
        }
        k = e + 1;
    }
    runs
}

/// `(start, end, level)` for every structural pair with notes between them.
pub fn slur_triples(a: &Analysis, part: Part) -> Vec<(usize, usize, u32)> {
    let notes: Vec<(usize, u32)> = a.voice(part).notes().map(|(i, _, d)| (i, d)).collect();
    let mut out = Vec::new();
    for level in 1..=a.max_depth() {
        let structural: Vec<usize> = (0..notes.len()).filter(|&k| notes[k].1 >= level).collect();
        for w in structural.windows(2) {
            if w[1] - w[0] > 1 {
                out.push((notes[w[0]].0, notes[w[1]].0, level));
            }
        }
    }
    out
}
