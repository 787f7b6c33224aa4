//! Corpus statistics: excerpt lengths, depth counts and interval histograms.
//!
//! [`CorpusStats`] is a commutative monoid: per-file values can be computed
//! independently and merged in any order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::model::{Analysis, Part, SlotContent};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("interval histograms are defined for the treble and bass only, not the {0}")]
    Voice(&'static str),
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        "E_VOICE"
    }
}

/// Slots where the soprano or the bass sounds (a note or a hold).
pub fn verticality_count(a: &Analysis) -> usize {
    let sounding = |part: Part, i: usize| {
        matches!(
            a.voice(part).slots[i].content,
            SlotContent::Pitch(_) | SlotContent::Hold
        )
    };
    (0..a.nv())
        .filter(|&i| sounding(Part::Soprano, i) || sounding(Part::Bass, i))
        .count()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DepthStats {
    /// Notes whose depth is exactly `d`.
    pub literal: BTreeMap<u32, u64>,
    /// Notes whose depth is at least `d`.
    pub inclusive: BTreeMap<u32, u64>,
    /// Number of excerpts whose deepest note has depth `d`.
    pub max_depth_histogram: BTreeMap<u32, u64>,
}

impl DepthStats {
    pub fn of(a: &Analysis) -> Self {
        let mut stats = DepthStats::default();
        for voice in &a.voices {
            for (_, _, d) in voice.notes() {
                *stats.literal.entry(d).or_default() += 1;
            }
        }
        if a.note_count() > 0 {
            stats.max_depth_histogram.insert(a.max_depth(), 1);
        }
        stats.fill();
        stats
    }

    pub fn merge(mut self, other: DepthStats) -> Self {
        for (d, n) in other.literal {
            *self.literal.entry(d).or_default() += n;
        }
        for (d, n) in other.max_depth_histogram {
            *self.max_depth_histogram.entry(d).or_default() += n;
        }
        self.fill();
        self
    }

    /// Fills literal gaps with zeros and recomputes the inclusive counts.
    fn fill(&mut self) {
        let Some(&max) = self.literal.keys().next_back() else {
            self.inclusive.clear();
            return;
        };
        let mut running = 0;
        self.inclusive.clear();
        for d in (0..=max).rev() {
            running += *self.literal.entry(d).or_default();
            self.inclusive.insert(d, running);
        }
    }
}

pub fn depth_stats<'a>(corpus: impl IntoIterator<Item = &'a Analysis>) -> DepthStats {
    corpus
        .into_iter()
        .map(DepthStats::of)
        .fold(DepthStats::default(), DepthStats::merge)
}

/// Treble (soprano) or bass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OuterVoice {
    Treble,
    Bass,
}

impl OuterVoice {
    pub const BOTH: [OuterVoice; 2] = [OuterVoice::Treble, OuterVoice::Bass];

    pub fn part(self) -> Part {
        match self {
            OuterVoice::Treble => Part::Soprano,
            OuterVoice::Bass => Part::Bass,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OuterVoice::Treble => "treble",
            OuterVoice::Bass => "bass",
        }
    }
}

impl TryFrom<Part> for OuterVoice {
    type Error = StatsError;

    fn try_from(part: Part) -> Result<Self, Self::Error> {
        match part {
            Part::Soprano => Ok(OuterVoice::Treble),
            Part::Bass => Ok(OuterVoice::Bass),
            inner => Err(StatsError::Voice(inner.name())),
        }
    }
}

/// Signed semitone steps between consecutive notes of depth `>= depth`.
pub fn intervals(a: &Analysis, voice: OuterVoice, depth: u32) -> Vec<i32> {
    let midis: Vec<i32> = a
        .voice(voice.part())
        .notes()
        .filter(|&(_, _, d)| d >= depth)
        .map(|(_, p, _)| p.midi() as i32)
        .collect();
    midis.windows(2).map(|w| w[1] - w[0]).collect()
}

pub fn interval_histogram<'a>(
    corpus: impl IntoIterator<Item = &'a Analysis>,
    part: Part,
    depth: u32,
) -> Result<BTreeMap<i32, u64>, StatsError> {
    let voice = OuterVoice::try_from(part)?;
    let mut hist = BTreeMap::new();
    for a in corpus {
        for step in intervals(a, voice, depth) {
            *hist.entry(step).or_default() += 1;
        }
    }
    Ok(hist)
}

/// Everything the `stats` command reports, mergeable across files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusStats {
    pub excerpts: u64,
    pub notes: u64,
    /// Excerpt length in verticalities -> number of excerpts.
    pub verticalities: BTreeMap<usize, u64>,
    pub depths: DepthStats,
    /// voice -> depth -> interval -> count
    pub intervals: BTreeMap<OuterVoice, BTreeMap<u32, BTreeMap<i32, u64>>>,
}

impl CorpusStats {
    pub fn of(a: &Analysis) -> Self {
        let mut intervals = BTreeMap::new();
        for voice in OuterVoice::BOTH {
            let max = a.voice(voice.part()).max_depth().unwrap_or(0);
            let per_depth: &mut BTreeMap<u32, BTreeMap<i32, u64>> =
                intervals.entry(voice).or_default();
            for depth in 0..=max {
                let hist = per_depth.entry(depth).or_default();
                for step in self::intervals(a, voice, depth) {
                    *hist.entry(step).or_default() += 1;
                }
            }
        }
        CorpusStats {
            excerpts: 1,
            notes: a.note_count() as u64,
            verticalities: [(verticality_count(a), 1)].into_iter().collect(),
            depths: DepthStats::of(a),
            intervals,
        }
    }

    pub fn merge(mut self, other: CorpusStats) -> Self {
        self.excerpts += other.excerpts;
        self.notes += other.notes;
        for (k, n) in other.verticalities {
            *self.verticalities.entry(k).or_default() += n;
        }
        self.depths = self.depths.merge(other.depths);
        for (voice, per_depth) in other.intervals {
            let mine = self.intervals.entry(voice).or_default();
            for (depth, hist) in per_depth {
                let mine = mine.entry(depth).or_default();
                for (step, n) in hist {
                    *mine.entry(step).or_default() += n;
                }
            }
        }
        self
    }

    /// `statistic,key,value` rows.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("statistic,key,value\n");
        let _ = writeln!(out, "excerpts,,{}", self.excerpts);
        let _ = writeln!(out, "notes,,{}", self.notes);
        for (k, n) in &self.verticalities {
            let _ = writeln!(out, "verticalities,{k},{n}");
        }
        for (d, n) in &self.depths.literal {
            let _ = writeln!(out, "literal,{d},{n}");
        }
        for (d, n) in &self.depths.inclusive {
            let _ = writeln!(out, "inclusive,{d},{n}");
        }
        for (d, n) in &self.depths.max_depth_histogram {
            let _ = writeln!(out, "max_depth,{d},{n}");
        }
        out
    }

    /// `(voice, depth, csv)` per histogram, with `interval,count` rows.
    pub fn histogram_csvs(&self) -> Vec<(OuterVoice, u32, String)> {
        let mut out = Vec::new();
        for (voice, per_depth) in &self.intervals {
            for (depth, hist) in per_depth {
                let mut csv = String::from("interval,count\n");
                for (step, n) in hist {
                    let _ = writeln!(csv, "{step},{n}");
                }
                out.push((*voice, *depth, csv));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil as fixtures;

    fn map<K: Ord + Copy, V: Copy>(pairs: &[(K, V)]) -> BTreeMap<K, V> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn verticalities() {
        assert_eq!(verticality_count(&fixtures::fixture_b()), 3);
        let mut a = Analysis::silent(3);
        fixtures::set_note(&mut a, Part::Soprano, 0, "C5", 1);
        fixtures::set_note(&mut a, Part::Soprano, 2, "C5", 1);
        fixtures::set_note(&mut a, Part::Bass, 1, "C3", 1);
        assert_eq!(verticality_count(&a), 3);
        let alto_only = fixtures::line(Part::Alto, &["C4", "D4"], &[1, 0]);
        assert_eq!(verticality_count(&alto_only), 0);
    }

    #[test]
    fn fixture_a_depths() {
        let a = fixtures::fixture_a();
        let s = depth_stats([&a]);
        assert_eq!(s.literal, map(&[(0, 1), (1, 1), (2, 1), (3, 2)]));
        assert_eq!(s.inclusive, map(&[(0, 5), (1, 4), (2, 3), (3, 2)]));
        assert_eq!(s.max_depth_histogram, map(&[(3, 1)]));

        let twice = depth_stats([&a, &a]);
        assert_eq!(twice.literal, map(&[(0, 2), (1, 2), (2, 2), (3, 4)]));
        assert_eq!(twice.inclusive, map(&[(0, 10), (1, 8), (2, 6), (3, 4)]));
        assert_eq!(twice.max_depth_histogram, map(&[(3, 2)]));

        assert_eq!(depth_stats(std::iter::empty()), DepthStats::default());
    }

    #[test]
    fn depth_gaps_are_zero_filled() {
        let a = fixtures::soprano_line(&["C4", "D4"], &[0, 2]);
        let s = depth_stats([&a]);
        assert_eq!(s.literal, map(&[(0, 1), (1, 0), (2, 1)]));
        assert_eq!(s.inclusive, map(&[(0, 2), (1, 1), (2, 1)]));
    }

    #[test]
    fn fixture_a_intervals() {
        let a = fixtures::fixture_a();
        let h = |d| interval_histogram([&a], Part::Soprano, d).unwrap();
        assert_eq!(h(0), map(&[(2, 2), (-2, 2)]));
        assert_eq!(h(2), map(&[(2, 1), (-2, 1)]));
        assert_eq!(h(3), map(&[(0, 1)]));
        assert_eq!(
            interval_histogram([&a], Part::Alto, 0).unwrap_err().code(),
            "E_VOICE"
        );
    }

    #[test]
    fn corpus_fold_matches_single_pass() {
        let (a, b) = (fixtures::fixture_a(), fixtures::fixture_b());
        let merged = CorpusStats::of(&a).merge(CorpusStats::of(&b));
        let other_order = CorpusStats::of(&b).merge(CorpusStats::of(&a));
        assert_eq!(merged, other_order);
        assert_eq!(merged.depths, depth_stats([&a, &b]));
        assert_eq!(merged.excerpts, 2);
        assert_eq!(merged.notes, 12);
        assert_eq!(
            merged.intervals[&OuterVoice::Bass][&0],
            interval_histogram([&a, &b], Part::Bass, 0).unwrap()
        );
        let csv = merged.summary_csv();
        assert!(csv.starts_with("statistic,key,value\nexcerpts,,2\n"));
        assert!(csv.contains("inclusive,0,12\n"));
    }
}
