//! Notation derived from depths: stems, beams and slurs for the outer voices.
//!
//! Deeper notes get longer stems, a beam at level `d` joins every maximal run
//! of two or more consecutive notes of depth `>= d`, and every prolongation
//! with a non-empty middle becomes a slur. [`render_svg`] turns the model into
//! a static SVG document.

mod svg;

pub use svg::render_svg;

use serde::Serialize;

use crate::model::{Analysis, CrossVoiceSymbol, Part};
use crate::pitch::{Letter, PitchSpec};
use crate::reduction::all_prolongations;

pub const SLOT_WIDTH: f64 = 40.0;
pub const STEM_BASE: u32 = 14;
pub const STEM_UNIT: u32 = 6;

/// Diatonic position of the bottom staff line (E4 and G2).
const TREBLE_BOTTOM: i32 = 4 * 7 + 2;
const BASS_BOTTOM: i32 = 2 * 7 + 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Staff {
    Treble,
    Bass,
}

impl Staff {
    /// Soprano and alto share the upper staff, tenor and bass the lower.
    pub fn of(part: Part) -> Staff {
        match part {
            Part::Soprano | Part::Alto => Staff::Treble,
            Part::Tenor | Part::Bass => Staff::Bass,
        }
    }

    fn bottom_line(self) -> i32 {
        match self {
            Staff::Treble => TREBLE_BOTTOM,
            Staff::Bass => BASS_BOTTOM,
        }
    }
}

pub fn stem_length(depth: u32) -> u32 {
    STEM_BASE + STEM_UNIT * depth
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NoteGlyph {
    pub index: usize,
    pub pitch: String,
    /// Half-spaces above the bottom line of the voice's staff.
    pub staff_position: i32,
    /// Slots covered including holds.
    pub duration: usize,
    /// Printed left of the notehead.
    pub depth: u32,
    pub stem_length: u32,
    /// Scale degree shown as a caret above the staff, for Ursatz notes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ursatz_degree: Option<u8>,
    pub parenthesized: bool,
    pub flagged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accidental: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmony: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Beam {
    pub level: u32,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Slur {
    pub start: usize,
    pub end: usize,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VoiceRender {
    pub part: Part,
    pub staff: Staff,
    pub notes: Vec<NoteGlyph>,
    /// Empty for the inner voices.
    pub beams: Vec<Beam>,
    /// Empty for the inner voices.
    pub slurs: Vec<Slur>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RenderModel {
    pub nv: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub voices: Vec<VoiceRender>,
    pub cross_voice: Vec<CrossVoiceSymbol>,
}

impl RenderModel {
    pub fn voice(&self, part: Part) -> &VoiceRender {
        &self.voices[part.index()]
    }

    pub fn beam_count(&self) -> usize {
        self.voices.iter().map(|v| v.beams.len()).sum()
    }

    pub fn slur_count(&self) -> usize {
        self.voices.iter().map(|v| v.slurs.len()).sum()
    }
}

/// Maximal runs of at least two consecutive depths `>= level`, as
/// `(first, last)` positions into `depths`.
pub fn runs_at_least(depths: &[u32], level: u32) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for (k, &d) in depths.iter().chain(std::iter::once(&0)).enumerate() {
        match (d >= level && k < depths.len(), start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                if k - s >= 2 {
                    runs.push((s, k - 1));
                }
                start = None;
            }
            _ => {}
        }
    }
    runs
}

fn scale_degree(tonic: &str, pitch: PitchSpec) -> Option<u8> {
    let tonic = tonic.chars().next().and_then(Letter::from_char)?;
    Some((pitch.letter().step() - tonic.step()).rem_euclid(7) as u8 + 1)
}

fn accidental_glyph(alter: i8) -> String {
    match alter {
        0 => "\u{266e}".to_string(),
        a if a > 0 => "\u{266f}".repeat(a as usize),
        a => "\u{266d}".repeat(a.unsigned_abs() as usize),
    }
}

pub fn derive_render_model(a: &Analysis) -> RenderModel {
    let prolongations = all_prolongations(a);
    let voices = Part::ALL
        .into_iter()
        .map(|part| {
            let voice = a.voice(part);
            let staff = Staff::of(part);
            let notes: Vec<NoteGlyph> = voice
                .notes()
                .map(|(index, pitch, depth)| {
                    let ev = &voice.slots[index];
                    NoteGlyph {
                        index,
                        pitch: pitch.to_string(),
                        staff_position: pitch.diatonic_position() - staff.bottom_line(),
                        duration: voice.duration(index),
                        depth,
                        stem_length: stem_length(depth),
                        ursatz_degree: ev.ursatz.then(|| scale_degree(&a.key.tonic, pitch)).flatten(),
                        parenthesized: ev.parenthesized,
                        flagged: ev.flagged,
                        accidental: ev.accidental_displayed.then(|| accidental_glyph(pitch.accidental())),
                        harmony: ev.harmony.clone(),
                    }
                })
                .collect();

            let (mut beams, mut slurs) = (Vec::new(), Vec::new());
            if part.is_outer() {
                let depths: Vec<u32> = notes.iter().map(|n| n.depth).collect();
                let top = depths.iter().copied().max().unwrap_or(0);
                for level in 1..=top {
                    for (s, e) in runs_at_least(&depths, level) {
                        beams.push(Beam {
                            level,
                            start: notes[s].index,
                            end: notes[e].index,
                        });
                    }
                }
                slurs = prolongations
                    .non_trivial()
                    .filter(|p| p.voice == part)
                    .map(|p| Slur {
                        start: p.start.index,
                        end: p.end.index,
                        level: p.level,
                    })
                    .collect();
            }
            VoiceRender {
                part,
                staff,
                notes,
                beams,
                slurs,
            }
        })
        .collect();

    RenderModel {
        nv: a.nv(),
        title: a.meta.title.clone(),
        voices,
        cross_voice: a.cross_voice.clone(),
    }
}
