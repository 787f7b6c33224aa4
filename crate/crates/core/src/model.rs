//! In-memory model of one analysed excerpt.
//!
//! An [`Analysis`] holds four voices aligned on the same number of
//! verticality slots. Each slot holds a [`NoteEvent`]: a pitch (a note,
//! carrying a depth), a rest, or a hold that extends the previous note.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pitch::PitchSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Soprano,
    Alto,
    Tenor,
    Bass,
}

impl Part {
    /// Top to bottom. This is also the tie-break order inside a verticality.
    pub const ALL: [Part; 4] = [Part::Soprano, Part::Alto, Part::Tenor, Part::Bass];

    pub fn name(self) -> &'static str {
        match self {
            Part::Soprano => "soprano",
            Part::Alto => "alto",
            Part::Tenor => "tenor",
            Part::Bass => "bass",
        }
    }

    /// Short label used in text exports and element ids.
    pub fn short(self) -> &'static str {
        match self {
            Part::Soprano => "sop",
            Part::Alto => "alto",
            Part::Tenor => "ten",
            Part::Bass => "bass",
        }
    }

    pub fn is_outer(self) -> bool {
        matches!(self, Part::Soprano | Part::Bass)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_name(name: &str) -> Option<Part> {
        Part::ALL
            .into_iter()
            .find(|p| p.name() == name || p.short() == name)
    }
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// A (part, slot) coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoteRef {
    pub part: Part,
    pub index: usize,
}

impl NoteRef {
    pub fn new(part: Part, index: usize) -> Self {
        NoteRef { part, index }
    }
}

/// Verticality-major, then top-to-bottom part order.
impl Ord for NoteRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.index, self.part).cmp(&(other.index, other.part))
    }
}

impl PartialOrd for NoteRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NoteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.part.short(), self.index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotContent {
    Pitch(PitchSpec),
    Rest,
    Hold,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoteEvent {
    pub content: SlotContent,
    /// Present exactly when `content` is a pitch.
    pub depth: Option<u32>,
    pub ursatz: bool,
    pub flagged: bool,
    pub parenthesized: bool,
    pub accidental_displayed: bool,
    pub harmony: Option<String>,
}

impl NoteEvent {
    pub fn note(pitch: PitchSpec, depth: u32) -> Self {
        NoteEvent {
            content: SlotContent::Pitch(pitch),
            depth: Some(depth),
            ..NoteEvent::rest()
        }
    }

    pub fn rest() -> Self {
        NoteEvent {
            content: SlotContent::Rest,
            depth: None,
            ursatz: false,
            flagged: false,
            parenthesized: false,
            accidental_displayed: false,
            harmony: None,
        }
    }

    pub fn hold() -> Self {
        NoteEvent {
            content: SlotContent::Hold,
            ..NoteEvent::rest()
        }
    }

    pub fn pitch(&self) -> Option<PitchSpec> {
        match self.content {
            SlotContent::Pitch(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_note(&self) -> bool {
        matches!(self.content, SlotContent::Pitch(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Voice {
    pub part: Part,
    pub slots: Vec<NoteEvent>,
}

impl Voice {
    pub fn silent(part: Part, len: usize) -> Self {
        Voice {
            part,
            slots: vec![NoteEvent::rest(); len],
        }
    }

    /// Slots holding a pitch, with their index and depth.
    pub fn notes(&self) -> impl Iterator<Item = (usize, PitchSpec, u32)> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, ev)| match ev.content {
            SlotContent::Pitch(p) => Some((i, p, ev.depth.unwrap_or(0))),
            _ => None,
        })
    }

    pub fn is_empty(&self) -> bool {
        !self.slots.iter().any(NoteEvent::is_note)
    }

    pub fn max_depth(&self) -> Option<u32> {
        self.notes().map(|(_, _, d)| d).max()
    }

    /// Number of slots the note at `index` sounds for, counting following holds.
    pub fn duration(&self, index: usize) -> usize {
        1 + self.slots[index + 1..]
            .iter()
            .take_while(|ev| ev.content == SlotContent::Hold)
            .count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analyst: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub composer: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtitle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Major,
    Minor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Key {
    pub tonic: String,
    pub mode: Mode,
}

impl Default for Key {
    fn default() -> Self {
        Key {
            tonic: "C".to_string(),
            mode: Mode::Major,
        }
    }
}

/// Bar structure measured in verticality slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Meter {
    pub beats_per_bar: u32,
    /// Slots per beat.
    pub beat_unit: u32,
    /// Slot index of the first downbeat.
    #[serde(default)]
    pub offset: u32,
}

impl Meter {
    /// 2 on downbeats, 1 on other beats, 0 between beats.
    pub fn strength(&self, index: usize) -> u8 {
        let beat = self.beat_unit.max(1) as i64;
        let bar = beat * self.beats_per_bar.max(1) as i64;
        let pos = index as i64 - self.offset as i64;
        if pos.rem_euclid(bar) == 0 {
            2
        } else if pos.rem_euclid(beat) == 0 {
            1
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum CrossVoiceKind {
    VoiceExchange,
    RelationLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossVoiceSymbol {
    pub kind: CrossVoiceKind,
    pub from: NoteRef,
    pub to: NoteRef,
}

/// A prolongation entered by hand rather than derived from depths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomProlongation {
    pub start: NoteRef,
    #[serde(default)]
    pub middles: Vec<NoteRef>,
    pub end: NoteRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub meta: Meta,
    pub key: Key,
    /// Always four voices, in [`Part::ALL`] order.
    pub voices: [Voice; 4],
    pub cross_voice: Vec<CrossVoiceSymbol>,
    pub meter: Option<Meter>,
    pub custom_prolongations: Vec<CustomProlongation>,
    /// Unknown top-level fields, kept for round trips.
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Analysis {
    /// An all-rest analysis of `nv` slots.
    pub fn silent(nv: usize) -> Self {
        Analysis {
            meta: Meta::default(),
            key: Key::default(),
            voices: Part::ALL.map(|p| Voice::silent(p, nv)),
            cross_voice: Vec::new(),
            meter: None,
            custom_prolongations: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Number of verticality slots shared by every voice.
    pub fn nv(&self) -> usize {
        self.voices[0].slots.len()
    }

    pub fn voice(&self, part: Part) -> &Voice {
        &self.voices[part.index()]
    }

    pub fn voice_mut(&mut self, part: Part) -> &mut Voice {
        &mut self.voices[part.index()]
    }

    pub fn event(&self, note: NoteRef) -> Option<&NoteEvent> {
        self.voice(note.part).slots.get(note.index)
    }

    pub fn depth(&self, note: NoteRef) -> Option<u32> {
        self.event(note).and_then(|ev| ev.depth)
    }

    /// Every pitch slot, verticality-major then part order.
    pub fn notes(&self) -> Vec<NoteRef> {
        let mut notes: Vec<NoteRef> = Part::ALL
            .into_iter()
            .flat_map(|part| {
                self.voice(part)
                    .notes()
                    .map(move |(i, _, _)| NoteRef::new(part, i))
            })
            .collect();
        notes.sort();
        notes
    }

    pub fn note_count(&self) -> usize {
        self.voices.iter().map(|v| v.notes().count()).sum()
    }

    /// Maximum depth over all notes; 0 when there are none.
    pub fn max_depth(&self) -> u32 {
        self.voices
            .iter()
            .filter_map(Voice::max_depth)
            .max()
            .unwrap_or(0)
    }
}
