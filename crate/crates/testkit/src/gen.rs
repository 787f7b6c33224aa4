//! Seeded random analyses that pass strict validation.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use scha_core::model::{
    Analysis, CrossVoiceKind, CrossVoiceSymbol, CustomProlongation, Key, Meta, Meter, Mode,
    NoteEvent, NoteRef, Part,
};
use scha_core::pitch::{Letter, PitchSpec};
use scha_core::validate;

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_nv: usize,
    pub max_depth: u32,
    /// Reject analyses with more notes than this.
    pub max_notes: usize,
    /// Probability that each inner voice is present.
    pub inner_voice_p: f64,
    /// Fill in flags, harmony, meter, metadata and cross-voice symbols.
    pub decorate: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_nv: 20,
            max_depth: 4,
            max_notes: usize::MAX,
            inner_voice_p: 0.35,
            decorate: true,
        }
    }
}

impl GenConfig {
    /// Small analyses for brute-force comparisons.
    pub fn small() -> Self {
        GenConfig {
            max_nv: 6,
            max_notes: 8,
            inner_voice_p: 0.7,
            ..GenConfig::default()
        }
    }
}

/// Diatonic range (C0 = 0) each voice draws pitches from.
fn range(part: Part) -> (i32, i32) {
    match part {
        Part::Soprano => (28, 40),
        Part::Alto => (25, 36),
        Part::Tenor => (21, 32),
        Part::Bass => (15, 28),
    }
}

fn random_pitch(rng: &mut StdRng, part: Part) -> PitchSpec {
    let (lo, hi) = range(part);
    let pos = rng.gen_range(lo..=hi);
    let accidental = match rng.gen_range(0..20) {
        0 => -2,
        1..=3 => -1,
        4..=6 => 1,
        7 => 2,
        _ => 0,
    };
    let letter = Letter::ALL[pos.rem_euclid(7) as usize];
    PitchSpec::new(letter, accidental, pos.div_euclid(7) as i8).expect("ranges stay inside MIDI")
}

const WORDS: &[&str] = &["Bach", "Chorale", "\"quoted\"", "Ünïcödé", "a\\b", "tab\there", "<x&y>", "BWV 269"];

fn random_text(rng: &mut StdRng) -> Option<String> {
    if rng.gen_bool(0.3) {
        return None;
    }
    let n = rng.gen_range(1..=3);
    Some((0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" "))
}

fn fill_voice(rng: &mut StdRng, a: &mut Analysis, part: Part, top: u32) {
    let nv = a.nv();
    let density = rng.gen_range(0.4..=1.0);
    let slots = &mut a.voice_mut(part).slots;
    for i in 0..nv {
        let previous_sounds = i > 0 && !matches!(slots[i - 1].content, scha_core::SlotContent::Rest);
        slots[i] = if !rng.gen_bool(density) {
            NoteEvent::rest()
        } else if previous_sounds && rng.gen_bool(0.15) {
            NoteEvent::hold()
        } else {
            NoteEvent::note(random_pitch(rng, part), rng.gen_range(0..=top))
        };
    }
    // every non-empty outer voice reaches the deepest level
    if part.is_outer() {
        let notes: Vec<usize> = a.voice(part).notes().map(|(i, _, _)| i).collect();
        if let Some(&i) = notes.choose(rng) {
            a.voice_mut(part).slots[i].depth = Some(top);
        }
    }
}

fn decorate(rng: &mut StdRng, a: &mut Analysis) {
    a.meta = Meta {
        analyst: random_text(rng),
        composer: random_text(rng),
        title: random_text(rng),
        subtitle: random_text(rng),
        description: random_text(rng),
    };
    a.key = Key {
        tonic: ["C", "G", "F", "Bb", "F#", "Eb", "A"].choose(rng).unwrap().to_string(),
        mode: if rng.gen_bool(0.5) { Mode::Major } else { Mode::Minor },
    };
    if rng.gen_bool(0.5) {
        a.meter = Some(Meter {
            beats_per_bar: rng.gen_range(2..=4),
            beat_unit: rng.gen_range(1..=2),
            offset: rng.gen_range(0..=2),
        });
    }
    for voice in a.voices.iter_mut() {
        for ev in voice.slots.iter_mut().filter(|ev| ev.is_note()) {
            ev.ursatz = rng.gen_bool(0.2);
            ev.flagged = rng.gen_bool(0.1);
            ev.parenthesized = rng.gen_bool(0.1);
            ev.accidental_displayed = rng.gen_bool(0.2);
            if voice.part == Part::Bass && rng.gen_bool(0.3) {
                ev.harmony = Some(["I", "V7", "ii6", "IV", "vi"].choose(rng).unwrap().to_string());
            }
        }
    }
    let notes = a.notes();
    if notes.len() >= 2 {
        for _ in 0..rng.gen_range(0..=2) {
            let pair: Vec<NoteRef> = notes.choose_multiple(rng, 2).copied().collect();
            a.cross_voice.push(CrossVoiceSymbol {
                kind: if rng.gen_bool(0.5) {
                    CrossVoiceKind::VoiceExchange
                } else {
                    CrossVoiceKind::RelationLine
                },
                from: pair[0],
                to: pair[1],
            });
        }
    }
    if notes.len() >= 3 && rng.gen_bool(0.3) {
        let mut picked: Vec<NoteRef> = notes.choose_multiple(rng, 3).copied().collect();
        picked.sort();
        a.custom_prolongations.push(CustomProlongation {
            start: picked[0],
            middles: vec![picked[1]],
            end: picked[2],
            level: rng.gen_bool(0.5).then(|| rng.gen_range(1..=3)),
        });
    }
}

/// Draws analyses until one passes strict validation.
pub fn random_analysis(rng: &mut StdRng, cfg: &GenConfig) -> Analysis {
    loop {
        let nv = rng.gen_range(1..=cfg.max_nv);
        let top = rng.gen_range(1..=cfg.max_depth);
        let mut a = Analysis::silent(nv);
        let (soprano, bass) = match rng.gen_range(0..4) {
            0 => (true, false),
            1 => (false, true),
            _ => (true, true),
        };
        for (part, present) in [
            (Part::Soprano, soprano),
            (Part::Alto, rng.gen_bool(cfg.inner_voice_p)),
            (Part::Tenor, rng.gen_bool(cfg.inner_voice_p)),
            (Part::Bass, bass),
        ] {
            if present {
                fill_voice(rng, &mut a, part, top);
            }
        }
        if a.note_count() == 0 || a.note_count() > cfg.max_notes {
            continue;
        }
        if cfg.decorate {
            decorate(rng, &mut a);
        }
        if !validate(&a, false).has_errors() {
            return a;
        }
    }
}

/// `n` analyses from a fixed seed.
pub fn corpus(seed: u64, n: usize, cfg: &GenConfig) -> Vec<Analysis> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| random_analysis(&mut rng, cfg)).collect()
}
