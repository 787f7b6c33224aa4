use crate::format;
use crate::model::{Analysis, NoteEvent, Part};

pub const FIXTURE_A: &str = include_str!("../tests/fixtures/fixture_a.scha.json");
pub const FIXTURE_B: &str = include_str!("../tests/fixtures/fixture_b.scha.json");

/// Soprano C5 D5 E5 D5 C5 with depths 3 1 0 2 3.
pub fn fixture_a() -> Analysis {
    format::parse(FIXTURE_A).unwrap()
}

/// Soprano F4 E4 D4 (2 1 2), bass F2 G2 D3 (2 0 2), alto A3 (0) at slot 0.
pub fn fixture_b() -> Analysis {
    format::parse(FIXTURE_B).unwrap()
}

pub fn set_note(a: &mut Analysis, part: Part, index: usize, pitch: &str, depth: u32) {
    a.voice_mut(part).slots[index] = NoteEvent::note(pitch.parse().unwrap(), depth);
}

pub fn line(part: Part, pitches: &[&str], depths: &[u32]) -> Analysis {
    let mut a = Analysis::silent(pitches.len());
    for (i, (p, d)) in pitches.iter().zip(depths).enumerate() {
        set_note(&mut a, part, i, p, *d);
    }
    a
}

pub fn soprano_line(pitches: &[&str], depths: &[u32]) -> Analysis {
    line(Part::Soprano, pitches, depths)
}

pub fn outer_voices(soprano: &[(&str, u32)], bass: &[(&str, u32)]) -> Analysis {
    assert_eq!(soprano.len(), bass.len());
    let mut a = Analysis::silent(soprano.len());
    for (i, (p, d)) in soprano.iter().enumerate() {
        set_note(&mut a, Part::Soprano, i, p, *d);
    }
    for (i, (p, d)) in bass.iter().enumerate() {
        set_note(&mut a, Part::Bass, i, p, *d);
    }
    a
}
