use scha_core::model::{Analysis, NoteEvent, Part};

pub const FIXTURE_A: &str = include_str!("../../core/tests/fixtures/fixture_a.scha.json");
pub const FIXTURE_B: &str = include_str!("../../core/tests/fixtures/fixture_b.scha.json");
/// Three soprano pitches against two depths.
pub const BAD_LENGTH: &str = include_str!("../../core/tests/fixtures/bad_length.scha.json");

/// Soprano C5 D5 E5 D5 C5 with depths 3 1 0 2 3.
pub fn fixture_a() -> Analysis {
    scha_core::parse(FIXTURE_A).expect("fixture A parses")
}

/// Soprano F4 E4 D4 (2 1 2), bass F2 G2 D3 (2 0 2), alto A3 (0) at slot 0.
pub fn fixture_b() -> Analysis {
    scha_core::parse(FIXTURE_B).expect("fixture B parses")
}

pub fn set_note(a: &mut Analysis, part: Part, index: usize, pitch: &str, depth: u32) {
    a.voice_mut(part).slots[index] = NoteEvent::note(pitch.parse().expect("valid pitch"), depth);
}

pub fn soprano_line(pitches: &[&str], depths: &[u32]) -> Analysis {
    let mut a = Analysis::silent(pitches.len());
    for (i, (p, d)) in pitches.iter().zip(depths).enumerate() {
        set_note(&mut a, Part::Soprano, i, p, *d);
    }
    a
}
