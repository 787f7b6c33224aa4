use std::fmt::Write as _;

use super::{NoteGlyph, RenderModel, Staff, VoiceRender, SLOT_WIDTH, STEM_BASE, STEM_UNIT};
use crate::model::{NoteRef, Part};

const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
/// Distance between staff lines; a staff position step is half of it.
const SPACE: f64 = 10.0;
const TREBLE_TOP: f64 = 60.0;
const BASS_TOP: f64 = 160.0;
const HARMONY_Y: f64 = 250.0;
const HEIGHT: f64 = 280.0;

fn staff_top(staff: Staff) -> f64 {
    match staff {
        Staff::Treble => TREBLE_TOP,
        Staff::Bass => BASS_TOP,
    }
}

fn x_of(index: usize) -> f64 {
    LEFT + SLOT_WIDTH * (index as f64 + 0.5)
}

fn y_of(staff: Staff, position: i32) -> f64 {
    staff_top(staff) + 4.0 * SPACE - position as f64 * SPACE / 2.0
}

/// Stems point up except in the alto and bass.
fn stem_sign(part: Part) -> f64 {
    match part {
        Part::Soprano | Part::Tenor => -1.0,
        Part::Alto | Part::Bass => 1.0,
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn line(&mut self, id: &str, class: &str, (x1, y1): (f64, f64), (x2, y2): (f64, f64), extra: &str) {
        let _ = writeln!(
            self.out,
            r#"<line id="{id}" class="{class}" x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="black"{extra}/>"#
        );
    }

    fn text(&mut self, id: &str, class: &str, (x, y): (f64, f64), anchor: &str, body: &str) {
        let _ = writeln!(
            self.out,
            r#"<text id="{id}" class="{class}" x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-size="11">{}</text>"#,
            escape(body)
        );
    }
}

pub fn render_svg(m: &RenderModel) -> String {
    let width = LEFT + SLOT_WIDTH * m.nv as f64 + RIGHT;
    let mut c = Canvas { out: String::new() };
    let _ = writeln!(
        c.out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{HEIGHT:.0}" viewBox="0 0 {width:.0} {HEIGHT:.0}">"#
    );
    if let Some(title) = &m.title {
        let _ = writeln!(c.out, "<title>{}</title>", escape(title));
    }

    for (staff, name) in [(Staff::Treble, "treble"), (Staff::Bass, "bass")] {
        for k in 0..5 {
            let y = staff_top(staff) + SPACE * k as f64;
            c.line(&format!("staff-{name}-{k}"), "staff-line", (LEFT - 40.0, y), (width - RIGHT, y), "");
        }
    }

    for voice in &m.voices {
        for note in &voice.notes {
            draw_note(&mut c, voice, note);
        }
        for beam in &voice.beams {
            let sign = stem_sign(voice.part);
            let offset = (STEM_BASE + STEM_UNIT * beam.level) as f64;
            let end = |index: usize| {
                let n = glyph(voice, index);
                (x_of(index) - sign * 5.0, y_of(voice.staff, n.staff_position) + sign * offset)
            };
            let id = format!("beam-{}-{}-{}-{}", voice.part.short(), beam.level, beam.start, beam.end);
            c.line(&id, "beam", end(beam.start), end(beam.end), r#" stroke-width="2""#);
        }
        for slur in &voice.slurs {
            // slurs curve away from the stems
            let sign = -stem_sign(voice.part);
            let point = |index: usize| {
                let n = glyph(voice, index);
                (x_of(index), y_of(voice.staff, n.staff_position) + sign * 8.0)
            };
            let ((x1, y1), (x2, y2)) = (point(slur.start), point(slur.end));
            let bend = sign * (10.0 + 6.0 * slur.level as f64);
            let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0 + bend);
            let _ = writeln!(
                c.out,
                r#"<path id="slur-{}-{}-{}-{}" class="slur" d="M {x1:.1} {y1:.1} Q {mx:.1} {my:.1} {x2:.1} {y2:.1}" fill="none" stroke="black"/>"#,
                voice.part.short(),
                slur.level,
                slur.start,
                slur.end
            );
        }
    }

    for (k, symbol) in m.cross_voice.iter().enumerate() {
        let (Some(from), Some(to)) = (position(m, symbol.from), position(m, symbol.to)) else {
            continue;
        };
        c.line(&format!("cross-{k}"), "cross-voice", from, to, r#" stroke-dasharray="4 3""#);
    }

    c.out.push_str("</svg>\n");
    c.out
}

fn glyph(voice: &VoiceRender, index: usize) -> &NoteGlyph {
    voice
        .notes
        .iter()
        .find(|n| n.index == index)
        .expect("beams and slurs end on notes")
}

fn position(m: &RenderModel, note: NoteRef) -> Option<(f64, f64)> {
    let voice = m.voice(note.part);
    let n = voice.notes.iter().find(|n| n.index == note.index)?;
    Some((x_of(note.index), y_of(voice.staff, n.staff_position)))
}

fn draw_note(c: &mut Canvas, voice: &VoiceRender, note: &NoteGlyph) {
    let key = format!("{}-{}", voice.part.short(), note.index);
    let (x, y) = (x_of(note.index), y_of(voice.staff, note.staff_position));

    let top = staff_top(voice.staff);
    let mut ledger = 1;
    let mut p = -2;
    while p >= note.staff_position {
        let ly = y_of(voice.staff, p);
        c.line(&format!("ledger-{key}-{ledger}"), "ledger", (x - 8.0, ly), (x + 8.0, ly), "");
        ledger += 1;
        p -= 2;
    }
    p = 10;
    while p <= note.staff_position {
        let ly = y_of(voice.staff, p);
        c.line(&format!("ledger-{key}-{ledger}"), "ledger", (x - 8.0, ly), (x + 8.0, ly), "");
        ledger += 1;
        p += 2;
    }

    let fill = if note.duration > 1 { "none" } else { "black" };
    let _ = writeln!(
        c.out,
        r#"<ellipse id="note-{key}" class="notehead" cx="{x:.1}" cy="{y:.1}" rx="5.5" ry="4.0" fill="{fill}" stroke="black"/>"#
    );

    let sign = stem_sign(voice.part);
    let stem_x = x - sign * 5.0;
    let stem_end = y + sign * note.stem_length as f64;
    c.line(&format!("stem-{key}"), "stem", (stem_x, y), (stem_x, stem_end), "");
    if note.flagged {
        c.line(&format!("flag-{key}"), "flag", (stem_x, stem_end), (stem_x + 7.0, stem_end - sign * 7.0), "");
    }

    c.text(&format!("depth-{key}"), "depth", (x - 12.0, y + 4.0), "end", &note.depth.to_string());
    if note.parenthesized {
        c.text(&format!("paren-{key}-open"), "paren", (x - 9.0, y + 4.0), "middle", "(");
        c.text(&format!("paren-{key}-close"), "paren", (x + 9.0, y + 4.0), "middle", ")");
    }
    if let Some(acc) = &note.accidental {
        let dx = if note.parenthesized { 24.0 } else { 20.0 };
        c.text(&format!("acc-{key}"), "accidental", (x - dx, y + 4.0), "end", acc);
    }
    if let Some(degree) = note.ursatz_degree {
        let cy = (y - 3.0 * SPACE).min(top - SPACE);
        c.text(&format!("caret-{key}"), "caret", (x, cy), "middle", &format!("^{degree}"));
    }
    if let Some(label) = &note.harmony {
        c.text(&format!("harmony-{key}"), "harmony", (x, HARMONY_Y), "middle", label);
    }
}
