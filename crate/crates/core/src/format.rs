//! The `.scha.json` file format.
//!
//! Voices are stored as parallel arrays (`pitches`, `depths`) plus index sets
//! (`ursatz`, `flags`, `parens`, `accidentals`) and a `harmony` map from slot
//! index to label. In memory those index sets become per-slot booleans.
//!
//! [`serialize`] writes the canonical form: keys sorted, index sets sorted
//! ascending, two-space indentation, absent optional fields omitted, and a
//! trailing newline. See `FORMAT.md` at the repository root.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{
    Analysis, CrossVoiceSymbol, CustomProlongation, Key, Meta, Meter, NoteEvent, NoteRef, Part,
    SlotContent, Voice,
};
use crate::pitch::{PitchError, PitchSpec};

pub const REST_TOKEN: &str = "R";
pub const HOLD_TOKEN: &str = "_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("{location}: {message}")]
    Schema { location: String, message: String },
    #[error("{location}: {message}")]
    Length { location: String, message: String },
    #[error("{location}: {source}")]
    Pitch {
        location: String,
        source: PitchError,
    },
    #[error("{location}: index {index} outside 0..{nv}")]
    Index {
        location: String,
        index: i64,
        nv: usize,
    },
    #[error("{location}: {message}")]
    Hold { location: String, message: String },
    #[error("{location}: {message}")]
    Depth { location: String, message: String },
    #[error("{location}: {message}")]
    CrossVoice { location: String, message: String },
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax(_) => "E_SYNTAX",
            ParseError::Schema { .. } => "E_SCHEMA",
            ParseError::Length { .. } => "E_LENGTH",
            ParseError::Pitch { source, .. } => source.code(),
            ParseError::Index { .. } | ParseError::CrossVoice { .. } => "E_INDEX",
            ParseError::Hold { .. } => "E_HOLD",
            ParseError::Depth { .. } => "E_DEPTH",
        }
    }

    /// The description without the leading location.
    pub fn message(&self) -> String {
        let full = self.to_string();
        match full.strip_prefix(&format!("{}: ", self.location())) {
            Some(rest) => rest.to_string(),
            None => full,
        }
    }

    pub fn location(&self) -> &str {
        match self {
            ParseError::Syntax(_) => "$",
            ParseError::Schema { location, .. }
            | ParseError::Length { location, .. }
            | ParseError::Pitch { location, .. }
            | ParseError::Index { location, .. }
            | ParseError::Hold { location, .. }
            | ParseError::Depth { location, .. }
            | ParseError::CrossVoice { location, .. } => location,
        }
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawDocument {
    #[serde(default)]
    meta: Meta,
    #[serde(default)]
    key: Key,
    voices: BTreeMap<String, RawVoice>,
    #[serde(default)]
    cross_voice: Vec<CrossVoiceSymbol>,
    #[serde(default)]
    meter: Option<Meter>,
    #[serde(default)]
    prolongations: Vec<CustomProlongation>,
    #[serde(flatten)]
    extra: BTreeMap<String, Value>,
}

#[derive(Deserialize)]
struct RawVoice {
    pitches: Vec<String>,
    depths: Vec<Option<i64>>,
    #[serde(default)]
    ursatz: Vec<i64>,
    #[serde(default)]
    flags: Vec<i64>,
    #[serde(default)]
    parens: Vec<i64>,
    #[serde(default)]
    accidentals: Vec<i64>,
    #[serde(default)]
    harmony: BTreeMap<String, String>,
}

/// Parses a `.scha.json` document.
pub fn parse(text: &str) -> Result<Analysis, ParseError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ParseError::Syntax(e.to_string()))?;
    if !value.is_object() {
        return Err(ParseError::Schema {
            location: "$".into(),
            message: "top level must be an object".into(),
        });
    }
    let raw = RawDocument::deserialize(value).map_err(|e| ParseError::Schema {
        location: "$".into(),
        message: e.to_string(),
    })?;
    build(raw)
}

fn build(raw: RawDocument) -> Result<Analysis, ParseError> {
    let mut raw_voices: [Option<RawVoice>; 4] = Default::default();
    for (name, voice) in raw.voices {
        let part = Part::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| ParseError::Schema {
                location: format!("voices.{name}"),
                message: "unknown voice; expected soprano, alto, tenor or bass".into(),
            })?;
        raw_voices[part.index()] = Some(voice);
    }

    let mut nv = None;
    for (part, voice) in Part::ALL.iter().zip(&raw_voices) {
        let Some(voice) = voice else { continue };
        let location = format!("voices.{}", part.name());
        if voice.depths.len() != voice.pitches.len() {
            return Err(ParseError::Length {
                location,
                message: format!(
                    "{} pitches but {} depths",
                    voice.pitches.len(),
                    voice.depths.len()
                ),
            });
        }
        match nv {
            None => nv = Some(voice.pitches.len()),
            Some(n) if n != voice.pitches.len() => {
                return Err(ParseError::Length {
                    location,
                    message: format!(
                        "{} slots but earlier voices have {n}",
                        voice.pitches.len()
                    ),
                })
            }
            Some(_) => {}
        }
    }
    let nv = match nv {
        Some(n) if n > 0 => n,
        _ => {
            return Err(ParseError::Length {
                location: "voices".into(),
                message: "an analysis needs at least one verticality".into(),
            })
        }
    };

    let mut voices = Part::ALL.map(|p| Voice::silent(p, nv));
    for (part, raw_voice) in Part::ALL.into_iter().zip(raw_voices) {
        if let Some(raw_voice) = raw_voice {
            voices[part.index()] = build_voice(part, raw_voice, nv)?;
        }
    }

    let analysis = Analysis {
        meta: raw.meta,
        key: raw.key,
        voices,
        cross_voice: raw.cross_voice,
        meter: raw.meter,
        custom_prolongations: raw.prolongations,
        extra: raw.extra,
    };
    check_references(&analysis)?;
    Ok(analysis)
}

/// Accessor for one of the boolean per-note flags.
type FlagField = fn(&mut NoteEvent) -> &mut bool;

fn build_voice(part: Part, raw: RawVoice, nv: usize) -> Result<Voice, ParseError> {
    let base = format!("voices.{}", part.name());
    let mut slots = Vec::with_capacity(nv);
    for (i, (token, depth)) in raw.pitches.iter().zip(&raw.depths).enumerate() {
        let content = match token.as_str() {
            REST_TOKEN => SlotContent::Rest,
            HOLD_TOKEN => {
                let prev = slots.last().map(|ev: &NoteEvent| ev.content);
                if !matches!(prev, Some(SlotContent::Pitch(_) | SlotContent::Hold)) {
                    return Err(ParseError::Hold {
                        location: format!("{base}.pitches[{i}]"),
                        message: "hold must follow a note or another hold".into(),
                    });
                }
                SlotContent::Hold
            }
            _ => SlotContent::Pitch(token.parse::<PitchSpec>().map_err(|source| {
                ParseError::Pitch {
                    location: format!("{base}.pitches[{i}]"),
                    source,
                }
            })?),
        };
        let depth_error = |message: &str| ParseError::Depth {
            location: format!("{base}.depths[{i}]"),
            message: message.into(),
        };
        let depth = match (&content, depth) {
            (SlotContent::Pitch(_), Some(d)) if *d >= 0 && *d <= u32::MAX as i64 => Some(*d as u32),
            (SlotContent::Pitch(_), Some(_)) => return Err(depth_error("depth must be a non-negative integer")),
            (SlotContent::Pitch(_), None) => return Err(depth_error("a note needs a depth")),
            (_, Some(_)) => return Err(depth_error("rests and holds carry no depth (use null)")),
            (_, None) => None,
        };
        slots.push(NoteEvent {
            content,
            depth,
            ..NoteEvent::rest()
        });
    }

    let sets: [(&str, &Vec<i64>, FlagField); 4] = [
        ("ursatz", &raw.ursatz, |ev| &mut ev.ursatz),
        ("flags", &raw.flags, |ev| &mut ev.flagged),
        ("parens", &raw.parens, |ev| &mut ev.parenthesized),
        ("accidentals", &raw.accidentals, |ev| &mut ev.accidental_displayed),
    ];
    for (name, indices, field) in sets {
        for (k, &index) in indices.iter().enumerate() {
            let slot = slot_index(index, nv, || format!("{base}.{name}[{k}]"))?;
            *field(&mut slots[slot]) = true;
        }
    }
    for (key, label) in raw.harmony {
        let location = || format!("{base}.harmony.{key}");
        let index: i64 = key.parse().map_err(|_| ParseError::Schema {
            location: location(),
            message: "harmony keys must be slot indices".into(),
        })?;
        let slot = slot_index(index, nv, location)?;
        slots[slot].harmony = Some(label);
    }
    Ok(Voice { part, slots })
}

fn slot_index(index: i64, nv: usize, location: impl FnOnce() -> String) -> Result<usize, ParseError> {
    if index < 0 || index as u64 >= nv as u64 {
        return Err(ParseError::Index {
            location: location(),
            index,
            nv,
        });
    }
    Ok(index as usize)
}

fn check_references(a: &Analysis) -> Result<(), ParseError> {
    let nv = a.nv();
    let check = |note: &NoteRef, location: String| -> Result<(), ParseError> {
        slot_index(note.index as i64, nv, || location.clone())?;
        if !a.voice(note.part).slots[note.index].is_note() {
            return Err(ParseError::CrossVoice {
                location,
                message: format!("{note} is not a note"),
            });
        }
        Ok(())
    };
    for (k, sym) in a.cross_voice.iter().enumerate() {
        check(&sym.from, format!("crossVoice[{k}].from"))?;
        check(&sym.to, format!("crossVoice[{k}].to"))?;
    }
    for (k, p) in a.custom_prolongations.iter().enumerate() {
        check(&p.start, format!("prolongations[{k}].start"))?;
        check(&p.end, format!("prolongations[{k}].end"))?;
        for (m, mid) in p.middles.iter().enumerate() {
            check(mid, format!("prolongations[{k}].middles[{m}]"))?;
        }
    }
    Ok(())
}

/// Canonical JSON document for `a`.
pub fn serialize(a: &Analysis) -> String {
    let mut out = serde_json::to_string_pretty(&to_value(a)).expect("JSON values always serialize");
    out.push('\n');
    out
}

/// The canonical document as a JSON value (object keys inserted in sorted order).
pub fn to_value(a: &Analysis) -> Value {
    let mut doc = BTreeMap::new();
    doc.insert("meta".to_string(), to_json(&a.meta));
    doc.insert("key".to_string(), to_json(&a.key));
    let voices = a
        .voices
        .iter()
        .map(|v| (v.part.name().to_string(), voice_value(v)))
        .collect::<BTreeMap<_, _>>();
    doc.insert("voices".to_string(), object(voices));
    doc.insert("crossVoice".to_string(), to_json(&a.cross_voice));
    if let Some(meter) = &a.meter {
        doc.insert("meter".to_string(), to_json(meter));
    }
    if !a.custom_prolongations.is_empty() {
        doc.insert("prolongations".to_string(), to_json(&a.custom_prolongations));
    }
    for (k, v) in &a.extra {
        doc.entry(k.clone()).or_insert_with(|| v.clone());
    }
    object(doc)
}

fn voice_value(v: &Voice) -> Value {
    let index_set = |pred: fn(&NoteEvent) -> bool| -> Value {
        let set: BTreeSet<usize> = v
            .slots
            .iter()
            .enumerate()
            .filter(|(_, ev)| pred(ev))
            .map(|(i, _)| i)
            .collect();
        Value::from(set.into_iter().collect::<Vec<_>>())
    };
    let pitches = v
        .slots
        .iter()
        .map(|ev| match ev.content {
            SlotContent::Pitch(p) => p.to_string(),
            SlotContent::Rest => REST_TOKEN.to_string(),
            SlotContent::Hold => HOLD_TOKEN.to_string(),
        })
        .collect::<Vec<_>>();
    let depths = v.slots.iter().map(|ev| ev.depth).collect::<Vec<_>>();
    let harmony = v
        .slots
        .iter()
        .enumerate()
        .filter_map(|(i, ev)| ev.harmony.as_ref().map(|h| (i.to_string(), Value::from(h.clone()))))
        .collect::<BTreeMap<_, _>>();

    let mut fields = BTreeMap::new();
    fields.insert("pitches".to_string(), Value::from(pitches));
    fields.insert("depths".to_string(), to_json(&depths));
    fields.insert("ursatz".to_string(), index_set(|ev| ev.ursatz));
    fields.insert("flags".to_string(), index_set(|ev| ev.flagged));
    fields.insert("parens".to_string(), index_set(|ev| ev.parenthesized));
    fields.insert("accidentals".to_string(), index_set(|ev| ev.accidental_displayed));
    fields.insert("harmony".to_string(), object(harmony));
    object(fields)
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    canonicalize(serde_json::to_value(value).expect("model types serialize to JSON"))
}

fn object(fields: BTreeMap<String, Value>) -> Value {
    let mut map = Map::new();
    for (k, v) in fields {
        map.insert(k, canonicalize(v));
    }
    Value::Object(map)
}

/// Rebuilds objects with keys in sorted order, whatever map type serde_json uses.
fn canonicalize(value: Value) -> Value {
    match value {
        Value::Object(map) => object(map.into_iter().collect()),
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn doc(soprano: Value) -> String {
        json!({
            "meta": {"title": "t"},
            "key": {"tonic": "C", "mode": "major"},
            "voices": {"soprano": soprano},
        })
        .to_string()
    }

    fn err_code(text: &str) -> &'static str {
        parse(text).unwrap_err().code()
    }

    #[test]
    fn fixture_a_parses() {
        let a = parse(&doc(json!({
            "pitches": ["C5", "D5", "E5", "D5", "C5"],
            "depths": [3, 1, 0, 2, 3],
        })))
        .unwrap();
        assert_eq!(a.nv(), 5);
        assert_eq!(a.voice(Part::Soprano).notes().count(), 5);
        assert!(a.voice(Part::Bass).is_empty());
        assert_eq!(a.max_depth(), 3);
    }

    #[test]
    fn error_codes() {
        assert_eq!(err_code("{not json"), "E_SYNTAX");
        assert_eq!(err_code("[]"), "E_SCHEMA");
        assert_eq!(err_code(r#"{"meta":{}}"#), "E_SCHEMA");
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C5", "D5", "E5"], "depths": [1, 0]}))),
            "E_LENGTH"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["H4"], "depths": [0]}))),
            "E_PITCH"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C11"], "depths": [0]}))),
            "E_RANGE"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["_", "C4"], "depths": [null, 0]}))),
            "E_HOLD"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C4", "R", "_"], "depths": [0, null, null]}))),
            "E_HOLD"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C4"], "depths": [0], "ursatz": [1]}))),
            "E_INDEX"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C4"], "depths": [0], "flags": [-1]}))),
            "E_INDEX"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C4"], "depths": [0], "harmony": {"3": "I"}}))),
            "E_INDEX"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C4", "R"], "depths": [0, 1]}))),
            "E_DEPTH"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": ["C4"], "depths": [null]}))),
            "E_DEPTH"
        );
        assert_eq!(
            err_code(&doc(json!({"pitches": [], "depths": []}))),
            "E_LENGTH"
        );
    }

    #[test]
    fn unequal_voice_lengths() {
        let text = json!({
            "voices": {
                "soprano": {"pitches": ["C5", "D5"], "depths": [1, 0]},
                "bass": {"pitches": ["C3"], "depths": [1]},
            }
        })
        .to_string();
        assert_eq!(err_code(&text), "E_LENGTH");
    }

    #[test]
    fn cross_voice_endpoints_must_be_notes() {
        let text = json!({
            "voices": {
                "soprano": {"pitches": ["C5", "R"], "depths": [1, null]},
                "bass": {"pitches": ["C3", "E3"], "depths": [1, 0]},
            },
            "crossVoice": [{"kind": "voiceExchange",
                            "from": {"part": "soprano", "index": 1},
                            "to": {"part": "bass", "index": 1}}],
        })
        .to_string();
        assert_eq!(err_code(&text), "E_INDEX");
    }

    #[test]
    fn index_sets_become_flags_and_back() {
        let a = parse(&doc(json!({
            "pitches": ["C5", "_", "Bb4", "R"],
            "depths": [2, null, 0, null],
            "ursatz": [2, 0],
            "flags": [2],
            "parens": [0],
            "accidentals": [2],
            "harmony": {"0": "I", "2": "V"},
        })))
        .unwrap();
        let sop = a.voice(Part::Soprano);
        assert!(sop.slots[0].ursatz && sop.slots[2].ursatz);
        assert!(sop.slots[2].flagged && sop.slots[0].parenthesized);
        assert!(sop.slots[2].accidental_displayed);
        assert_eq!(sop.slots[2].harmony.as_deref(), Some("V"));
        assert_eq!(sop.duration(0), 2);

        let out: Value = serde_json::from_str(&serialize(&a)).unwrap();
        assert_eq!(out["voices"]["soprano"]["ursatz"], json!([0, 2]));
        assert_eq!(out["voices"]["soprano"]["depths"], json!([2, null, 0, null]));
        assert_eq!(out["voices"]["alto"]["pitches"], json!(["R", "R", "R", "R"]));
    }

    #[test]
    fn unknown_top_level_fields_survive() {
        let mut v: Value = serde_json::from_str(&doc(json!({"pitches": ["C4"], "depths": [1]}))).unwrap();
        v["source"] = json!({"z": 1, "a": [true]});
        let a = parse(&v.to_string()).unwrap();
        assert_eq!(a.extra["source"], json!({"z": 1, "a": [true]}));
        let again = parse(&serialize(&a)).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn absent_optional_meta_is_omitted() {
        let a = parse(&doc(json!({"pitches": ["C4"], "depths": [1]}))).unwrap();
        let text = serialize(&a);
        assert!(!text.contains("subtitle"));
        assert!(!text.contains("meter"));
        assert!(!text.contains("prolongations"));
        assert_eq!(serialize(&parse(&text).unwrap()), text);
    }
}
