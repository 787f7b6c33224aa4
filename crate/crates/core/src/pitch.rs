//! Spelled pitches in scientific pitch notation.
//!
//! Tokens look like `C4`, `Bb3`, `F#5`, `Ebb2` or `C##-1`: a letter `A`-`G`,
//! up to two `#` or `b`, then a signed octave (C4 is middle C).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PitchError {
    #[error("unparseable pitch token {0:?}")]
    Malformed(String),
    #[error("pitch {0} is outside the MIDI range 0..=127")]
    Range(String),
}

impl PitchError {
    pub fn code(&self) -> &'static str {
        match self {
            PitchError::Malformed(_) => "E_PITCH",
            PitchError::Range(_) => "E_RANGE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    C,
    D,
    E,
    F,
    G,
    A,
    B,
}

impl Letter {
    pub const ALL: [Letter; 7] = [
        Letter::C,
        Letter::D,
        Letter::E,
        Letter::F,
        Letter::G,
        Letter::A,
        Letter::B,
    ];

    /// Semitones above C.
    pub fn semitone(self) -> i32 {
        match self {
            Letter::C => 0,
            Letter::D => 2,
            Letter::E => 4,
            Letter::F => 5,
            Letter::G => 7,
            Letter::A => 9,
            Letter::B => 11,
        }
    }

    /// Diatonic steps above C (C = 0 .. B = 6).
    pub fn step(self) -> i32 {
        self as i32
    }

    pub fn from_char(c: char) -> Option<Letter> {
        Some(match c {
            'C' => Letter::C,
            'D' => Letter::D,
            'E' => Letter::E,
            'F' => Letter::F,
            'G' => Letter::G,
            'A' => Letter::A,
            'B' => Letter::B,
            _ => return None,
        })
    }

    fn as_char(self) -> char {
        match self {
            Letter::C => 'C',
            Letter::D => 'D',
            Letter::E => 'E',
            Letter::F => 'F',
            Letter::G => 'G',
            Letter::A => 'A',
            Letter::B => 'B',
        }
    }
}

/// A spelled pitch. Construction guarantees the MIDI number is in `0..=127`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PitchSpec {
    letter: Letter,
    accidental: i8,
    octave: i8,
}

impl PitchSpec {
    pub fn new(letter: Letter, accidental: i8, octave: i8) -> Result<Self, PitchError> {
        let spec = PitchSpec {
            letter,
            accidental,
            octave,
        };
        if !(-2..=2).contains(&accidental) {
            return Err(PitchError::Malformed(spec.to_string()));
        }
        if !(0..=127).contains(&midi_number_unchecked(letter, accidental, octave)) {
            return Err(PitchError::Range(spec.to_string()));
        }
        Ok(spec)
    }

    pub fn letter(&self) -> Letter {
        self.letter
    }

    pub fn accidental(&self) -> i8 {
        self.accidental
    }

    pub fn octave(&self) -> i8 {
        self.octave
    }

    /// `12 * (octave + 1) + letter semitone + accidental`, so C4 = 60.
    pub fn midi(&self) -> u8 {
        midi_number_unchecked(self.letter, self.accidental, self.octave) as u8
    }

    /// Sounding pitch class, 0..12 (accidentals applied).
    pub fn pitch_class(&self) -> u8 {
        self.midi() % 12
    }

    /// Position on the staff in diatonic steps, C0 = 0.
    pub fn diatonic_position(&self) -> i32 {
        self.octave as i32 * 7 + self.letter.step()
    }
}

/// MIDI number of a spelling, failing with `E_RANGE` outside `0..=127`.
pub fn midi_number(letter: Letter, accidental: i8, octave: i8) -> Result<u8, PitchError> {
    PitchSpec::new(letter, accidental, octave).map(|p| p.midi())
}

fn midi_number_unchecked(letter: Letter, accidental: i8, octave: i8) -> i32 {
    12 * (octave as i32 + 1) + letter.semitone() + accidental as i32
}

impl FromStr for PitchSpec {
    type Err = PitchError;

    fn from_str(token: &str) -> Result<Self, Self::Err> {
        let malformed = || PitchError::Malformed(token.to_string());
        let mut chars = token.chars();
        let letter = chars
            .next()
            .and_then(Letter::from_char)
            .ok_or_else(malformed)?;
        let rest = chars.as_str();
        let accidental_len = rest.find(|c| c != '#' && c != 'b').unwrap_or(rest.len());
        let (accidentals, octave) = rest.split_at(accidental_len);
        let accidental = match accidentals {
            "" => 0,
            "#" => 1,
            "##" => 2,
            "b" => -1,
            "bb" => -2,
            _ => return Err(malformed()),
        };
        // Reject "+4", " 4" and friends that i8::from_str would otherwise accept.
        let digits = octave.strip_prefix('-').unwrap_or(octave);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        let octave: i8 = octave.parse().map_err(|_| malformed())?;
        PitchSpec::new(letter, accidental, octave)
    }
}

impl fmt::Display for PitchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let accidental = match self.accidental {
            -2 => "bb",
            -1 => "b",
            1 => "#",
            2 => "##",
            _ => "",
        };
        write!(f, "{}{}{}", self.letter.as_char(), accidental, self.octave)
    }
}
