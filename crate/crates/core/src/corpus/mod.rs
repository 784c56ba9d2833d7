//! Corpus data model, manifest ingestion, text normalization, and a seeded
//! synthetic-corpus generator.
//!
//! Manifests are JSONL, one utterance per line. Hypotheses live in separate
//! per-system JSONL files keyed by `utterance_id`, so one reference set can
//! pair with any number of systems.

mod manifest;
mod normalize;
mod synth;

pub use manifest::{parse_hypotheses, parse_manifest, serialize_manifest};
pub use normalize::normalize_text;
pub use synth::{synth_corpus, CorpusSpec, SynthCorpus};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// CEFR proficiency level, ordered low to high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CefrLevel {
    A2,
    B1,
    B2,
    C1,
}

impl CefrLevel {
    pub const ALL: [CefrLevel; 4] = [CefrLevel::A2, CefrLevel::B1, CefrLevel::B2, CefrLevel::C1];

    /// Zero-based position in the low-to-high ordering.
    pub fn index(self) -> usize {
        match self {
            CefrLevel::A2 => 0,
            CefrLevel::B1 => 1,
            CefrLevel::B2 => 2,
            CefrLevel::C1 => 3,
        }
    }
}

impl fmt::Display for CefrLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CefrLevel::A2 => "A2",
            CefrLevel::B1 => "B1",
            CefrLevel::B2 => "B2",
            CefrLevel::C1 => "C1",
        })
    }
}

impl FromStr for CefrLevel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "A2" => Ok(CefrLevel::A2),
            "B1" => Ok(CefrLevel::B1),
            "B2" => Ok(CefrLevel::B2),
            "C1" => Ok(CefrLevel::C1),
            _ => Err(()),
        }
    }
}

/// Audio-quality rating, ordered low to high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AudioQuality {
    Q3,
    Q4,
    Q5,
}

impl AudioQuality {
    pub const ALL: [AudioQuality; 3] = [AudioQuality::Q3, AudioQuality::Q4, AudioQuality::Q5];

    pub fn index(self) -> usize {
        match self {
            AudioQuality::Q3 => 0,
            AudioQuality::Q4 => 1,
            AudioQuality::Q5 => 2,
        }
    }
}

impl fmt::Display for AudioQuality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AudioQuality::Q3 => "Q3",
            AudioQuality::Q4 => "Q4",
            AudioQuality::Q5 => "Q5",
        })
    }
}

impl FromStr for AudioQuality {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "Q3" => Ok(AudioQuality::Q3),
            "Q4" => Ok(AudioQuality::Q4),
            "Q5" => Ok(AudioQuality::Q5),
            _ => Err(()),
        }
    }
}

/// Dataset partition an utterance belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Eval,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Eval => "eval",
        })
    }
}

impl FromStr for Split {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "eval" => Ok(Split::Eval),
            _ => Err(()),
        }
    }
}

/// One recording: reference transcript plus grading metadata.
///
/// `reference` is kept raw; normalization happens at scoring time so the
/// stored manifest round-trips byte-for-byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub id: String,
    pub reference: String,
    pub level: CefrLevel,
    pub quality: AudioQuality,
    pub split: Split,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
}

/// One system's transcript for one utterance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub utterance_id: String,
    pub system_id: String,
    pub text: String,
}

/// Errors from manifest parsing, spec validation, and corpus generation.
#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: unknown CEFR level {token:?}")]
    UnknownLevel { line: usize, token: String },
    #[error("line {line}: unknown audio quality {token:?}")]
    UnknownQuality { line: usize, token: String },
    #[error("line {line}: unknown split {token:?}")]
    UnknownSplit { line: usize, token: String },
    #[error("line {line}: empty id")]
    EmptyId { line: usize },
    #[error("line {line}: negative duration {value}")]
    NegativeDuration { line: usize, value: f64 },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("duplicate hypothesis for utterance {utterance_id:?} from system {system_id:?}")]
    DuplicateHypothesis {
        utterance_id: String,
        system_id: String,
    },
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
}
