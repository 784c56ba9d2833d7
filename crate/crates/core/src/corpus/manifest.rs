//! JSONL manifest and hypothesis-file parsing.
//!
//! Each line is one JSON record. Level/quality/split tokens are validated
//! separately from JSON syntax so errors name the offending token and the
//! 1-based line number.

use std::collections::HashSet;
use std::str::FromStr;

use serde::Deserialize;

use super::{AudioQuality, CefrLevel, CorpusError, Hypothesis, Split, Utterance};

#[derive(Deserialize)]
struct RawUtterance {
    id: String,
    reference: String,
    level: String,
    quality: String,
    split: String,
    #[serde(default)]
    audio_path: Option<String>,
    #[serde(default)]
    duration_s: Option<f64>,
}

/// Parse a reference manifest. One [`Utterance`] per non-blank line, in file
/// order. Ids must be unique.
pub fn parse_manifest(jsonl_text: &str) -> Result<Vec<Utterance>, CorpusError> {
    let mut utterances = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw_line) in jsonl_text.lines().enumerate() {
        let line = idx + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let raw: RawUtterance =
            serde_json::from_str(raw_line).map_err(|e| CorpusError::MalformedLine {
                line,
                message: e.to_string(),
            })?;
        if raw.id.is_empty() {
            return Err(CorpusError::EmptyId { line });
        }
        let level = CefrLevel::from_str(&raw.level).map_err(|_| CorpusError::UnknownLevel {
            line,
            token: raw.level.clone(),
        })?;
        let quality =
            AudioQuality::from_str(&raw.quality).map_err(|_| CorpusError::UnknownQuality {
                line,
                token: raw.quality.clone(),
            })?;
        let split = Split::from_str(&raw.split).map_err(|_| CorpusError::UnknownSplit {
            line,
            token: raw.split.clone(),
        })?;
        if let Some(d) = raw.duration_s {
            if d < 0.0 {
                return Err(CorpusError::NegativeDuration { line, value: d });
            }
        }
        if !seen.insert(raw.id.clone()) {
            return Err(CorpusError::DuplicateId(raw.id));
        }
        utterances.push(Utterance {
            id: raw.id,
            reference: raw.reference,
            level,
            quality,
            split,
            audio_path: raw.audio_path,
            duration_s: raw.duration_s,
        });
    }
    Ok(utterances)
}

/// Serialize a manifest back to JSONL. `parse_manifest` of the result is the
/// identity on valid input.
pub fn serialize_manifest(utterances: &[Utterance]) -> String {
    let mut out = String::new();
    for u in utterances {
        out.push_str(&serde_json::to_string(u).expect("utterance serializes"));
        out.push('\n');
    }
    out
}

#[derive(Deserialize)]
struct RawHypothesis {
    utterance_id: String,
    system_id: String,
    text: String,
}

/// Parse a per-system hypothesis file. `(utterance_id, system_id)` pairs
/// must be unique.
pub fn parse_hypotheses(jsonl_text: &str) -> Result<Vec<Hypothesis>, CorpusError> {
    let mut hypotheses = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw_line) in jsonl_text.lines().enumerate() {
        let line = idx + 1;
        if raw_line.trim().is_empty() {
            continue;
        }
        let raw: RawHypothesis =
            serde_json::from_str(raw_line).map_err(|e| CorpusError::MalformedLine {
                line,
                message: e.to_string(),
            })?;
        if raw.utterance_id.is_empty() {
            return Err(CorpusError::EmptyId { line });
        }
        if !seen.insert((raw.utterance_id.clone(), raw.system_id.clone())) {
            return Err(CorpusError::DuplicateHypothesis {
                utterance_id: raw.utterance_id,
                system_id: raw.system_id,
            });
        }
        hypotheses.push(Hypothesis {
            utterance_id: raw.utterance_id,
            system_id: raw.system_id,
            text: raw.text,
        });
    }
    Ok(hypotheses)
}
