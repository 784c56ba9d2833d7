//! Seeded synthetic-corpus generator.
//!
//! Reproduces a realistic proficiency/quality imbalance: word share (not
//! utterance share) drives level assignment, because the imbalance profile
//! is a word distribution. Hypotheses are produced by per-token corruption
//! at level-calibrated rates, with substitution/insertion/deletion events
//! proportioned 46:29:25 to match the observed baseline error composition.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::par;
use crate::seeds::{derive_seed, rng_from};

use super::{AudioQuality, CefrLevel, CorpusError, Hypothesis, Split, Utterance};

/// Probability that a reference token continues the token chain instead of
/// jumping to a uniform draw. Gives references enough sequential structure
/// for the toy decoder to learn from.
const CHAIN_CONTINUE_PROB: f64 = 0.85;

/// Corruption-event split: substitutions 46%, insertions 29%, deletions 25%.
const SUB_SHARE: f64 = 0.46;
const INS_SHARE: f64 = 0.29;

/// Configuration for [`synth_corpus`]. Accepted as a JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_utterances: usize,
    pub word_share_by_level: BTreeMap<CefrLevel, f64>,
    pub word_share_by_quality: BTreeMap<AudioQuality, f64>,
    /// Per simulated system: target word error rate per level.
    pub target_wer_by_level: BTreeMap<String, BTreeMap<CefrLevel, f64>>,
    pub vocab_size: usize,
    pub mean_len: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        let mut word_share_by_level = BTreeMap::new();
        word_share_by_level.insert(CefrLevel::A2, 0.027);
        word_share_by_level.insert(CefrLevel::B1, 0.328);
        word_share_by_level.insert(CefrLevel::B2, 0.480);
        word_share_by_level.insert(CefrLevel::C1, 0.165);

        let mut word_share_by_quality = BTreeMap::new();
        word_share_by_quality.insert(AudioQuality::Q3, 0.032);
        word_share_by_quality.insert(AudioQuality::Q4, 0.418);
        word_share_by_quality.insert(AudioQuality::Q5, 0.550);

        let mut baseline = BTreeMap::new();
        baseline.insert(CefrLevel::A2, 0.17);
        baseline.insert(CefrLevel::B1, 0.12);
        baseline.insert(CefrLevel::B2, 0.10);
        baseline.insert(CefrLevel::C1, 0.079);

        let mut adapted = BTreeMap::new();
        adapted.insert(CefrLevel::A2, 0.11);
        adapted.insert(CefrLevel::B1, 0.095);
        adapted.insert(CefrLevel::B2, 0.085);
        adapted.insert(CefrLevel::C1, 0.072);

        let mut target_wer_by_level = BTreeMap::new();
        target_wer_by_level.insert("baseline".to_string(), baseline);
        target_wer_by_level.insert("adapted".to_string(), adapted);

        CorpusSpec {
            n_utterances: 2000,
            word_share_by_level,
            word_share_by_quality,
            target_wer_by_level,
            vocab_size: 64,
            mean_len: 12,
            seed: 42,
        }
    }
}

impl CorpusSpec {
    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let spec: CorpusSpec =
            serde_json::from_str(text).map_err(|e| CorpusError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.n_utterances == 0 {
            return Err(CorpusError::InvalidSpec("n_utterances must be positive".into()));
        }
        if self.vocab_size < 2 {
            return Err(CorpusError::InvalidSpec("vocab_size must be at least 2".into()));
        }
        if self.mean_len == 0 {
            return Err(CorpusError::InvalidSpec("mean_len must be positive".into()));
        }
        check_share_map("word_share_by_level", self.word_share_by_level.values())?;
        check_share_map("word_share_by_quality", self.word_share_by_quality.values())?;
        for (system, targets) in &self.target_wer_by_level {
            for (level, rate) in targets {
                if !(0.0..=1.0).contains(rate) {
                    return Err(CorpusError::InvalidSpec(format!(
                        "target_wer_by_level[{system}][{level}] = {rate} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_share_map<'a>(
    name: &str,
    values: impl Iterator<Item = &'a f64>,
) -> Result<(), CorpusError> {
    let mut sum = 0.0;
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(CorpusError::InvalidSpec(format!(
                "{name} contains fraction {v} outside [0, 1]"
            )));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidSpec(format!(
            "{name} sums to {sum}, expected 1.0"
        )));
    }
    Ok(())
}

/// Output of [`synth_corpus`]: references plus per-system hypotheses.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub utterances: Vec<Utterance>,
    pub hypotheses: BTreeMap<String, Vec<Hypothesis>>,
}

/// Generate a synthetic corpus.
///
/// Deterministic for a fixed seed and independent of thread count: the
/// reference stream is a single logical RNG, and each hypothesis draws from
/// a seed derived per `(system, utterance)`.
pub fn synth_corpus(spec: &CorpusSpec) -> Result<SynthCorpus, CorpusError> {
    spec.validate()?;

    let mut rng = rng_from(derive_seed(spec.seed, "corpus/references", 0));
    let min_len = (spec.mean_len / 2).max(1);
    let max_len = spec.mean_len + spec.mean_len / 2;

    let mut level_words: BTreeMap<CefrLevel, u64> =
        spec.word_share_by_level.keys().map(|&l| (l, 0)).collect();
    let mut quality_words: BTreeMap<AudioQuality, u64> =
        spec.word_share_by_quality.keys().map(|&q| (q, 0)).collect();
    let mut total_words = 0u64;

    let mut utterances = Vec::with_capacity(spec.n_utterances);
    let mut token_ids = Vec::with_capacity(spec.n_utterances);
    for i in 0..spec.n_utterances {
        let len = rng.random_range(min_len..=max_len);
        let projected = total_words + len as u64;

        // Largest-deficit-first keeps realized word shares within one
        // utterance length of their targets.
        let level = pick_deficit(&spec.word_share_by_level, &level_words, projected);
        let quality = pick_deficit(&spec.word_share_by_quality, &quality_words, projected);
        *level_words.get_mut(&level).unwrap() += len as u64;
        *quality_words.get_mut(&quality).unwrap() += len as u64;
        total_words = projected;

        let split = match i % 5 {
            0 | 1 | 2 => Split::Train,
            3 => Split::Dev,
            _ => Split::Eval,
        };

        let ids = sample_token_chain(&mut rng, len, spec.vocab_size);
        let reference = ids
            .iter()
            .map(|&t| format!("w{t}"))
            .collect::<Vec<_>>()
            .join(" ");
        utterances.push(Utterance {
            id: format!("synth-{i:06}"),
            reference,
            level,
            quality,
            split,
            audio_path: None,
            duration_s: None,
        });
        token_ids.push(ids);
    }

    let mut hypotheses = BTreeMap::new();
    for (system_id, targets) in &spec.target_wer_by_level {
        let rows = par::map_indexed(utterances.len(), |i| {
            let utt = &utterances[i];
            let rate = targets.get(&utt.level).copied().unwrap_or(0.0);
            let mut rng = rng_from(derive_seed(
                spec.seed,
                &format!("corpus/hyp/{system_id}"),
                i as u64,
            ));
            let text = corrupt_tokens(&token_ids[i], rate, spec.vocab_size, &mut rng);
            Hypothesis {
                utterance_id: utt.id.clone(),
                system_id: system_id.clone(),
                text,
            }
        });
        hypotheses.insert(system_id.clone(), rows);
    }

    Ok(SynthCorpus {
        utterances,
        hypotheses,
    })
}

fn pick_deficit<K: Copy + Ord>(
    shares: &BTreeMap<K, f64>,
    realized: &BTreeMap<K, u64>,
    projected_total: u64,
) -> K {
    let mut best: Option<(K, f64)> = None;
    for (&key, &share) in shares {
        let deficit = share * projected_total as f64 - realized[&key] as f64;
        match best {
            Some((_, d)) if deficit <= d => {}
            _ => best = Some((key, deficit)),
        }
    }
    best.expect("share map is nonempty").0
}

fn sample_token_chain(rng: &mut impl Rng, len: usize, vocab: usize) -> Vec<usize> {
    let mut ids = Vec::with_capacity(len);
    let mut current = rng.random_range(0..vocab);
    for _ in 0..len {
        ids.push(current);
        current = if rng.random::<f64>() < CHAIN_CONTINUE_PROB {
            (current + 1) % vocab
        } else {
            rng.random_range(0..vocab)
        };
    }
    ids
}

fn corrupt_tokens(ids: &[usize], rate: f64, vocab: usize, rng: &mut impl Rng) -> String {
    let mut out: Vec<usize> = Vec::with_capacity(ids.len() + 2);
    for &tok in ids {
        if rate > 0.0 && rng.random::<f64>() < rate {
            let event = rng.random::<f64>();
            if event < SUB_SHARE {
                // Substitute with a different token.
                let mut other = rng.random_range(0..vocab - 1);
                if other >= tok {
                    other += 1;
                }
                out.push(other);
            } else if event < SUB_SHARE + INS_SHARE {
                out.push(tok);
                out.push(rng.random_range(0..vocab));
            }
            // else: deletion, token dropped
        } else {
            out.push(tok);
        }
    }
    out.iter()
        .map(|&t| format!("w{t}"))
        .collect::<Vec<_>>()
        .join(" ")
}
