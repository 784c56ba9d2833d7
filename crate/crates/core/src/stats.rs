//! Paired bootstrap over utterances and the exact paired sign test.
//!
//! The bootstrap statistic is the macro mean of per-utterance WER
//! differences — the mean of `wer_proposed(u) - wer_baseline(u)` over a
//! resample drawn with replacement, pairing preserved. This is deliberately
//! not the micro WER delta; comparison reports carry both side by side.
//!
//! Each resample draws from a seed derived from `(seed, resample_index)`,
//! and percentiles are taken on the fully collected delta vector, so
//! results are bit-identical for any thread count.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::{corpus_wer, utterance_wer, WerScore};
use crate::corpus::{Hypothesis, Utterance};
use crate::metrics::{score_system, AlignedUtterance, Dimension, GroupKey, MetricsError};
use crate::par;
use crate::seeds::{derive_seed, rng_from, PRNG_ID};

/// Per-utterance WER under two systems, computed on the identical reference
/// with the same normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedSample {
    pub utterance_id: String,
    pub wer_baseline: f64,
    pub wer_proposed: f64,
}

impl PairedSample {
    fn diff(&self) -> f64 {
        self.wer_proposed - self.wer_baseline
    }
}

/// Bootstrap parameters. `resamples` is the number of bootstrap replicates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub seed: u64,
    pub ci_level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 10_000,
            seed: 42,
            ci_level: 0.95,
        }
    }
}

impl BootstrapConfig {
    /// Percentile CIs get unreliable below ~100 replicates; callers may
    /// want to warn.
    pub fn ci_reliable(&self) -> bool {
        self.resamples >= 100
    }
}

/// Result of a paired bootstrap comparison.
///
/// `delta_mean` is the observed (not resampled) macro mean difference.
/// `p_two_sided` uses add-one smoothing `(count+1)/(B+1)`, so its floor is
/// `2/(B+1)` and it never reports zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub delta_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_two_sided: f64,
    pub resamples_used: usize,
}

/// Result of the exact paired sign test. Ties are dropped, not split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTestResult {
    pub n_improved: u64,
    pub n_worsened: u64,
    pub n_tied: u64,
    pub p_two_sided: f64,
}

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("paired bootstrap over an empty sample list")]
    EmptySamples,
    #[error("bootstrap needs at least 1 resample")]
    NoResamples,
    #[error("sign test: all pairs tied")]
    AllTied,
    #[error("id mismatch between systems: {0}")]
    IdMismatch(#[from] MetricsError),
}

/// Paired bootstrap over utterances.
///
/// Draws `cfg.resamples` resamples of N utterances with replacement, takes
/// the macro mean difference per resample, and reports the percentile CI
/// (mirrored order statistics at `ci_level`) plus the smoothed two-sided p.
pub fn paired_bootstrap(
    samples: &[PairedSample],
    cfg: &BootstrapConfig,
) -> Result<BootstrapResult, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySamples);
    }
    if cfg.resamples == 0 {
        return Err(StatsError::NoResamples);
    }
    let diffs: Vec<f64> = samples.iter().map(PairedSample::diff).collect();
    let n = diffs.len();
    let delta_mean = diffs.iter().sum::<f64>() / n as f64;

    let deltas = par::map_indexed(cfg.resamples, |b| {
        let mut rng = rng_from(derive_seed(cfg.seed, "bootstrap/resample", b as u64));
        let mut acc = 0.0;
        for _ in 0..n {
            acc += diffs[rng.random_range(0..n)];
        }
        acc / n as f64
    });

    let n_le = deltas.iter().filter(|d| **d <= 0.0).count();
    let n_ge = deltas.iter().filter(|d| **d >= 0.0).count();
    let b = cfg.resamples;
    let p_two_sided = (2.0 * (n_le.min(n_ge) + 1) as f64 / (b + 1) as f64).min(1.0);

    let mut sorted = deltas;
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - cfg.ci_level;
    // Mirrored order statistics keep CI endpoints exactly antisymmetric
    // under a baseline/proposed swap.
    let k = ((alpha / 2.0) * (b - 1) as f64).floor() as usize;
    let k = k.min(b - 1);

    Ok(BootstrapResult {
        delta_mean,
        ci_low: sorted[k],
        ci_high: sorted[b - 1 - k],
        p_two_sided,
        resamples_used: b,
    })
}

/// Exact paired sign test on improved-vs-worsened counts, two-sided by tail
/// doubling, capped at 1. Errors when every pair is tied.
pub fn sign_test(samples: &[PairedSample]) -> Result<SignTestResult, StatsError> {
    let mut n_improved = 0u64;
    let mut n_worsened = 0u64;
    let mut n_tied = 0u64;
    for s in samples {
        let d = s.diff();
        if d < 0.0 {
            n_improved += 1;
        } else if d > 0.0 {
            n_worsened += 1;
        } else {
            n_tied += 1;
        }
    }
    let n = n_improved + n_worsened;
    if n == 0 {
        return Err(StatsError::AllTied);
    }
    let k = n_improved.min(n_worsened);
    Ok(SignTestResult {
        n_improved,
        n_worsened,
        n_tied,
        p_two_sided: binomial_two_sided(n, k),
    })
}

/// Two-sided p for an exact binomial(n, 1/2) test: `min(1, 2 * P[X <= k])`.
///
/// Exact integer arithmetic up to n = 62; stable log-space accumulation
/// beyond that.
fn binomial_two_sided(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n / 2 + 1);
    if n <= 62 {
        let mut term: u128 = 1; // C(n, 0)
        let mut sum: u128 = 1;
        for i in 0..k {
            term = term * (n - i) as u128 / (i + 1) as u128;
            sum += term;
        }
        let p = 2.0 * sum as f64 / (1u128 << n) as f64;
        p.min(1.0)
    } else {
        let ln2 = std::f64::consts::LN_2;
        let mut ln_binom = 0.0; // ln C(n, 0)
        let mut tail = (-(n as f64) * ln2).exp();
        for i in 0..k {
            ln_binom += ((n - i) as f64 / (i + 1) as f64).ln();
            tail += (ln_binom - n as f64 * ln2).exp();
        }
        (2.0 * tail).min(1.0)
    }
}

/// One overall or per-group system comparison: bootstrap plus sign test,
/// with micro WERs reported alongside the macro delta. `sign_test` is
/// `None` when every pair in the cell is tied.
#[derive(Debug, Clone, Serialize)]
pub struct SystemComparison {
    pub n_utterances: u64,
    pub micro_wer_baseline: WerScore,
    pub micro_wer_proposed: WerScore,
    pub bootstrap: BootstrapResult,
    pub sign_test: Option<SignTestResult>,
}

/// Echo of the configuration that produced a comparison, including the seed
/// and PRNG scheme identifier so archived runs are replayable.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonConfigEcho {
    pub resamples: usize,
    pub ci_level: f64,
    pub seed: u64,
    pub prng_id: &'static str,
}

/// Full comparison of a proposed system against a baseline.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub overall: SystemComparison,
    pub by_group: BTreeMap<String, SystemComparison>,
    pub config: ComparisonConfigEcho,
}

/// Compare two systems over the same references, overall and optionally per
/// group. Both systems must cover exactly the reference ids.
pub fn compare_systems(
    references: &[Utterance],
    baseline: &[Hypothesis],
    proposed: &[Hypothesis],
    cfg: &BootstrapConfig,
    stratify: Option<Dimension>,
) -> Result<ComparisonReport, StatsError> {
    let scored_bl = score_system(references, baseline)?;
    let scored_pr = score_system(references, proposed)?;

    let overall = compare_cell(
        &scored_bl,
        &scored_pr,
        cfg,
        derive_seed(cfg.seed, "compare/overall", 0),
    )?;

    let mut by_group = BTreeMap::new();
    if let Some(dimension) = stratify {
        let mut keys: Vec<GroupKey> = scored_bl
            .iter()
            .map(|u| match dimension {
                Dimension::Level => GroupKey::Level(u.level),
                Dimension::Quality => GroupKey::Quality(u.quality),
            })
            .collect();
        keys.sort();
        keys.dedup();
        for (gi, key) in keys.into_iter().enumerate() {
            let in_group = |u: &&AlignedUtterance| match (dimension, key) {
                (Dimension::Level, GroupKey::Level(l)) => u.level == l,
                (Dimension::Quality, GroupKey::Quality(q)) => u.quality == q,
                _ => unreachable!(),
            };
            let bl_group: Vec<AlignedUtterance> =
                scored_bl.iter().filter(in_group).cloned().collect();
            let pr_group: Vec<AlignedUtterance> =
                scored_pr.iter().filter(in_group).cloned().collect();
            let cell = compare_cell(
                &bl_group,
                &pr_group,
                cfg,
                derive_seed(cfg.seed, &format!("compare/group/{key}"), gi as u64),
            )?;
            by_group.insert(key.to_string(), cell);
        }
    }

    Ok(ComparisonReport {
        overall,
        by_group,
        config: ComparisonConfigEcho {
            resamples: cfg.resamples,
            ci_level: cfg.ci_level,
            seed: cfg.seed,
            prng_id: PRNG_ID,
        },
    })
}

fn compare_cell(
    baseline: &[AlignedUtterance],
    proposed: &[AlignedUtterance],
    cfg: &BootstrapConfig,
    cell_seed: u64,
) -> Result<SystemComparison, StatsError> {
    debug_assert_eq!(baseline.len(), proposed.len());
    let samples: Vec<PairedSample> = baseline
        .iter()
        .zip(proposed)
        .map(|(b, p)| {
            debug_assert_eq!(b.id, p.id);
            PairedSample {
                utterance_id: b.id.clone(),
                wer_baseline: utterance_wer(&b.alignment).wer(),
                wer_proposed: utterance_wer(&p.alignment).wer(),
            }
        })
        .collect();

    let cell_cfg = BootstrapConfig {
        seed: cell_seed,
        ..cfg.clone()
    };
    let bootstrap = paired_bootstrap(&samples, &cell_cfg)?;
    let sign = match sign_test(&samples) {
        Ok(s) => Some(s),
        Err(StatsError::AllTied) => None,
        Err(e) => return Err(e),
    };

    let bl_alignments: Vec<_> = baseline.iter().map(|u| u.alignment.clone()).collect();
    let pr_alignments: Vec<_> = proposed.iter().map(|u| u.alignment.clone()).collect();
    Ok(SystemComparison {
        n_utterances: samples.len() as u64,
        micro_wer_baseline: corpus_wer(&bl_alignments).expect("nonempty cell"),
        micro_wer_proposed: corpus_wer(&pr_alignments).expect("nonempty cell"),
        bootstrap,
        sign_test: sign,
    })
}

/// Render a delta with 4 decimals, e.g. `0.0611` / `-0.0611`.
pub fn format_delta(delta: f64) -> String {
    format!("{delta:.4}")
}

/// Render a p-value, thresholding tiny values as `<0.001`.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "<0.001".to_string()
    } else {
        format!("{p:.4}")
    }
}
