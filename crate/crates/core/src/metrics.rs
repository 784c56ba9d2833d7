//! Stratified WER, error-type breakdowns, disparity gaps, relative-change
//! arithmetic, and insertion-token analysis.
//!
//! All group aggregation is exact integer counting over alignment ops, so
//! per-group `sub_rate + ins_rate + del_rate = wer` holds as a rational
//! identity (shared denominator), and groups partition the corpus totals.

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::align::{align, Alignment, WerScore};
use crate::corpus::{normalize_text, AudioQuality, CefrLevel, Hypothesis, Utterance};
use crate::par;

/// Stratification axis. Proficiency level is the primary fairness axis;
/// audio quality is reported alongside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dimension {
    Level,
    Quality,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Level => "level",
            Dimension::Quality => "quality",
        })
    }
}

/// One stratification cell: a value along one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupKey {
    Level(CefrLevel),
    Quality(AudioQuality),
}

impl GroupKey {
    pub fn dimension(&self) -> Dimension {
        match self {
            GroupKey::Level(_) => Dimension::Level,
            GroupKey::Quality(_) => Dimension::Quality,
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKey::Level(l) => write!(f, "{l}"),
            GroupKey::Quality(q) => write!(f, "{q}"),
        }
    }
}

/// One utterance scored against one system, with the metadata needed for
/// stratification.
#[derive(Debug, Clone)]
pub struct AlignedUtterance {
    pub id: String,
    pub level: CefrLevel,
    pub quality: AudioQuality,
    pub alignment: Alignment,
}

/// Micro-averaged WER for one group with exact error-type counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupReport {
    pub group: GroupKey,
    pub n_utts: u64,
    pub n_ref_words: u64,
    pub n_sub: u64,
    pub n_ins: u64,
    pub n_del: u64,
}

impl GroupReport {
    pub fn edits(&self) -> u64 {
        self.n_sub + self.n_ins + self.n_del
    }

    fn denominator(&self) -> u64 {
        self.n_ref_words.max(1)
    }

    pub fn wer(&self) -> f64 {
        self.edits() as f64 / self.denominator() as f64
    }

    pub fn sub_rate(&self) -> f64 {
        self.n_sub as f64 / self.denominator() as f64
    }

    pub fn ins_rate(&self) -> f64 {
        self.n_ins as f64 / self.denominator() as f64
    }

    pub fn del_rate(&self) -> f64 {
        self.n_del as f64 / self.denominator() as f64
    }

    pub fn wer_score(&self) -> WerScore {
        WerScore {
            edits: self.edits(),
            ref_words: self.n_ref_words,
        }
    }
}

impl Serialize for GroupReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("GroupReport", 11)?;
        s.serialize_field("group", &self.group.to_string())?;
        s.serialize_field("dimension", &self.group.dimension())?;
        s.serialize_field("n_utts", &self.n_utts)?;
        s.serialize_field("n_ref_words", &self.n_ref_words)?;
        s.serialize_field("n_sub", &self.n_sub)?;
        s.serialize_field("n_ins", &self.n_ins)?;
        s.serialize_field("n_del", &self.n_del)?;
        s.serialize_field("wer", &self.wer())?;
        s.serialize_field("sub_rate", &self.sub_rate())?;
        s.serialize_field("ins_rate", &self.ins_rate())?;
        s.serialize_field("del_rate", &self.del_rate())?;
        s.end()
    }
}

/// Gap metrics between the worst and best groups.
#[derive(Debug, Clone, Serialize)]
pub struct DisparityReport {
    /// Worst minus best group WER, in WER points.
    pub max_min_gap: f64,
    /// Worst over best group WER; `None` when the best group is error-free.
    pub worst_best_ratio: Option<f64>,
    pub per_group: Vec<GroupReport>,
}

/// An inserted token and how often it was inserted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCount {
    pub token: String,
    pub count: u64,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("disparity needs at least 2 groups, got {0}")]
    NotEnoughGroups(usize),
    #[error("relative change undefined for baseline {0}")]
    NonPositiveBaseline(f64),
    #[error("{system_id}: no hypothesis for utterance ids {missing:?}")]
    MissingHypotheses {
        system_id: String,
        missing: Vec<String>,
    },
    #[error("{system_id}: hypotheses for unknown utterance ids {unknown:?}")]
    UnknownUtterances {
        system_id: String,
        unknown: Vec<String>,
    },
}

/// Normalize and align one system's hypotheses against the references.
///
/// Every reference id must have exactly one hypothesis and every hypothesis
/// must name a known reference. Alignment is mapped in parallel over
/// utterances; output order follows the reference manifest.
pub fn score_system(
    references: &[Utterance],
    hypotheses: &[Hypothesis],
) -> Result<Vec<AlignedUtterance>, MetricsError> {
    let system_id = hypotheses
        .first()
        .map(|h| h.system_id.clone())
        .unwrap_or_default();

    let mut by_id: BTreeMap<&str, &Hypothesis> = BTreeMap::new();
    for h in hypotheses {
        by_id.insert(h.utterance_id.as_str(), h);
    }

    let known: std::collections::HashSet<&str> =
        references.iter().map(|u| u.id.as_str()).collect();
    let unknown: Vec<String> = by_id
        .keys()
        .filter(|id| !known.contains(**id))
        .map(|id| id.to_string())
        .collect();
    if !unknown.is_empty() {
        return Err(MetricsError::UnknownUtterances { system_id, unknown });
    }
    let missing: Vec<String> = references
        .iter()
        .filter(|u| !by_id.contains_key(u.id.as_str()))
        .map(|u| u.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingHypotheses { system_id, missing });
    }

    Ok(par::map_slice(references, |utt| {
        let hyp = by_id[utt.id.as_str()];
        let ref_tokens = normalize_text(&utt.reference);
        let hyp_tokens = normalize_text(&hyp.text);
        AlignedUtterance {
            id: utt.id.clone(),
            level: utt.level,
            quality: utt.quality,
            alignment: align(&ref_tokens, &hyp_tokens),
        }
    }))
}

/// Micro-average WER per group along one dimension. Groups absent from the
/// data are omitted; output is sorted by group order.
pub fn stratified_wer(utterances: &[AlignedUtterance], dimension: Dimension) -> Vec<GroupReport> {
    let mut groups: BTreeMap<GroupKey, GroupReport> = BTreeMap::new();
    for u in utterances {
        let key = match dimension {
            Dimension::Level => GroupKey::Level(u.level),
            Dimension::Quality => GroupKey::Quality(u.quality),
        };
        let report = groups.entry(key).or_insert_with(|| GroupReport {
            group: key,
            n_utts: 0,
            n_ref_words: 0,
            n_sub: 0,
            n_ins: 0,
            n_del: 0,
        });
        report.n_utts += 1;
        report.n_ref_words += u.alignment.ref_len();
        report.n_sub += u.alignment.n_sub;
        report.n_ins += u.alignment.n_ins;
        report.n_del += u.alignment.n_del;
    }
    groups.into_values().collect()
}

/// Max-min gap and worst/best ratio over group WERs.
pub fn disparity(reports: &[GroupReport]) -> Result<DisparityReport, MetricsError> {
    if reports.len() < 2 {
        return Err(MetricsError::NotEnoughGroups(reports.len()));
    }
    let worst = reports
        .iter()
        .map(GroupReport::wer)
        .fold(f64::NEG_INFINITY, f64::max);
    let best_report = reports
        .iter()
        .min_by(|a, b| a.wer().total_cmp(&b.wer()))
        .expect("nonempty");
    let best = best_report.wer();
    let ratio = if best_report.edits() == 0 {
        None
    } else {
        Some(worst / best)
    };
    Ok(DisparityReport {
        max_min_gap: worst - best,
        worst_best_ratio: ratio,
        per_group: reports.to_vec(),
    })
}

/// Relative WER change in percent: positive means the system improved on
/// the baseline, negative means it got worse.
pub fn relative_change(baseline: f64, system: f64) -> Result<f64, MetricsError> {
    if baseline <= 0.0 {
        return Err(MetricsError::NonPositiveBaseline(baseline));
    }
    Ok(100.0 * (baseline - system) / baseline)
}

/// The `k` most frequently inserted tokens within one group, counted over
/// the deterministic alignment op sequences. Ties break lexicographically.
pub fn top_insertions(
    utterances: &[AlignedUtterance],
    group: GroupKey,
    k: usize,
) -> Vec<TokenCount> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for u in utterances {
        let key = match group.dimension() {
            Dimension::Level => GroupKey::Level(u.level),
            Dimension::Quality => GroupKey::Quality(u.quality),
        };
        if key != group {
            continue;
        }
        for op in &u.alignment.ops {
            if let crate::align::EditOp::Insertion { hypothesis } = op {
                *counts.entry(hypothesis.as_str()).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<TokenCount> = counts
        .into_iter()
        .map(|(token, count)| TokenCount {
            token: token.to_string(),
            count,
        })
        .collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.token.cmp(&b.token)));
    ranked.truncate(k);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::corpus_wer;
    use crate::corpus::Split;

    fn utt(id: &str, reference: &str, level: CefrLevel) -> Utterance {
        Utterance {
            id: id.to_string(),
            reference: reference.to_string(),
            level,
            quality: AudioQuality::Q4,
            split: Split::Eval,
            audio_path: None,
            duration_s: None,
        }
    }

    fn hyp(id: &str, text: &str) -> Hypothesis {
        Hypothesis {
            utterance_id: id.to_string(),
            system_id: "sys".to_string(),
            text: text.to_string(),
        }
    }

    fn scored(pairs: &[(&str, &str, CefrLevel)]) -> Vec<AlignedUtterance> {
        let refs: Vec<Utterance> = pairs
            .iter()
            .enumerate()
            .map(|(i, (r, _, l))| utt(&format!("u{i}"), r, *l))
            .collect();
        let hyps: Vec<Hypothesis> = pairs
            .iter()
            .enumerate()
            .map(|(i, (_, h, _))| hyp(&format!("u{i}"), h))
            .collect();
        score_system(&refs, &hyps).unwrap()
    }

    #[test]
    fn single_group_equals_corpus_wer() {
        let utts = scored(&[
            ("a b c", "a x c", CefrLevel::B1),
            ("d e", "d e f", CefrLevel::B1),
        ]);
        let reports = stratified_wer(&utts, Dimension::Level);
        assert_eq!(reports.len(), 1);
        let alignments: Vec<_> = utts.iter().map(|u| u.alignment.clone()).collect();
        let corpus = corpus_wer(&alignments).unwrap();
        assert_eq!(reports[0].wer_score(), corpus);
    }

    #[test]
    fn rates_sum_to_wer_exactly() {
        let utts = scored(&[
            ("a b c d", "a x c", CefrLevel::A2),
            ("e f", "e f g g", CefrLevel::A2),
            ("h i j", "h j", CefrLevel::C1),
        ]);
        for report in stratified_wer(&utts, Dimension::Level) {
            // Rational identity over the shared denominator.
            assert_eq!(report.n_sub + report.n_ins + report.n_del, report.edits());
            let summed = report.sub_rate() + report.ins_rate() + report.del_rate();
            assert!((summed - report.wer()).abs() < 1e-15);
        }
    }

    #[test]
    fn groups_partition_corpus_totals() {
        let utts = scored(&[
            ("a b c", "a b", CefrLevel::A2),
            ("d e f", "d x f", CefrLevel::B1),
            ("g h", "g h i", CefrLevel::B2),
            ("j k", "j k", CefrLevel::C1),
        ]);
        let alignments: Vec<_> = utts.iter().map(|u| u.alignment.clone()).collect();
        let corpus = corpus_wer(&alignments).unwrap();
        let reports = stratified_wer(&utts, Dimension::Level);
        let edit_sum: u64 = reports.iter().map(GroupReport::edits).sum();
        let word_sum: u64 = reports.iter().map(|r| r.n_ref_words).sum();
        assert_eq!(edit_sum, corpus.edits);
        assert_eq!(word_sum, corpus.ref_words);
    }

    #[test]
    fn disparity_gap_and_ratio() {
        // Engineered group WERs 0.17 and 0.08.
        let mut a2 = GroupReport {
            group: GroupKey::Level(CefrLevel::A2),
            n_utts: 10,
            n_ref_words: 100,
            n_sub: 9,
            n_ins: 5,
            n_del: 3,
        };
        let c1 = GroupReport {
            group: GroupKey::Level(CefrLevel::C1),
            n_utts: 10,
            n_ref_words: 100,
            n_sub: 4,
            n_ins: 2,
            n_del: 2,
        };
        assert_eq!(a2.wer(), 0.17);
        assert_eq!(c1.wer(), 0.08);
        let report = disparity(&[a2.clone(), c1.clone()]).unwrap();
        assert!((report.max_min_gap - 0.09).abs() < 1e-12);
        assert!((report.worst_best_ratio.unwrap() - 2.125).abs() < 1e-12);

        // All equal: gap 0, ratio 1.
        let equal = disparity(&[a2.clone(), a2.clone()]).unwrap();
        assert_eq!(equal.max_min_gap, 0.0);
        assert_eq!(equal.worst_best_ratio, Some(1.0));

        // Error-free best group: ratio undefined, gap still computed.
        a2.n_sub = 0;
        a2.n_ins = 0;
        a2.n_del = 0;
        let zero_best = disparity(&[a2, c1]).unwrap();
        assert_eq!(zero_best.worst_best_ratio, None);
        assert!((zero_best.max_min_gap - 0.08).abs() < 1e-12);

        assert!(matches!(
            disparity(&[]),
            Err(MetricsError::NotEnoughGroups(0))
        ));
    }

    #[test]
    fn relative_change_arithmetic() {
        let change = relative_change(0.102, 0.072).unwrap();
        assert!((change - 29.41).abs() < 0.005, "got {change}");
        assert_eq!(relative_change(0.092, 0.092).unwrap(), 0.0);
        assert!((relative_change(0.10, 0.12).unwrap() + 20.0).abs() < 1e-12);
        assert!(matches!(
            relative_change(0.0, 0.1),
            Err(MetricsError::NonPositiveBaseline(_))
        ));
    }

    #[test]
    fn relative_change_scaling_identity() {
        for x in [0.0, 0.1, 0.25, 0.5, 1.0] {
            let b = 0.32;
            let change = relative_change(b, b * (1.0 - x)).unwrap();
            assert!((change - 100.0 * x).abs() < 1e-9);
        }
    }

    #[test]
    fn top_insertions_manual_tally() {
        // Five utterances with hand-countable insertions:
        // "and" x3, "a" x2, "the" x1 in A2; one B1 insertion excluded.
        let utts = scored(&[
            ("x", "x and", CefrLevel::A2),
            ("y", "y and a", CefrLevel::A2),
            ("z", "z and a the", CefrLevel::A2),
            ("w", "w", CefrLevel::A2),
            ("v", "v and", CefrLevel::B1),
        ]);
        let top = top_insertions(&utts, GroupKey::Level(CefrLevel::A2), 3);
        assert_eq!(
            top,
            vec![
                TokenCount { token: "and".into(), count: 3 },
                TokenCount { token: "a".into(), count: 2 },
                TokenCount { token: "the".into(), count: 1 },
            ]
        );

        // Zero insertions in the group: empty list.
        assert!(top_insertions(&utts, GroupKey::Level(CefrLevel::C1), 3).is_empty());

        // Reordering utterances leaves counts unchanged.
        let mut reversed = utts.clone();
        reversed.reverse();
        assert_eq!(
            top_insertions(&reversed, GroupKey::Level(CefrLevel::A2), 3),
            top
        );
    }

    #[test]
    fn score_system_coverage_errors() {
        let refs = vec![utt("u1", "a", CefrLevel::A2), utt("u2", "b", CefrLevel::B1)];
        let only_one = vec![hyp("u1", "a")];
        match score_system(&refs, &only_one) {
            Err(MetricsError::MissingHypotheses { missing, .. }) => {
                assert_eq!(missing, vec!["u2".to_string()]);
            }
            other => panic!("expected MissingHypotheses, got {other:?}"),
        }

        let stray = vec![hyp("u1", "a"), hyp("u2", "b"), hyp("u9", "x")];
        match score_system(&refs, &stray) {
            Err(MetricsError::UnknownUtterances { unknown, .. }) => {
                assert_eq!(unknown, vec!["u9".to_string()]);
            }
            other => panic!("expected UnknownUtterances, got {other:?}"),
        }
    }
}
