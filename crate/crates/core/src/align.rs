//! Word-level Levenshtein alignment and WER scoring.
//!
//! Unit costs for substitution, insertion, and deletion. Backtrace
//! tie-breaking is fixed (Match > Substitution > Deletion > Insertion at
//! equal cost, scanning from the end of the table) so the op sequence, and
//! therefore every downstream count, is deterministic. Counts S, D, I can
//! differ across co-optimal paths; only S+D+I is canonical.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// One step of an alignment between a reference and a hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Match { token: String },
    Substitution { reference: String, hypothesis: String },
    Deletion { reference: String },
    Insertion { hypothesis: String },
}

/// Full alignment with error-type decomposition.
///
/// The ref-side tokens of `ops` reconstruct the reference in order, and the
/// hyp-side tokens reconstruct the hypothesis in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub ops: Vec<EditOp>,
    pub n_match: u64,
    pub n_sub: u64,
    pub n_del: u64,
    pub n_ins: u64,
}

impl Alignment {
    /// Minimal edit distance: S + D + I.
    pub fn edits(&self) -> u64 {
        self.n_sub + self.n_del + self.n_ins
    }

    /// Reference length in tokens: matches + substitutions + deletions.
    pub fn ref_len(&self) -> u64 {
        self.n_match + self.n_sub + self.n_del
    }

    /// Hypothesis length in tokens.
    pub fn hyp_len(&self) -> u64 {
        self.n_match + self.n_sub + self.n_ins
    }
}

/// Exact WER as the rational `edits / max(ref_words, 1)`.
///
/// The integer pair is the canonical value; floats are derived at render
/// time only. Serializes with the derived `wer` float alongside the exact
/// numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct WerScore {
    pub edits: u64,
    pub ref_words: u64,
}

impl WerScore {
    /// Denominator with the empty-reference convention applied.
    pub fn denominator(&self) -> u64 {
        self.ref_words.max(1)
    }

    pub fn wer(&self) -> f64 {
        self.edits as f64 / self.denominator() as f64
    }
}

impl Serialize for WerScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("WerScore", 3)?;
        s.serialize_field("edits", &self.edits)?;
        s.serialize_field("ref_words", &self.ref_words)?;
        s.serialize_field("wer", &self.wer())?;
        s.end()
    }
}

#[derive(Debug, Error)]
pub enum AlignError {
    #[error("corpus WER over an empty alignment list")]
    EmptyCorpus,
}

/// Align a reference token sequence against a hypothesis.
///
/// S+D+I is the minimal edit distance under unit costs. The op sequence is
/// deterministic under the fixed tie-break rule.
pub fn align<S: AsRef<str>>(reference: &[S], hypothesis: &[S]) -> Alignment {
    let n = reference.len();
    let m = hypothesis.len();
    let width = m + 1;

    // dist[i*width + j] = edit distance between reference[..i] and hypothesis[..j]
    let mut dist = vec![0u32; (n + 1) * width];
    for i in 0..=n {
        dist[i * width] = i as u32;
    }
    for j in 0..=m {
        dist[j] = j as u32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let same = reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
            let diag = dist[(i - 1) * width + (j - 1)] + if same { 0 } else { 1 };
            let up = dist[(i - 1) * width + j] + 1;
            let left = dist[i * width + (j - 1)] + 1;
            dist[i * width + j] = diag.min(up).min(left);
        }
    }

    let mut rev_ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    let (mut n_match, mut n_sub, mut n_del, mut n_ins) = (0u64, 0u64, 0u64, 0u64);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        let same = i > 0 && j > 0 && reference[i - 1].as_ref() == hypothesis[j - 1].as_ref();
        if same && here == dist[(i - 1) * width + (j - 1)] {
            rev_ops.push(EditOp::Match {
                token: reference[i - 1].as_ref().to_string(),
            });
            n_match += 1;
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && !same && here == dist[(i - 1) * width + (j - 1)] + 1 {
            rev_ops.push(EditOp::Substitution {
                reference: reference[i - 1].as_ref().to_string(),
                hypothesis: hypothesis[j - 1].as_ref().to_string(),
            });
            n_sub += 1;
            i -= 1;
            j -= 1;
        } else if i > 0 && here == dist[(i - 1) * width + j] + 1 {
            rev_ops.push(EditOp::Deletion {
                reference: reference[i - 1].as_ref().to_string(),
            });
            n_del += 1;
            i -= 1;
        } else {
            debug_assert!(j > 0 && here == dist[i * width + (j - 1)] + 1);
            rev_ops.push(EditOp::Insertion {
                hypothesis: hypothesis[j - 1].as_ref().to_string(),
            });
            n_ins += 1;
            j -= 1;
        }
    }
    rev_ops.reverse();

    Alignment {
        ops: rev_ops,
        n_match,
        n_sub,
        n_del,
        n_ins,
    }
}

/// Per-utterance WER. Empty references use denominator 1, so an insertion
/// against an empty reference still scores.
pub fn utterance_wer(alignment: &Alignment) -> WerScore {
    WerScore {
        edits: alignment.edits(),
        ref_words: alignment.ref_len(),
    }
}

/// Corpus micro-average WER: summed edits over summed reference words.
/// Exact integer sums, invariant under input ordering.
pub fn corpus_wer(alignments: &[Alignment]) -> Result<WerScore, AlignError> {
    if alignments.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    let mut edits = 0u64;
    let mut ref_words = 0u64;
    for a in alignments {
        edits += a.edits();
        ref_words += a.ref_len();
    }
    Ok(WerScore { edits, ref_words })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent plain-DP distance oracle: two-row table, no backtrace.
    /// Kept deliberately separate from the production implementation.
    pub(crate) fn dp_distance_oracle(a: &[&str], b: &[&str]) -> u64 {
        let mut prev: Vec<u64> = (0..=b.len() as u64).collect();
        let mut cur = vec![0u64; b.len() + 1];
        for i in 1..=a.len() {
            cur[0] = i as u64;
            for j in 1..=b.len() {
                let cost = u64::from(a[i - 1] != b[j - 1]);
                cur[j] = (prev[j - 1] + cost).min(prev[j] + 1).min(cur[j - 1] + 1);
            }
            std::mem::swap(&mut prev, &mut cur);
        }
        prev[b.len()]
    }

    fn reconstructs(alignment: &Alignment, reference: &[&str], hypothesis: &[&str]) {
        let mut ref_side = Vec::new();
        let mut hyp_side = Vec::new();
        for op in &alignment.ops {
            match op {
                EditOp::Match { token } => {
                    ref_side.push(token.clone());
                    hyp_side.push(token.clone());
                }
                EditOp::Substitution {
                    reference,
                    hypothesis,
                } => {
                    ref_side.push(reference.clone());
                    hyp_side.push(hypothesis.clone());
                }
                EditOp::Deletion { reference } => ref_side.push(reference.clone()),
                EditOp::Insertion { hypothesis } => hyp_side.push(hypothesis.clone()),
            }
        }
        assert_eq!(ref_side, reference);
        assert_eq!(hyp_side, hypothesis);
    }

    #[test]
    fn identity_alignment() {
        let a = align(&["a", "b", "c"], &["a", "b", "c"]);
        assert_eq!((a.n_sub, a.n_del, a.n_ins, a.ref_len()), (0, 0, 0, 3));
        assert_eq!(a.n_match, 3);
    }

    #[test]
    fn single_deletion() {
        let a = align(&["a", "b", "c"], &["a", "c"]);
        assert_eq!((a.n_sub, a.n_del, a.n_ins), (0, 1, 0));
        reconstructs(&a, &["a", "b", "c"], &["a", "c"]);
    }

    #[test]
    fn empty_sides() {
        let a = align::<&str>(&[], &["x", "y"]);
        assert_eq!((a.n_ins, a.ref_len()), (2, 0));
        let b = align::<&str>(&["x", "y"], &[]);
        assert_eq!((b.n_del, b.ref_len()), (2, 2));
        let c = align::<&str>(&[], &[]);
        assert_eq!(c.edits(), 0);
    }

    #[test]
    fn utterance_wer_formula() {
        let a = align(&["a", "b", "c"], &["a", "x", "c"]);
        let score = utterance_wer(&a);
        assert_eq!((score.edits, score.ref_words), (1, 3));
        assert!((score.wer() - 1.0 / 3.0).abs() < 1e-15);

        let perfect = utterance_wer(&align(&["a"; 5], &["a"; 5]));
        assert_eq!(perfect.wer(), 0.0);

        // Empty reference: denominator clamps to 1.
        let score = utterance_wer(&align::<&str>(&[], &["x", "y"]));
        assert_eq!((score.edits, score.ref_words), (2, 0));
        assert_eq!(score.wer(), 2.0);
    }

    #[test]
    fn corpus_wer_sums_exactly() {
        let a = align(&["a", "b", "c"], &["a", "x", "c"]); // 1 edit / 3 words
        let b = align(
            &["a", "b", "c", "d", "e", "f", "g"],
            &["a", "b", "c", "d", "e", "x", "y"],
        ); // 2 edits / 7 words
        let score = corpus_wer(&[a.clone(), b.clone()]).unwrap();
        assert_eq!((score.edits, score.ref_words), (3, 10));
        assert_eq!(score.wer(), 0.30);

        let swapped = corpus_wer(&[b, a]).unwrap();
        assert_eq!(score, swapped);

        assert!(matches!(corpus_wer(&[]), Err(AlignError::EmptyCorpus)));
    }

    #[test]
    fn ops_serialize_tagged() {
        let a = align(&["a", "b"], &["a", "x"]);
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains(r#""op":"match""#));
        assert!(json.contains(r#""op":"substitution""#));
        let back: Alignment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn exhaustive_small_instances_match_oracle() {
        // All pairs with len <= 4 over a 3-token vocabulary.
        let vocab = ["a", "b", "c"];
        let mut seqs: Vec<Vec<&str>> = vec![vec![]];
        let mut frontier: Vec<Vec<&str>> = vec![vec![]];
        for _ in 0..4 {
            let mut next = Vec::new();
            for s in &frontier {
                for t in vocab {
                    let mut e = s.clone();
                    e.push(t);
                    next.push(e);
                }
            }
            seqs.extend(next.iter().cloned());
            frontier = next;
        }
        for r in &seqs {
            for h in &seqs {
                let a = align(r, h);
                assert_eq!(a.edits(), dp_distance_oracle(r, h), "ref={r:?} hyp={h:?}");
                reconstructs(&a, r, h);
            }
        }
    }

    proptest! {
        #[test]
        fn random_pairs_match_oracle(
            r in prop::collection::vec(0u8..5, 0..=8),
            h in prop::collection::vec(0u8..5, 0..=8),
        ) {
            let names = ["a", "b", "c", "d", "e"];
            let r: Vec<&str> = r.iter().map(|&t| names[t as usize]).collect();
            let h: Vec<&str> = h.iter().map(|&t| names[t as usize]).collect();
            let a = align(&r, &h);
            prop_assert_eq!(a.edits(), dp_distance_oracle(&r, &h));
            prop_assert_eq!(a.ref_len(), r.len() as u64);
            prop_assert_eq!(a.hyp_len(), h.len() as u64);
        }

        #[test]
        fn self_alignment_has_zero_edits(r in prop::collection::vec(0u8..5, 0..=10)) {
            let names = ["a", "b", "c", "d", "e"];
            let r: Vec<&str> = r.iter().map(|&t| names[t as usize]).collect();
            prop_assert_eq!(align(&r, &r).edits(), 0);
        }

        #[test]
        fn swap_exchanges_deletions_and_insertions(
            r in prop::collection::vec(0u8..4, 0..=7),
            h in prop::collection::vec(0u8..4, 0..=7),
        ) {
            let names = ["a", "b", "c", "d"];
            let r: Vec<&str> = r.iter().map(|&t| names[t as usize]).collect();
            let h: Vec<&str> = h.iter().map(|&t| names[t as usize]).collect();
            let fwd = align(&r, &h);
            let rev = align(&h, &r);
            prop_assert_eq!(fwd.edits(), rev.edits());
            prop_assert_eq!(fwd.n_sub, rev.n_sub);
            prop_assert_eq!(fwd.n_del, rev.n_ins);
            prop_assert_eq!(fwd.n_ins, rev.n_del);
        }
    }
}
