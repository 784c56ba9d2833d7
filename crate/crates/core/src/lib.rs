//! Proficiency-stratified ASR evaluation and adaptation toolkit.
//!
//! The crate is organized around the lifecycle of a desk-scale recognition
//! experiment on learner speech:
//!
//! * [`corpus`] — manifest ingestion, text normalization, and a seeded
//!   synthetic-corpus generator with a realistic proficiency imbalance.
//! * [`align`] — word-level Levenshtein alignment with an exact
//!   substitution/insertion/deletion decomposition, and WER scoring.
//! * [`metrics`] — CEFR/quality-stratified WER, error-type breakdowns,
//!   disparity gaps, and insertion-token analysis.
//! * [`stats`] — paired bootstrap over utterances and the exact paired
//!   sign test for system comparisons.
//! * [`dsp`] — WAV ingestion, log-mel extraction, spectrogram masking,
//!   and low-proficiency-targeted corpus augmentation.
//! * [`adapt`] — low-rank adapter math for linear maps (init, forward,
//!   merge, unmerge).
//! * [`multitask`] — a toy encoder/decoder/classifier with a weighted
//!   joint objective, verified gradient routing, and a training loop.
//!
//! All randomness is fanned out from explicit 64-bit seeds via
//! [`seeds::derive_seed`], so every result in the crate is replayable.
//! With the `parallel` feature (on by default) the data-parallel inner
//! loops run on rayon; outputs are independent of thread count.

pub mod adapt;
pub mod align;
pub mod corpus;
pub mod dsp;
pub mod metrics;
pub mod multitask;
pub mod seeds;
pub mod stats;

pub(crate) mod par;
