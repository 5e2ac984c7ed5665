//! Toolkit for multi-talker meeting transcription experiments.
//!
//! The crate is organised around the life cycle of a multi-talker evaluation:
//!
//! * [`model`] holds the shared reference data types ([`Utterance`], [`Session`])
//!   and session validation.
//! * [`grouping`] partitions a session into utterance groups, the maximal sets
//!   of utterances connected by temporal overlap, and reports corpus statistics.
//! * [`sot`] turns a group into a serialized output training (SOT) token
//!   sequence with speaker-change and end-of-sequence tokens, and parses model
//!   output back into per-speaker channels.
//! * [`mixsim`] simulates overlapped multi-talker mixtures from single-speaker
//!   recordings.
//! * [`scoring`] computes utterance WER, concatenated minimum-permutation WER
//!   over utterance groups, and speaker-counting confusion.
//! * [`io`] reads and writes the JSONL manifests and WAV files used by the CLI.
//!
//! Audio processing is generic over the sample type ([`Sample`], implemented
//! for `f32` and `f64`) and the assignment solver is generic over its cost type
//! ([`Cost`]). Concrete aliases for the common instantiations live at the crate
//! root.

pub mod assignment;
pub mod error;
pub mod grouping;
pub mod io;
pub mod mixsim;
pub mod model;
pub mod scalar;
pub mod scoring;
pub mod sot;

pub use error::{Error, Result};
pub use grouping::{build_utterance_groups, group_stats, GroupStats, UtteranceGroup};
pub use mixsim::{
    render, sample_spec, speed_perturb, MixtureEntry, MixtureResult, MixtureSpec, PoolSource,
    SimConfig, SimRng, SpeedSampling,
};
pub use model::{validate_session, AudioBuffer, ErrorCounts, Session, Utterance, Violation};
pub use scalar::{Cost, Sample};
pub use scoring::{
    aggregate, concat_refs, score_group, score_utterance_eval, word_errors, CountConfusion,
    GroupHypothesis, GroupScore, Report,
};
pub use sot::{deserialize, serialize_fifo, Decoded, FifoMode, SotSequence, SotToken};

/// Single-precision audio buffer; the CLI renders in this precision.
pub type AudioBufferF32 = AudioBuffer<f32>;
/// Double-precision audio buffer.
pub type AudioBufferF64 = AudioBuffer<f64>;
/// Rendered single-precision mixture.
pub type MixtureResultF32 = MixtureResult<f32>;
/// Rendered double-precision mixture.
pub type MixtureResultF64 = MixtureResult<f64>;
/// Cost type used for word-error assignment.
pub type WordCost = i64;

/// Version tag written as the first line of every JSONL file.
pub const FORMAT_VERSION: &str = "sotkit/1";
