//! Reference data model shared by every other module.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sot::{EOS_TOKEN, SC_TOKEN};

pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 16_000;

/// Round a time in seconds half-up to the 1 ms ingest resolution.
pub fn round_to_ms(seconds: f64) -> f64 {
    // Decimal inputs such as 0.0015 are stored just below the half point.
    (seconds * 1000.0 + 0.5 + 1e-9).floor() / 1000.0
}

/// One speaker's transcribed segment of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Utterance {
    pub session_id: String,
    pub utterance_id: String,
    pub speaker: String,
    pub start_s: f64,
    pub end_s: f64,
    pub text: Vec<String>,
    /// Marks a segment without a transcript. Grouping accepts these, scoring does not.
    #[serde(default)]
    pub no_transcript: bool,
}

impl Utterance {
    /// Builds an utterance from a whitespace-separated transcript, rounding
    /// both times to 1 ms.
    pub fn new(
        session_id: impl Into<String>,
        utterance_id: impl Into<String>,
        speaker: impl Into<String>,
        start_s: f64,
        end_s: f64,
        text: &str,
    ) -> Self {
        Utterance {
            session_id: session_id.into(),
            utterance_id: utterance_id.into(),
            speaker: speaker.into(),
            start_s: round_to_ms(start_s),
            end_s: round_to_ms(end_s),
            text: text.split_whitespace().map(str::to_owned).collect(),
            no_transcript: false,
        }
    }

    pub fn without_transcript(mut self) -> Self {
        self.text.clear();
        self.no_transcript = true;
        self
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn num_words(&self) -> usize {
        self.text.len()
    }

    pub fn text_joined(&self) -> String {
        self.text.join(" ")
    }

    /// Strict temporal overlap: touching intervals do not overlap.
    pub fn overlaps(&self, other: &Utterance) -> bool {
        self.start_s.max(other.start_s) < self.end_s.min(other.end_s)
    }

    /// Ordering key used wherever utterances must be sorted deterministically.
    pub fn fifo_cmp(&self, other: &Utterance) -> std::cmp::Ordering {
        self.start_s
            .total_cmp(&other.start_s)
            .then(self.end_s.total_cmp(&other.end_s))
            .then_with(|| self.speaker.cmp(&other.speaker))
            .then_with(|| self.utterance_id.cmp(&other.utterance_id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub session_id: String,
    pub utterances: Vec<Utterance>,
    /// utterance_id -> audio reference
    pub sources: BTreeMap<String, String>,
}

impl Session {
    pub fn new(session_id: impl Into<String>, utterances: Vec<Utterance>) -> Self {
        Session {
            session_id: session_id.into(),
            utterances,
            sources: BTreeMap::new(),
        }
    }

    /// Returns the session back if it has no violations.
    pub fn validated(self) -> Result<Self> {
        let violations = validate_session(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidSession {
                session_id: self.session_id,
                violations,
            })
        }
    }

    pub fn num_words(&self) -> usize {
        self.utterances.iter().map(Utterance::num_words).sum()
    }
}

/// Splits a flat utterance list into sessions, ordered by session id.
pub fn sessions_from_utterances(utterances: Vec<Utterance>) -> Vec<Session> {
    let mut by_session: BTreeMap<String, Vec<Utterance>> = BTreeMap::new();
    for utt in utterances {
        by_session.entry(utt.session_id.clone()).or_default().push(utt);
    }
    by_session
        .into_iter()
        .map(|(id, utts)| Session::new(id, utts))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    NonFiniteTime,
    NegativeStart,
    NonPositiveDuration,
    EmptyTranscript,
    InvalidToken(String),
    ReservedToken(String),
    SessionMismatch(String),
    DuplicateId,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::NonFiniteTime => write!(f, "start_s and end_s must be finite"),
            Rule::NegativeStart => write!(f, "start_s must be non-negative"),
            Rule::NonPositiveDuration => write!(f, "end_s must be greater than start_s"),
            Rule::EmptyTranscript => {
                write!(f, "empty text requires the no_transcript flag")
            }
            Rule::InvalidToken(t) => write!(f, "token {t:?} is empty or contains whitespace"),
            Rule::ReservedToken(t) => write!(f, "token {t:?} is a reserved special token"),
            Rule::SessionMismatch(s) => write!(f, "session_id {s:?} differs from the session"),
            Rule::DuplicateId => write!(f, "utterance_id is not unique"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub utterance_id: String,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "utterance {}: {}", self.utterance_id, self.rule)
    }
}

/// Checks every type invariant of a session. Never aborts; the result is
/// sorted and free of duplicates, so it does not depend on utterance order.
pub fn validate_session(session: &Session) -> Vec<Violation> {
    let mut found = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for utt in &session.utterances {
        let mut flag = |rule| {
            found.insert(Violation {
                utterance_id: utt.utterance_id.clone(),
                rule,
            });
        };
        if utt.session_id != session.session_id {
            flag(Rule::SessionMismatch(utt.session_id.clone()));
        }
        if !seen.insert(utt.utterance_id.as_str()) {
            flag(Rule::DuplicateId);
        }
        if !utt.start_s.is_finite() || !utt.end_s.is_finite() {
            flag(Rule::NonFiniteTime);
        } else {
            if utt.start_s < 0.0 {
                flag(Rule::NegativeStart);
            }
            if utt.end_s <= utt.start_s {
                flag(Rule::NonPositiveDuration);
            }
        }
        if utt.text.is_empty() && !utt.no_transcript {
            flag(Rule::EmptyTranscript);
        }
        for token in &utt.text {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                flag(Rule::InvalidToken(token.clone()));
            } else if token == SC_TOKEN || token == EOS_TOKEN {
                flag(Rule::ReservedToken(token.clone()));
            }
        }
    }
    found.into_iter().collect()
}

/// Mono audio with a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer<T> {
    pub samples: Vec<T>,
    pub sample_rate_hz: u32,
}

impl<T> AudioBuffer<T> {
    pub fn new(samples: Vec<T>, sample_rate_hz: u32) -> Self {
        AudioBuffer {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

/// Word error counts against a reference of `ref_words` words.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErrorCounts {
    #[serde(rename = "sub")]
    pub substitutions: usize,
    #[serde(rename = "ins")]
    pub insertions: usize,
    #[serde(rename = "del")]
    pub deletions: usize,
    pub ref_words: usize,
}

impl ErrorCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// Word error rate as a fraction, or `None` with no reference words.
    pub fn wer(&self) -> Option<f64> {
        (self.ref_words > 0).then(|| self.errors() as f64 / self.ref_words as f64)
    }
}

impl Add for ErrorCounts {
    type Output = ErrorCounts;

    fn add(mut self, rhs: ErrorCounts) -> ErrorCounts {
        self += rhs;
        self
    }
}

impl AddAssign for ErrorCounts {
    fn add_assign(&mut self, rhs: ErrorCounts) {
        self.substitutions += rhs.substitutions;
        self.insertions += rhs.insertions;
        self.deletions += rhs.deletions;
        self.ref_words += rhs.ref_words;
    }
}

impl Sum for ErrorCounts {
    fn sum<I: Iterator<Item = ErrorCounts>>(iter: I) -> ErrorCounts {
        iter.fold(ErrorCounts::default(), Add::add)
    }
}
