//! Serialized output training (SOT) labels.
//!
//! All transcripts of a group become one token sequence. A speaker-change
//! token separates consecutive channels and a single end-of-sequence token
//! closes the whole sequence. Channels are ordered first-in first-out by
//! start time.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::UtteranceGroup;
use crate::model::Utterance;

pub const SC_TOKEN: &str = "⟨sc⟩";
pub const EOS_TOKEN: &str = "⟨eos⟩";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SotToken {
    Word(String),
    SpeakerChange,
    Eos,
}

impl SotToken {
    pub fn parse(raw: &str) -> SotToken {
        match raw {
            SC_TOKEN => SotToken::SpeakerChange,
            EOS_TOKEN => SotToken::Eos,
            word => SotToken::Word(word.to_owned()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            SotToken::Word(w) => w,
            SotToken::SpeakerChange => SC_TOKEN,
            SotToken::Eos => EOS_TOKEN,
        }
    }
}

/// How a group's references are cut into channels before serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FifoMode {
    /// One channel per utterance, ordered by start time.
    Utterance,
    /// One channel per speaker (utterances concatenated in time order),
    /// ordered by the speaker's earliest start.
    Speaker,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SotSequence {
    pub tokens: Vec<SotToken>,
    pub mode: FifoMode,
}

impl SotSequence {
    pub fn num_speaker_changes(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| **t == SotToken::SpeakerChange)
            .count()
    }

    pub fn num_words(&self) -> usize {
        self.tokens
            .iter()
            .filter(|t| matches!(t, SotToken::Word(_)))
            .count()
    }

    pub fn to_text(&self) -> String {
        self.to_string()
    }

    /// Checks the sequence layout: EOS exactly once and last, SC never first,
    /// never doubled and never directly before EOS.
    pub fn is_well_formed(&self) -> bool {
        let n = self.tokens.len();
        if n == 0 || self.tokens[n - 1] != SotToken::Eos {
            return false;
        }
        if self.tokens[..n - 1].contains(&SotToken::Eos) {
            return false;
        }
        if self.tokens[0] == SotToken::SpeakerChange {
            return false;
        }
        !self.tokens.windows(2).any(|w| {
            w[0] == SotToken::SpeakerChange
                && matches!(w[1], SotToken::SpeakerChange | SotToken::Eos)
        })
    }
}

impl fmt::Display for SotSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(token.as_str())?;
        }
        Ok(())
    }
}

/// Channel texts of a group under the given ordering, before serialization.
pub fn fifo_channels(group: &UtteranceGroup, mode: FifoMode) -> Result<Vec<Vec<String>>> {
    if group.utterances.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let mut utts: Vec<&Utterance> = group.utterances.iter().collect();
    utts.sort_by(|a, b| a.fifo_cmp(b));
    if let Some(u) = utts.iter().find(|u| u.text.is_empty()) {
        return Err(Error::EmptyTranscript(u.utterance_id.clone()));
    }
    Ok(match mode {
        FifoMode::Utterance => utts.into_iter().map(|u| u.text.clone()).collect(),
        FifoMode::Speaker => {
            // Speakers appear in the order of their first utterance.
            let mut order: Vec<&str> = Vec::new();
            let mut channels: BTreeMap<&str, Vec<String>> = BTreeMap::new();
            for u in utts {
                let channel = channels.entry(u.speaker.as_str()).or_insert_with(|| {
                    order.push(u.speaker.as_str());
                    Vec::new()
                });
                channel.extend(u.text.iter().cloned());
            }
            order
                .into_iter()
                .map(|spk| channels.remove(spk).unwrap_or_default())
                .collect()
        }
    })
}

/// Joins non-empty channels with SC and terminates with EOS.
pub fn serialize_channels<S: AsRef<str>>(channels: &[Vec<S>], mode: FifoMode) -> SotSequence {
    let mut tokens = Vec::with_capacity(channels.iter().map(|c| c.len() + 1).sum::<usize>() + 1);
    for (i, channel) in channels.iter().enumerate() {
        if i > 0 {
            tokens.push(SotToken::SpeakerChange);
        }
        tokens.extend(channel.iter().map(|w| SotToken::Word(w.as_ref().to_owned())));
    }
    tokens.push(SotToken::Eos);
    SotSequence { tokens, mode }
}

pub fn serialize_fifo(group: &UtteranceGroup, mode: FifoMode) -> Result<SotSequence> {
    Ok(serialize_channels(&fifo_channels(group, mode)?, mode))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeWarning {
    /// Channel at this position (counted over all SC-separated segments) had no words.
    EmptyChannel(usize),
    MissingEos,
    /// Number of tokens discarded after the first EOS.
    TrailingTokens(usize),
}

impl fmt::Display for DecodeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeWarning::EmptyChannel(i) => write!(f, "dropped empty channel {i}"),
            DecodeWarning::MissingEos => write!(f, "sequence has no {EOS_TOKEN}"),
            DecodeWarning::TrailingTokens(n) => write!(f, "discarded {n} tokens after {EOS_TOKEN}"),
        }
    }
}

/// Per-speaker channels recovered from a token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub channels: Vec<Vec<String>>,
    pub speaker_count: usize,
    pub warnings: Vec<DecodeWarning>,
}

impl Decoded {
    pub fn channel_texts(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.join(" ")).collect()
    }
}

/// Splits arbitrary decoder output into channels. Total: never fails.
pub fn deserialize<I, T>(tokens: I) -> Decoded
where
    I: IntoIterator<Item = T>,
    T: Into<SotToken>,
{
    let mut segments: Vec<Vec<String>> = vec![Vec::new()];
    let mut warnings = Vec::new();
    let mut saw_eos = false;
    let mut trailing = 0;
    for token in tokens {
        if saw_eos {
            trailing += 1;
            continue;
        }
        match token.into() {
            SotToken::Word(w) => segments.last_mut().expect("never empty").push(w),
            SotToken::SpeakerChange => segments.push(Vec::new()),
            SotToken::Eos => saw_eos = true,
        }
    }
    if !saw_eos {
        warnings.push(DecodeWarning::MissingEos);
    }
    if trailing > 0 {
        warnings.push(DecodeWarning::TrailingTokens(trailing));
    }
    // A bare EOS (or empty input) is a zero-speaker prediction, not an empty channel.
    let only_segment_empty = segments.len() == 1 && segments[0].is_empty();
    let mut channels = Vec::with_capacity(segments.len());
    for (i, segment) in segments.into_iter().enumerate() {
        if segment.is_empty() {
            if !only_segment_empty {
                warnings.push(DecodeWarning::EmptyChannel(i));
            }
        } else {
            channels.push(segment);
        }
    }
    for w in &warnings {
        log::warn!("SOT decode: {w}");
    }
    Decoded {
        speaker_count: channels.len(),
        channels,
        warnings,
    }
}

/// Splits a whitespace-joined SOT string and deserializes it.
pub fn deserialize_text(text: &str) -> Decoded {
    deserialize(text.split_whitespace())
}

impl From<&str> for SotToken {
    fn from(raw: &str) -> Self {
        SotToken::parse(raw)
    }
}

impl From<String> for SotToken {
    fn from(raw: String) -> Self {
        SotToken::parse(&raw)
    }
}

impl From<&String> for SotToken {
    fn from(raw: &String) -> Self {
        SotToken::parse(raw)
    }
}

impl From<&SotToken> for SotToken {
    fn from(t: &SotToken) -> Self {
        t.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(utts: Vec<Utterance>) -> UtteranceGroup {
        UtteranceGroup::from_utterances("g", utts).unwrap()
    }

    fn utt(id: &str, spk: &str, start: f64, end: f64, text: &str) -> Utterance {
        Utterance::new("s", id, spk, start, end, text)
    }

    fn strs(seq: &SotSequence) -> Vec<&str> {
        seq.tokens.iter().map(SotToken::as_str).collect()
    }

    #[test]
    fn three_speakers_in_start_order() {
        let g = group(vec![
            utt("2", "B", 0.5, 2.0, "c"),
            utt("1", "A", 0.0, 1.0, "a b"),
            utt("3", "C", 1.0, 3.0, "d e"),
        ]);
        let seq = serialize_fifo(&g, FifoMode::Utterance).unwrap();
        assert_eq!(strs(&seq), ["a", "b", SC_TOKEN, "c", SC_TOKEN, "d", "e", EOS_TOKEN]);
        assert!(seq.is_well_formed());
        assert_eq!(seq.num_speaker_changes(), 2);
    }

    #[test]
    fn single_utterance() {
        let seq = serialize_fifo(&group(vec![utt("1", "A", 0.0, 1.0, "hello")]), FifoMode::Speaker)
            .unwrap();
        assert_eq!(strs(&seq), ["hello", EOS_TOKEN]);
        assert_eq!(seq.to_text(), "hello ⟨eos⟩");
    }

    #[test]
    fn speaker_and_utterance_modes_differ_on_returning_speaker() {
        let g = group(vec![
            utt("1", "A", 0.0, 1.0, "x"),
            utt("2", "B", 0.5, 2.0, "y"),
            utt("3", "A", 3.0, 4.0, "z"),
        ]);
        let spk = serialize_fifo(&g, FifoMode::Speaker).unwrap();
        let utt_mode = serialize_fifo(&g, FifoMode::Utterance).unwrap();
        assert_eq!(strs(&spk), ["x", "z", SC_TOKEN, "y", EOS_TOKEN]);
        assert_eq!(strs(&utt_mode), ["x", SC_TOKEN, "y", SC_TOKEN, "z", EOS_TOKEN]);
    }

    #[test]
    fn equal_starts_break_ties_by_end_then_speaker() {
        let g = group(vec![
            utt("1", "B", 0.0, 1.0, "b"),
            utt("2", "A", 0.0, 1.0, "a"),
            utt("3", "C", 0.0, 0.5, "c"),
        ]);
        let seq = serialize_fifo(&g, FifoMode::Utterance).unwrap();
        assert_eq!(seq.to_text(), "c ⟨sc⟩ a ⟨sc⟩ b ⟨eos⟩");
    }

    #[test]
    fn serialize_errors() {
        let empty = UtteranceGroup {
            group_id: "g".into(),
            session_id: "s".into(),
            utterances: vec![],
            num_speakers: 0,
            span_start_s: 0.0,
            span_end_s: 0.0,
        };
        assert!(matches!(serialize_fifo(&empty, FifoMode::Speaker), Err(Error::EmptyGroup)));
        let g = group(vec![utt("1", "A", 0.0, 1.0, "a"), utt("u9", "B", 0.5, 1.0, "").without_transcript()]);
        match serialize_fifo(&g, FifoMode::Utterance) {
            Err(Error::EmptyTranscript(id)) => assert_eq!(id, "u9"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decode_well_formed() {
        let d = deserialize(["a", "b", SC_TOKEN, "c", EOS_TOKEN]);
        assert_eq!(d.channel_texts(), ["a b", "c"]);
        assert_eq!(d.speaker_count, 2);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn decode_bare_eos_is_zero_speakers() {
        let d = deserialize([EOS_TOKEN]);
        assert!(d.channels.is_empty());
        assert_eq!(d.speaker_count, 0);
        assert!(d.warnings.is_empty());
        let empty = deserialize(Vec::<&str>::new());
        assert_eq!(empty.speaker_count, 0);
        assert_eq!(empty.warnings, vec![DecodeWarning::MissingEos]);
    }

    #[test]
    fn decode_malformed_is_total() {
        let d = deserialize(["a", SC_TOKEN, SC_TOKEN, "b"]);
        assert_eq!(d.channel_texts(), ["a", "b"]);
        assert_eq!(d.speaker_count, 2);
        assert_eq!(d.warnings.len(), 2);
        assert!(d.warnings.contains(&DecodeWarning::MissingEos));
        assert!(d.warnings.contains(&DecodeWarning::EmptyChannel(1)));
    }

    #[test]
    fn decode_discards_after_eos() {
        let d = deserialize_text("⟨sc⟩ a ⟨eos⟩ b ⟨sc⟩ c");
        assert_eq!(d.channel_texts(), ["a"]);
        assert_eq!(
            d.warnings,
            vec![DecodeWarning::TrailingTokens(3), DecodeWarning::EmptyChannel(0)]
        );
    }

    #[test]
    fn layout_checks() {
        let bad = SotSequence {
            tokens: vec![SotToken::Word("a".into()), SotToken::SpeakerChange, SotToken::Eos],
            mode: FifoMode::Utterance,
        };
        assert!(!bad.is_well_formed());
        let no_eos = SotSequence {
            tokens: vec![SotToken::Word("a".into())],
            mode: FifoMode::Utterance,
        };
        assert!(!no_eos.is_well_formed());
    }
}
