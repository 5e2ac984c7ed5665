//! Utterance groups: maximal sets of utterances connected by speaker overlap.
//!
//! A session is cut wherever no utterance spans the boundary, i.e. at silences
//! and at non-overlapping utterance boundaries. Overlap is strict, so two
//! utterances that only touch end to start fall into different groups.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Session, Utterance};

#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceGroup {
    pub group_id: String,
    pub session_id: String,
    /// Sorted by (start_s, end_s, speaker).
    pub utterances: Vec<Utterance>,
    pub num_speakers: usize,
    pub span_start_s: f64,
    pub span_end_s: f64,
}

impl UtteranceGroup {
    /// Assembles a group from its members, computing span and speaker count.
    /// Returns `None` for an empty member list.
    pub fn from_utterances(
        group_id: impl Into<String>,
        mut utterances: Vec<Utterance>,
    ) -> Option<Self> {
        let first = utterances.first()?;
        let session_id = first.session_id.clone();
        utterances.sort_by(Utterance::fifo_cmp);
        let span_start_s = utterances
            .iter()
            .map(|u| u.start_s)
            .fold(f64::INFINITY, f64::min);
        let span_end_s = utterances
            .iter()
            .map(|u| u.end_s)
            .fold(f64::NEG_INFINITY, f64::max);
        let num_speakers = utterances
            .iter()
            .map(|u| u.speaker.as_str())
            .collect::<BTreeSet<_>>()
            .len();
        Some(UtteranceGroup {
            group_id: group_id.into(),
            session_id,
            utterances,
            num_speakers,
            span_start_s,
            span_end_s,
        })
    }

    pub fn duration_s(&self) -> f64 {
        self.span_end_s - self.span_start_s
    }

    pub fn num_words(&self) -> usize {
        self.utterances.iter().map(Utterance::num_words).sum()
    }

    pub fn utterance_ids(&self) -> Vec<String> {
        self.utterances.iter().map(|u| u.utterance_id.clone()).collect()
    }
}

fn group_id(session_id: &str, index: usize, total: usize) -> String {
    let width = total.to_string().len().max(4);
    format!("{session_id}_{index:0width$}")
}

/// Partitions a validated session into utterance groups ordered by start time.
pub fn build_utterance_groups(session: &Session) -> Result<Vec<UtteranceGroup>> {
    let session = session.clone().validated()?;
    let mut sorted = session.utterances;
    sorted.sort_by(Utterance::fifo_cmp);

    let mut members: Vec<Vec<Utterance>> = Vec::new();
    let mut current: Vec<Utterance> = Vec::new();
    let mut reach = f64::NEG_INFINITY;
    let mut speaker_reach: HashMap<String, f64> = HashMap::new();
    for utt in sorted {
        if utt.start_s >= reach && !current.is_empty() {
            members.push(std::mem::take(&mut current));
            speaker_reach.clear();
        }
        let prev = speaker_reach.entry(utt.speaker.clone()).or_insert(f64::NEG_INFINITY);
        if utt.start_s < *prev {
            log::warn!(
                "session {}: utterance {} overlaps an earlier utterance of speaker {}",
                session.session_id,
                utt.utterance_id,
                utt.speaker
            );
        }
        *prev = prev.max(utt.end_s);
        reach = if current.is_empty() { utt.end_s } else { reach.max(utt.end_s) };
        current.push(utt);
    }
    if !current.is_empty() {
        members.push(current);
    }

    let total = members.len();
    Ok(members
        .into_iter()
        .enumerate()
        .filter_map(|(i, utts)| {
            UtteranceGroup::from_utterances(group_id(&session.session_id, i, total), utts)
        })
        .collect())
}

/// Per speaker-count bucket statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketStats {
    pub num_segments: usize,
    pub total_duration_s: f64,
    pub num_words: usize,
}

impl BucketStats {
    pub fn average_duration_s(&self) -> f64 {
        if self.num_segments == 0 {
            0.0
        } else {
            self.total_duration_s / self.num_segments as f64
        }
    }

    pub fn total_duration_hr(&self) -> f64 {
        self.total_duration_s / 3600.0
    }

    fn add(&mut self, group: &UtteranceGroup) {
        self.num_segments += 1;
        self.total_duration_s += group.duration_s();
        self.num_words += group.num_words();
    }
}

/// Corpus statistics over utterance groups, bucketed by speaker count.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupStats {
    pub buckets: BTreeMap<usize, BucketStats>,
    pub total: BucketStats,
}

pub fn group_stats(groups: &[UtteranceGroup]) -> GroupStats {
    let mut stats = GroupStats::default();
    for group in groups {
        stats.buckets.entry(group.num_speakers).or_default().add(group);
        stats.total.add(group);
    }
    stats
}

#[derive(Serialize)]
struct StatsRow {
    num_speakers: Option<usize>,
    num_segments: usize,
    average_duration_s: f64,
    total_duration_hr: f64,
    num_words: usize,
}

impl StatsRow {
    fn new(num_speakers: Option<usize>, b: &BucketStats) -> Self {
        StatsRow {
            num_speakers,
            num_segments: b.num_segments,
            average_duration_s: b.average_duration_s(),
            total_duration_hr: b.total_duration_hr(),
            num_words: b.num_words,
        }
    }
}

impl GroupStats {
    /// JSON form: one row per bucket plus a total row whose `num_speakers` is null.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<StatsRow> = self
            .buckets
            .iter()
            .map(|(&k, b)| StatsRow::new(Some(k), b))
            .collect();
        serde_json::json!({
            "buckets": rows,
            "total": StatsRow::new(None, &self.total),
        })
    }
}

impl fmt::Display for GroupStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>12} {:>14} {:>14} {:>12}",
            "# speakers", "# segments", "avg dur (s)", "total (hr)", "# words"
        )?;
        let mut row = |label: String, b: &BucketStats| {
            writeln!(
                f,
                "{:>10} {:>12} {:>14.1} {:>14.1} {:>12}",
                label,
                b.num_segments,
                b.average_duration_s(),
                b.total_duration_hr(),
                b.num_words
            )
        };
        for (k, b) in &self.buckets {
            row(k.to_string(), b)?;
        }
        row("Total".to_string(), &self.total)
    }
}
