//! Word error rate scoring.
//!
//! Utterance evaluation sums per-utterance edit distances. Utterance-group
//! evaluation concatenates each speaker's references inside a group and picks
//! the hypothesis-to-reference assignment with the fewest total errors;
//! surplus hypothesis channels count as insertions and surplus reference
//! channels as deletions. Both evaluations share the same denominator, the
//! total number of reference words.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::assignment;
use crate::error::{Error, Result};
use crate::grouping::UtteranceGroup;
use crate::model::{ErrorCounts, Session, Utterance};
use crate::WordCost;

/// Minimum edit distance alignment with unit costs.
///
/// When several alignments are optimal the backtrace prefers a diagonal step
/// (match or substitution), then a deletion, then an insertion, so the
/// sub/ins/del split is deterministic. The total is tie-independent.
pub fn word_errors<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> ErrorCounts {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut dist = vec![0usize; (n + 1) * width];
    for j in 0..=m {
        dist[j] = j;
    }
    for i in 1..=n {
        dist[i * width] = i;
        for j in 1..=m {
            let diag = dist[(i - 1) * width + j - 1]
                + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = dist[(i - 1) * width + j] + 1;
            let ins = dist[i * width + j - 1] + 1;
            dist[i * width + j] = diag.min(del).min(ins);
        }
    }

    let mut counts = ErrorCounts {
        ref_words: n,
        ..ErrorCounts::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        if i > 0 && j > 0 {
            let mismatch = reference[i - 1] != hypothesis[j - 1];
            if here == dist[(i - 1) * width + j - 1] + usize::from(mismatch) {
                counts.substitutions += usize::from(mismatch);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && here == dist[(i - 1) * width + j] + 1 {
            counts.deletions += 1;
            i -= 1;
        } else {
            counts.insertions += 1;
            j -= 1;
        }
    }
    counts
}

/// Concatenates each speaker's references inside a group in start-time order.
///
/// Utterances flagged as having no transcript cannot be scored and are rejected.
pub fn concat_refs(group: &UtteranceGroup) -> Result<BTreeMap<String, Vec<String>>> {
    let mut utts: Vec<&Utterance> = group.utterances.iter().collect();
    utts.sort_by(|a, b| a.fifo_cmp(b));
    let mut refs: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for u in utts {
        if u.no_transcript || u.text.is_empty() {
            return Err(Error::EmptyTranscript(u.utterance_id.clone()));
        }
        refs.entry(u.speaker.clone())
            .or_default()
            .extend(u.text.iter().cloned());
    }
    Ok(refs)
}

/// A system's output for one group. Channel order carries no meaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupHypothesis {
    pub group_id: String,
    pub channels: Vec<Vec<String>>,
}

impl GroupHypothesis {
    pub fn from_texts<S: AsRef<str>>(group_id: impl Into<String>, texts: &[S]) -> Self {
        GroupHypothesis {
            group_id: group_id.into(),
            channels: texts
                .iter()
                .map(|t| t.as_ref().split_whitespace().map(str::to_owned).collect())
                .collect(),
        }
    }

    /// Number of channels that carry at least one word.
    pub fn num_speakers(&self) -> usize {
        self.channels.iter().filter(|c| !c.is_empty()).count()
    }
}

/// One reference/hypothesis pairing of the chosen assignment. A missing side
/// marks an unmatched channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelMatch {
    pub ref_speaker: Option<String>,
    pub hyp_channel: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupScore {
    pub group_id: String,
    pub counts: ErrorCounts,
    /// Reference speakers in sorted order, then unmatched hypotheses by index.
    pub assignment: Vec<ChannelMatch>,
    pub ref_speakers: usize,
    pub hyp_speakers: usize,
}

/// Concatenated minimum-permutation scoring of one group.
pub fn score_group(
    refs: &BTreeMap<String, Vec<String>>,
    hyp: &GroupHypothesis,
) -> Result<GroupScore> {
    if refs.is_empty() {
        return Err(Error::EmptyReferences);
    }
    let ref_channels: Vec<(&String, &Vec<String>)> = refs.iter().collect();
    let (num_refs, num_hyps) = (ref_channels.len(), hyp.channels.len());
    let size = num_refs.max(num_hyps);
    let empty: Vec<String> = Vec::new();

    // Padding with empty channels turns unmatched channels into pure
    // insertions or deletions.
    let pair_counts: Vec<Vec<ErrorCounts>> = (0..size)
        .map(|r| {
            let reference = ref_channels.get(r).map_or(&empty, |(_, words)| *words);
            (0..size)
                .map(|c| word_errors(reference, hyp.channels.get(c).unwrap_or(&empty)))
                .collect()
        })
        .collect();
    let costs: Vec<Vec<WordCost>> = pair_counts
        .iter()
        .map(|row| row.iter().map(|c| c.errors() as WordCost).collect())
        .collect();
    let solved = assignment::solve(&costs);

    let mut counts = ErrorCounts::default();
    let mut matches = Vec::with_capacity(size);
    let mut unmatched_hyps = Vec::new();
    for (r, col) in solved.row_to_col.iter().enumerate() {
        let c = col.expect("square assignment matches every row");
        counts += pair_counts[r][c];
        let hyp_channel = (c < num_hyps).then_some(c);
        match ref_channels.get(r) {
            Some((speaker, _)) => matches.push(ChannelMatch {
                ref_speaker: Some((*speaker).clone()),
                hyp_channel,
            }),
            None => {
                if let Some(c) = hyp_channel {
                    unmatched_hyps.push(c);
                }
            }
        }
    }
    unmatched_hyps.sort_unstable();
    matches.extend(unmatched_hyps.into_iter().map(|c| ChannelMatch {
        ref_speaker: None,
        hyp_channel: Some(c),
    }));

    Ok(GroupScore {
        group_id: hyp.group_id.clone(),
        counts,
        assignment: matches,
        ref_speakers: num_refs,
        hyp_speakers: hyp.num_speakers(),
    })
}

/// Scores every group against its hypothesis. Every group needs exactly one
/// hypothesis and every hypothesis must name a known group.
pub fn score_groups(
    groups: &[UtteranceGroup],
    hyps: &HashMap<String, GroupHypothesis>,
) -> Result<Vec<GroupScore>> {
    let known: BTreeSet<&str> = groups.iter().map(|g| g.group_id.as_str()).collect();
    if let Some(id) = hyps.keys().filter(|id| !known.contains(id.as_str())).min() {
        return Err(Error::UnknownHypothesis(id.clone()));
    }
    groups
        .iter()
        .map(|g| {
            let hyp = hyps
                .get(&g.group_id)
                .ok_or_else(|| Error::MissingHypothesis(g.group_id.clone()))?;
            score_group(&concat_refs(g)?, hyp)
        })
        .collect()
}

const ACTUAL_LABELS: [&str; 4] = ["1", "2", "3", "4+"];
const ESTIMATED_LABELS: [&str; 6] = ["0", "1", "2", "3", "4", "≥5"];

/// Actual-versus-estimated speaker count matrix.
///
/// Rows are actual counts 1, 2, 3 and 4+; columns are estimated counts 0
/// through 4 and ≥5.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CountConfusion {
    pub matrix: [[usize; 6]; 4],
}

impl CountConfusion {
    pub fn add(&mut self, actual: usize, estimated: usize) {
        if actual == 0 {
            log::warn!("ignoring a group with no reference speakers in the count confusion");
            return;
        }
        if actual > 4 {
            log::warn!("{actual}-speaker group folded into the 4+ row");
        }
        self.matrix[actual.min(4) - 1][estimated.min(5)] += 1;
    }

    pub fn row_total(&self, row: usize) -> usize {
        self.matrix[row].iter().sum()
    }

    /// Row-normalised percentages; all zero for an empty row.
    pub fn row_percent(&self, row: usize) -> [f64; 6] {
        let total = self.row_total(row);
        let mut out = [0.0; 6];
        if total > 0 {
            for (o, &c) in out.iter_mut().zip(&self.matrix[row]) {
                *o = 100.0 * c as f64 / total as f64;
            }
        }
        out
    }
}

#[derive(Serialize)]
struct ConfusionRow<'a> {
    actual: &'a str,
    counts: [usize; 6],
    percent: [f64; 6],
}

impl Serialize for CountConfusion {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<ConfusionRow> = ACTUAL_LABELS
            .iter()
            .enumerate()
            .map(|(i, actual)| ConfusionRow {
                actual,
                counts: self.matrix[i],
                percent: self.row_percent(i),
            })
            .collect();
        rows.serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeakerCountRow {
    pub num_speakers: usize,
    pub num_segments: usize,
    #[serde(flatten)]
    pub counts: ErrorCounts,
    pub wer_pct: Option<f64>,
}

/// WER report over a scored evaluation set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub wer_pct: f64,
    #[serde(flatten)]
    pub counts: ErrorCounts,
    pub num_segments: usize,
    pub by_num_speakers: Vec<SpeakerCountRow>,
    pub count_confusion: Option<CountConfusion>,
    pub speaker_counting_accuracy_pct: Option<f64>,
}

fn round_pct(numerator: usize, denominator: usize) -> f64 {
    (1000.0 * numerator as f64 / denominator as f64).round() / 10.0
}

/// Sums group scores into a WER report with per-speaker-count rows and the
/// speaker-count confusion.
pub fn aggregate(scores: &[GroupScore]) -> Result<Report> {
    let counts: ErrorCounts = scores.iter().map(|s| s.counts).sum();
    if counts.ref_words == 0 {
        return Err(Error::ZeroReferenceWords);
    }
    let mut rows: BTreeMap<usize, (usize, ErrorCounts)> = BTreeMap::new();
    let mut confusion = CountConfusion::default();
    let mut correct_counts = 0;
    for s in scores {
        let row = rows.entry(s.ref_speakers).or_default();
        row.0 += 1;
        row.1 += s.counts;
        confusion.add(s.ref_speakers, s.hyp_speakers);
        correct_counts += usize::from(s.ref_speakers == s.hyp_speakers);
    }
    Ok(Report {
        wer_pct: round_pct(counts.errors(), counts.ref_words),
        counts,
        num_segments: scores.len(),
        by_num_speakers: rows
            .into_iter()
            .map(|(num_speakers, (num_segments, c))| SpeakerCountRow {
                num_speakers,
                num_segments,
                counts: c,
                wer_pct: (c.ref_words > 0).then(|| round_pct(c.errors(), c.ref_words)),
            })
            .collect(),
        count_confusion: Some(confusion),
        speaker_counting_accuracy_pct: Some(round_pct(correct_counts, scores.len())),
    })
}

/// Utterance-based evaluation: every reference utterance is scored against
/// the hypothesis decoded from its own segment.
pub fn score_utterance_eval(
    sessions: &[Session],
    hyps: &HashMap<String, Vec<String>>,
) -> Result<Report> {
    let mut known = BTreeSet::new();
    let mut counts = ErrorCounts::default();
    let mut segments = 0;
    for session in sessions {
        let session = session.clone().validated()?;
        for u in &session.utterances {
            if u.no_transcript {
                return Err(Error::EmptyTranscript(u.utterance_id.clone()));
            }
            let hyp = hyps
                .get(&u.utterance_id)
                .ok_or_else(|| Error::MissingHypothesis(u.utterance_id.clone()))?;
            counts += word_errors(&u.text, hyp);
            segments += 1;
            known.insert(u.utterance_id.clone());
        }
    }
    if let Some(id) = hyps.keys().filter(|id| !known.contains(*id)).min() {
        return Err(Error::UnknownHypothesis(id.clone()));
    }
    if counts.ref_words == 0 {
        return Err(Error::ZeroReferenceWords);
    }
    Ok(Report {
        wer_pct: round_pct(counts.errors(), counts.ref_words),
        counts,
        num_segments: segments,
        by_num_speakers: Vec::new(),
        count_confusion: None,
        speaker_counting_accuracy_pct: None,
    })
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.counts;
        writeln!(
            f,
            "WER {:.1}% [sub {} ins {} del {} / {} words, {} segments]",
            self.wer_pct, c.substitutions, c.insertions, c.deletions, c.ref_words, self.num_segments
        )?;
        if !self.by_num_speakers.is_empty() {
            writeln!(f)?;
            writeln!(
                f,
                "{:>10} {:>10} {:>8} {:>8} {:>8} {:>10} {:>8}",
                "# speakers", "# groups", "sub", "ins", "del", "ref words", "WER %"
            )?;
            for row in &self.by_num_speakers {
                let wer = row.wer_pct.map_or("-".to_string(), |w| format!("{w:.1}"));
                writeln!(
                    f,
                    "{:>10} {:>10} {:>8} {:>8} {:>8} {:>10} {:>8}",
                    row.num_speakers,
                    row.num_segments,
                    row.counts.substitutions,
                    row.counts.insertions,
                    row.counts.deletions,
                    row.counts.ref_words,
                    wer
                )?;
            }
        }
        if let Some(conf) = &self.count_confusion {
            writeln!(f)?;
            write!(f, "{:>8} |", "actual")?;
            for label in ESTIMATED_LABELS {
                write!(f, " {label:>6}")?;
            }
            writeln!(f)?;
            for (i, label) in ACTUAL_LABELS.iter().enumerate() {
                write!(f, "{label:>8} |")?;
                for p in conf.row_percent(i) {
                    write!(f, " {p:>6.1}")?;
                }
                writeln!(f)?;
            }
        }
        if let Some(acc) = self.speaker_counting_accuracy_pct {
            writeln!(f, "\nspeaker counting accuracy {acc:.1}%")?;
        }
        Ok(())
    }
}
