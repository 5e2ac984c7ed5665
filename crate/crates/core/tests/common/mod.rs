//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls into the code paths it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sotkit::mixsim::PoolSource;
use sotkit::{AudioBuffer, FifoMode, MixtureSpec, Utterance, UtteranceGroup};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f"];

pub fn random_words(rng: &mut ChaCha8Rng, min: usize, max: usize) -> Vec<String> {
    let n = rng.random_range(min..=max);
    (0..n)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string())
        .collect()
}

/// Random session on a quarter-second grid, so touching and nested
/// intervals are frequent.
pub fn random_session(rng: &mut ChaCha8Rng, max_utts: usize) -> Vec<Utterance> {
    let n = rng.random_range(1..=max_utts);
    (0..n)
        .map(|i| {
            let start = rng.random_range(0..40) as f64 * 0.25;
            let dur = rng.random_range(1..=12) as f64 * 0.25;
            let speaker = ["A", "B", "C", "D"][rng.random_range(0..4)];
            let words = random_words(rng, 1, 5).join(" ");
            Utterance::new("sess", format!("u{i:02}"), speaker, start, start + dur, &words)
        })
        .collect()
}

/// Connected components of the strict-overlap graph via transitive closure
/// of the adjacency matrix.
pub fn overlap_components(utts: &[Utterance]) -> BTreeSet<BTreeSet<String>> {
    let n = utts.len();
    let mut reach = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (&utts[i], &utts[j]);
            reach[i][j] = i == j || (a.start_s < b.end_s && b.start_s < a.end_s);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| reach[i][j])
                .map(|j| utts[j].utterance_id.clone())
                .collect()
        })
        .collect()
}

/// Levenshtein distance by memoised recursion over suffixes.
pub fn edit_distance(a: &[String], b: &[String]) -> usize {
    fn go(a: &[String], b: &[String], i: usize, j: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if i == a.len() {
            return b.len() - j;
        }
        if j == b.len() {
            return a.len() - i;
        }
        if let Some(&v) = memo.get(&(i, j)) {
            return v;
        }
        let v = if a[i] == b[j] {
            go(a, b, i + 1, j + 1, memo)
        } else {
            1 + go(a, b, i + 1, j + 1, memo)
                .min(go(a, b, i + 1, j, memo))
                .min(go(a, b, i, j + 1, memo))
        };
        memo.insert((i, j), v);
        v
    }
    go(a, b, 0, 0, &mut HashMap::new())
}

/// Every (sub, ins, del) split reachable by an edit script, with its cost.
pub fn enumerate_edit_scripts(a: &[String], b: &[String]) -> BTreeSet<(usize, usize, usize)> {
    fn go(a: &[String], b: &[String], s: usize, ins: usize, del: usize, out: &mut BTreeSet<(usize, usize, usize)>) {
        if a.is_empty() && b.is_empty() {
            out.insert((s, ins, del));
            return;
        }
        if !a.is_empty() && !b.is_empty() {
            let sub = usize::from(a[0] != b[0]);
            go(&a[1..], &b[1..], s + sub, ins, del, out);
        }
        if !a.is_empty() {
            go(&a[1..], b, s, ins, del + 1, out);
        }
        if !b.is_empty() {
            go(a, &b[1..], s, ins + 1, del, out);
        }
    }
    let mut out = BTreeSet::new();
    go(a, b, 0, 0, 0, &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Minimum total edit distance over all ways to pair reference and
/// hypothesis channels; unpaired channels cost their full length.
pub fn cpwer_brute_force(refs: &[Vec<String>], hyps: &[Vec<String>]) -> usize {
    let n = refs.len().max(hyps.len());
    let empty = Vec::new();
    permutations(n)
        .into_iter()
        .map(|perm| {
            (0..n)
                .map(|r| {
                    edit_distance(refs.get(r).unwrap_or(&empty), hyps.get(perm[r]).unwrap_or(&empty))
                })
                .sum()
        })
        .min()
        .unwrap_or(0)
}

/// Checks a sampled mixture against the simulation constraints using only
/// the entry times in seconds.
pub fn check_mixture(spec: &MixtureSpec, max_speakers: usize, min_gap_s: f64) -> Result<(), String> {
    let e = &spec.entries;
    if e.is_empty() || e.len() > max_speakers {
        return Err(format!("{}: N = {}", spec.mixture_id, e.len()));
    }
    let speakers: BTreeSet<&str> = e.iter().map(|x| x.speaker.as_str()).collect();
    if speakers.len() != e.len() {
        return Err(format!("{}: repeated speaker", spec.mixture_id));
    }
    if e[0].offset_s != 0.0 {
        return Err(format!("{}: first offset {}", spec.mixture_id, e[0].offset_s));
    }
    for w in e.windows(2) {
        if w[1].offset_s - w[0].offset_s < min_gap_s - 1e-9 {
            return Err(format!(
                "{}: starts {} and {} closer than {min_gap_s}",
                spec.mixture_id, w[0].offset_s, w[1].offset_s
            ));
        }
    }
    if e.len() >= 2 {
        for (i, a) in e.iter().enumerate() {
            let overlapped = e.iter().enumerate().any(|(j, b)| {
                i != j && a.offset_s.max(b.offset_s) < (a.offset_s + a.duration_s).min(b.offset_s + b.duration_s)
            });
            if !overlapped {
                return Err(format!("{}: entry {} overlaps nothing", spec.mixture_id, a.source_id));
            }
        }
    }
    if !(0.9..=1.1).contains(&spec.speed_factor) {
        return Err(format!("{}: speed {}", spec.mixture_id, spec.speed_factor));
    }
    Ok(())
}

/// Synthetic pool: `speakers` speakers with `per_speaker` clips each.
/// Durations span 0.3 s to 4 s, so some clips are too short to precede another.
pub fn synthetic_pool(
    seed: u64,
    speakers: usize,
    per_speaker: usize,
    sample_rate_hz: u32,
) -> (Vec<PoolSource>, std::collections::BTreeMap<String, AudioBuffer<f32>>) {
    let mut r = rng(seed);
    let mut pool = Vec::new();
    let mut audio = std::collections::BTreeMap::new();
    for s in 0..speakers {
        for k in 0..per_speaker {
            let id = format!("spk{s:02}_{k}");
            let secs = r.random_range(0.3..4.0);
            let n = (secs * sample_rate_hz as f64) as usize;
            let freq = r.random_range(100.0..400.0_f32);
            let amp = r.random_range(0.2..0.6_f32);
            let samples = (0..n)
                .map(|i| amp * (2.0 * std::f32::consts::PI * freq * i as f32 / sample_rate_hz as f32).sin())
                .collect();
            let mut words = random_words(&mut r, 1, 6);
            words.shuffle(&mut r);
            pool.push(PoolSource {
                source_id: id.clone(),
                speaker: format!("spk{s:02}"),
                transcript: words,
                num_samples: n,
            });
            audio.insert(id, AudioBuffer::new(samples, sample_rate_hz));
        }
    }
    (pool, audio)
}

/// Channel texts by the two ordering rules, written out directly.
pub fn expected_channels(group: &UtteranceGroup, mode: FifoMode) -> Vec<Vec<String>> {
    let mut utts = group.utterances.clone();
    utts.sort_by(|a, b| {
        (a.start_s, a.end_s, &a.speaker, &a.utterance_id)
            .partial_cmp(&(b.start_s, b.end_s, &b.speaker, &b.utterance_id))
            .unwrap()
    });
    match mode {
        FifoMode::Utterance => utts.iter().map(|u| u.text.clone()).collect(),
        FifoMode::Speaker => {
            let mut speakers: Vec<&str> = Vec::new();
            for u in &utts {
                if !speakers.contains(&u.speaker.as_str()) {
                    speakers.push(&u.speaker);
                }
            }
            speakers
                .iter()
                .map(|s| utts.iter().filter(|u| u.speaker == *s).flat_map(|u| u.text.clone()).collect())
                .collect()
        }
    }
}

