//! On-the-fly multi-talker mixture simulation.
//!
//! A mixture takes N single-speaker recordings, N uniform in
//! `1..=max_speakers`, from N different speakers. Each is delayed so that
//! consecutive start times differ by at least `min_start_gap_s`, and every
//! recording starts before its predecessor ends, so each one overlaps at
//! least one other. The sum is peak-protected and then speed perturbed.

mod render;
mod rng;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DEFAULT_SAMPLE_RATE_HZ;

pub use render::{render, speed_perturb, MixtureResult};
pub use rng::{Draw, SimRng, RNG_NAME};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedSampling {
    /// Uniform over the closed range.
    #[default]
    Continuous,
    /// One of low, midpoint and high with equal probability.
    Discrete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub max_speakers: usize,
    pub min_start_gap_s: f64,
    pub speed_range: [f64; 2],
    pub speed_sampling: SpeedSampling,
    pub sample_rate_hz: u32,
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_speakers: 5,
            min_start_gap_s: 0.5,
            speed_range: [0.9, 1.1],
            speed_sampling: SpeedSampling::Continuous,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            max_retries: 100,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let [low, high] = self.speed_range;
        if self.max_speakers < 1 {
            return bad("max_speakers must be at least 1".into());
        }
        if !(self.min_start_gap_s > 0.0 && self.min_start_gap_s.is_finite()) {
            return bad(format!("min_start_gap_s must be positive, got {}", self.min_start_gap_s));
        }
        if !(low > 0.0 && low <= high && high.is_finite()) {
            return bad(format!("speed_range must satisfy 0 < low <= high, got [{low}, {high}]"));
        }
        if self.sample_rate_hz == 0 {
            return bad("sample_rate_hz must be positive".into());
        }
        Ok(())
    }

    /// Minimum start-time difference in whole samples.
    pub fn gap_samples(&self) -> usize {
        (self.min_start_gap_s * self.sample_rate_hz as f64 - 1e-9).ceil() as usize
    }
}

/// A single-speaker recording available for mixing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSource {
    pub source_id: String,
    pub speaker: String,
    pub transcript: Vec<String>,
    pub num_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureEntry {
    pub source_id: String,
    pub speaker: String,
    pub transcript: Vec<String>,
    pub offset_s: f64,
    pub duration_s: f64,
    pub offset_samples: usize,
    pub num_samples: usize,
}

impl MixtureEntry {
    pub fn end_samples(&self) -> usize {
        self.offset_samples + self.num_samples
    }
}

/// A sampled mixture plan, before audio is rendered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub mixture_id: String,
    /// Ordered by strictly increasing offset.
    pub entries: Vec<MixtureEntry>,
    pub speed_factor: f64,
    pub sample_rate_hz: u32,
    pub seed_trace: Vec<Draw>,
}

impl MixtureSpec {
    pub fn num_speakers(&self) -> usize {
        self.entries.len()
    }

    /// Length of the mixture before speed perturbation.
    pub fn mixed_len(&self) -> usize {
        self.entries.iter().map(MixtureEntry::end_samples).max().unwrap_or(0)
    }
}

fn check_pool(pool: &[PoolSource], config: &SimConfig) -> Result<()> {
    let speakers: BTreeSet<&str> = pool.iter().map(|s| s.speaker.as_str()).collect();
    if pool.len() < config.max_speakers || speakers.len() < config.max_speakers {
        return Err(Error::InfeasiblePool(format!(
            "{} sources from {} speakers cannot supply {} distinct speakers",
            pool.len(),
            speakers.len(),
            config.max_speakers
        )));
    }
    if let Some(s) = pool.iter().find(|s| s.num_samples == 0 || s.transcript.is_empty()) {
        return Err(Error::InfeasiblePool(format!(
            "source {} has no audio or no transcript",
            s.source_id
        )));
    }
    Ok(())
}

/// Draws `n` sources with pairwise distinct speakers, in draw order.
fn draw_sources(pool: &[PoolSource], n: usize, rng: &mut SimRng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut speakers = BTreeSet::new();
    let mut chosen = Vec::with_capacity(n);
    let mut k = 0;
    while chosen.len() < n {
        let j = rng.int_inclusive(k, order.len() - 1);
        order.swap(k, j);
        let idx = order[k];
        k += 1;
        if speakers.insert(pool[idx].speaker.as_str()) {
            rng.record(Draw::Source(idx));
            chosen.push(idx);
        }
    }
    chosen
}

/// Samples one mixture plan from the pool.
///
/// The source set is redrawn (keeping N) whenever a non-final source is too
/// short to leave room for the next start; after `max_retries` redraws the
/// pool is declared infeasible.
pub fn sample_spec(
    pool: &[PoolSource],
    config: &SimConfig,
    rng: &mut SimRng,
    mixture_id: impl Into<String>,
) -> Result<MixtureSpec> {
    config.validate()?;
    check_pool(pool, config)?;
    let sr = config.sample_rate_hz as f64;
    let gap = config.gap_samples();

    let n = rng.int_inclusive(1, config.max_speakers);
    rng.record(Draw::NumSpeakers(n));

    for attempt in 0..=config.max_retries {
        if attempt > 0 {
            rng.record(Draw::Retry(attempt));
        }
        let chosen = draw_sources(pool, n, rng);
        // Each non-final source must outlast the gap by at least one sample.
        let feasible = chosen[..n - 1]
            .iter()
            .all(|&i| pool[i].num_samples > gap);
        if !feasible {
            continue;
        }

        let mut entries = Vec::with_capacity(n);
        let mut offset = 0usize;
        for (pos, &i) in chosen.iter().enumerate() {
            if pos > 0 {
                let prev = &pool[chosen[pos - 1]];
                let prev_offset = offset;
                // Start at least `gap` after the predecessor and no later
                // than its last sample, so the two overlap.
                offset = rng.int_inclusive(prev_offset + gap, prev_offset + prev.num_samples - 1);
                rng.record(Draw::OffsetSamples(offset));
            }
            let src = &pool[i];
            entries.push(MixtureEntry {
                source_id: src.source_id.clone(),
                speaker: src.speaker.clone(),
                transcript: src.transcript.clone(),
                offset_s: offset as f64 / sr,
                duration_s: src.num_samples as f64 / sr,
                offset_samples: offset,
                num_samples: src.num_samples,
            });
        }

        let [low, high] = config.speed_range;
        let speed_factor = match config.speed_sampling {
            SpeedSampling::Continuous => rng.real_inclusive(low, high),
            SpeedSampling::Discrete => {
                [low, 0.5 * (low + high), high][rng.int_inclusive(0, 2)]
            }
        };
        rng.record(Draw::Speed(speed_factor));

        return Ok(MixtureSpec {
            mixture_id: mixture_id.into(),
            entries,
            speed_factor,
            sample_rate_hz: config.sample_rate_hz,
            seed_trace: rng.take_trace(),
        });
    }
    rng.take_trace();
    Err(Error::InfeasiblePool(format!(
        "no feasible draw of {n} sources after {} retries (non-final sources must exceed {} s)",
        config.max_retries, config.min_start_gap_s
    )))
}

/// Mixture id for position `index` of a batch.
pub fn mixture_id(index: usize) -> String {
    format!("mix_{index:06}")
}

/// Samples mixture `index` of a batch on its own RNG stream, so the result
/// does not depend on which other mixtures were generated or in what order.
pub fn sample_indexed(pool: &[PoolSource], config: &SimConfig, index: usize) -> Result<MixtureSpec> {
    let mut rng = SimRng::for_stream(config.seed, index as u64);
    sample_spec(pool, config, &mut rng, mixture_id(index))
}
