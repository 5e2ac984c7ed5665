use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies the generator and the order of draws. Bump the version
/// whenever the sequence of draws for a given seed changes.
pub const RNG_NAME: &str = "chacha8-stream/v1";

/// One recorded random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Draw {
    NumSpeakers(usize),
    Source(usize),
    /// A source draw was infeasible and is being redrawn; value is the attempt number.
    Retry(usize),
    OffsetSamples(usize),
    Speed(f64),
}

/// Seeded generator that logs every draw.
///
/// Independent streams are split off a single seed by stream index, so a
/// batch can be generated in any order or in parallel.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
    trace: Vec<Draw>,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self::for_stream(seed, 0)
    }

    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SimRng {
            inner,
            trace: Vec::new(),
        }
    }

    /// Uniform integer in `[low, high]`.
    pub(crate) fn int_inclusive(&mut self, low: usize, high: usize) -> usize {
        debug_assert!(low <= high);
        self.inner.random_range(low..=high)
    }

    /// Uniform real in `[low, high]`.
    pub(crate) fn real_inclusive(&mut self, low: f64, high: f64) -> f64 {
        if low == high {
            low
        } else {
            self.inner.random_range(low..=high)
        }
    }

    pub(crate) fn record(&mut self, draw: Draw) {
        self.trace.push(draw);
    }

    pub fn trace(&self) -> &[Draw] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<Draw> {
        std::mem::take(&mut self.trace)
    }
}
