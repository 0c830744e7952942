//! Common random numbers.
//!
//! A stochastic sample is identified by a [`SampleId`]: the run seed plus a
//! per-run index. The noise vector for an id is generated from a
//! counter-based SplitMix64 stream keyed by `(run_seed, index, component)`,
//! so it does not depend on the order in which ids are realized and can be
//! regenerated at every point the sample is evaluated.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const TWO_POW_NEG_53: f64 = 1.0 / (1u64 << 53) as f64;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleId {
    pub run_seed: u64,
    pub index: u64,
}

impl SampleId {
    pub fn new(run_seed: u64, index: u64) -> Self {
        Self { run_seed, index }
    }

    #[inline]
    fn key(&self) -> u64 {
        let seeded = mix64(self.run_seed.wrapping_add(GOLDEN_GAMMA));
        mix64(seeded ^ self.index.wrapping_add(GOLDEN_GAMMA))
    }
}

/// Raw 64-bit word number `counter` of the stream belonging to `key`.
#[inline]
fn stream_word(key: u64, counter: u64) -> u64 {
    mix64(key ^ counter.wrapping_add(GOLDEN_GAMMA).wrapping_mul(GOLDEN_GAMMA))
}

/// Uniform in `[0, 1)` from the top 53 bits.
#[inline]
fn unit_closed_open(w: u64) -> f64 {
    (w >> 11) as f64 * TWO_POW_NEG_53
}

/// Uniform in `(0, 1]`, safe to pass to `ln`.
#[inline]
fn unit_open_closed(w: u64) -> f64 {
    ((w >> 11) + 1) as f64 * TWO_POW_NEG_53
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDist {
    /// Independent `N(0, sigma^2)` components.
    Gaussian { sigma: f64 },
    /// Independent `U[-1, 1)` components.
    Uniform,
}

/// Writes the noise vector of `id` into `out` (its length is the dimension).
///
/// Gaussian components come in Box-Muller pairs: components `2k` and
/// `2k + 1` share the stream words `2k` and `2k + 1`.
pub fn realize_noise_into(id: SampleId, dist: NoiseDist, out: &mut [f64]) {
    let key = id.key();
    match dist {
        NoiseDist::Gaussian { sigma } => {
            for (pair, chunk) in out.chunks_mut(2).enumerate() {
                let c = 2 * pair as u64;
                let u1 = unit_open_closed(stream_word(key, c));
                let u2 = unit_closed_open(stream_word(key, c + 1));
                let r = (-2.0 * u1.ln()).sqrt();
                let angle = 2.0 * std::f64::consts::PI * u2;
                chunk[0] = sigma * r * angle.cos();
                if let Some(second) = chunk.get_mut(1) {
                    *second = sigma * r * angle.sin();
                }
            }
        }
        NoiseDist::Uniform => {
            for (j, v) in out.iter_mut().enumerate() {
                *v = 2.0 * unit_closed_open(stream_word(key, j as u64)) - 1.0;
            }
        }
    }
}

pub fn realize_noise(id: SampleId, dim: usize, dist: NoiseDist) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    realize_noise_into(id, dist, &mut out);
    out
}

/// Ordered set of distinct sample ids, strictly increasing by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    ids: Vec<SampleId>,
}

impl SampleSet {
    pub fn new(ids: Vec<SampleId>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::invalid("a sample set needs at least one id"));
        }
        if ids.windows(2).any(|w| w[0].index >= w[1].index) {
            return Err(Error::invalid("sample ids must be strictly increasing by index"));
        }
        Ok(Self { ids })
    }

    pub fn ids(&self) -> &[SampleId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Appends ids; they must continue the increasing order.
    pub fn extend(&mut self, more: &SampleSet) -> Result<()> {
        if let (Some(last), Some(first)) = (self.ids.last(), more.ids.first()) {
            if first.index <= last.index {
                return Err(Error::invalid("augmenting ids must follow existing ids"));
            }
        }
        self.ids.extend_from_slice(&more.ids);
        Ok(())
    }
}

/// Hands out fresh sample ids for one run. Indices are never reused.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSource {
    run_seed: u64,
    next_index: u64,
}

impl SampleSource {
    pub fn new(run_seed: u64) -> Self {
        Self::starting_at(run_seed, 0)
    }

    pub fn starting_at(run_seed: u64, next_index: u64) -> Self {
        Self { run_seed, next_index }
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    pub fn draw(&mut self, count: usize) -> Result<SampleSet> {
        let (set, next) = draw_set(self.run_seed, count, self.next_index)?;
        self.next_index = next;
        Ok(set)
    }
}

/// Draws `count` fresh ids starting at `next_index`; returns the set and the
/// next unused index.
pub fn draw_set(run_seed: u64, count: usize, next_index: u64) -> Result<(SampleSet, u64)> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let ids = (0..count as u64)
        .map(|k| SampleId::new(run_seed, next_index + k))
        .collect();
    Ok((SampleSet { ids }, next_index + count as u64))
}
