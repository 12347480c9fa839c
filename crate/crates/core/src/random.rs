//! Seeded random test channels.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`) keyed through
//! `SeedableRng::seed_from_u64`. Uniforms take the top 53 bits of each
//! `next_u64` output, exponentials are `-ln(1 - u)`, and every row of the
//! channel (then the input distribution) is a flat Dirichlet draw: independent
//! unit exponentials divided by their sum. The whole pipeline is pinned here
//! rather than delegated to distribution crates, so a seed always names the
//! same channel.

use std::fmt;
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::channel::{Channel, InputDistribution};
use crate::error::{Error, Result};

/// Deterministic per-trial seed: SplitMix64 finalizer over `(seed, trial)`.
pub fn split_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Source of the uniform, exponential and Dirichlet draws used by the generator.
pub struct Sampler {
    rng: ChaCha20Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn unit_exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }

    /// Uniform on `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Flat Dirichlet sample of dimension `n`.
    pub fn flat_dirichlet(&mut self, n: usize) -> Vec<f64> {
        loop {
            let draws: Vec<f64> = (0..n).map(|_| self.unit_exponential()).collect();
            let total: f64 = draws.iter().sum();
            if total > 0.0 {
                return draws.into_iter().map(|d| d / total).collect();
            }
        }
    }
}

/// A flat-Dirichlet channel and input distribution, fully determined by `seed`.
pub fn random_channel(num_inputs: usize, num_outputs: usize, seed: u64) -> Result<(Channel, InputDistribution)> {
    if num_inputs < 2 {
        return Err(Error::field("X", format!("need at least 2 inputs, got {num_inputs}")));
    }
    if num_outputs < 2 {
        return Err(Error::field("Y", format!("need at least 2 outputs, got {num_outputs}")));
    }
    let mut sampler = Sampler::new(seed);
    let rows = (0..num_inputs).map(|_| sampler.flat_dirichlet(num_outputs)).collect();
    let input = sampler.flat_dirichlet(num_inputs);
    Ok((Channel::new(rows)?, InputDistribution::new(input)?))
}

/// Command-line generator spec such as `X=3,Y=256,seed=42`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub num_inputs: usize,
    pub num_outputs: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<(Channel, InputDistribution)> {
        random_channel(self.num_inputs, self.num_outputs, self.seed)
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (mut x, mut y, mut seed) = (None, None, None);
        for part in s.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::field("random", format!("expected key=value, got `{part}`")))?;
            let bad = |_| Error::field(key.trim(), format!("not an unsigned integer: `{value}`"));
            match key.trim() {
                "X" => x = Some(value.trim().parse::<usize>().map_err(bad)?),
                "Y" => y = Some(value.trim().parse::<usize>().map_err(bad)?),
                "seed" => seed = Some(value.trim().parse::<u64>().map_err(bad)?),
                other => return Err(Error::field("random", format!("unknown key `{other}`"))),
            }
        }
        Ok(Self {
            num_inputs: x.ok_or_else(|| Error::field("X", "missing"))?,
            num_outputs: y.ok_or_else(|| Error::field("Y", "missing"))?,
            seed: seed.unwrap_or(0),
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X={},Y={},seed={}", self.num_inputs, self.num_outputs, self.seed)
    }
}
