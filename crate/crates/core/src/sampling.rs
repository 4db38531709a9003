//! Seeded i.i.d. offline data from `rho x pi_ref` with the instance's noise model.

use alloc::vec::Vec;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::dataset::{Dataset, Record};
use crate::error::{Error, Result};
use crate::instance::{Instance, Noise};
use crate::table::Table;

/// Identifies one random stream. Streams with the same master seed but
/// different indices are independent ChaCha20 streams (same key, distinct
/// stream id), so replications can be generated in any order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self { master_seed, stream_index }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

enum RewardSampler {
    Gaussian { mean: Table<f64>, sigma: f64 },
    Bernoulli(Vec<Bernoulli>, usize),
}

/// Draws `n` records: `s ~ rho`, `a ~ pi_ref(.|s)`, reward per the noise model.
pub fn sample_dataset(inst: &Instance, n: usize, seed: SeedSpec) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::BadSampleSize);
    }
    let bad_weights = |e| Error::BadContextDistribution(alloc::format!("{e}"));
    let contexts = WeightedIndex::new(inst.rho()).map_err(bad_weights)?;
    let arms = inst
        .ref_policy()
        .iter_rows()
        .map(WeightedIndex::new)
        .collect::<core::result::Result<Vec<_>, _>>()
        .map_err(bad_weights)?;
    let a = inst.num_arms();
    let rewards = match inst.noise() {
        Noise::Gaussian { sigma } => RewardSampler::Gaussian { mean: inst.reward().clone(), sigma },
        Noise::Bernoulli => RewardSampler::Bernoulli(
            inst.reward()
                .as_slice()
                .iter()
                .map(|&p| Bernoulli::new(p).map_err(|e| Error::BadNoise(alloc::format!("{e}"))))
                .collect::<Result<_>>()?,
            a,
        ),
    };

    let mut rng = seed.rng();
    let mut records = Vec::with_capacity(n);
    for _ in 0..n {
        let context = contexts.sample(&mut rng);
        let arm = arms[context].sample(&mut rng);
        let reward = match &rewards {
            RewardSampler::Gaussian { mean, sigma } => {
                let z: f64 = StandardNormal.sample(&mut rng);
                mean.get(context, arm) + sigma * z
            }
            RewardSampler::Bernoulli(cells, a) => {
                if cells[context * a + arm].sample(&mut rng) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        records.push(Record { context, arm, reward });
    }
    Ok(Dataset::new(records))
}

/// Per-cell visit counts `N(s,a)` and empirical means (0 where unvisited).
pub fn tally_counts(ds: &Dataset, num_contexts: usize, num_arms: usize) -> Result<(Table<u64>, Table<f64>)> {
    ds.check_indices(num_contexts, num_arms)?;
    let mut counts = Table::filled(num_contexts, num_arms, 0u64);
    let mut sums = Table::filled(num_contexts, num_arms, 0.0f64);
    for r in ds.records() {
        counts.set(r.context, r.arm, counts.get(r.context, r.arm) + 1);
        sums.set(r.context, r.arm, sums.get(r.context, r.arm) + r.reward);
    }
    let means = Table::from_fn(num_contexts, num_arms, |s, a| match counts.get(s, a) {
        0 => 0.0,
        c => sums.get(s, a) / c as f64,
    });
    Ok((counts, means))
}
