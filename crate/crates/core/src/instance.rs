//! Tabular bandit instances `(S, A, r, eta, pi_ref, rho)` plus a noise model.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::table::Table;
use crate::SUM_TOLERANCE;

/// Observation noise around the mean reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    /// `r(s,a) + N(0, sigma^2)`; `sigma = 0` gives noiseless observations.
    Gaussian { sigma: f64 },
    /// `Bernoulli(r(s,a))`; requires every mean in `[0, 1]`.
    Bernoulli,
}

impl Default for Noise {
    fn default() -> Self {
        Noise::Gaussian { sigma: 1.0 }
    }
}

/// Raw, unvalidated instance data. Turn it into an [`Instance`] with
/// [`Instance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub num_contexts: usize,
    pub num_arms: usize,
    pub eta: f64,
    pub rho: Vec<f64>,
    pub ref_policy: Table<f64>,
    pub reward: Table<f64>,
    pub noise: Noise,
}

impl InstanceSpec {
    /// Uniform `rho` and the given tables.
    pub fn uniform_contexts(
        eta: f64,
        ref_policy: Table<f64>,
        reward: Table<f64>,
        noise: Noise,
    ) -> Self {
        let s = ref_policy.rows();
        Self {
            num_contexts: s,
            num_arms: ref_policy.cols(),
            eta,
            rho: alloc::vec![1.0 / s as f64; s],
            ref_policy,
            reward,
            noise,
        }
    }
}

/// Checks every instance invariant and reports the first one violated.
pub fn validate_instance(spec: &InstanceSpec) -> Result<()> {
    let (s, a) = (spec.num_contexts, spec.num_arms);
    if s == 0 || a == 0 {
        return Err(Error::ShapeMismatch(format!("need S >= 1 and A >= 1, got S={s}, A={a}")));
    }
    if spec.ref_policy.shape() != (s, a) {
        return Err(Error::ShapeMismatch(format!(
            "ref_policy is {:?}, expected ({s}, {a})",
            spec.ref_policy.shape()
        )));
    }
    if spec.reward.shape() != (s, a) {
        return Err(Error::ShapeMismatch(format!(
            "reward is {:?}, expected ({s}, {a})",
            spec.reward.shape()
        )));
    }
    if spec.rho.len() != s {
        return Err(Error::ShapeMismatch(format!("rho has {} entries, expected {s}", spec.rho.len())));
    }

    for (ctx, row) in spec.ref_policy.iter_rows().enumerate() {
        for (arm, &p) in row.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::ZeroSupportReference { context: ctx, arm, value: p });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::NonStochasticRow { table: "ref_policy", row: ctx, sum });
        }
    }

    if let Some((i, &p)) = spec.rho.iter().enumerate().find(|(_, p)| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::BadContextDistribution(format!("rho[{i}] = {p}")));
    }
    let rho_sum: f64 = spec.rho.iter().sum();
    if (rho_sum - 1.0).abs() > SUM_TOLERANCE {
        return Err(Error::BadContextDistribution(format!("rho sums to {rho_sum}")));
    }

    if !(spec.eta > 0.0) || !spec.eta.is_finite() {
        return Err(Error::BadEta(spec.eta));
    }

    let bernoulli = match spec.noise {
        Noise::Gaussian { sigma } => {
            if !(sigma >= 0.0) || !sigma.is_finite() {
                return Err(Error::BadNoise(format!("gaussian sigma = {sigma}")));
            }
            false
        }
        Noise::Bernoulli => true,
    };
    for (ctx, row) in spec.reward.iter_rows().enumerate() {
        for (arm, &r) in row.iter().enumerate() {
            let (lo, range) = if bernoulli { (0.0, "[0, 1]") } else { (-1.0, "[-1, 1]") };
            if !(r >= lo && r <= 1.0) {
                return Err(Error::RewardOutOfRange { context: ctx, arm, value: r, range });
            }
        }
    }
    Ok(())
}

/// A validated instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    spec: InstanceSpec,
}

/// What a learner is allowed to see: everything but the reward table.
#[derive(Debug, Clone, Copy)]
pub struct InstanceMeta<'a> {
    pub num_contexts: usize,
    pub num_arms: usize,
    pub eta: f64,
    pub ref_policy: &'a Table<f64>,
}

impl Instance {
    pub fn new(spec: InstanceSpec) -> Result<Self> {
        validate_instance(&spec)?;
        Ok(Self { spec })
    }

    /// Same rewards, reference policy and context law with a different `eta`.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.eta = eta;
        Self::new(spec)
    }

    pub fn with_noise(&self, noise: Noise) -> Result<Self> {
        let mut spec = self.spec.clone();
        spec.noise = noise;
        Self::new(spec)
    }

    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    pub fn into_spec(self) -> InstanceSpec {
        self.spec
    }

    pub fn num_contexts(&self) -> usize {
        self.spec.num_contexts
    }

    pub fn num_arms(&self) -> usize {
        self.spec.num_arms
    }

    pub fn eta(&self) -> f64 {
        self.spec.eta
    }

    pub fn rho(&self) -> &[f64] {
        &self.spec.rho
    }

    pub fn ref_policy(&self) -> &Table<f64> {
        &self.spec.ref_policy
    }

    pub fn reward(&self) -> &Table<f64> {
        &self.spec.reward
    }

    pub fn noise(&self) -> Noise {
        self.spec.noise
    }

    pub fn meta(&self) -> InstanceMeta<'_> {
        InstanceMeta {
            num_contexts: self.spec.num_contexts,
            num_arms: self.spec.num_arms,
            eta: self.spec.eta,
            ref_policy: &self.spec.ref_policy,
        }
    }
}
