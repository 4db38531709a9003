//! Learners mapping an offline dataset to a policy.
//!
//! [`kl_pcb`] is the pessimistic KL-regularized learner: count, average,
//! subtract a count-based confidence width, then tilt `pi_ref` by
//! `eta * r_hat`. [`empirical_best_arm`] is plain argmax of empirical means
//! for the single-context unregularized setting.

use core::fmt;
use core::str::FromStr;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::instance::InstanceMeta;
use crate::math;
use crate::policy::Policy;
use crate::sampling::tally_counts;
use crate::table::Table;

pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Confidence parameter, in `(0, 1)`.
    pub delta: f64,
    pub pessimism: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { delta: DEFAULT_DELTA, pessimism: true }
    }
}

impl SolverConfig {
    pub fn new(delta: f64, pessimism: bool) -> Result<Self> {
        check_delta(delta)?;
        Ok(Self { delta, pessimism })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::BadDelta(delta))
    }
}

/// Confidence width for a cell visited `count` times: 1 when unvisited,
/// otherwise `sqrt(4 ln(2 S A / delta) / count)`.
pub fn penalty(count: u64, num_contexts: usize, num_arms: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if num_contexts == 0 || num_arms == 0 {
        return Err(Error::ShapeMismatch(alloc::format!("S={num_contexts}, A={num_arms}")));
    }
    if count == 0 {
        return Ok(1.0);
    }
    let log_term = math::ln(2.0 * num_contexts as f64 * num_arms as f64 / delta);
    Ok(math::sqrt(4.0 * log_term / count as f64))
}

/// Everything [`kl_pcb`] computed on the way to its policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverDiagnostics {
    pub counts: Table<u64>,
    pub empirical_mean: Table<f64>,
    pub penalty: Table<f64>,
    /// `empirical_mean - penalty`, elementwise.
    pub pessimistic_reward: Table<f64>,
}

pub fn kl_pcb(ds: &Dataset, meta: InstanceMeta<'_>, cfg: SolverConfig) -> Result<(Policy, SolverDiagnostics)> {
    check_delta(cfg.delta)?;
    let (s, a) = (meta.num_contexts, meta.num_arms);
    let (counts, empirical_mean) = tally_counts(ds, s, a)?;

    let mut penalty_table = Table::filled(s, a, 0.0);
    if cfg.pessimism {
        // Only two distinct widths per count value; the log is shared.
        let log_term = math::ln(2.0 * s as f64 * a as f64 / cfg.delta);
        penalty_table = counts.map(|c| if c == 0 { 1.0 } else { math::sqrt(4.0 * log_term / c as f64) });
    }
    let pessimistic_reward =
        Table::from_fn(s, a, |i, j| empirical_mean.get(i, j) - penalty_table.get(i, j));

    let policy = Policy::from_softmax(math::tilt(meta.ref_policy, &pessimistic_reward, meta.eta));
    Ok((policy, SolverDiagnostics { counts, empirical_mean, penalty: penalty_table, pessimistic_reward }))
}

/// Argmax of empirical means over a single-context dataset; unvisited arms
/// score 0 and ties go to the lowest index.
pub fn empirical_best_arm(ds: &Dataset, num_arms: usize) -> Result<Policy> {
    if let Some((i, r)) = ds.records().iter().enumerate().find(|(_, r)| r.context != 0) {
        return Err(Error::MultiContextDataset { record: i, context: r.context });
    }
    let (_, means) = tally_counts(ds, 1, num_arms)?;
    let mut best = 0;
    for (arm, &m) in means.row(0).iter().enumerate() {
        if m > means.get(0, best) {
            best = arm;
        }
    }
    Ok(Policy::one_hot(1, num_arms, best))
}

/// `|r_bar - r*| <= b` on every cell, with `b` recomputed from the counts
/// (including the unvisited branch) regardless of the ablation flag.
pub fn check_event_e1(diag: &SolverDiagnostics, true_reward: &Table<f64>, cfg: SolverConfig) -> Result<bool> {
    let shape = diag.counts.shape();
    if true_reward.shape() != shape || diag.empirical_mean.shape() != shape {
        return Err(Error::ShapeMismatch(alloc::format!(
            "diagnostics {shape:?} vs reward {:?}",
            true_reward.shape()
        )));
    }
    let (s, a) = shape;
    for i in 0..s {
        for j in 0..a {
            let b = penalty(diag.counts.get(i, j), s, a, cfg.delta)?;
            if (diag.empirical_mean.get(i, j) - true_reward.get(i, j)).abs() > b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `1 / max(N, 1) <= 8 ln(2 S A / delta) / (n rho(s) pi_ref(a|s))` on every
/// cell. Zero-mass contexts hold trivially.
pub fn check_event_e2(
    counts: &Table<u64>,
    rho: &[f64],
    ref_policy: &Table<f64>,
    n: usize,
    delta: f64,
) -> Result<bool> {
    check_delta(delta)?;
    let (s, a) = counts.shape();
    if ref_policy.shape() != (s, a) || rho.len() != s {
        return Err(Error::ShapeMismatch(alloc::format!(
            "counts {:?}, ref_policy {:?}, rho {}",
            counts.shape(),
            ref_policy.shape(),
            rho.len()
        )));
    }
    if n == 0 {
        return Err(Error::BadSampleSize);
    }
    let log_term = 8.0 * math::ln(2.0 * s as f64 * a as f64 / delta);
    for i in 0..s {
        for j in 0..a {
            let lhs = 1.0 / counts.get(i, j).max(1) as f64;
            let rhs = log_term / (n as f64 * rho[i] * ref_policy.get(i, j));
            if lhs > rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Learner selector used by the Monte Carlo harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    KlPcb,
    KlPcbNoPessimism,
    EmpiricalBestArm,
    /// Returns `pi_ref` unchanged; a constant baseline.
    Reference,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::KlPcb => "klpcb",
            Algo::KlPcbNoPessimism => "klpcb-nopess",
            Algo::EmpiricalBestArm => "erm",
            Algo::Reference => "reference",
        }
    }

    /// Runs the learner. `cfg.pessimism` is overridden by the algorithm choice.
    pub fn solve(self, ds: &Dataset, meta: InstanceMeta<'_>, delta: f64) -> Result<Policy> {
        match self {
            Algo::KlPcb => kl_pcb(ds, meta, SolverConfig::new(delta, true)?).map(|(p, _)| p),
            Algo::KlPcbNoPessimism => kl_pcb(ds, meta, SolverConfig::new(delta, false)?).map(|(p, _)| p),
            Algo::EmpiricalBestArm => {
                if meta.num_contexts != 1 {
                    return Err(Error::ShapeMismatch(alloc::format!(
                        "erm needs a single-context instance, got S={}",
                        meta.num_contexts
                    )));
                }
                empirical_best_arm(ds, meta.num_arms)
            }
            Algo::Reference => {
                ds.check_indices(meta.num_contexts, meta.num_arms)?;
                Ok(Policy::from_softmax(meta.ref_policy.clone()))
            }
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = alloc::string::String;

    fn from_str(s: &str) -> core::result::Result<Self, Self::Err> {
        match s {
            "klpcb" => Ok(Algo::KlPcb),
            "klpcb-nopess" => Ok(Algo::KlPcbNoPessimism),
            "erm" => Ok(Algo::EmpiricalBestArm),
            "reference" => Ok(Algo::Reference),
            other => Err(alloc::format!("unknown algorithm `{other}` (klpcb, klpcb-nopess, erm, reference)")),
        }
    }
}
