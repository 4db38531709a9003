//! Single-replication kernels shared by the sequential and parallel harnesses.

use alloc::vec::Vec;

use crate::error::Result;
use crate::evaluation::Objective;
use crate::instance::Instance;
use crate::sampling::{sample_dataset, SeedSpec};
use crate::solvers::{check_event_e1, check_event_e2, kl_pcb, Algo, SolverConfig};
use crate::stats::{mean_and_stderr, MeanStderr};

/// Draws one dataset on `seed`, runs `algo`, and returns the exact
/// suboptimality of its output.
pub fn replicate(inst: &Instance, algo: Algo, delta: f64, n: usize, seed: SeedSpec, objective: Objective) -> Result<f64> {
    let ds = sample_dataset(inst, n, seed)?;
    let pi = algo.solve(&ds, inst.meta(), delta)?;
    objective.suboptimality(inst, &pi)
}

/// Whether the confidence-width event and the count event both held on one
/// replication, returned as `(e1, e2)`.
pub fn event_replicate(inst: &Instance, n: usize, cfg: SolverConfig, seed: SeedSpec) -> Result<(bool, bool)> {
    let ds = sample_dataset(inst, n, seed)?;
    let (_, diag) = kl_pcb(&ds, inst.meta(), cfg)?;
    let e1 = check_event_e1(&diag, inst.reward(), cfg)?;
    let e2 = check_event_e2(&diag.counts, inst.rho(), inst.ref_policy(), n, cfg.delta)?;
    Ok((e1, e2))
}

/// Sequential Monte Carlo estimate; replication `r` uses stream index `r`.
pub fn mc_suboptimality(
    inst: &Instance,
    algo: Algo,
    delta: f64,
    n: usize,
    reps: usize,
    master_seed: u64,
    objective: Objective,
) -> Result<MeanStderr> {
    let values = (0..reps)
        .map(|r| replicate(inst, algo, delta, n, SeedSpec::new(master_seed, r as u64), objective))
        .collect::<Result<Vec<f64>>>()?;
    mean_and_stderr(&values)
}
