//! Parallel Monte Carlo over sample-size grids, rate fits and sweeps.
//!
//! Replication `r` always draws from stream `r` of the master seed and the
//! per-replication results are reduced in index order, so reports do not
//! depend on the worker count.

use klbandit_core::evaluation::{concentrability, Objective};
use klbandit_core::forge::{fast_instance, forge_vk_family, vk_default_delta, Enumeration};
use klbandit_core::mc::{event_replicate, replicate};
use klbandit_core::stats::{fit_rate, mean_and_stderr, propagated_slope_stderr, MeanStderr, RateFit, RESOLUTION_FLOOR};
use klbandit_core::{math, Algo, Error, Instance, Noise, SeedSpec, SolverConfig, Table};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AppError, AppResult};

/// Worker pool for replications; `0` workers means one per available core.
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    pub fn new(workers: usize) -> AppResult<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| AppError::Usage(format!("cannot start {workers} workers: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// `f(r)` for `r in 0..reps`, in index order.
    pub fn map_reps<T: Send>(&self, reps: usize, f: impl Fn(usize) -> Result<T, Error> + Sync) -> Result<Vec<T>, Error> {
        let f = &f;
        self.pool.install(|| (0..reps).into_par_iter().map(f).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(serialize_with = "ser_algo")]
    pub algo: Algo,
    pub delta: f64,
}

fn ser_algo<S: serde::Serializer>(a: &Algo, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(a.name())
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_values.len() < 3 {
            return Err(Error::BadGrid(format!("need at least 3 sample sizes, got {}", self.n_values.len())));
        }
        if self.n_values[0] == 0 || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadGrid("sample sizes must be positive and strictly increasing".into()));
        }
        if self.replications < 2 {
            return Err(Error::BadGrid(format!("need at least 2 replications, got {}", self.replications)));
        }
        SolverConfig::new(self.delta, true)?;
        Ok(())
    }
}

/// Monte Carlo estimate of the expected suboptimality of `algo` at sample size `n`.
pub fn mc_suboptimality(
    exec: &Executor,
    inst: &Instance,
    algo: Algo,
    delta: f64,
    n: usize,
    reps: usize,
    master_seed: u64,
    objective: Objective,
) -> Result<MeanStderr, Error> {
    if reps < 2 {
        return Err(Error::BadGrid(format!("need at least 2 replications, got {reps}")));
    }
    let values = exec.map_reps(reps, |r| replicate(inst, algo, delta, n, SeedSpec::new(master_seed, r as u64), objective))?;
    mean_and_stderr(&values)
}

/// Fraction of replications on which both pessimism events held, plus the
/// individual frequencies `(both, e1, e2)`.
pub fn event_frequency(
    exec: &Executor,
    inst: &Instance,
    n: usize,
    cfg: SolverConfig,
    reps: usize,
    master_seed: u64,
) -> Result<(f64, f64, f64), Error> {
    let hits = exec.map_reps(reps, |r| event_replicate(inst, n, cfg, SeedSpec::new(master_seed, r as u64)))?;
    let total = reps as f64;
    let both = hits.iter().filter(|(a, b)| *a && *b).count() as f64 / total;
    let e1 = hits.iter().filter(|(a, _)| *a).count() as f64 / total;
    let e2 = hits.iter().filter(|(_, b)| *b).count() as f64 / total;
    Ok((both, e1, e2))
}

/// How the instance is obtained at each `(eta, n)` grid point.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSchedule {
    /// One instance; a sweep only replaces its `eta`.
    Fixed(Instance),
    /// Fast-style reward table whose gap shrinks with the sample size as
    /// `sqrt(S A C / (n ln A))`, `A` the rare-arm count.
    FastCoupled { signs: Table<f64>, alpha_eta: f64, budget: f64, noise: Noise },
}

impl InstanceSchedule {
    pub fn at(&self, eta: f64, n: usize) -> Result<Instance, Error> {
        match self {
            InstanceSchedule::Fixed(inst) => {
                if eta == inst.eta() {
                    Ok(inst.clone())
                } else {
                    inst.with_eta(eta)
                }
            }
            InstanceSchedule::FastCoupled { signs, alpha_eta, budget, noise } => {
                let gap = coupled_gap(signs.rows(), signs.cols(), *budget, n)?;
                fast_instance(signs, eta, *alpha_eta, *budget, gap, *noise)
            }
        }
    }

    pub fn base_eta(&self) -> Option<f64> {
        match self {
            InstanceSchedule::Fixed(inst) => Some(inst.eta()),
            InstanceSchedule::FastCoupled { .. } => None,
        }
    }
}

/// `sqrt(S A C / (n ln A))`.
pub fn coupled_gap(num_contexts: usize, rare_arms: usize, budget: f64, n: usize) -> Result<f64, Error> {
    if rare_arms < 2 {
        return Err(Error::BadFamilySpec(format!("need at least 2 rare arms, got {rare_arms}")));
    }
    if n == 0 {
        return Err(Error::BadSampleSize);
    }
    Ok(math::sqrt(num_contexts as f64 * rare_arms as f64 * budget / (n as f64 * math::ln(rare_arms as f64))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub eta: f64,
    pub n: usize,
    pub mean_subopt: f64,
    pub stderr: f64,
    pub reps: usize,
    /// `eta^2 S A C / n` with the exact coverage of the instance at this point.
    pub regime_diag: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub eta: f64,
    pub rows: Vec<ReportRow>,
    /// `None` when fewer than three points sit above the resolution floor.
    pub fit: Option<FitSummary>,
    /// Grid points left out of the fit for having a mean below the floor.
    pub dropped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub slope_stderr: f64,
    /// Slope uncertainty implied by the Monte Carlo error of each mean.
    pub propagated_slope_stderr: f64,
    pub points: usize,
}

impl FitSummary {
    fn new(fit: RateFit, propagated: f64) -> Self {
        Self {
            slope: fit.slope,
            intercept: fit.intercept,
            r_squared: fit.r_squared,
            slope_stderr: fit.slope_stderr,
            propagated_slope_stderr: propagated,
            points: fit.points,
        }
    }
}

/// Fits `rows` after discarding means below [`RESOLUTION_FLOOR`].
pub fn fit_rows(rows: &[ReportRow]) -> Result<(Option<FitSummary>, usize), Error> {
    let kept: Vec<&ReportRow> = rows.iter().filter(|r| r.mean_subopt >= RESOLUTION_FLOOR).collect();
    let dropped = rows.len() - kept.len();
    if kept.len() < 3 {
        return Ok((None, dropped));
    }
    let pts: Vec<(f64, f64)> = kept.iter().map(|r| (r.n as f64, r.mean_subopt)).collect();
    let fit = fit_rate(&pts)?;
    let with_se: Vec<(f64, f64, f64)> = kept.iter().map(|r| (r.n as f64, r.mean_subopt, r.stderr)).collect();
    Ok((Some(FitSummary::new(fit, propagated_slope_stderr(&with_se))), dropped))
}

/// One report at a single `eta`. Each grid point uses the same master seed.
pub fn rate_experiment(
    exec: &Executor,
    schedule: &InstanceSchedule,
    eta: f64,
    grid: &GridSpec,
    objective: Objective,
) -> Result<ExperimentReport, Error> {
    grid.validate()?;
    let mut rows = Vec::with_capacity(grid.n_values.len());
    for &n in &grid.n_values {
        let inst = schedule.at(eta, n)?;
        let est = mc_suboptimality(exec, &inst, grid.algo, grid.delta, n, grid.replications, grid.master_seed, objective)?;
        let coverage = concentrability(&inst);
        let regime_diag = eta * eta * (inst.num_contexts() * inst.num_arms()) as f64 * coverage / n as f64;
        rows.push(ReportRow { eta, n, mean_subopt: est.mean, stderr: est.stderr, reps: est.count, regime_diag });
    }
    let (fit, dropped) = fit_rows(&rows)?;
    Ok(ExperimentReport { eta, rows, fit, dropped })
}

/// One report per `eta`, reward table and reference policy held fixed.
pub fn regime_sweep(
    exec: &Executor,
    schedule: &InstanceSchedule,
    etas: &[f64],
    grid: &GridSpec,
) -> Result<Vec<ExperimentReport>, Error> {
    if etas.is_empty() {
        return Err(Error::BadGrid("no eta values".into()));
    }
    etas.iter().map(|&eta| rate_experiment(exec, schedule, eta, grid, Objective::Regularized)).collect()
}

/// Checks that the rate exponent does not steepen along the sweep: slope
/// `k+1` may fall below slope `k` by at most `tolerance` pooled standard
/// errors. Returns the first offending index pair.
pub fn first_monotonicity_violation(reports: &[ExperimentReport], tolerance: f64) -> Option<(usize, usize)> {
    let fits: Vec<(usize, FitSummary)> = reports.iter().enumerate().filter_map(|(i, r)| r.fit.map(|f| (i, f))).collect();
    fits.windows(2).find_map(|w| {
        let ((i, a), (j, b)) = (w[0], w[1]);
        let pooled = (a.propagated_slope_stderr.powi(2) + b.propagated_slope_stderr.powi(2)).sqrt();
        (b.slope < a.slope - tolerance * pooled).then_some((i, j))
    })
}

pub const REPORT_HEADER: [&str; 6] = ["eta", "n", "mean_subopt", "stderr", "reps", "regime_diag"];

pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).expect("writing to memory cannot fail");
    for r in reports.iter().flat_map(|rep| &rep.rows) {
        w.write_record([
            r.eta.to_string(),
            r.n.to_string(),
            r.mean_subopt.to_string(),
            r.stderr.to_string(),
            r.reps.to_string(),
            r.regime_diag.to_string(),
        ])
        .expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV output is ASCII")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub eta: f64,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub slope_stderr: Option<f64>,
    pub propagated_slope_stderr: Option<f64>,
    pub points_used: usize,
    pub points_dropped: usize,
}

pub fn summarize(reports: &[ExperimentReport]) -> Vec<SweepSummary> {
    reports
        .iter()
        .map(|r| SweepSummary {
            eta: r.eta,
            slope: r.fit.map(|f| f.slope),
            intercept: r.fit.map(|f| f.intercept),
            r_squared: r.fit.map(|f| f.r_squared),
            slope_stderr: r.fit.map(|f| f.slope_stderr),
            propagated_slope_stderr: r.fit.map(|f| f.propagated_slope_stderr),
            points_used: r.fit.map_or(0, |f| f.points),
            points_dropped: r.dropped,
        })
        .collect()
}

/// Parameters of the multi-optima sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VkSweepSpec {
    pub num_arms: usize,
    pub k_values: Vec<usize>,
    pub n_values: Vec<usize>,
    pub replications: usize,
    /// Number of sampled family members; replication `r` uses member `r % members`.
    pub members: usize,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VkRow {
    pub k: usize,
    pub n: usize,
    pub gap: f64,
    pub mean_subopt: f64,
    pub stderr: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VkReport {
    pub rows: Vec<VkRow>,
    /// Per-`K` fit in `n`, same order as `k_values`.
    pub fits: Vec<(usize, Option<FitSummary>)>,
    /// `(n, k_lo, k_hi)` triples where `mean(k_lo) > mean(k_hi) + 2 (se_lo + se_hi)`.
    pub monotonicity_violations: Vec<(usize, usize, usize)>,
}

/// Member draws are keyed by `(master_seed, K)` so the same support
/// patterns are reused along the `n` grid.
fn member_seed(master_seed: u64, k: usize) -> u64 {
    master_seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn vk_sweep(exec: &Executor, spec: &VkSweepSpec) -> Result<VkReport, Error> {
    if spec.k_values.is_empty() {
        return Err(Error::BadGrid("no K values".into()));
    }
    if spec.members == 0 {
        return Err(Error::BadGrid("need at least one family member".into()));
    }
    GridSpec {
        n_values: spec.n_values.clone(),
        replications: spec.replications,
        master_seed: spec.master_seed,
        algo: Algo::EmpiricalBestArm,
        delta: 0.1,
    }
    .validate()?;

    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &k in &spec.k_values {
        let mut k_rows = Vec::new();
        for &n in &spec.n_values {
            let gap = vk_default_delta(spec.num_arms, n)?;
            let mode = Enumeration::Sample { count: spec.members, seed: member_seed(spec.master_seed, k) };
            let members = forge_vk_family(spec.num_arms, k, gap, mode)?;
            let values = exec.map_reps(spec.replications, |r| {
                let inst = &members[r % members.len()];
                replicate(inst, Algo::EmpiricalBestArm, 0.1, n, SeedSpec::new(spec.master_seed, r as u64), Objective::Unregularized)
            })?;
            let est = mean_and_stderr(&values)?;
            k_rows.push(VkRow { k, n, gap, mean_subopt: est.mean, stderr: est.stderr, reps: est.count });
        }
        let as_report: Vec<ReportRow> = k_rows
            .iter()
            .map(|r| ReportRow { eta: 0.0, n: r.n, mean_subopt: r.mean_subopt, stderr: r.stderr, reps: r.reps, regime_diag: 0.0 })
            .collect();
        fits.push((k, fit_rows(&as_report)?.0));
        rows.extend(k_rows);
    }

    let mut monotonicity_violations = Vec::new();
    for &n in &spec.n_values {
        let at_n: Vec<&VkRow> = rows.iter().filter(|r| r.n == n).collect();
        for (i, lo) in at_n.iter().enumerate() {
            for hi in &at_n[i + 1..] {
                if lo.k < hi.k && lo.mean_subopt > hi.mean_subopt + 2.0 * (lo.stderr + hi.stderr) {
                    monotonicity_violations.push((n, lo.k, hi.k));
                }
            }
        }
    }
    Ok(VkReport { rows, fits, monotonicity_violations })
}

pub const VK_HEADER: [&str; 6] = ["k", "n", "gap", "mean_subopt", "stderr", "reps"];

pub fn vk_to_csv(report: &VkReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(VK_HEADER).expect("writing to memory cannot fail");
    for r in &report.rows {
        w.write_record([
            r.k.to_string(),
            r.n.to_string(),
            r.gap.to_string(),
            r.mean_subopt.to_string(),
            r.stderr.to_string(),
            r.reps.to_string(),
        ])
        .expect("writing to memory cannot fail");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("CSV output is ASCII")
}

/// Parses a sign pattern such as `++--/+-+-` (rows separated by `/`).
pub fn parse_signs(pattern: &str) -> Result<Table<f64>, Error> {
    let rows: Vec<Vec<f64>> = pattern
        .split('/')
        .map(|row| {
            row.chars()
                .map(|c| match c {
                    '+' => Ok(1.0),
                    '-' => Ok(-1.0),
                    other => Err(Error::BadFamilySpec(format!("sign pattern may only contain + - /, found `{other}`"))),
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    if rows.iter().any(|r| r.is_empty()) {
        return Err(Error::BadFamilySpec("empty sign row".into()));
    }
    Table::from_rows(&rows)
}
