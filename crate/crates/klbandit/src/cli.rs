//! Command-line entry point.
//!
//! Every subcommand accepts `--config <file.json>` whose keys mirror the long
//! flag names; flags given on the command line win over the file.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use klbandit_core::evaluation::{evaluate, Objective};
use klbandit_core::forge::{forge, Enumeration, Family, FamilySpec};
use klbandit_core::sampling::sample_dataset;
use klbandit_core::solvers::{kl_pcb, Algo, SolverConfig};
use klbandit_core::{Instance, Noise, SeedSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{AppError, AppResult};
use crate::experiments::{
    parse_signs, rate_experiment, regime_sweep, reports_to_csv, summarize, vk_sweep, vk_to_csv, Executor, GridSpec,
    InstanceSchedule, VkSweepSpec,
};
use crate::formats::{
    dataset_from_csv, dataset_to_csv, diagnostics_to_json, eval_report_to_json, instance_to_json, policy_from_json,
    policy_to_json, read_instance, read_text,
};
use crate::manifest::{emit, sidecar_path, Manifest};

#[derive(Debug, Parser)]
#[command(name = "klbandit", version, about = "Offline KL-regularized contextual bandits: forge, sample, solve, evaluate, experiment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build hard-instance families and write one instance file per member.
    Forge(ForgeArgs),
    /// Draw an offline dataset from an instance.
    Sample(SampleArgs),
    /// Learn a policy from a dataset.
    Solve(SolveArgs),
    /// Exact evaluation of a policy on an instance.
    Eval(EvalArgs),
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Debug, Subcommand)]
enum ExperimentCommand {
    /// Mean suboptimality over a sample-size grid with a log-log fit.
    Rate(RateArgs),
    /// One rate experiment per eta.
    RegimeSweep(RateArgs),
    /// Empirical best-arm selection on the multi-optima family.
    Vk(VkArgs),
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForgeArgs {
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "S")]
    #[serde(rename = "S")]
    num_contexts: Option<usize>,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    num_arms: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "C")]
    #[serde(rename = "C")]
    budget: Option<f64>,
    /// Target sample size for the default gap.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "K")]
    #[serde(rename = "K")]
    k: Option<usize>,
    #[arg(long = "delta-override")]
    #[serde(rename = "delta-override")]
    delta_override: Option<f64>,
    /// Largest family to enumerate in full (slow, vk).
    #[arg(long = "enumerate-cap")]
    #[serde(rename = "enumerate-cap")]
    enumerate_cap: Option<u64>,
    /// Draw this many members instead of enumerating (slow, vk); needs --seed.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "out-dir")]
    #[serde(rename = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveArgs {
    /// klpcb, klpcb-nopess, erm or reference.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "out-policy")]
    #[serde(rename = "out-policy")]
    out_policy: Option<PathBuf>,
    #[arg(long = "out-diag")]
    #[serde(rename = "out-diag")]
    out_diag: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Also write the report here (a manifest is written next to it).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateArgs {
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Fast-style sign pattern such as `++++--/++--++`, used instead of --instance.
    #[arg(long = "fast-signs")]
    #[serde(rename = "fast-signs")]
    fast_signs: Option<String>,
    #[arg(long = "C")]
    #[serde(rename = "C")]
    budget: Option<f64>,
    /// Regularization used for the heavy-arm offset of a fast-style instance.
    #[arg(long = "alpha-eta")]
    #[serde(rename = "alpha-eta")]
    alpha_eta: Option<f64>,
    /// Fixed reward gap for a fast-style instance; omitted means the gap shrinks with n.
    #[arg(long)]
    gap: Option<f64>,
    /// bernoulli (default for fast-style) or gaussian.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Single eta for `rate`; defaults to the instance's.
    #[arg(long)]
    eta: Option<f64>,
    /// Sweep values for `regime-sweep`.
    #[arg(long, value_delimiter = ',')]
    etas: Option<Vec<f64>>,
    /// regularized (default) or unregularized.
    #[arg(long)]
    objective: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON path; defaults to `<out>.summary.json`.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VkArgs {
    #[arg(long = "A")]
    #[serde(rename = "A")]
    num_arms: Option<usize>,
    #[arg(long = "K", value_delimiter = ',')]
    #[serde(rename = "K")]
    k: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    /// Sampled family members per K.
    #[arg(long)]
    members: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            if let AppError::Usage(_) = e {
                eprintln!("Run `klbandit --help` for usage.");
            }
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> AppResult<()> {
    match command {
        Command::Forge(a) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_forge(a, cfg)
        }
        Command::Sample(a) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_sample(a, cfg)
        }
        Command::Solve(a) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_solve(a, cfg)
        }
        Command::Eval(a) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_eval(a, cfg)
        }
        Command::Experiment(ExperimentCommand::Rate(a)) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_rate(a, cfg, false)
        }
        Command::Experiment(ExperimentCommand::RegimeSweep(a)) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_rate(a, cfg, true)
        }
        Command::Experiment(ExperimentCommand::Vk(a)) => {
            let (a, cfg) = resolve(&a, a.config.as_deref())?;
            cmd_vk(a, cfg)
        }
    }
}

/// Overlays the flags given on the command line onto the config file.
fn resolve<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Path>) -> AppResult<(T, Value)> {
    let mut merged = match config {
        Some(path) => match serde_json::from_str::<Value>(&read_text(path)?) {
            Ok(Value::Object(map)) => map,
            Ok(_) => return Err(AppError::Usage(format!("{}: config must be a JSON object", path.display()))),
            Err(e) => return Err(AppError::parse("config", e.line(), e.column(), e)),
        },
        None => Map::new(),
    };
    if let Value::Object(given) = serde_json::to_value(flags).expect("flag structs serialize") {
        for (k, v) in given {
            if !v.is_null() {
                merged.insert(k, v);
            }
        }
    }
    let merged = Value::Object(merged);
    let args = serde_json::from_value(merged.clone()).map_err(|e| AppError::Usage(format!("config: {e}")))?;
    Ok((args, merged))
}

/// The worker count never changes results, so it stays out of the manifest.
fn without_workers(mut cfg: Value) -> Value {
    if let Value::Object(map) = &mut cfg {
        map.remove("workers");
    }
    cfg
}

fn req<T: Clone>(value: &Option<T>, flag: &str) -> AppResult<T> {
    value.clone().ok_or_else(|| AppError::Usage(format!("missing required --{flag}")))
}

fn parse_algo(name: &str) -> AppResult<Algo> {
    name.parse().map_err(AppError::Usage)
}

fn cmd_forge(a: ForgeArgs, cfg: Value) -> AppResult<()> {
    let family: Family = req(&a.family, "family")?.parse().map_err(AppError::Usage)?;
    let out_dir = req(&a.out_dir, "out-dir")?;
    let num_arms = req(&a.num_arms, "A")?;
    let eta = match family {
        Family::Vk => a.eta.unwrap_or(klbandit_core::forge::VK_ETA),
        _ => req(&a.eta, "eta")?,
    };
    let budget = match family {
        Family::Vk => a.budget.unwrap_or(1.0),
        _ => req(&a.budget, "C")?,
    };
    let mut spec = FamilySpec::new(family, a.num_contexts.unwrap_or(1), num_arms, eta, budget);
    spec.n = a.n;
    spec.k = a.k;
    spec.delta_override = a.delta_override;
    spec.enumeration = match (a.sample, a.enumerate_cap) {
        (Some(count), _) => Enumeration::Sample { count, seed: req(&a.seed, "seed")? },
        (None, Some(cap)) => Enumeration::All { cap: cap as u128 },
        (None, None) => Enumeration::default(),
    };

    let fam = forge(&spec)?;
    let mut manifest = Manifest::new("forge", a.seed, cfg);
    let width = fam.members.len().saturating_sub(1).to_string().len().max(3);
    for (i, member) in fam.members.iter().enumerate() {
        let path = out_dir.join(format!("member_{i:0width$}.json"));
        emit(&mut manifest, &path, &instance_to_json(member))?;
    }
    let code_summary = |book: &Option<klbandit_core::forge::CodeBook>| {
        book.as_ref().map(|b| {
            json!({
                "alphabet_size": b.alphabet_size(),
                "length": b.length(),
                "words": b.len(),
                "target_distance": b.min_distance(),
                "achieved_min_distance": b.achieved_min_distance(),
            })
        })
    };
    manifest.details = json!({
        "family": family.name(),
        "members": fam.members.len(),
        "delta": fam.delta,
        "alpha": fam.alpha,
        "eta_delta": fam.eta_delta,
        "concentrability": fam.concentrability,
        "inner_code": code_summary(&fam.inner_code),
        "outer_code": code_summary(&fam.outer_code),
        "pair_distances": fam.pair_distances.iter().map(|p| json!({
            "first": p.first,
            "second": p.second,
            "differing_contexts": p.differing_contexts,
            "min_differing_arms": p.min_differing_arms,
        })).collect::<Vec<_>>(),
    });
    manifest.write(&out_dir.join("manifest.json"))
}

fn cmd_sample(a: SampleArgs, cfg: Value) -> AppResult<()> {
    let inst = read_instance(&req(&a.instance, "instance")?)?;
    let n = req(&a.n, "n")?;
    let seed = req(&a.seed, "seed")?;
    let out = req(&a.out, "out")?;
    let ds = sample_dataset(&inst, n, SeedSpec::new(seed, a.stream.unwrap_or(0)))?;
    let mut manifest = Manifest::new("sample", Some(seed), cfg);
    emit(&mut manifest, &out, &dataset_to_csv(&ds))?;
    manifest.write(&sidecar_path(&out))
}

fn cmd_solve(a: SolveArgs, cfg: Value) -> AppResult<()> {
    let algo = parse_algo(&req(&a.algo, "algo")?)?;
    let inst = read_instance(&req(&a.instance, "instance")?)?;
    let ds = dataset_from_csv(&read_text(&req(&a.dataset, "dataset")?)?)?;
    ds.check_indices(inst.num_contexts(), inst.num_arms())?;
    let out_policy = req(&a.out_policy, "out-policy")?;
    let delta = a.delta.unwrap_or(klbandit_core::solvers::DEFAULT_DELTA);
    let mut manifest = Manifest::new("solve", None, cfg);
    match algo {
        Algo::KlPcb | Algo::KlPcbNoPessimism => {
            let solver_cfg = SolverConfig::new(delta, algo == Algo::KlPcb)?;
            let (pi, diag) = kl_pcb(&ds, inst.meta(), solver_cfg)?;
            emit(&mut manifest, &out_policy, &policy_to_json(&pi))?;
            if let Some(path) = &a.out_diag {
                emit(&mut manifest, path, &diagnostics_to_json(&diag, delta, solver_cfg.pessimism))?;
            }
        }
        _ => {
            if a.out_diag.is_some() {
                return Err(AppError::Usage(format!("--out-diag is only produced by klpcb and klpcb-nopess, not {algo}")));
            }
            let pi = algo.solve(&ds, inst.meta(), delta)?;
            emit(&mut manifest, &out_policy, &policy_to_json(&pi))?;
        }
    }
    manifest.write(&sidecar_path(&out_policy))
}

fn cmd_eval(a: EvalArgs, cfg: Value) -> AppResult<()> {
    let inst = read_instance(&req(&a.instance, "instance")?)?;
    let pi = policy_from_json(&read_text(&req(&a.policy, "policy")?)?)?;
    let text = eval_report_to_json(evaluate(&inst, &pi)?);
    print!("{text}");
    if let Some(out) = &a.out {
        let mut manifest = Manifest::new("eval", None, cfg);
        emit(&mut manifest, out, &text)?;
        manifest.write(&sidecar_path(out))?;
    }
    Ok(())
}

fn parse_noise(name: &str) -> AppResult<Noise> {
    match name {
        "bernoulli" => Ok(Noise::Bernoulli),
        "gaussian" => Ok(Noise::Gaussian { sigma: 1.0 }),
        other => Err(AppError::Usage(format!("unknown noise `{other}` (bernoulli, gaussian)"))),
    }
}

fn schedule_from(a: &RateArgs) -> AppResult<InstanceSchedule> {
    match (&a.instance, &a.fast_signs) {
        (Some(path), None) => {
            if a.gap.is_some() || a.alpha_eta.is_some() || a.budget.is_some() {
                return Err(AppError::Usage("--gap, --alpha-eta and --C apply to --fast-signs only".into()));
            }
            Ok(InstanceSchedule::Fixed(read_instance(path)?))
        }
        (None, Some(pattern)) => {
            let signs = parse_signs(pattern)?;
            let budget = req(&a.budget, "C")?;
            let alpha_eta = req(&a.alpha_eta, "alpha-eta")?;
            let noise = parse_noise(a.noise.as_deref().unwrap_or("bernoulli"))?;
            match a.gap {
                Some(gap) => {
                    let inst: Instance = klbandit_core::forge::fast_instance(&signs, alpha_eta, alpha_eta, budget, gap, noise)?;
                    Ok(InstanceSchedule::Fixed(inst))
                }
                None => Ok(InstanceSchedule::FastCoupled { signs, alpha_eta, budget, noise }),
            }
        }
        _ => Err(AppError::Usage("give exactly one of --instance or --fast-signs".into())),
    }
}

fn summary_path(out: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".summary.json");
        s.into()
    })
}

fn pretty(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

fn cmd_rate(a: RateArgs, cfg: Value, sweep: bool) -> AppResult<()> {
    let schedule = schedule_from(&a)?;
    let grid = GridSpec {
        n_values: req(&a.n, "n")?,
        replications: req(&a.reps, "reps")?,
        master_seed: req(&a.seed, "seed")?,
        algo: parse_algo(a.algo.as_deref().unwrap_or("klpcb"))?,
        delta: a.delta.unwrap_or(klbandit_core::solvers::DEFAULT_DELTA),
    };
    let out = req(&a.out, "out")?;
    let exec = Executor::new(a.workers.unwrap_or(0))?;
    let reports = if sweep {
        regime_sweep(&exec, &schedule, &req(&a.etas, "etas")?, &grid)?
    } else {
        let objective = match a.objective.as_deref().unwrap_or("regularized") {
            "regularized" => Objective::Regularized,
            "unregularized" => Objective::Unregularized,
            other => return Err(AppError::Usage(format!("unknown objective `{other}` (regularized, unregularized)"))),
        };
        let eta = match (a.eta, schedule.base_eta()) {
            (Some(eta), _) | (None, Some(eta)) => eta,
            (None, None) => return Err(AppError::Usage("missing required --eta".into())),
        };
        vec![rate_experiment(&exec, &schedule, eta, &grid, objective)?]
    };
    let summary = pretty(&summarize(&reports));
    let mut manifest = Manifest::new(if sweep { "experiment regime-sweep" } else { "experiment rate" }, Some(grid.master_seed), without_workers(cfg));
    emit(&mut manifest, &out, &reports_to_csv(&reports))?;
    emit(&mut manifest, &summary_path(&out, &a.summary), &summary)?;
    manifest.write(&sidecar_path(&out))?;
    print!("{summary}");
    Ok(())
}

fn cmd_vk(a: VkArgs, cfg: Value) -> AppResult<()> {
    let spec = VkSweepSpec {
        num_arms: req(&a.num_arms, "A")?,
        k_values: req(&a.k, "K")?,
        n_values: req(&a.n, "n")?,
        replications: req(&a.reps, "reps")?,
        members: a.members.unwrap_or(50),
        master_seed: req(&a.seed, "seed")?,
    };
    let out = req(&a.out, "out")?;
    let exec = Executor::new(a.workers.unwrap_or(0))?;
    let report = vk_sweep(&exec, &spec)?;
    let summary = pretty(&json!({
        "fits": report.fits.iter().map(|(k, fit)| json!({
            "K": k,
            "slope": fit.map(|f| f.slope),
            "intercept": fit.map(|f| f.intercept),
            "r_squared": fit.map(|f| f.r_squared),
            "propagated_slope_stderr": fit.map(|f| f.propagated_slope_stderr),
        })).collect::<Vec<_>>(),
        "monotonicity_violations": report.monotonicity_violations,
    }));
    let mut manifest = Manifest::new("experiment vk", Some(spec.master_seed), without_workers(cfg));
    emit(&mut manifest, &out, &vk_to_csv(&report))?;
    emit(&mut manifest, &summary_path(&out, &a.summary), &summary)?;
    manifest.write(&sidecar_path(&out))?;
    print!("{summary}");
    Ok(())
}
