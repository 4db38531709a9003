use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::codes::{default_inner_count, default_outer_count, gv_inner_code_with, gv_outer_code_with, CodeBook, CodeLimits};
use crate::error::{Error, Result};
use crate::evaluation::concentrability;
use crate::instance::{Instance, InstanceSpec, Noise};
use crate::math;
use crate::table::Table;

/// `eta` stored on unregularized instances. Only the reward table matters there.
pub const VK_ETA: f64 = 1.0;

const BUDGET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Fast,
    Slow,
    Vk,
    AppendixA,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Fast => "fast",
            Family::Slow => "slow",
            Family::Vk => "vk",
            Family::AppendixA => "appendix-a",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s {
            "fast" => Ok(Family::Fast),
            "slow" => Ok(Family::Slow),
            "vk" => Ok(Family::Vk),
            "appendix-a" => Ok(Family::AppendixA),
            other => Err(format!("unknown family `{other}` (fast, slow, vk, appendix-a)")),
        }
    }
}

/// How combinatorial families pick members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enumeration {
    /// Every member, failing if there are more than `cap`.
    All { cap: u128 },
    /// `count` members drawn uniformly with a seeded generator.
    Sample { count: usize, seed: u64 },
}

impl Default for Enumeration {
    fn default() -> Self {
        Enumeration::All { cap: 4096 }
    }
}

/// Parameters shared by every family. Fields a family does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySpec {
    pub family: Family,
    pub num_contexts: usize,
    /// Arm-count parameter: rare arms for `fast` (the instance has one more),
    /// half the non-baseline arms for `slow`, all arms for `vk` and the
    /// high-reward arms for `appendix-a`.
    pub num_arms: usize,
    pub eta: f64,
    /// Coverage budget.
    pub budget: f64,
    /// Target sample size used by the default gap.
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub delta_override: Option<f64>,
    pub enumeration: Enumeration,
    pub limits: CodeLimits,
}

impl FamilySpec {
    pub fn new(family: Family, num_contexts: usize, num_arms: usize, eta: f64, budget: f64) -> Self {
        Self {
            family,
            num_contexts,
            num_arms,
            eta,
            budget,
            n: None,
            k: None,
            delta_override: None,
            enumeration: Enumeration::default(),
            limits: CodeLimits::default(),
        }
    }
}

/// Distances between the sign patterns of two fast-family members.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairDistance {
    pub first: usize,
    pub second: usize,
    pub differing_contexts: usize,
    /// Fewest differing arms over the contexts that differ.
    pub min_differing_arms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForgedFamily {
    pub family: Family,
    pub members: Vec<Instance>,
    /// Reward gap.
    pub delta: f64,
    /// Baseline-arm reward offset, 0 where it does not apply.
    pub alpha: f64,
    pub eta_delta: f64,
    pub inner_code: Option<CodeBook>,
    pub outer_code: Option<CodeBook>,
    pub pair_distances: Vec<PairDistance>,
    /// Concentrability of each member.
    pub concentrability: Vec<f64>,
}

fn ln_arms(num_arms: usize) -> Result<f64> {
    if num_arms < 2 {
        return Err(Error::BadFamilySpec(format!("need at least 2 arms for the gap formula, got {num_arms}")));
    }
    Ok(math::ln(num_arms as f64))
}

fn check_n(n: usize) -> Result<f64> {
    if n == 0 {
        Err(Error::BadSampleSize)
    } else {
        Ok(n as f64)
    }
}

/// `sqrt(S A C / (n ln A)) / 32` with `A` the rare-arm count.
pub fn fast_delta(num_contexts: usize, rare_arms: usize, budget: f64, n: usize) -> Result<f64> {
    let l = ln_arms(rare_arms)?;
    Ok(math::sqrt(num_contexts as f64 * rare_arms as f64 * budget / (check_n(n)? * l)) / 32.0)
}

/// `ln(C - 1) / eta`.
pub fn fast_alpha(budget: f64, eta: f64) -> f64 {
    math::ln(budget - 1.0) / eta
}

/// `sqrt(S C A / (n ln A))`.
pub fn slow_delta(num_contexts: usize, num_arms: usize, budget: f64, n: usize) -> Result<f64> {
    let l = ln_arms(num_arms)?;
    Ok(math::sqrt(num_contexts as f64 * budget * num_arms as f64 / (check_n(n)? * l)))
}

/// `(ln(C - 1) + ln 2) / eta`.
pub fn slow_alpha(budget: f64, eta: f64) -> f64 {
    (math::ln(budget - 1.0) + core::f64::consts::LN_2) / eta
}

/// `sqrt(A / (n ln A))`.
pub fn vk_default_delta(num_arms: usize, n: usize) -> Result<f64> {
    let l = ln_arms(num_arms)?;
    Ok(math::sqrt(num_arms as f64 / (check_n(n)? * l)))
}

fn resolve_delta(spec: &FamilySpec, default: impl FnOnce(usize) -> Result<f64>) -> Result<f64> {
    let delta = match (spec.delta_override, spec.n) {
        (Some(d), _) => d,
        (None, Some(n)) => default(n)?,
        (None, None) => return Err(Error::BadFamilySpec("either n or delta_override is required".into())),
    };
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::BadFamilySpec(format!("reward gap must be positive, got {delta}")));
    }
    Ok(delta)
}

fn check_budget(c: f64, lower: f64, upper: f64) -> Result<()> {
    if c > lower && c <= upper {
        Ok(())
    } else {
        Err(Error::BadC { c, lower, upper })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::BadEta(eta))
    }
}

/// Fast-family member with arbitrary signs: `signs` is `S x A` with entries
/// `+-1`. Arms `0..A` have `pi_ref = 1/(CA)` and reward `1/2 + sign * delta`;
/// the last arm has `pi_ref = 1 - 1/C` and reward `1/2 - ln(C - 1)/alpha_eta`.
///
/// `alpha_eta` sets the baseline offset independently of the instance's
/// `eta`, which lets a fixed reward table be studied across regularization
/// strengths. No coverage budget is enforced here.
pub fn fast_instance(signs: &Table<f64>, eta: f64, alpha_eta: f64, budget: f64, delta: f64, noise: Noise) -> Result<Instance> {
    check_budget(budget, 2.0, f64::INFINITY)?;
    check_eta(alpha_eta)?;
    let (s, a) = signs.shape();
    let alpha = fast_alpha(budget, alpha_eta);
    let ref_policy = Table::from_fn(s, a + 1, |_, j| if j < a { 1.0 / (budget * a as f64) } else { 1.0 - 1.0 / budget });
    let reward = Table::from_fn(s, a + 1, |i, j| if j < a { 0.5 + signs.get(i, j) * delta } else { 0.5 - alpha });
    Instance::new(InstanceSpec::uniform_contexts(eta, ref_policy, reward, noise))
}

pub fn forge_fast_family(spec: &FamilySpec) -> Result<ForgedFamily> {
    let (s, a, eta, c) = (spec.num_contexts, spec.num_arms, spec.eta, spec.budget);
    check_eta(eta)?;
    let eta_floor = 4.0 * core::f64::consts::LN_2;
    if eta <= eta_floor {
        return Err(Error::BadFamilySpec(format!("fast family needs eta > 4 ln 2 = {eta_floor}, got {eta}")));
    }
    if s == 0 {
        return Err(Error::BadFamilySpec("need at least one context".into()));
    }
    check_budget(c, 2.0, math::exp(eta / 4.0))?;
    let delta = resolve_delta(spec, |n| fast_delta(s, a, c, n))?;
    if delta > 0.25 {
        return Err(Error::DeltaTooLarge { delta, limit: 0.25 });
    }

    let inner = gv_inner_code_with(a, a.div_ceil(4), default_inner_count(a), spec.limits)?;
    let outer_count = default_outer_count(inner.len(), s, spec.limits.max_outer_words);
    let outer = gv_outer_code_with(&inner, s, s.div_ceil(2), outer_count, spec.limits)?;

    let sign_tables: Vec<Table<f64>> = outer
        .words()
        .iter()
        .map(|word| {
            let rows: Vec<Vec<f64>> = word.iter().map(|&u| inner.signs(u)).collect();
            Table::from_rows(&rows)
        })
        .collect::<Result<_>>()?;

    let mut members = Vec::with_capacity(sign_tables.len());
    let mut coverage = Vec::with_capacity(sign_tables.len());
    for (m, signs) in sign_tables.iter().enumerate() {
        let inst = fast_instance(signs, eta, eta, c, delta, Noise::Bernoulli)?;
        let value = concentrability(&inst);
        if value > c * (1.0 + BUDGET_SLACK) {
            return Err(Error::CoverageBudgetExceeded { member: m, value, budget: c });
        }
        coverage.push(value);
        members.push(inst);
    }

    let mut pair_distances = Vec::new();
    for i in 0..outer.len() {
        for j in i + 1..outer.len() {
            let (wi, wj) = (&outer.words()[i], &outer.words()[j]);
            let mut differing_contexts = 0;
            let mut min_differing_arms = usize::MAX;
            for (&x, &y) in wi.iter().zip(wj) {
                if x != y {
                    differing_contexts += 1;
                    min_differing_arms = min_differing_arms.min(super::hamming(&inner.words()[x], &inner.words()[y]));
                }
            }
            pair_distances.push(PairDistance { first: i, second: j, differing_contexts, min_differing_arms });
        }
    }

    Ok(ForgedFamily {
        family: Family::Fast,
        members,
        delta,
        alpha: fast_alpha(c, eta),
        eta_delta: eta * delta,
        inner_code: Some(inner),
        outer_code: Some(outer),
        pair_distances,
        concentrability: coverage,
    })
}

/// Slow-family member: `optimal[s]` lists the `A` arms among the first `2A`
/// that get reward `1/2 + delta` in context `s`.
pub fn slow_instance(optimal: &[Vec<usize>], num_arms: usize, eta: f64, budget: f64, delta: f64) -> Result<Instance> {
    check_budget(budget, 0.0, f64::INFINITY)?;
    check_eta(eta)?;
    let s = optimal.len();
    let wide = 2 * num_arms;
    let alpha = slow_alpha(budget, eta);
    let ref_policy = Table::from_fn(s, wide + 1, |_, j| {
        if j < wide {
            1.0 / (wide as f64 * budget)
        } else {
            (budget - 1.0) / budget
        }
    });
    let mut reward = Table::from_fn(s, wide + 1, |_, j| if j < wide { 0.5 } else { 0.5 - alpha });
    for (ctx, arms) in optimal.iter().enumerate() {
        if arms.len() != num_arms {
            return Err(Error::ShapeMismatch(format!("context {ctx} lists {} optimal arms, expected {num_arms}", arms.len())));
        }
        for &arm in arms {
            if arm >= wide {
                return Err(Error::IndexOutOfRange { what: "arm", index: arm, bound: wide });
            }
            reward.set(ctx, arm, 0.5 + delta);
        }
    }
    Instance::new(InstanceSpec::uniform_contexts(eta, ref_policy, reward, Noise::Gaussian { sigma: 1.0 }))
}

fn binomial(m: usize, k: usize) -> u128 {
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((m - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// All `k`-subsets of `0..m` in lexicographic order.
fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < m - k + i {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn sampled_subset(rng: &mut ChaCha20Rng, m: usize, k: usize) -> Vec<usize> {
    let mut v = index::sample(rng, m, k).into_vec();
    v.sort_unstable();
    v
}

/// Per-context support patterns: the full product in mixed-radix order
/// (context 0 most significant) or seeded uniform draws.
fn support_patterns(contexts: usize, m: usize, k: usize, mode: Enumeration, what: &'static str) -> Result<Vec<Vec<Vec<usize>>>> {
    match mode {
        Enumeration::All { cap } => {
            let per = binomial(m, k);
            let mut total: u128 = 1;
            for _ in 0..contexts {
                total = total.saturating_mul(per);
            }
            if total > cap {
                return Err(Error::BudgetExceeded { what, requested: total, cap });
            }
            let subsets = combinations(m, k);
            let mut digits = vec![0usize; contexts];
            let mut out = Vec::with_capacity(total as usize);
            loop {
                out.push(digits.iter().map(|&d| subsets[d].clone()).collect());
                let mut pos = contexts;
                loop {
                    if pos == 0 {
                        return Ok(out);
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    if digits[pos] < subsets.len() {
                        break;
                    }
                    digits[pos] = 0;
                }
            }
        }
        Enumeration::Sample { count, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Ok((0..count).map(|_| (0..contexts).map(|_| sampled_subset(&mut rng, m, k)).collect()).collect())
        }
    }
}

pub fn forge_slow_family(spec: &FamilySpec) -> Result<ForgedFamily> {
    let (s, a, eta, c) = (spec.num_contexts, spec.num_arms, spec.eta, spec.budget);
    check_eta(eta)?;
    if s == 0 {
        return Err(Error::BadFamilySpec("need at least one context".into()));
    }
    let l = ln_arms(a)?;
    if eta < 10.0 * l {
        return Err(Error::BadFamilySpec(format!("slow family needs eta >= 10 ln A = {}, got {eta}", 10.0 * l)));
    }
    check_budget(c, 4.0, math::exp(eta / 2.0))?;
    let delta = resolve_delta(spec, |n| slow_delta(s, a, c, n))?;
    if delta > 0.5 {
        return Err(Error::DeltaTooLarge { delta, limit: 0.5 });
    }

    let patterns = support_patterns(s, 2 * a, a, spec.enumeration, "slow family enumeration")?;
    let mut members = Vec::with_capacity(patterns.len());
    let mut coverage = Vec::with_capacity(patterns.len());
    for (m, pattern) in patterns.iter().enumerate() {
        let inst = slow_instance(pattern, a, eta, c, delta)?;
        let value = concentrability(&inst);
        if value > 2.0 * c * (1.0 + BUDGET_SLACK) {
            return Err(Error::CoverageBudgetExceeded { member: m, value, budget: 2.0 * c });
        }
        coverage.push(value);
        members.push(inst);
    }
    Ok(ForgedFamily {
        family: Family::Slow,
        members,
        delta,
        alpha: slow_alpha(c, eta),
        eta_delta: eta * delta,
        inner_code: None,
        outer_code: None,
        pair_distances: Vec::new(),
        concentrability: coverage,
    })
}

/// Single-context instance with reward `-delta` on `negative` arms and
/// `+delta` elsewhere, uniform `pi_ref` and unit Gaussian noise.
pub fn vk_instance(num_arms: usize, negative: &[usize], delta: f64) -> Result<Instance> {
    let mut reward = Table::filled(1, num_arms, delta);
    for &arm in negative {
        if arm >= num_arms {
            return Err(Error::IndexOutOfRange { what: "arm", index: arm, bound: num_arms });
        }
        reward.set(0, arm, -delta);
    }
    Instance::new(InstanceSpec::uniform_contexts(
        VK_ETA,
        Table::filled(1, num_arms, 1.0 / num_arms as f64),
        reward,
        Noise::Gaussian { sigma: 1.0 },
    ))
}

pub fn forge_vk_family(num_arms: usize, k: usize, delta: f64, mode: Enumeration) -> Result<Vec<Instance>> {
    if k < 1 || k + 1 > num_arms {
        return Err(Error::BadK { k, max: num_arms.saturating_sub(1) });
    }
    if !(delta > 0.0) {
        return Err(Error::BadFamilySpec(format!("reward gap must be positive, got {delta}")));
    }
    if delta > 0.5 {
        return Err(Error::DeltaTooLarge { delta, limit: 0.5 });
    }
    support_patterns(1, num_arms, k, mode, "vk family enumeration")?
        .iter()
        .map(|p| vk_instance(num_arms, &p[0], delta))
        .collect()
}

/// Coverage example: `A` arms with reward 1 and `pi_ref = 1/(AC)`, one arm
/// with reward `1 - ln(C - 1)/eta` and `pi_ref = (C - 1)/C`.
pub fn forge_appendix_a(num_contexts: usize, num_arms: usize, eta: f64, budget: f64) -> Result<Instance> {
    check_eta(eta)?;
    check_budget(budget, 2.0, math::exp(eta))?;
    if num_contexts == 0 || num_arms == 0 {
        return Err(Error::BadFamilySpec(format!("need S, A >= 1, got S={num_contexts}, A={num_arms}")));
    }
    let a = num_arms;
    let alpha = fast_alpha(budget, eta);
    let ref_policy = Table::from_fn(num_contexts, a + 1, |_, j| {
        if j < a {
            1.0 / (a as f64 * budget)
        } else {
            (budget - 1.0) / budget
        }
    });
    let reward = Table::from_fn(num_contexts, a + 1, |_, j| if j < a { 1.0 } else { 1.0 - alpha });
    Instance::new(InstanceSpec::uniform_contexts(eta, ref_policy, reward, Noise::default()))
}

/// Dispatches on `spec.family`.
pub fn forge(spec: &FamilySpec) -> Result<ForgedFamily> {
    match spec.family {
        Family::Fast => forge_fast_family(spec),
        Family::Slow => forge_slow_family(spec),
        Family::Vk => {
            let k = spec.k.ok_or_else(|| Error::BadFamilySpec("vk family needs K".into()))?;
            let delta = resolve_delta(spec, |n| vk_default_delta(spec.num_arms, n))?;
            let members = forge_vk_family(spec.num_arms, k, delta, spec.enumeration)?;
            let coverage = members.iter().map(concentrability).collect();
            Ok(ForgedFamily {
                family: Family::Vk,
                members,
                delta,
                alpha: 0.0,
                eta_delta: VK_ETA * delta,
                inner_code: None,
                outer_code: None,
                pair_distances: Vec::new(),
                concentrability: coverage,
            })
        }
        Family::AppendixA => {
            let inst = forge_appendix_a(spec.num_contexts, spec.num_arms, spec.eta, spec.budget)?;
            let coverage = vec![concentrability(&inst)];
            Ok(ForgedFamily {
                family: Family::AppendixA,
                members: vec![inst],
                delta: 0.0,
                alpha: fast_alpha(spec.budget, spec.eta),
                eta_delta: 0.0,
                inner_code: None,
                outer_code: None,
                pair_distances: Vec::new(),
                concentrability: coverage,
            })
        }
    }
}
