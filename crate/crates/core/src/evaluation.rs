//! Exact evaluation by summation over the `S x A` table.

use alloc::format;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::math;
use crate::policy::Policy;

/// Which objective a suboptimality refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Objective {
    /// KL-regularized value.
    #[default]
    Regularized,
    /// Expected reward only.
    Unregularized,
}

impl Objective {
    /// Suboptimality of `pi` under this objective. The regularized branch
    /// uses the KL route, which stays accurate when `pi` is close to `pi*`.
    pub fn suboptimality(self, inst: &Instance, pi: &Policy) -> Result<f64> {
        match self {
            Objective::Regularized => suboptimality_via_kl(inst, pi),
            Objective::Unregularized => unregularized_suboptimality(inst, pi),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::Regularized => "regularized",
            Objective::Unregularized => "unregularized",
        }
    }
}

/// Summary of [`evaluate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub j_value: f64,
    pub subopt_direct: f64,
    pub subopt_via_kl: f64,
    pub c_pistar: f64,
    pub d2_pistar: f64,
}

fn check_shape(inst: &Instance, pi: &Policy) -> Result<()> {
    let expected = (inst.num_contexts(), inst.num_arms());
    let got = pi.probs().shape();
    if got != expected {
        return Err(Error::ShapeMismatch(format!("policy is {got:?}, instance is {expected:?}")));
    }
    Ok(())
}

/// `pi*(.|s) = softmax(ln pi_ref(.|s) + eta r(s,.))`.
pub fn optimal_policy(inst: &Instance) -> Policy {
    Policy::from_softmax(math::tilt(inst.ref_policy(), inst.reward(), inst.eta()))
}

/// `sum_s rho(s) sum_a pi(a|s) [r(s,a) - ln(pi(a|s)/pi_ref(a|s)) / eta]`.
pub fn objective(inst: &Instance, pi: &Policy) -> Result<f64> {
    check_shape(inst, pi)?;
    let inv_eta = 1.0 / inst.eta();
    let mut total = 0.0;
    for (s, &weight) in inst.rho().iter().enumerate() {
        let mut inner = 0.0;
        for (a, &p) in pi.row(s).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let reference = inst.ref_policy().get(s, a);
            if reference == 0.0 {
                return Err(Error::SupportViolation { context: s, arm: a, mass: p });
            }
            inner += p * (inst.reward().get(s, a) - inv_eta * math::ln(p / reference));
        }
        total += weight * inner;
    }
    Ok(total)
}

/// `J(pi*) - J(pi)`.
pub fn suboptimality(inst: &Instance, pi: &Policy) -> Result<f64> {
    Ok(objective(inst, &optimal_policy(inst))? - objective(inst, pi)?)
}

/// `eta^-1 sum_s rho(s) KL(pi(.|s) || pi*(.|s))`.
pub fn suboptimality_via_kl(inst: &Instance, pi: &Policy) -> Result<f64> {
    check_shape(inst, pi)?;
    let star = optimal_policy(inst);
    let mut total = 0.0;
    for (s, &weight) in inst.rho().iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        let kl = math::kl_divergence(pi.row(s), star.row(s));
        if kl.is_infinite() {
            let arm = pi.row(s).iter().zip(star.row(s)).position(|(&p, &q)| p > 0.0 && q == 0.0).unwrap_or(0);
            return Err(Error::SupportViolation { context: s, arm, mass: pi.row(s)[arm] });
        }
        total += weight * kl;
    }
    Ok(total / inst.eta())
}

/// `E_rho[max_a r(s,a)] - E_{rho x pi}[r]`.
pub fn unregularized_suboptimality(inst: &Instance, pi: &Policy) -> Result<f64> {
    check_shape(inst, pi)?;
    let mut total = 0.0;
    for (s, &weight) in inst.rho().iter().enumerate() {
        let rewards = inst.reward().row(s);
        let best = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let achieved: f64 = pi.row(s).iter().zip(rewards).map(|(p, r)| p * r).sum();
        total += weight * (best - achieved);
    }
    Ok(total)
}

/// `max_{s,a} pi*(a|s) / pi_ref(a|s)`.
pub fn concentrability(inst: &Instance) -> f64 {
    let star = optimal_policy(inst);
    let mut best = 0.0f64;
    for s in 0..inst.num_contexts() {
        for (a, &p) in star.row(s).iter().enumerate() {
            best = best.max(p / inst.ref_policy().get(s, a));
        }
    }
    best
}

/// `sum_s rho(s) sum_a pi*(a|s) / (rho(s) pi_ref(a|s))` over contexts with
/// positive mass, which reduces to `sum_{s: rho(s) > 0} sum_a pi*/pi_ref`.
pub fn d2_concentrability(inst: &Instance) -> f64 {
    let star = optimal_policy(inst);
    let mut total = 0.0;
    for (s, &weight) in inst.rho().iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        total += star.row(s).iter().zip(inst.ref_policy().row(s)).map(|(p, r)| p / r).sum::<f64>();
    }
    total
}

pub fn evaluate(inst: &Instance, pi: &Policy) -> Result<EvalReport> {
    let j_value = objective(inst, pi)?;
    let j_star = objective(inst, &optimal_policy(inst))?;
    Ok(EvalReport {
        j_value,
        subopt_direct: j_star - j_value,
        subopt_via_kl: suboptimality_via_kl(inst, pi)?,
        c_pistar: concentrability(inst),
        d2_pistar: d2_concentrability(inst),
    })
}
