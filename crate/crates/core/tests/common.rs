#![allow(dead_code)]

use klbandit_core::{Instance, InstanceSpec, Noise, Policy, Table};
use proptest::prelude::*;

fn normalize(w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

pub fn stochastic_rows(s: usize, a: usize, floor: f64) -> impl Strategy<Value = Table<f64>> {
    prop::collection::vec(prop::collection::vec(floor..1.0f64, a), s).prop_map(|rows| {
        let rows: Vec<Vec<f64>> = rows.into_iter().map(normalize).collect();
        Table::from_rows(&rows).unwrap()
    })
}

/// Random valid instance with `S <= max_s`, `2 <= A <= max_a`, eta in `eta_range`.
pub fn instance(max_s: usize, max_a: usize, eta_lo: f64, eta_hi: f64) -> impl Strategy<Value = Instance> {
    (1..=max_s, 2..=max_a).prop_flat_map(move |(s, a)| {
        (
            stochastic_rows(s, a, 0.02),
            prop::collection::vec(prop::collection::vec(-1.0..=1.0f64, a), s),
            prop::collection::vec(0.05..1.0f64, s),
            eta_lo..eta_hi,
        )
            .prop_map(move |(reference, reward, rho, eta)| {
                Instance::new(InstanceSpec {
                    num_contexts: s,
                    num_arms: a,
                    eta,
                    rho: normalize(rho),
                    ref_policy: reference,
                    reward: Table::from_rows(&reward).unwrap(),
                    noise: Noise::default(),
                })
                .unwrap()
            })
    })
}

pub fn instance_and_policy(max_s: usize, max_a: usize, eta_lo: f64, eta_hi: f64) -> impl Strategy<Value = (Instance, Policy)> {
    instance(max_s, max_a, eta_lo, eta_hi).prop_flat_map(|inst| {
        let (s, a) = (inst.num_contexts(), inst.num_arms());
        (Just(inst), stochastic_rows(s, a, 0.0).prop_map(|t| Policy::new(t).unwrap()))
    })
}

/// Plain `pi_ref * exp(eta r)` normalization, without the log-space shift.
pub fn naive_optimal(inst: &Instance) -> Vec<Vec<f64>> {
    (0..inst.num_contexts())
        .map(|s| {
            let w: Vec<f64> = (0..inst.num_arms())
                .map(|a| inst.ref_policy().get(s, a) * (inst.eta() * inst.reward().get(s, a)).exp())
                .collect();
            normalize(w)
        })
        .collect()
}
