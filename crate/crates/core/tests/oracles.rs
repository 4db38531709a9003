//! Frozen values and brute-force cross-checks computed independently of the
//! library code paths.

mod common;

use klbandit_core::evaluation::{
    concentrability, d2_concentrability, objective, optimal_policy, suboptimality, suboptimality_via_kl,
    unregularized_suboptimality,
};
use klbandit_core::forge::{
    forge_appendix_a, forge_vk_family, gv_inner_code, gv_outer_code, hamming, vk_instance, Enumeration,
};
use klbandit_core::sampling::{sample_dataset, tally_counts};
use klbandit_core::solvers::check_event_e2;
use klbandit_core::{Instance, InstanceSpec, Noise, Policy, SeedSpec, Table};

/// Greedy binary code on integer bitmasks, most significant bit first.
fn bitmask_greedy(len: u32, target: u32, min_count: usize) -> Vec<u32> {
    let mut kept: Vec<u32> = Vec::new();
    for w in 0..(1u32 << len) {
        if kept.len() >= min_count {
            break;
        }
        if kept.iter().all(|k| (k ^ w).count_ones() >= target) {
            kept.push(w);
        }
    }
    kept
}

fn bits_to_symbols(w: u32, len: u32) -> Vec<usize> {
    (0..len).map(|i| ((w >> (len - 1 - i)) & 1) as usize).collect()
}

#[test]
fn inner_code_matches_bitmask_greedy() {
    for len in 1..=12u32 {
        for target in 1..=len {
            let want = bitmask_greedy(len, target, usize::MAX);
            let book = gv_inner_code(len as usize, target as usize, want.len()).unwrap();
            let got: Vec<Vec<usize>> = want.iter().map(|&w| bits_to_symbols(w, len)).collect();
            assert_eq!(book.words(), got.as_slice(), "len {len}, target {target}");
        }
    }
}

#[test]
fn inner_code_a8_example() {
    let book = gv_inner_code(8, 2, 3).unwrap();
    assert!(book.len() >= 3);
    for i in 0..book.len() {
        for j in i + 1..book.len() {
            assert!(hamming(&book.words()[i], &book.words()[j]) >= 2);
        }
    }
}

#[test]
fn outer_code_s4_example() {
    let inner = gv_inner_code(4, 1, 3).unwrap();
    let book = gv_outer_code(&inner, 4, 2, 3).unwrap();
    assert!(book.len() >= 3);
    // Brute force over all 81 candidates in mixed-radix order.
    let mut kept: Vec<[usize; 4]> = Vec::new();
    for idx in 0..81usize {
        let w = [idx / 27 % 3, idx / 9 % 3, idx / 3 % 3, idx % 3];
        if kept.len() < 3 && kept.iter().all(|k| k.iter().zip(&w).filter(|(a, b)| a != b).count() >= 2) {
            kept.push(w);
        }
    }
    let expected: Vec<Vec<usize>> = kept.iter().map(|w| w.to_vec()).collect();
    assert_eq!(book.words(), expected.as_slice());
}

#[test]
fn appendix_a_closed_forms() {
    for s in 1..=3 {
        for a in 3..=6 {
            for &(eta, c) in &[(2.0, 4.0), (3.0, 10.0), (6.0, 400.0)] {
                let inst = forge_appendix_a(s, a, eta, c).unwrap();
                let star = optimal_policy(&inst);
                for ctx in 0..s {
                    for arm in 0..a {
                        assert!((star.row(ctx)[arm] - 1.0 / (2.0 * a as f64)).abs() < 1e-12);
                    }
                    assert!((star.row(ctx)[a] - 0.5).abs() < 1e-12);
                }
                assert!((concentrability(&inst) - c / 2.0).abs() < 1e-12);
                let exact = s as f64 * (a as f64 * c / 2.0 + c / (2.0 * (c - 1.0)));
                assert!((d2_concentrability(&inst) - exact).abs() < 1e-9 * exact);
                assert!(d2_concentrability(&inst) >= s as f64 * a as f64 * c / 2.0);
            }
        }
    }
}

#[test]
fn objective_two_routes_on_appendix_a() {
    let inst = forge_appendix_a(1, 3, 2.0, 4.0).unwrap();
    let star = optimal_policy(&inst);
    let reference = Policy::new(inst.ref_policy().clone()).unwrap();
    // J(pi*) = J(pi_ref) + eta^-1 KL(pi_ref || pi*), both sides from first principles.
    let j_ref: f64 = (0..4).map(|a| inst.ref_policy().get(0, a) * inst.reward().get(0, a)).sum();
    let kl: f64 = (0..4)
        .map(|a| {
            let p = inst.ref_policy().get(0, a);
            p * (p / star.row(0)[a]).ln()
        })
        .sum();
    assert!((objective(&inst, &star).unwrap() - (j_ref + kl / 2.0)).abs() < 1e-12);
    assert!((suboptimality(&inst, &reference).unwrap() - kl / 2.0).abs() < 1e-9);
    assert!((suboptimality_via_kl(&inst, &reference).unwrap() - kl / 2.0).abs() < 1e-12);
    assert!(suboptimality(&inst, &star).unwrap().abs() < 1e-12);
}

#[test]
fn vk_gaps() {
    let inst = vk_instance(5, &[1, 3], 0.2).unwrap();
    assert!((unregularized_suboptimality(&inst, &Policy::one_hot(1, 5, 3)).unwrap() - 0.4).abs() < 1e-15);
    // Uniform play: 2 delta K / A.
    assert!((unregularized_suboptimality(&inst, &Policy::uniform(1, 5)).unwrap() - 2.0 * 0.2 * 2.0 / 5.0).abs() < 1e-15);
    assert_eq!(forge_vk_family(3, 1, 0.1, Enumeration::All { cap: 10 }).unwrap().len(), 3);
}

#[test]
fn arm_frequency_matches_reference() {
    let inst = Instance::new(InstanceSpec::uniform_contexts(
        1.0,
        Table::from_rows(&[[0.9, 0.1]]).unwrap(),
        Table::filled(1, 2, 0.0),
        Noise::default(),
    ))
    .unwrap();
    let ds = sample_dataset(&inst, 100_000, SeedSpec::new(11, 0)).unwrap();
    let freq = ds.records().iter().filter(|r| r.arm == 0).count() as f64 / 1e5;
    assert!((freq - 0.9).abs() < 0.01, "{freq}");
}

#[test]
fn context_marginal_chi_square() {
    let rho = vec![0.1, 0.2, 0.3, 0.4];
    let inst = Instance::new(InstanceSpec {
        num_contexts: 4,
        num_arms: 2,
        eta: 1.0,
        rho: rho.clone(),
        ref_policy: Table::filled(4, 2, 0.5),
        reward: Table::filled(4, 2, 0.0),
        noise: Noise::default(),
    })
    .unwrap();
    let n = 100_000;
    let ds = sample_dataset(&inst, n, SeedSpec::new(2024, 5)).unwrap();
    let (counts, _) = tally_counts(&ds, 4, 2).unwrap();
    let chi2: f64 = (0..4)
        .map(|s| {
            let observed = (counts.get(s, 0) + counts.get(s, 1)) as f64;
            let expected = rho[s] * n as f64;
            (observed - expected).powi(2) / expected
        })
        .sum();
    // Upper 1e-4 quantile of chi-square with 3 degrees of freedom.
    assert!(chi2 < 21.108, "chi2 = {chi2}");
}

#[test]
fn event_e2_holds_on_expected_counts() {
    let rho = [0.3, 0.7];
    let reference = Table::from_rows(&[[0.25, 0.25, 0.5], [0.6, 0.3, 0.1]]).unwrap();
    let n = 777;
    let counts = Table::from_fn(2, 3, |s, a| (n as f64 * rho[s] * reference.get(s, a)).ceil() as u64);
    assert!(check_event_e2(&counts, &rho, &reference, n, 0.2).unwrap());
}
