use klbandit::experiments::{
    coupled_gap, mc_suboptimality, parse_signs, rate_experiment, regime_sweep, reports_to_csv, vk_sweep, Executor, GridSpec,
    InstanceSchedule, VkSweepSpec,
};
use klbandit_core::evaluation::Objective;
use klbandit_core::forge::fast_instance;
use klbandit_core::{Algo, Instance, InstanceSpec, Noise, Policy, Table};
use proptest::prelude::*;

fn small_instance(eta: f64, noise: Noise) -> Instance {
    Instance::new(InstanceSpec::uniform_contexts(
        eta,
        Table::from_rows(&[[0.5, 0.3, 0.2], [0.2, 0.2, 0.6]]).unwrap(),
        Table::from_rows(&[[0.9, 0.1, 0.4], [0.0, 0.7, 0.3]]).unwrap(),
        noise,
    ))
    .unwrap()
}

fn grid(algo: Algo, reps: usize, seed: u64) -> GridSpec {
    GridSpec { n_values: vec![100, 200, 400, 800], replications: reps, master_seed: seed, algo, delta: 0.1 }
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let schedule = InstanceSchedule::Fixed(small_instance(2.0, Noise::Gaussian { sigma: 1.0 }));
    let spec = grid(Algo::KlPcb, 64, 11);
    let csvs: Vec<String> = [1, 2, 5]
        .into_iter()
        .map(|w| {
            let exec = Executor::new(w).unwrap();
            reports_to_csv(&regime_sweep(&exec, &schedule, &[0.5, 4.0], &spec).unwrap())
        })
        .collect();
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);
}

#[test]
fn stderr_shrinks_with_replications() {
    let exec = Executor::new(0).unwrap();
    let inst = small_instance(2.0, Noise::Gaussian { sigma: 1.0 });
    let few = mc_suboptimality(&exec, &inst, Algo::KlPcb, 0.1, 200, 400, 1, Objective::Regularized).unwrap();
    let many = mc_suboptimality(&exec, &inst, Algo::KlPcb, 0.1, 200, 1600, 2, Objective::Regularized).unwrap();
    let ratio = few.stderr / many.stderr;
    assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn zero_noise_single_cell_replications_agree() {
    let exec = Executor::new(0).unwrap();
    let inst = Instance::new(InstanceSpec::uniform_contexts(
        1.0,
        Table::from_rows(&[[1.0]]).unwrap(),
        Table::from_rows(&[[0.3]]).unwrap(),
        Noise::Gaussian { sigma: 0.0 },
    ))
    .unwrap();
    let est = mc_suboptimality(&exec, &inst, Algo::KlPcb, 0.1, 50, 32, 4, Objective::Regularized).unwrap();
    assert_eq!(est.stderr, 0.0);
    assert_eq!(est.mean, 0.0);
}

#[test]
fn reference_solver_has_exact_mean_and_no_spread() {
    let exec = Executor::new(0).unwrap();
    let inst = small_instance(3.0, Noise::Bernoulli);
    let expected = klbandit_core::evaluation::suboptimality(&inst, &Policy::new(inst.ref_policy().clone()).unwrap()).unwrap();
    let est = mc_suboptimality(&exec, &inst, Algo::Reference, 0.1, 100, 20, 5, Objective::Regularized).unwrap();
    assert_eq!(est.stderr, 0.0);
    assert!((est.mean - expected).abs() <= 1e-12);
}

#[test]
fn vanishing_eta_keeps_means_near_zero() {
    let exec = Executor::new(0).unwrap();
    let schedule = InstanceSchedule::Fixed(small_instance(1e-9, Noise::Gaussian { sigma: 1.0 }));
    let report = rate_experiment(&exec, &schedule, 1e-9, &grid(Algo::KlPcb, 20, 6), Objective::Regularized).unwrap();
    assert!(report.rows.iter().all(|r| r.mean_subopt >= 0.0 && r.mean_subopt < 1e-9));
    assert_eq!(report.dropped, 0);
}

#[test]
fn sub_resolution_means_are_dropped_and_fit_skipped() {
    let exec = Executor::new(0).unwrap();
    let schedule = InstanceSchedule::Fixed(small_instance(1e-9, Noise::Gaussian { sigma: 1.0 }));
    let mut spec = grid(Algo::KlPcb, 20, 6);
    spec.n_values = vec![10_000, 20_000, 40_000];
    let report = rate_experiment(&exec, &schedule, 1e-9, &spec, Objective::Regularized).unwrap();
    assert!(report.rows.iter().all(|r| r.mean_subopt < 1e-12));
    assert!(report.fit.is_none());
    assert_eq!(report.dropped, 3);
}

#[test]
fn small_eta_coupled_gap_gives_fast_rate() {
    let exec = Executor::new(0).unwrap();
    let signs = parse_signs("++--/+-+-").unwrap();
    let schedule = InstanceSchedule::FastCoupled { signs, alpha_eta: 50.0, budget: 2.5, noise: Noise::Bernoulli };
    let report = rate_experiment(&exec, &schedule, 0.5, &grid(Algo::KlPcb, 50, 7), Objective::Regularized).unwrap();
    let fit = report.fit.expect("fit");
    assert!(fit.slope < -0.7, "{fit:?}");
    assert!(report.rows.iter().all(|r| r.regime_diag < 1.0));
}

#[test]
fn vk_largest_k_improves_with_data() {
    let exec = Executor::new(0).unwrap();
    let spec = VkSweepSpec { num_arms: 8, k_values: vec![7], n_values: vec![16, 64, 100_000], replications: 60, members: 8, master_seed: 3 };
    let report = vk_sweep(&exec, &spec).unwrap();
    let first = report.rows.first().unwrap().mean_subopt;
    let last = report.rows.last().unwrap().mean_subopt;
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn ablation_estimate_is_identical_across_workers() {
    let exec = Executor::new(2).unwrap();
    let signs = parse_signs("++--/+-+-").unwrap();
    let inst = fast_instance(&signs, 8.0, 50.0, 2.5, 0.05, Noise::Bernoulli).unwrap();
    let a = mc_suboptimality(&exec, &inst, Algo::KlPcbNoPessimism, 0.1, 300, 30, 9, Objective::Regularized).unwrap();
    let b = mc_suboptimality(&Executor::new(1).unwrap(), &inst, Algo::KlPcbNoPessimism, 0.1, 300, 30, 9, Objective::Regularized).unwrap();
    assert_eq!(a, b);
}

#[test]
fn grid_validation_rejects_short_or_unsorted_grids() {
    let exec = Executor::new(1).unwrap();
    let schedule = InstanceSchedule::Fixed(small_instance(1.0, Noise::Bernoulli));
    let mut spec = grid(Algo::KlPcb, 4, 0);
    spec.n_values = vec![100, 50, 200];
    let err = rate_experiment(&exec, &schedule, 1.0, &spec, Objective::Regularized).unwrap_err();
    assert_eq!(err.kind(), "BadGrid");
    spec.n_values = vec![100, 200];
    assert!(rate_experiment(&exec, &schedule, 1.0, &spec, Objective::Regularized).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn means_are_non_negative(seed in any::<u64>(), eta in 0.05f64..20.0, n in 1usize..200, algo_idx in 0usize..2) {
        let exec = Executor::new(1).unwrap();
        let algo = [Algo::KlPcb, Algo::KlPcbNoPessimism][algo_idx];
        let inst = small_instance(eta, Noise::Bernoulli);
        let est = mc_suboptimality(&exec, &inst, algo, 0.1, n, 4, seed, Objective::Regularized).unwrap();
        prop_assert!(est.mean >= -1e-12);
        prop_assert!(est.stderr >= 0.0);
    }

    #[test]
    fn coupled_gap_shrinks_with_n(n in 1usize..1_000_000) {
        let a = coupled_gap(2, 6, 2.5, n).unwrap();
        let b = coupled_gap(2, 6, 2.5, 4 * n).unwrap();
        prop_assert!((a / b - 2.0).abs() < 1e-12);
    }
}
