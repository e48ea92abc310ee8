mod common;

use common::Gen;
use fundmat::ctmc::{continuous_poisson_residual, ctmc_potentials, ctmc_stationary};
use fundmat::estimator::{
    online_potentials, simulate_chain, temporal_residual, SimulationConfig, StepSchedule,
};
use fundmat::gfm::{
    fundamental_matrix, poisson_residual, potentials, potentials_classic, potentials_reference_level,
    renormalize_potentials, series_fundamental_until, spectral_radius_estimate, stationary,
};
use fundmat::linalg::{max_abs, max_abs_vec, ones, spread};
use fundmat::model::{min_uniformization_rate, uniformize, validate_stochastic};
use fundmat::qfactors::{build_state_action_chain, policy_chain, qfactors_solve};
use fundmat::{diagnose_chain, Error, ReferenceVector, RewardVector, Tolerances};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validate_stochastic_is_idempotent(seed in any::<u64>(), n in 1usize..=8) {
        let mut gen = Gen::new(seed);
        let rows = gen.chain_rows(n);
        // perturb within tolerance
        let raw = DMatrix::from_fn(n, n, |i, j| rows[i][j] + if rows[i][j] == 0.0 { 0.0 } else { gen.range(-1e-10, 1e-10) });
        let once = validate_stochastic(raw, 1e-9).unwrap();
        let twice = validate_stochastic(once.matrix().clone(), 1e-9).unwrap();
        prop_assert_eq!(once.matrix(), twice.matrix());
        prop_assert_eq!(twice.max_correction(), 0.0);
        for i in 0..n {
            let sum: f64 = once.matrix().row(i).iter().sum();
            prop_assert!((sum - 1.0).abs() <= 2.0 * f64::EPSILON);
        }
    }

    #[test]
    fn positive_diagonal_means_aperiodic(seed in any::<u64>(), n in 1usize..=8) {
        let mut gen = Gen::new(seed);
        let mut rows = gen.chain_rows(n);
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] += 0.5;
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|x| *x /= s);
        }
        let p = fundmat::StochasticMatrix::from_rows(&rows, 1e-9).unwrap();
        let d = diagnose_chain(&p, 0.0);
        prop_assert!(d.aperiodic);
        prop_assert_eq!(d.period, 1);
    }

    #[test]
    fn stationary_does_not_depend_on_reference(seed in any::<u64>(), n in 2usize..=8) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let (r1, r2) = (gen.reference(n), gen.reference(n));
        let a = stationary(&p, &r1, &tol()).unwrap().pi;
        let b = stationary(&p, &r2, &tol()).unwrap().pi;
        prop_assert!(max_abs_vec(&(&a - &b)) <= 1e-8);
        for pi in [&a, &b] {
            prop_assert!(max_abs_vec(&(p.matrix().transpose() * pi - pi)) <= 1e-8);
            prop_assert!((pi.sum() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn potentials_form_a_constant_offset_family(seed in any::<u64>(), n in 2usize..=8) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let f = gen.rewards(n);
        let (r1, r2) = (gen.reference(n), gen.reference(n));
        let a = potentials(&p, &f, &r1, &tol()).unwrap();
        let b = potentials(&p, &f, &r2, &tol()).unwrap();
        prop_assert!(spread(&(&a.g - &b.g)) <= 1e-8);
        prop_assert!((a.eta - b.eta).abs() <= 1e-8);
        for sol in [&a, &b] {
            prop_assert!(poisson_residual(p.matrix(), f.values(), &sol.g, sol.eta) <= 1e-8);
        }
        let pi = stationary(&p, &r1, &tol()).unwrap();
        prop_assert!((a.eta - pi.pi.dot(f.values())).abs() <= 1e-8);
    }

    #[test]
    fn classic_potentials_are_a_renormalization(seed in any::<u64>(), n in 2usize..=8) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let f = gen.rewards(n);
        let r = gen.reference(n);
        let classic = potentials_classic(&p, &f, &tol()).unwrap();
        let pi = stationary(&p, &r, &tol()).unwrap();
        let pi_ref = ReferenceVector::new(pi.pi.iter().copied().collect()).unwrap();
        let shifted = renormalize_potentials(&potentials(&p, &f, &r, &tol()).unwrap(), &pi_ref, &tol()).unwrap();
        prop_assert!(max_abs_vec(&(&classic.g - &shifted.g)) <= 1e-8);
    }

    #[test]
    fn fundamental_matrix_inverts_the_shifted_matrix(seed in any::<u64>(), n in 1usize..=16) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let r = gen.reference(n);
        let z = fundamental_matrix(&p, &r, &tol()).unwrap();
        let a = DMatrix::identity(n, n) - p.matrix() + ones(n) * r.values().transpose();
        prop_assert!(max_abs(&(&a * &z.z - DMatrix::identity(n, n))) <= 1e-10 * n as f64);
        let ze = &z.z * ones(n);
        prop_assert!(max_abs_vec(&(ze - ones(n) / r.dot_with_ones())) <= 1e-10 * n as f64);
    }

    #[test]
    fn series_agrees_with_direct_solve(seed in any::<u64>(), n in 2usize..=6) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let dot = gen.range(0.2, 1.8);
        let r = gen.reference_with_dot(n, dot);
        let s = series_fundamental_until(&p, &r, 1e-9, 20_000, &tol()).unwrap();
        let z = fundamental_matrix(&p, &r, &tol()).unwrap();
        if s.tail_bound < 1e-8 {
            prop_assert!(max_abs(&(&s.z - &z.z)) <= 1e-8);
        }
    }

    #[test]
    fn shifted_matrix_loses_contraction_at_the_boundary(seed in any::<u64>(), n in 2usize..=8) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let margin = tol().series_margin;
        for dot in [1e-12, -1e-12, 2.0 + margin] {
            let r = gen.reference_with_dot(n, dot);
            let m = p.matrix() - ones(n) * r.values().transpose();
            let rho = spectral_radius_estimate(&m, 4000, seed);
            prop_assert!(rho.rho >= 1.0 - 1e-6, "r·e = {dot}: rho = {}", rho.rho);
        }
    }

    #[test]
    fn uniformization_preserves_stationary_behaviour(seed in any::<u64>(), n in 1usize..=8) {
        let mut gen = Gen::new(seed);
        let b = gen.generator(n);
        let r = gen.reference(n);
        let gamma = min_uniformization_rate(&b).max(1e-3) * gen.range(1.0 + 1e-6, 10.0);
        let chain = uniformize(&b, gamma, 1e-9).unwrap();
        let a = ctmc_stationary(&b, &r, &tol()).unwrap().pi;
        let c = stationary(&chain, &r, &tol()).unwrap().pi;
        prop_assert!(max_abs_vec(&(a - c)) <= 1e-8);
    }

    #[test]
    fn uniformized_potentials_differ_by_a_constant(seed in any::<u64>(), n in 1usize..=8) {
        let mut gen = Gen::new(seed);
        let b = gen.generator(n);
        let f = gen.rewards(n);
        let r = gen.reference(n);
        let gamma = min_uniformization_rate(&b).max(1e-3) * gen.range(1.0 + 1e-6, 10.0);
        let chain = uniformize(&b, gamma, 1e-9).unwrap();
        let process = ctmc_potentials(&b, &f, &r, &tol()).unwrap();
        prop_assert!(continuous_poisson_residual(b.matrix(), f.values(), &process.g, process.eta) <= 1e-8);
        // rewards per step are f/γ, one step lasts 1/γ
        let scaled = potentials(&chain, &f.scaled(1.0 / gamma), &r, &tol()).unwrap();
        prop_assert!(spread(&(&scaled.g - &process.g)) <= 1e-8);
        prop_assert!((gamma * scaled.eta - process.eta).abs() <= 1e-8);
        let unscaled = potentials(&chain, &f, &r, &tol()).unwrap();
        prop_assert!(spread(&(unscaled.g / gamma - &process.g)) <= 1e-8);
    }

    #[test]
    fn ctmc_potentials_form_a_constant_offset_family(seed in any::<u64>(), n in 1usize..=8) {
        let mut gen = Gen::new(seed);
        let b = gen.generator(n);
        let f = gen.rewards(n);
        let (r1, r2) = (gen.reference(n), gen.reference(n));
        let a = ctmc_potentials(&b, &f, &r1, &tol()).unwrap();
        let c = ctmc_potentials(&b, &f, &r2, &tol()).unwrap();
        prop_assert!(spread(&(&a.g - &c.g)) <= 1e-8);
        prop_assert!((a.eta - c.eta).abs() <= 1e-8);
        prop_assert!((r1.dot(&a.g) + a.eta).abs() <= 1e-8);
        let pa = ctmc_stationary(&b, &r1, &tol()).unwrap().pi;
        let pc = ctmc_stationary(&b, &r2, &tol()).unwrap().pi;
        prop_assert!(max_abs_vec(&(pa - pc)) <= 1e-8);
    }

    #[test]
    fn state_action_chain_is_stochastic(seed in any::<u64>(), s in 1usize..=4, a in 1usize..=4) {
        let mut gen = Gen::new(seed);
        let m = gen.mdp(s, a);
        let chain = build_state_action_chain(&m);
        for i in 0..m.pairs() {
            prop_assert!((chain.chain.matrix().row(i).sum() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn q_factors_induce_chain_potentials(seed in any::<u64>(), s in 1usize..=4, a in 1usize..=4) {
        let mut gen = Gen::new(seed);
        let m = gen.mdp(s, a);
        let (r1, r2) = (gen.reference(m.pairs()), gen.reference(m.pairs()));
        let q1 = qfactors_solve(&m, &r1, &tol()).unwrap();
        let q2 = qfactors_solve(&m, &r2, &tol()).unwrap();
        prop_assert!((q1.eta - q2.eta).abs() <= 1e-8);
        prop_assert!(spread(&(&q1.q - &q2.q)) <= 1e-8);
        let (pl, fl) = policy_chain(&m);
        let residual = (DMatrix::identity(s, s) - pl.matrix()) * &q1.induced_g
            - (fl.values() - DVector::from_element(s, q1.eta));
        prop_assert!(spread(&residual) <= 1e-8);
        let g = potentials(&pl, &fl, &ReferenceVector::uniform(s), &tol()).unwrap();
        prop_assert!((g.eta - q1.eta).abs() <= 1e-8);
    }

    #[test]
    fn reference_level_matches_exact_solution_once_mixed(seed in any::<u64>(), n in 2usize..=6) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let f = gen.rewards(n);
        let r = gen.reference_with_dot(n, 1.0);
        let pi = stationary(&p, &r, &tol()).unwrap().pi;
        let limit = ones(n) * pi.transpose();
        let mut power = p.matrix().clone();
        let mut horizon = 1;
        while max_abs(&(&power - &limit)) >= 1e-9 {
            power = &power * p.matrix();
            horizon += 1;
            prop_assume!(horizon < 100_000);
        }
        let exact = potentials(&p, &f, &r, &tol()).unwrap();
        let exact = exact.g.add_scalar(-exact.eta);
        let approx = potentials_reference_level(&p, &f, &r, horizon, &tol()).unwrap();
        prop_assert!(max_abs_vec(&(approx.g - exact)) <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn estimator_is_deterministic(seed in any::<u64>(), n in 2usize..=5) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let f = gen.rewards(n);
        let r = gen.reference(n);
        let cfg = SimulationConfig { seed, max_steps: 5_000, check_interval: 500, record_history: true, ..Default::default() };
        let schedule = StepSchedule::default();
        let a = online_potentials(&p, &f, &r, &schedule, &cfg, &tol()).unwrap();
        let b = online_potentials(&p, &f, &r, &schedule, &cfg, &tol()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn temporal_residual_has_zero_mean_at_the_exact_solution(seed in any::<u64>(), n in 2usize..=5) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let f = gen.rewards(n);
        let r = gen.reference(n);
        let exact = potentials(&p, &f, &r, &tol()).unwrap();
        let r_dot_g = r.dot(&exact.g);
        let steps = 100_000;
        let path = simulate_chain(&p, &f, 0, steps, seed).unwrap();
        let z: Vec<f64> = path
            .windows(2)
            .map(|w| temporal_residual(w[0].1, r_dot_g, exact.g[w[0].0], exact.g[w[1].0]))
            .collect();
        let len = z.len() as f64;
        let mean = z.iter().sum::<f64>() / len;
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (len - 1.0);
        prop_assert!(mean.abs() <= 3.0 * var.sqrt() / len.sqrt(), "mean {mean}, std {}", var.sqrt());
    }

    #[test]
    fn simulated_visit_frequencies_approach_stationary(seed in any::<u64>(), n in 2usize..=4) {
        let mut gen = Gen::new(seed);
        let p = gen.chain(n);
        let f = RewardVector::new(vec![0.0; n]).unwrap();
        let path = simulate_chain(&p, &f, 0, 200_000, seed).unwrap();
        let pi = stationary(&p, &ReferenceVector::uniform(n), &tol()).unwrap().pi;
        let mut counts = vec![0.0; n];
        for (s, _) in &path {
            counts[*s] += 1.0;
        }
        for s in 0..n {
            prop_assert!((counts[s] / path.len() as f64 - pi[s]).abs() < 0.02);
        }
    }
}

#[test]
fn series_raises_outside_the_open_interval() {
    let mut gen = Gen::new(7);
    let p = gen.chain(4);
    for dot in [-1.0, -1e-3, 0.0, 2.0, 2.5] {
        let r = gen.reference_with_dot(4, dot);
        let t = Tolerances { re_tol: 0.0, ..tol() };
        let err = series_fundamental_until(&p, &r, 1e-9, 100, &t).unwrap_err();
        assert!(matches!(err, Error::SeriesDivergent { .. }), "{dot}: {err}");
    }
}
