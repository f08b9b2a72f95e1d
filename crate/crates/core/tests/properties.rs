use proptest::prelude::*;

use qrobust::bounds::{prune, trotter_leading};
use qrobust::dynamics::{effective_hamiltonian, propagate, Channel, ControlSchedule, HamiltonianSet};
use qrobust::linalg::{
    expm_neg_i, frobenius_norm, max_abs, operator_norm, sup_distance, unitarity_deviation, Hermitian,
};
use qrobust::metrics::{
    build_penalty, metric_cost_clean, metric_cost_noisy_expanded, metric_cost_noisy_oracle, path_length, MetricKind,
};
use qrobust::noise::{sample_realization, scenario_rng, NoiseParams, NoiseRealization};
use qrobust::pauli::{expand, generate_basis, PauliBasis};
use qrobust::robust::{risk, saa_objective, OcpProblem, RiskMeasure};
use qrobust::{gates, noise::ScenarioSet};

fn basis(n: usize) -> PauliBasis {
    generate_basis(n).unwrap()
}

/// Qubit count and a coefficient vector of matching length.
fn coeffs(max_qubits: usize) -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1..=max_qubits).prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0..1.0f64, (1 << (2 * n)) - 1)))
}

fn hermitian(n: usize, c: &[f64]) -> Hermitian {
    basis(n).reconstruct(c).unwrap()
}

fn all_kinds() -> Vec<MetricKind> {
    vec![
        MetricKind::Killing,
        MetricKind::Cliff,
        MetricKind::Binomial { alpha: 0.0 },
        MetricKind::Binomial { alpha: 0.7 },
        MetricKind::Exponential { x: 1.2 },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expm_is_a_semigroup((n, c) in coeffs(3), s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let h = hermitian(n, &c);
        let lhs = expm_neg_i(&h, s).unwrap().compose(&expm_neg_i(&h, t).unwrap());
        let rhs = expm_neg_i(&h, s + t).unwrap();
        prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) <= 1e-9);
    }

    #[test]
    fn expm_output_is_unitary((n, c) in coeffs(4), t in -10.0..10.0f64) {
        let u = expm_neg_i(&hermitian(n, &c), t).unwrap();
        prop_assert!(unitarity_deviation(u.matrix()) <= 1e-9);
    }

    #[test]
    fn frobenius_submultiplicative_with_operator_norm((n, a) in coeffs(3), seed in any::<u64>()) {
        let b = {
            use rand::Rng;
            let mut rng = scenario_rng(seed, 0, 0);
            let v: Vec<f64> = (0..a.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            hermitian(n, &v)
        };
        let a = hermitian(n, &a);
        let ab = a.matrix() * b.matrix();
        prop_assert!(frobenius_norm(&ab) <= frobenius_norm(a.matrix()) * operator_norm(b.matrix()) * (1.0 + 1e-12));
    }

    #[test]
    fn sup_distance_is_a_metric(
        a in prop::collection::vec(-1.0..1.0f64, 3),
        b in prop::collection::vec(-1.0..1.0f64, 3),
        c in prop::collection::vec(-1.0..1.0f64, 3),
    ) {
        let u = |v: &[f64]| expm_neg_i(&hermitian(1, v), 1.0).unwrap();
        let (x, y, z) = (u(&a), u(&b), u(&c));
        let d = |p, q| sup_distance(p, q, false).unwrap();
        prop_assert_eq!(d(&x, &y), d(&y, &x));
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-15);
        prop_assert_eq!(d(&x, &x), 0.0);
    }

    #[test]
    fn killing_cost_is_frobenius_squared((n, c) in coeffs(3)) {
        let b = basis(n);
        let penalty = build_penalty(MetricKind::Killing, &b).unwrap();
        let h = hermitian(n, &c);
        let cost = metric_cost_clean(&c, &penalty).unwrap();
        prop_assert!((cost - frobenius_norm(h.matrix()).powi(2)).abs() <= 1e-10);
    }

    #[test]
    fn penalties_dominate_killing((n, c) in coeffs(3)) {
        let b = basis(n);
        let killing = metric_cost_clean(&c, &build_penalty(MetricKind::Killing, &b).unwrap()).unwrap();
        for kind in all_kinds() {
            let p = build_penalty(kind, &b).unwrap();
            prop_assert!(p.min() >= 1.0);
            prop_assert!(metric_cost_clean(&c, &p).unwrap() >= killing * (1.0 - 1e-12));
        }
    }

    #[test]
    fn path_length_dominates_killing_length(seed in any::<u64>()) {
        let b = basis(2);
        let mut rng = scenario_rng(seed, 0, 0);
        let set = random_set(&b, 2, &mut rng);
        let schedule = ControlSchedule::random(0.1, 10, 2, 1.0, &mut rng).unwrap();
        let r = sample_realization(&NoiseParams::new(1.0, 3.0).unwrap(), 1.0, 2, &mut rng).unwrap();
        let killing = path_length(&schedule, Some(&r), &set, &b, &build_penalty(MetricKind::Killing, &b).unwrap()).unwrap();
        for kind in all_kinds() {
            let p = build_penalty(kind, &b).unwrap();
            prop_assert!(path_length(&schedule, Some(&r), &set, &b, &p).unwrap() >= killing * (1.0 - 1e-12));
        }
    }

    #[test]
    fn noisy_oracle_permutation_invariant(seed in any::<u64>(), shift in 1usize..3) {
        use rand::Rng;
        let b = basis(2);
        let mut rng = scenario_rng(seed, 0, 0);
        let set = random_set(&b, 3, &mut rng);
        let h: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let alpha: Vec<u8> = (0..3).map(|_| rng.random_range(0..=1)).collect();
        let p = build_penalty(MetricKind::Cliff, &b).unwrap();
        fn rot<T: Clone>(v: &[T], shift: usize) -> Vec<T> {
            (0..v.len()).map(|i| v[(i + shift) % v.len()].clone()).collect()
        }
        let channels = rot(set.channels(), shift);
        let permuted = HamiltonianSet::new(channels).unwrap();
        let a = metric_cost_noisy_oracle(&h, &alpha, &set, &b, &p).unwrap();
        let c = metric_cost_noisy_oracle(&rot(&h, shift), &rot(&alpha, shift), &permuted, &b, &p).unwrap();
        prop_assert!((a - c).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn expanded_matches_oracle_in_pure_regimes(seed in any::<u64>(), kind in 0usize..5) {
        use rand::Rng;
        let b = basis(2);
        let mut rng = scenario_rng(seed, 0, 0);
        let dirs = [0usize, 4, 9];
        let intended: Vec<Hermitian> = dirs.iter().map(|&d| Hermitian::new(b.matrix(d).clone()).unwrap()).collect();
        let noisy = HamiltonianSet::new(
            intended.iter().map(|h| Channel { intended: h.clone(), erroneous: random_hermitian(&b, &mut rng) }).collect(),
        ).unwrap();
        let same = HamiltonianSet::noiseless(intended).unwrap();
        let p = build_penalty(all_kinds()[kind], &b).unwrap();
        let h: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let one = metric_cost_noisy_expanded(&h, &[1, 1, 1], &noisy, &b, &p).unwrap();
        let zero = metric_cost_noisy_expanded(&h, &[0, 0, 0], &same, &b, &p).unwrap();
        prop_assert!(one.difference.abs() <= 1e-12);
        prop_assert!(zero.difference.abs() <= 1e-12);
    }

    #[test]
    fn cvar_monotone_and_above_mean(values in prop::collection::vec(0.0..10.0f64, 1..40), g1 in 0.01..1.0f64, g2 in 0.01..1.0f64) {
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let mean = risk(&values, RiskMeasure::Expectation).unwrap();
        let a = risk(&values, RiskMeasure::Cvar { gamma: lo }).unwrap();
        let b = risk(&values, RiskMeasure::Cvar { gamma: hi }).unwrap();
        prop_assert!(a >= b - 1e-12);
        prop_assert!(b >= mean - 1e-12);
        let smallest = 1.0 / values.len() as f64;
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert_eq!(risk(&values, RiskMeasure::Cvar { gamma: smallest }).unwrap(), max);
    }

    #[test]
    fn operator_norm_bounded_by_support((n, mut c) in coeffs(3), keep in 1usize..10) {
        for (i, v) in c.iter_mut().enumerate() {
            if i % keep != 0 {
                *v = 0.0;
            }
        }
        let nonzero = c.iter().filter(|v| **v != 0.0).count().max(1) as f64;
        let h = hermitian(n, &c);
        prop_assert!(operator_norm(h.matrix()) <= nonzero.sqrt() * frobenius_norm(h.matrix()) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn pruned_mass_below_cost_over_cutoff((n, c) in coeffs(3), cutoff in 1.0..20.0f64) {
        let b = basis(n);
        for kind in all_kinds() {
            let p = build_penalty(kind, &b).unwrap();
            let kept = prune(&c, &p, cutoff).unwrap().coeffs;
            let removed: f64 = c.iter().zip(&kept).map(|(a, k)| (a - k).powi(2)).sum();
            let gamma2 = metric_cost_clean(&c, &p).unwrap();
            prop_assert!(gamma2 >= cutoff * removed * (1.0 - 1e-12));
        }
    }

    #[test]
    fn trotter_leading_reversal_invariant(seed in any::<u64>(), terms in 2usize..5, delta in 0.01..0.5f64) {
        let b = basis(2);
        let mut rng = scenario_rng(seed, 0, 0);
        let mut hs: Vec<Hermitian> = (0..terms).map(|_| random_hermitian(&b, &mut rng)).collect();
        let forward = trotter_leading(&hs, delta).unwrap();
        hs.reverse();
        let backward = trotter_leading(&hs, delta).unwrap();
        prop_assert!((forward - backward).abs() <= 1e-12 * forward.max(1.0));
    }

    #[test]
    fn error_measure_monotone_and_bounded(seed in any::<u64>(), t1 in 0.0..5.0f64, t2 in 0.0..5.0f64) {
        let mut rng = scenario_rng(seed, 0, 0);
        let r = sample_realization(&NoiseParams::new(1.0, 2.0).unwrap(), 5.0, 1, &mut rng).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = r.error_measure(0, lo).unwrap();
        let b = r.error_measure(0, hi).unwrap();
        prop_assert!(a <= b + 1e-15);
        prop_assert!(b <= hi + 1e-15);
    }

    #[test]
    fn alpha_switches_exactly_at_jumps(seed in any::<u64>()) {
        let mut rng = scenario_rng(seed, 0, 0);
        let r = sample_realization(&NoiseParams::new(2.0, 4.0).unwrap(), 5.0, 1, &mut rng).unwrap();
        let jumps = r.jumps(0);
        let mut switches = 0;
        for (i, &t) in jumps.iter().enumerate() {
            let before = if i == 0 { 0.0 } else { 0.5 * (jumps[i - 1] + t) };
            let prev = r.alpha_at(0, before).unwrap();
            prop_assert_eq!(r.alpha_at(0, t).unwrap(), 1 - prev);
            switches += 1;
        }
        prop_assert_eq!(switches, jumps.len());
        prop_assert_eq!(r.alpha_at(0, 0.0).unwrap(), if jumps.first() == Some(&0.0) { 0 } else { 1 });
    }

    #[test]
    fn halving_dt_leaves_propagation_unchanged(seed in any::<u64>()) {
        let b = basis(1);
        let mut rng = scenario_rng(seed, 0, 0);
        let set = random_set(&b, 2, &mut rng);
        let coarse = ControlSchedule::random(0.1, 20, 2, 1.0, &mut rng).unwrap();
        let fine_values: Vec<Vec<f64>> = coarse.values().iter().flat_map(|r| [r.clone(), r.clone()]).collect();
        let fine = ControlSchedule::new(0.05, fine_values, 1.0).unwrap();
        let r = sample_realization(&NoiseParams::new(1.0, 5.0).unwrap(), 2.0, 2, &mut rng).unwrap();
        let a = propagate(&coarse, Some(&r), &set).unwrap();
        let c = propagate(&fine, Some(&r), &set).unwrap();
        prop_assert!(max_abs(&(a.final_unitary().matrix() - c.final_unitary().matrix())) < 1e-12);
    }

    #[test]
    fn intended_branch_is_plain_piecewise_constant_evolution(seed in any::<u64>()) {
        let b = basis(2);
        let mut rng = scenario_rng(seed, 0, 0);
        let set = random_set(&b, 2, &mut rng);
        let schedule = ControlSchedule::random(0.1, 8, 2, 1.0, &mut rng).unwrap();
        let traj = propagate(&schedule, Some(&NoiseRealization::noiseless(2, 0.8).unwrap()), &set).unwrap();
        let mut u = qrobust::linalg::Unitary::identity(4).unwrap();
        for k in 0..schedule.steps() {
            let h = effective_hamiltonian(schedule.row(k), &[1, 1], &set).unwrap();
            u = expm_neg_i(&h, schedule.dt()).unwrap().compose(&u);
        }
        prop_assert!(max_abs(&(traj.final_unitary().matrix() - u.matrix())) <= 1e-12);
    }

    #[test]
    fn saa_objective_permutation_invariant(seed in any::<u64>()) {
        let problem = OcpProblem {
            set: HamiltonianSet::figure2(),
            target: gates::hadamard(),
            eta: 0.1,
            beta: 0.2,
            phase_invariant: true,
            horizon: 2.0,
            dt: 0.1,
            h_max: 1.5,
            risk: RiskMeasure::Cvar { gamma: 0.3 },
            penalty_mu: 10.0,
        };
        let mut rng = scenario_rng(seed, 0, 0);
        let schedule = ControlSchedule::random(0.1, 20, 2, 1.5, &mut rng).unwrap();
        let scenarios = qrobust::noise::build_scenarios(&NoiseParams::new(1.0, 10.0).unwrap(), 2.0, 2, 24, seed).unwrap();
        let mut reversed = scenarios.realizations.clone();
        reversed.reverse();
        let shuffled = ScenarioSet { realizations: reversed, ..scenarios.clone() };
        let a = saa_objective(&schedule, &scenarios, &problem).unwrap();
        let c = saa_objective(&schedule, &shuffled, &problem).unwrap();
        prop_assert_eq!(a.objective, c.objective);
        prop_assert_eq!(a.success_fraction, c.success_fraction);
    }
}

#[test]
fn expand_reconstruct_round_trip() {
    let b = basis(2);
    let mut rng = scenario_rng(1, 0, 0);
    let h = random_hermitian(&b, &mut rng);
    let back = b.reconstruct(&expand(&h, &b).unwrap().coeffs).unwrap();
    assert!(max_abs(&(h.matrix() - back.matrix())) <= 1e-14);
}

fn random_hermitian(b: &PauliBasis, rng: &mut impl rand::Rng) -> Hermitian {
    let v: Vec<f64> = (0..b.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    b.reconstruct(&v).unwrap()
}

fn random_set(b: &PauliBasis, channels: usize, rng: &mut impl rand::Rng) -> HamiltonianSet {
    HamiltonianSet::new(
        (0..channels)
            .map(|_| Channel {
                intended: random_hermitian(b, rng),
                erroneous: random_hermitian(b, rng),
            })
            .collect(),
    )
    .unwrap()
}
