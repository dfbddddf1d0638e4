use std::f64::consts::PI;

use lrdspde::fields::*;
use lrdspde::quad::{integrate_panels, QuadOptions};
use lrdspde::spectral::*;
use proptest::prelude::*;

const N: usize = 20_000;

fn model() -> SpectralModel {
    SpectralModel::default()
}

fn within(est: Estimate, want: f64, what: &str) {
    let se = est.std_error.expect("ensemble larger than two");
    let z = (est.value - want) / se;
    assert!(z.abs() <= 4.0, "{what}: estimate {} vs {want}, z = {z:.2}", est.value);
}

#[test]
fn eta_covariance_matches_model() {
    let xs = [0.0, 1.0, 2.0];
    let ens = Ensemble::simulate(&FieldSpec::Eta { model: model() }, &SpectralGrid::default(), &xs, 11, N).unwrap();
    for (j, &x) in xs.iter().enumerate() {
        within(estimate_cov(&ens, 0, j).unwrap(), r_cov(&model(), x), &format!("lag {x}"));
    }
    within(estimate_mean(&ens, 1).unwrap(), 0.0, "mean");
}

#[test]
fn solution_covariance_matches_quadrature() {
    let xs = [0.0, 1.0];
    for params in [FrbeParams::heat(1.0), FrbeParams::default()] {
        let spec = FieldSpec::Solution { model: model(), params, t: 1.0 };
        let ens = Ensemble::simulate(&spec, &SpectralGrid::default(), &xs, 12, N).unwrap();
        for (j, &x) in xs.iter().enumerate() {
            let want = cov_solution(&model(), &params, 1.0, 1.0, x, 0.0).unwrap();
            within(estimate_cov(&ens, 0, j).unwrap(), want, &format!("{params:?} lag {x}"));
        }
    }
}

#[test]
fn heat_limit_covariance_and_decay() {
    let xs = [0.0, 1.0];
    let spec = FieldSpec::LimitHeat { model: model(), mu: 1.0, t: 1.0 };
    let ens = Ensemble::simulate(&spec, &SpectralGrid::default(), &xs, 13, N).unwrap();
    within(estimate_mean(&ens, 0).unwrap(), 0.0, "mean");
    for (j, &x) in xs.iter().enumerate() {
        within(estimate_cov(&ens, 0, j).unwrap(), cov_limit_heat(&model(), 1.0, 1.0, 1.0, x, 0.0).unwrap(), "heat");
    }
    let second_moment = |t: f64| {
        let spec = FieldSpec::LimitHeat { model: model(), mu: 1.0, t };
        let e = Ensemble::simulate(&spec, &SpectralGrid::default(), &[0.0], 14, 2000).unwrap();
        e.realizations.iter().map(|r| r.values[0] * r.values[0]).sum::<f64>() / e.len() as f64
    };
    assert!(second_moment(10.0) < second_moment(0.1));
}

#[test]
fn frbe_limit_matches_quadrature_and_reduces_to_heat() {
    let xs = [0.0, 1.0];
    let p = FrbeParams::default();
    let spec = FieldSpec::LimitFrbe { model: model(), params: p, t: 1.0 };
    let ens = Ensemble::simulate(&spec, &SpectralGrid::default(), &xs, 15, N).unwrap();
    assert!(ens.tail.ok && ens.grid.n > SpectralGrid::default().n);
    for (j, &x) in xs.iter().enumerate() {
        within(estimate_cov(&ens, 0, j).unwrap(), cov_limit_frbe(&model(), &p, 1.0, 1.0, x, 0.0).unwrap(), "frbe");
    }

    // α = 2, β = 1: the same noise gives the same path up to rounding
    let heat_like = FrbeParams { alpha: 2.0, beta: 1.0, gamma_exp: 0.0, mu: 1.0 };
    let g = SpectralGrid::default();
    let a = simulate_limit_frbe(&model(), &heat_like, &g, 1.0, &xs, 5).unwrap();
    let b = simulate_limit_heat(&model(), 1.0, &g, 1.0, &xs, 5).unwrap();
    for (u, v) in a.values.iter().zip(&b.values) {
        assert!((u - v).abs() < 1e-12 * v.abs().max(1.0));
    }
    // and independent noise gives statistically equal covariances
    let e1 = Ensemble::simulate(&FieldSpec::LimitFrbe { model: model(), params: heat_like, t: 1.0 }, &g, &xs, 16, N)
        .unwrap();
    let e2 = Ensemble::simulate(&FieldSpec::LimitHeat { model: model(), mu: 1.0, t: 1.0 }, &g, &xs, 17, N).unwrap();
    for j in 0..2 {
        let (c1, c2) = (estimate_cov(&e1, 0, j).unwrap(), estimate_cov(&e2, 0, j).unwrap());
        let se = c1.std_error.unwrap().hypot(c2.std_error.unwrap());
        assert!((c1.value - c2.value).abs() <= 4.0 * se);
    }
}

#[test]
fn marginals_are_gaussian() {
    let spec = FieldSpec::LimitHeat { model: model(), mu: 1.0, t: 1.0 };
    let ens = Ensemble::simulate(&spec, &SpectralGrid::default(), &[0.3], 18, 10_000).unwrap();
    let m = moments(&ens.column(0).unwrap()).unwrap();
    assert!(m.skewness.abs() < 0.1, "{m:?}");
    assert!(m.excess_kurtosis.abs() < 0.2, "{m:?}");
}

#[test]
fn initial_time_reproduces_eta() {
    let g = SpectralGrid::default();
    let xs: Vec<f64> = (0..50).map(|i| 0.2 * i as f64).collect();
    let eta = simulate_eta(&model(), &g, &xs, 99).unwrap();
    for params in [FrbeParams::heat(1.0), FrbeParams::default()] {
        let u0 = simulate_solution(&model(), &params, &g, 0.0, &xs, 99).unwrap();
        assert_eq!(u0.values, eta.values);
    }
}

#[test]
fn rescaling_at_eps_one_is_the_solution() {
    let g = SpectralGrid::default();
    let xs = [0.0, 0.7, 3.1];
    for params in [FrbeParams::heat(1.0), FrbeParams::default()] {
        let u = simulate_solution(&model(), &params, &g, 2.0, &xs, 3).unwrap();
        let r = simulate_rescaled(&model(), &params, &g, 1.0, 2.0, &xs, 3).unwrap();
        assert_eq!(u.values, r.values);
        assert_eq!(r.kind, FieldKind::Rescaled);
    }
}

#[test]
fn rescaled_heat_uses_quarter_power() {
    // U_ε(t, 0) = ε^{-1/4} u(t/ε, 0), and the discrete covariance carries ε^{-1/2}
    let g = SpectralGrid::default();
    let heat = FrbeParams::heat(1.0);
    let eps = 0.01;
    let rescaled = FieldSpec::Rescaled { model: model(), params: heat, eps, t: 1.0 };
    let plain = FieldSpec::Solution { model: model(), params: heat, t: 1.0 / eps };
    let a = rescaled.discrete_covariance(&g, 0.0).unwrap();
    let b = plain.discrete_covariance(&g.scaled(eps.sqrt()), 0.0).unwrap();
    assert!((a - b / eps.sqrt()).abs() < 1e-14 * a);
}

#[test]
fn rescaled_variance_approaches_limit() {
    let g = SpectralGrid::default();
    let heat = FrbeParams::heat(1.0);
    let limit = cov_limit_heat(&model(), 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    let mut last = f64::INFINITY;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let spec = FieldSpec::Rescaled { model: model(), params: heat, eps, t: 1.0 };
        let v = spec.discrete_covariance(&g, 0.0).unwrap();
        let gap = (v - limit).abs();
        assert!(gap < last, "ε = {eps}");
        last = gap;
    }
    assert!(last / limit < 1e-3);
}

#[test]
fn ensemble_members_are_seeded_singles() {
    let g = SpectralGrid::default();
    let spec = FieldSpec::Solution { model: model(), params: FrbeParams::default(), t: 0.5 };
    let ens = Ensemble::simulate_on(&spec, &g, &[0.0, 1.0], 7, 5).unwrap();
    for (i, r) in ens.realizations.iter().enumerate() {
        let single = simulate(&spec, &g, &[0.0, 1.0], member_seed(7, i as u64)).unwrap();
        assert_eq!(&single, r);
        r.validate().unwrap();
    }
    let again = Ensemble::simulate_on(&spec, &g, &[0.0, 1.0], 7, 5).unwrap();
    assert_eq!(again, ens);
    let other = Ensemble::simulate_on(&spec, &g, &[0.0, 1.0], 8, 5).unwrap();
    assert_ne!(other.realizations[0].values, ens.realizations[0].values);
}

#[test]
fn worker_count_does_not_change_bits() {
    let spec = FieldSpec::LimitFrbe { model: model(), params: FrbeParams::default(), t: 2.0 };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| Ensemble::simulate(&spec, &SpectralGrid::default(), &[0.0, 2.0], 21, 40).unwrap())
    };
    let (a, b) = (run(1), run(4));
    let bits =
        |e: &Ensemble| e.realizations.iter().flat_map(|r| r.values.iter().map(|v| v.to_bits())).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn narrow_grid_is_flagged_and_widened() {
    let spec = FieldSpec::Solution { model: model(), params: FrbeParams::heat(1.0), t: 1.0 };
    let narrow = SpectralGrid::new(0.05, 2).unwrap();
    let kept = Ensemble::simulate_on(&spec, &narrow, &[0.0], 1, 3).unwrap();
    assert!(!kept.tail.ok);
    let widened = Ensemble::simulate(&spec, &narrow, &[0.0], 1, 3).unwrap();
    assert!(widened.tail.ok);
    assert!(widened.grid.n > 2);
}

#[test]
fn grid_refinement_is_consistent() {
    for spec in [
        FieldSpec::Eta { model: model() },
        FieldSpec::LimitHeat { model: model(), mu: 1.0, t: 1.0 },
        FieldSpec::Solution { model: model(), params: FrbeParams::default(), t: 1.0 },
    ] {
        let coarse = SpectralGrid::new(0.05, 400).unwrap();
        let fine = SpectralGrid::new(0.025, 800).unwrap();
        let tail = spec.tail_check(&coarse).unwrap();
        assert!(tail.ok);
        let a = spec.discrete_covariance(&coarse, 0.0).unwrap();
        let b = spec.discrete_covariance(&fine, 0.0).unwrap();
        assert!(((a - b) / a).abs() < 1e-6, "{:?}: {a} vs {b}", spec.kind());
    }
}

#[test]
fn single_mode_propagates_like_heat_kernel() {
    // (4πμt)^{-1/2} ∫ cos(wy) e^{-(x-y)²/(4μt)} dy = e^{-μw²t} cos(wx)
    let (mu, t, w) = (0.7, 0.9, 1.3);
    let heat = FrbeParams::heat(mu);
    let opts = QuadOptions::with_rel_tol(1e-13);
    for x in [0.0, 0.4, 2.0] {
        let s = 4.0 * mu * t;
        let f = |y: f64| (w * y).cos() * (-(x - y) * (x - y) / s).exp() / (PI * s).sqrt();
        let reach = 14.0 * s.sqrt();
        let oracle = integrate_panels(f, x - reach, x + reach, 64, &opts).unwrap().value;
        let got = propagate_mode(&heat, t, w, x).unwrap();
        assert!((got - oracle).abs() < 1e-8, "x = {x}");
        assert!((got - (-mu * w * w * t).exp() * (w * x).cos()).abs() < 1e-14);
    }
}

#[test]
fn realization_round_trips_through_json() {
    let r = simulate_eta(&model(), &SpectralGrid::default(), &[0.0, 0.25], 4).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: FieldRealization = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realizations_are_finite_and_deterministic(seed in any::<u64>(), t in 0.01f64..5.0, x in -20.0f64..20.0) {
        let g = SpectralGrid::default();
        let a = simulate_limit_heat(&model(), 1.0, &g, t, &[x, x + 1.0], seed).unwrap();
        let b = simulate_limit_heat(&model(), 1.0, &g, t, &[x, x + 1.0], seed).unwrap();
        prop_assert!(a.values.iter().all(|v| v.is_finite()));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn self_covariance_is_sample_variance(values in proptest::collection::vec(-5.0f64..5.0, 3..40)) {
        let e = sample_cov(&values, &values).unwrap();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((e.value - var).abs() <= 1e-12 * var.max(1.0));
        prop_assert!(e.std_error.unwrap() >= 0.0);
    }
}
