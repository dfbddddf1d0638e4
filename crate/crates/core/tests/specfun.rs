#![allow(clippy::excessive_precision)]

use lrdspde::specfun::{bessel_i, bessel_k, bessel_k_reflection, erfc, mittag_leffler, ml_bounds};
use proptest::prelude::*;

/// E_β(-x) from mpmath: E_β(-t^β) = ∫ e^{-rt} K_β(r) dr, 40 digits.
const ML_ORACLE: &[(f64, f64, f64)] = &[
    (0.351, 0.0445, 0.95215434109080326),
    (0.655, 0.0205, 0.97759818201056334),
    (0.548, 0.3736, 0.68468549848111883),
    (0.104, 1.5205, 0.38202179717544675),
    (0.085, 0.7323, 0.56547075423308978),
    (0.115, 0.0246, 0.97462948120065199),
    (0.445, 35.9306, 0.017275173369884941),
    (0.165, 0.0912, 0.91027354277376712),
    (0.634, 118.8909, 0.0034754034270513119),
    (0.587, 0.5078, 0.60607587251895798),
    (0.958, 0.0159, 0.98396004958322019),
    (0.848, 0.1759, 0.83248909318962967),
    (0.184, 0.0321, 0.96632845499278603),
    (0.337, 32.3105, 0.022395855433007808),
    (0.218, 3.1687, 0.21392993168743445),
    (0.644, 0.3993, 0.66566020721563896),
    (0.559, 0.0186, 0.97941424102656046),
    (0.105, 0.0768, 0.92507550287888951),
    (0.683, 0.6897, 0.51335803841147694),
    (0.342, 3.2955, 0.18992779362600101),
    (0.471, 0.1945, 0.81394504107075591),
    (0.789, 10.1316, 0.025798345852467401),
    (0.277, 2.9514, 0.21800823492425507),
    (0.538, 57.955, 0.0090216025712088867),
    (0.728, 0.173, 0.83196865200898355),
    (0.962, 0.0322, 0.96784294774760495),
    (0.439, 18.018, 0.03455730149664302),
    (0.191, 1.2663, 0.41332834448727077),
    (0.086, 7.4701, 0.11250862632594565),
    (0.761, 2.9108, 0.12773386360948836),
    (0.864, 0.2234, 0.79360510757154341),
    (0.697, 3.5958, 0.11317348877197542),
    (0.589, 0.9156, 0.44002351631655393),
    (0.831, 115.3795, 0.0015991825904657995),
    (0.491, 7.1755, 0.078932798583926078),
    (0.106, 10.3852, 0.082446676583140279),
    (0.652, 186.3428, 0.0021018550545778568),
    (0.814, 0.1674, 0.8387714372596743),
    (0.409, 7.5025, 0.084388554497059276),
    (0.071, 0.9667, 0.49823548676949087),
];

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[test]
fn mittag_leffler_matches_laplace_oracle() {
    for &(beta, x, want) in ML_ORACLE {
        let got = mittag_leffler(beta, -x).unwrap();
        assert!(((got - want) / want).abs() < 1e-10, "β = {beta}, x = {x}: {got} vs {want}");
    }
}

#[test]
fn mittag_leffler_within_rational_bounds() {
    for beta in [0.3, 0.5, 0.8] {
        for u in log_grid(1e-3, 1e2, 200) {
            let b = ml_bounds(beta, u).unwrap();
            let e = mittag_leffler(beta, -u).unwrap();
            assert!(b.lower <= e && e <= b.upper, "β = {beta}, u = {u}: {} ≤ {e} ≤ {}", b.lower, b.upper);
        }
    }
}

#[test]
fn mittag_leffler_exponential_and_half_order() {
    let mut u = 0.0;
    while u <= 30.0 {
        assert!((mittag_leffler(1.0, -u).unwrap() - (-u).exp()).abs() < 1e-12);
        u += 0.05;
    }
    let mut u = 0.0f64;
    while u <= 10.0 {
        let want = (u * u).exp() * erfc(u);
        let got = mittag_leffler(0.5, -u).unwrap();
        assert!((got - want).abs() < 1e-8 && ((got - want) / want).abs() < 1e-10, "u = {u}");
        u += 0.01;
    }
}

#[test]
fn mittag_leffler_strictly_decreasing() {
    for beta in [0.1, 0.3, 0.5, 0.8, 0.95, 0.999] {
        let mut prev = 1.0;
        for u in log_grid(1e-3, 2e2, 600) {
            let e = mittag_leffler(beta, -u).unwrap();
            assert!(e > 0.0 && e < prev, "β = {beta}, u = {u}");
            prev = e;
        }
    }
}

#[test]
fn bessel_k_reflection_equals_quadrature() {
    // K_ν(z) = ∫_0^∞ e^{-z cosh t} cosh(νt) dt, trapezoid (spectrally accurate here)
    let oracle = |nu: f64, z: f64| {
        let upper = (60.0 / z).acosh() + 1.0;
        let n = 20_000;
        let h = upper / n as f64;
        let mut s = 0.5 * (-z).exp();
        for i in 1..=n {
            let t = i as f64 * h;
            s += (-z * t.cosh()).exp() * (nu * t).cosh();
        }
        s * h
    };
    for nu in [-0.45, -0.3, -0.1] {
        for z in [0.1, 0.5, 1.0, 2.0, 3.5, 6.0, 10.0] {
            let k = bessel_k(nu, z).unwrap();
            let o = oracle(nu, z);
            assert!(((k - o) / o).abs() < 1e-7, "ν = {nu}, z = {z}");
            let refl = bessel_k_reflection(nu, z).unwrap();
            assert!(((refl - o) / o).abs() < 1e-7, "reflection ν = {nu}, z = {z}");
        }
    }
}

proptest! {
    #[test]
    fn k_symmetric(nu in 0.01f64..0.49, z in 0.01f64..60.0) {
        let a = bessel_k(nu, z).unwrap();
        let b = bessel_k(-nu, z).unwrap();
        prop_assert!(((a - b) / a).abs() < 1e-10);
    }

    #[test]
    fn ml_between_bounds(beta in 0.02f64..0.98, u in 0.0f64..200.0) {
        let b = ml_bounds(beta, u).unwrap();
        let e = mittag_leffler(beta, -u).unwrap();
        prop_assert!(b.lower <= e * (1.0 + 1e-12) && e <= b.upper * (1.0 + 1e-12));
        prop_assert!(0.0 < b.lower && b.lower <= b.upper && b.upper <= 1.0);
    }

    #[test]
    fn erfc_reflection(z in -10.0f64..10.0) {
        prop_assert!((erfc(z) + erfc(-z) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn i_recurrence(nu in -0.9f64..3.0, z in 0.05f64..60.0) {
        // I_{ν-1} - I_{ν+1} = (2ν/z) I_ν
        prop_assume!((nu - nu.round()).abs() > 1e-3);
        let lhs = bessel_i(nu - 1.0, z).unwrap() - bessel_i(nu + 1.0, z).unwrap();
        let rhs = 2.0 * nu / z * bessel_i(nu, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * bessel_i(nu - 1.0, z).unwrap().abs().max(rhs.abs()));
    }
}
