use grushin::hermite::{hermite_all, hermite_eval, multi_indices, projection_kernel, scaled_hermite_eval, tail_radius};
use proptest::prelude::*;
use std::f64::consts::PI;

/// `H_n(t) = n! Σ_m (-1)^m (2t)^{n-2m} / (m! (n-2m)!)`, normalized.
fn explicit_hermite(n: usize, t: f64) -> f64 {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    let mut h = 0.0;
    for m in 0..=n / 2 {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        h += sign * (2.0 * t).powi((n - 2 * m) as i32) / (fact(m) * fact(n - 2 * m));
    }
    h *= fact(n);
    h * (-0.5 * t * t).exp() / (2f64.powi(n as i32) * fact(n) * PI.sqrt()).sqrt()
}

#[test]
fn recurrence_matches_explicit_formula() {
    for n in 0..=20 {
        for i in 0..=80 {
            let t = -4.0 + 0.1 * i as f64;
            let (a, b) = (hermite_eval(n, t), explicit_hermite(n, t));
            assert!((a - b).abs() < 1e-11, "n={n} t={t}: {a} vs {b}");
        }
    }
}

#[test]
fn batch_matches_single() {
    let mut out = vec![0.0; 301];
    for t in [-17.0, -3.3, 0.0, 0.4, 12.5, 40.0] {
        hermite_all(300, t, &mut out);
        for (l, v) in out.iter().enumerate() {
            assert_eq!(*v, hermite_eval(l, t), "l={l} t={t}");
        }
    }
}

#[test]
fn orthonormal_by_fine_midpoint_rule() {
    // independent quadrature: uniform midpoint rule, spectrally accurate for
    // Gaussian-decaying integrands
    let n = 12;
    let r = tail_radius(n) + 4.0;
    let m = 6000;
    let dx = 2.0 * r / m as f64;
    let xs: Vec<f64> = (0..m).map(|i| -r + (i as f64 + 0.5) * dx).collect();
    for a in 0..=n {
        for b in 0..=n {
            let s: f64 = xs.iter().map(|&x| hermite_eval(a, x) * hermite_eval(b, x)).sum::<f64>() * dx;
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((s - want).abs() < 1e-12, "({a},{b}) = {s}");
        }
    }
}

#[test]
fn scaled_functions_carry_the_dilation() {
    for lam in [0.25, 1.0, 3.0] {
        for x in [-1.2, 0.0, 0.7] {
            let v = scaled_hermite_eval(&[3], &[lam], &[x]).unwrap();
            let want = lam.powf(0.25) * hermite_eval(3, lam.sqrt() * x);
            assert!((v - want).abs() < 1e-15);
            // only |λ| matters
            assert_eq!(v, scaled_hermite_eval(&[3], &[-lam], &[x]).unwrap());
        }
    }
    assert!(scaled_hermite_eval(&[0], &[0.0], &[1.0]).is_err());
}

#[test]
fn projection_kernel_is_sum_over_shell() {
    let (lam, x, y) = (0.8, [0.3, -0.9], [1.1, 0.2]);
    for k in 0..6 {
        let want: f64 = multi_indices(2, k)
            .iter()
            .map(|mu| scaled_hermite_eval(mu, &[lam], &x).unwrap() * scaled_hermite_eval(mu, &[lam], &y).unwrap())
            .sum();
        let got = projection_kernel(k, &[lam], &x, &y).unwrap();
        assert!((got - want).abs() < 1e-14, "k={k}");
        assert_eq!(multi_indices(2, k).len(), k + 1);
    }
}

proptest! {
    #[test]
    fn parity(l in 0usize..400, t in -40.0f64..40.0) {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert_eq!(hermite_eval(l, -t), sign * hermite_eval(l, t));
    }

    #[test]
    fn bounded_by_pi_quarter(l in 0usize..2000, t in -80.0f64..80.0) {
        prop_assert!(hermite_eval(l, t).abs() <= PI.powf(-0.25) * (1.0 + 1e-10));
    }

    #[test]
    fn projection_diagonal_nonnegative(k in 0usize..30, lam in 0.01f64..10.0, x in -5.0f64..5.0) {
        prop_assert!(projection_kernel(k, &[lam], &[x], &[x]).unwrap() >= 0.0);
    }
}
