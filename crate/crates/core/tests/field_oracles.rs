use grushin::family::random_field;
use grushin::field::{analyze_on, lp_norm, mixed_norm, synthesize, SpectralField};
use grushin::grid::{make_grid, Grid, GridSpec};
use grushin::hermite::scaled_hermite_eval;
use grushin::io::{read_binary, read_csv, write_binary, write_csv};
use grushin::{Complex64, Error};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid() -> Grid {
    make_grid(&GridSpec::default()).unwrap()
}

/// Single coefficient against the closed form
/// `(2π)^{-d2} Δλ^{d2} e^{iλ·x''} C Φ_μ^λ(x')`.
fn check_single_mode(g: &Grid, node: Vec<i64>, mu: Vec<usize>, c: Complex64) {
    let deg: usize = mu.iter().sum();
    let f = SpectralField::from_fn(g, vec![node.clone()], deg, |_, m| if m == mu.as_slice() { c } else { Complex64::new(0.0, 0.0) })
        .unwrap();
    let h = synthesize(&f, g).unwrap();
    let lam = g.lambda_vec(&node);
    let pre = (g.lambda_weight() / (2.0 * PI)).powi(g.dims.d2 as i32);
    let n2 = g.n2();
    let mut worst = 0.0f64;
    for i in (0..g.len()).step_by(37) {
        let x1 = g.x1.point(i / n2);
        let x2 = g.x2_point(i % n2);
        let phase: f64 = lam.iter().zip(&x2).map(|(a, b)| a * b).sum();
        let want = Complex64::from_polar(1.0, phase) * c * pre * scaled_hermite_eval(&mu, &lam, &x1).unwrap();
        worst = worst.max((h.values[i] - want).norm());
    }
    assert!(worst < 1e-14, "node {node:?} mode {mu:?}: {worst:e}");
}

#[test]
fn single_mode_closed_form() {
    let g = grid();
    check_single_mode(&g, vec![5], vec![2], Complex64::new(0.7, -0.2));
    check_single_mode(&g, vec![-9], vec![0], Complex64::new(-1.0, 0.5));
    let g21 = make_grid(&GridSpec { d1: 2, x1_count: 24, ..GridSpec::default() }).unwrap();
    check_single_mode(&g21, vec![12], vec![1, 2], Complex64::new(0.3, 0.9));
}

#[test]
fn single_mode_norm() {
    // |C|² (2π)^{-d2} Δλ^{d2} for one normalized mode
    let g = grid();
    let node = vec![20];
    let f = SpectralField::from_fn(&g, vec![node], 3, |_, m| if m == [3] { Complex64::new(2.0, 0.0) } else { Complex64::new(0.0, 0.0) })
        .unwrap();
    let h = synthesize(&f, &g).unwrap();
    let want = 4.0 * g.lambda_weight() / (2.0 * PI);
    let got = lp_norm(&h, 2.0).unwrap().powi(2);
    assert!((got - want).abs() / want < 1e-10, "{got} vs {want}");
    assert!((f.plancherel_sq() - want).abs() / want < 1e-14);
}

#[test]
fn mixed_norm_reduces_to_lp() {
    let g = grid();
    let f = random_field(&g, g.resolvable_support(3), 3, 9).unwrap();
    let h = synthesize(&f, &g).unwrap();
    for p in [1.0, 2.0, 3.5] {
        let a = mixed_norm(&h, p, p).unwrap();
        let b = lp_norm(&h, p).unwrap();
        assert!((a - b).abs() / b < 1e-12);
    }
    assert_eq!(mixed_norm(&h, f64::INFINITY, f64::INFINITY).unwrap(), lp_norm(&h, f64::INFINITY).unwrap());
    assert!(lp_norm(&h, 0.0).is_err());
}

#[test]
fn unresolvable_degree_rejected() {
    let g = grid();
    let h = synthesize(&random_field(&g, g.resolvable_support(2), 2, 1).unwrap(), &g).unwrap();
    match analyze_on(&h, 2, vec![vec![0]]) {
        Err(Error::Unresolvable { degree, .. }) => assert_eq!(degree, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn binary_and_csv_round_trips_are_bit_exact() {
    let g = grid();
    let h = synthesize(&random_field(&g, g.resolvable_support(4), 4, 3).unwrap(), &g).unwrap();
    let mut bin = vec![];
    write_binary(&h, &mut bin).unwrap();
    let back = read_binary(bin.as_slice(), &g).unwrap();
    assert!(back.values.iter().zip(&h.values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));

    let mut csv = vec![];
    write_csv(&h, Some("abc"), &mut csv).unwrap();
    assert!(csv.starts_with(b"# config_hash=abc\n"));
    let back = read_csv(csv.as_slice(), &g).unwrap();
    assert!(back.values.iter().zip(&h.values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));

    bin.push(0);
    assert!(matches!(read_binary(bin.as_slice(), &g), Err(Error::Format(_))));
    let other = make_grid(&GridSpec { x2_count: 128, ..GridSpec::default() }).unwrap();
    assert!(matches!(read_binary(&bin[..bin.len() - 1], &other), Err(Error::Mismatch(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn round_trip_any_seed(seed in any::<u64>(), degree in 0usize..10) {
        let g = grid();
        let support = g.resolvable_support(degree);
        let f = random_field(&g, support.clone(), degree, seed).unwrap();
        let h = synthesize(&f, &g).unwrap();
        let back = analyze_on(&h, degree, support).unwrap();
        let num: f64 = f.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = f.coeffs.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((num / den).sqrt() < 1e-8);
        let e2 = lp_norm(&h, 2.0).unwrap().powi(2);
        prop_assert!((e2 - f.plancherel_sq()).abs() / e2 < 1e-8);
    }

    #[test]
    fn synthesis_is_linear(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let g = grid();
        let s = g.resolvable_support(3);
        let f1 = random_field(&g, s.clone(), 3, seed).unwrap();
        let f2 = random_field(&g, s, 3, seed ^ 0xff).unwrap();
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(0.0, b));
        let lhs = synthesize(&f1.combine(ca, &f2, cb).unwrap(), &g).unwrap();
        let (h1, h2) = (synthesize(&f1, &g).unwrap(), synthesize(&f2, &g).unwrap());
        let peak = lhs.max_abs().max(1e-300);
        for i in 0..g.len() {
            prop_assert!((lhs.values[i] - (h1.values[i] * ca + h2.values[i] * cb)).norm() <= 1e-12 * peak.max(1.0));
        }
    }
}
