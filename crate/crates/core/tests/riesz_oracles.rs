use grushin::family::random_field;
use grushin::field::{synthesize, SpectralField};
use grushin::grid::{make_grid, Grid, GridSpec};
use grushin::quad::Composite;
use grushin::riesz::{bilinear_apply_direct, bilinear_apply_separated, dilation_covariance_check, fourier_coeff, FourierSeriesExpansion, RieszParams};
use grushin::symbol::{dyadic_value, riesz_profile};
use grushin::{Complex64, Error, Symbol2D};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid() -> Grid {
    make_grid(&GridSpec::default()).unwrap()
}

fn single(g: &Grid, node: i64, k: usize, c: Complex64) -> SpectralField {
    SpectralField::from_fn(g, vec![vec![node]], k, |_, m| if m[0] == k { c } else { Complex64::new(0.0, 0.0) }).unwrap()
}

#[test]
fn fft_coefficients_match_direct_sum_and_gauss_legendre() {
    let exp = FourierSeriesExpansion::new(3, 1.5);
    let q = Composite::new(-1.0, 1.0, 400, 16);
    for eta1 in [0.0, 0.3, 0.81, 0.95] {
        let table = exp.coefficient_table(eta1);
        for l in [-40i64, -3, 0, 1, 7, 64] {
            let fft = table[exp.table_index(l)];
            let direct = fourier_coeff(&exp, l, eta1);
            assert!((fft - direct).norm() < 1e-14, "l={l} eta1={eta1}");
            let re = 0.5 * q.integrate(|t| exp.extended(eta1, t) * (PI * l as f64 * t).cos());
            let im = -0.5 * q.integrate(|t| exp.extended(eta1, t) * (PI * l as f64 * t).sin());
            assert!((fft - Complex64::new(re, im)).norm() < 1e-10, "l={l} eta1={eta1}: {fft} vs {re}+{im}i");
        }
    }
}

#[test]
fn series_reconstructs_the_piece() {
    for (j, alpha) in [(2, 1.0), (4, 0.5)] {
        let exp = FourierSeriesExpansion::new(j, alpha);
        let piece = Symbol2D::dyadic(j, alpha);
        let half = exp.samples as i64 / 2;
        for eta1 in [0.1, 0.6, 0.9] {
            let table = exp.coefficient_table(eta1);
            for i in 0..=50 {
                let eta2 = i as f64 / 50.0;
                let s: Complex64 = (-half + 1..half).map(|l| table[exp.table_index(l)] * exp.psi(l, eta2)).sum();
                let want = piece.eval(eta1, eta2).re;
                assert!((s.re - want).abs() < 1e-9 && s.im.abs() < 1e-9, "j={j} ({eta1},{eta2}): {s} vs {want}");
            }
        }
    }
}

#[test]
fn dyadic_value_localizes() {
    for j in 1..8 {
        let lo = 2f64.powi(-(j as i32) - 1);
        assert_eq!(dyadic_value(j, 1.0, 0.99 * lo), 0.0);
        assert_eq!(dyadic_value(j, 1.0, 4.01 * lo), 0.0);
        assert!(dyadic_value(j, 1.0, 2.0 * lo) > 0.0);
        assert!(dyadic_value(j, 1.0, 2.0 * lo) <= riesz_profile(2.0 * lo, 1.0));
    }
}

#[test]
fn direct_on_single_modes_is_a_pointwise_product() {
    // B(f, g) = m([k1]|λ1|, [k2]|λ2|) · f · g when f and g are single modes
    let g = grid();
    let m = Symbol2D::riesz(1.3, 4.0);
    for (n1, k1, n2, k2) in [(3, 1, -7, 0), (10, 0, 2, 2), (-4, 2, -4, 1)] {
        let f = single(&g, n1, k1, Complex64::new(0.8, 0.1));
        let h = single(&g, n2, k2, Complex64::new(-0.2, 1.0));
        let e1 = (2 * k1 + 1) as f64 * g.lambda_abs(&[n1]);
        let e2 = (2 * k2 + 1) as f64 * g.lambda_abs(&[n2]);
        let c = m.eval(e1, e2);
        let out = bilinear_apply_direct(&m, &f, &h, &g).unwrap();
        let (sf, sh) = (synthesize(&f, &g).unwrap(), synthesize(&h, &g).unwrap());
        let peak = out.max_abs().max(1e-300);
        assert!(c.norm() > 0.0);
        for i in 0..g.len() {
            assert!((out.values[i] - c * sf.values[i] * sh.values[i]).norm() < 1e-12 * peak);
        }
    }
}

#[test]
fn fixed_truncation_with_large_tail_is_an_error() {
    let g = grid();
    let s = g.resolvable_support(2);
    let f = random_field(&g, s.clone(), 2, 1).unwrap();
    let h = random_field(&g, s, 2, 2).unwrap();
    let exp = FourierSeriesExpansion::new(3, 1.0).with_truncation(2);
    assert!(matches!(bilinear_apply_separated(&exp, &f, &h, &g, Some(1e-9)), Err(Error::Truncation { .. })));
    // without a tolerance the truncated sum is returned with its tail
    let (_, info) = bilinear_apply_separated(&exp, &f, &h, &g, None).unwrap();
    assert_eq!(info.truncation, 2);
    assert!(info.tail > 1e-9);
}

#[test]
fn dilation_at_non_dyadic_factor() {
    let g = grid();
    let s = g.resolvable_support(4);
    let f = random_field(&g, s.clone(), 4, 31).unwrap();
    let h = random_field(&g, s, 4, 32).unwrap();
    let p = RieszParams::new(1.0, 1.0, g.dims).unwrap();
    for t in [3.0, 0.7] {
        let rep = dilation_covariance_check(&p, &f, &h, t, &g).unwrap();
        assert!(rep.max_ratio <= 1e-10, "t={t}: {}", rep.max_ratio);
    }
    assert!(dilation_covariance_check(&p, &f, &h, 0.0, &g).is_err());
    assert!(RieszParams::new(-1.0, 1.0, g.dims).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn direct_is_bilinear(seed in any::<u64>(), a in -2.0f64..2.0) {
        let g = grid();
        let s = g.resolvable_support(3);
        let f1 = random_field(&g, s.clone(), 3, seed).unwrap();
        let f2 = random_field(&g, s.clone(), 3, seed.wrapping_add(1)).unwrap();
        let h = random_field(&g, s, 3, seed.wrapping_add(2)).unwrap();
        let m = Symbol2D::dyadic(2, 1.0);
        let ca = Complex64::new(a, 0.5);
        let one = Complex64::new(1.0, 0.0);
        let lhs = bilinear_apply_direct(&m, &f1.combine(one, &f2, ca).unwrap(), &h, &g).unwrap();
        let b1 = bilinear_apply_direct(&m, &f1, &h, &g).unwrap();
        let b2 = bilinear_apply_direct(&m, &f2, &h, &g).unwrap();
        let peak = lhs.max_abs().max(b1.max_abs()).max(1e-300);
        for i in 0..g.len() {
            prop_assert!((lhs.values[i] - b1.values[i] - ca * b2.values[i]).norm() <= 1e-12 * peak);
        }
    }

    #[test]
    fn separated_matches_direct(seed in any::<u64>(), j in 1u32..4, alpha in 0.5f64..2.5) {
        let g = grid();
        let s = g.resolvable_support(3);
        let f = random_field(&g, s.clone(), 3, seed).unwrap();
        let h = random_field(&g, s, 3, seed.wrapping_add(1)).unwrap();
        let direct = bilinear_apply_direct(&Symbol2D::dyadic(j, alpha), &f, &h, &g).unwrap();
        let (sep, _) = bilinear_apply_separated(&FourierSeriesExpansion::new(j, alpha), &f, &h, &g, None).unwrap();
        prop_assert!(sep.rel_l2_distance(&direct) < 1e-6);
    }
}
