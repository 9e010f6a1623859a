use grushin::family::random_field;
use grushin::field::synthesize;
use grushin::geometry::Point;
use grushin::grid::{make_grid, Grid, GridSpec};
use grushin::hermite::scaled_hermite_eval;
use grushin::multiplier::{apply_linear_multiplier, k_max, linear_kernel, sobolev_norm_1d};
use grushin::{Complex64, Symbol1D};
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid() -> Grid {
    make_grid(&GridSpec::default()).unwrap()
}

/// Kernel by the defining double sum, one scaled Hermite product at a time.
fn kernel_by_definition(f: &Symbol1D, x: &Point, y: &Point, g: &Grid) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n in g.all_lambda() {
        let lam = g.lambda_vec(&n);
        let a = lam[0].abs();
        let mut k = 0;
        while ((2 * k + 1) as f64) * a <= f.support.1 {
            let v = scaled_hermite_eval(&[k], &lam, &x.x1).unwrap() * scaled_hermite_eval(&[k], &lam, &y.x1).unwrap();
            acc += Complex64::from_polar(1.0, lam[0] * (x.x2[0] - y.x2[0])) * f.eval((2 * k + 1) as f64 * a) * v;
            k += 1;
        }
    }
    acc * g.lambda_weight() / (2.0 * PI)
}

#[test]
fn kernel_matches_definition() {
    let g = grid();
    let f = Symbol1D::riesz(1.0, 2.0);
    for (x, y) in [
        (Point::new(vec![0.3], vec![0.7]), Point::new(vec![-0.5], vec![2.0])),
        (Point::new(vec![1.5], vec![-3.0]), Point::new(vec![1.5], vec![-3.0])),
        (Point::new(vec![0.0], vec![0.0]), Point::new(vec![2.2], vec![9.0])),
    ] {
        let a = linear_kernel(&f, &x, &y, &g).unwrap();
        let b = kernel_by_definition(&f, &x, &y, &g);
        assert!((a - b).norm() <= 1e-13 * b.norm().max(1e-3), "{a} vs {b}");
    }
}

#[test]
fn kernel_integrates_to_the_operator() {
    // (F(L) h)(x) = Σ_y K(x, y) h(y) w(y) on the grid
    let g = grid();
    let f = Symbol1D::riesz(1.0, 1.0);
    let field = random_field(&g, g.resolvable_support(4), 4, 17).unwrap();
    let h = synthesize(&field, &g).unwrap();
    let fh = synthesize(&apply_linear_multiplier(&f, &field), &g).unwrap();
    let n2 = g.n2();
    let peak = fh.max_abs();
    for i in [5 * n2 + 3, 31 * n2 + 40, 50 * n2 + 63] {
        let x = Point::new(g.x1.point(i / n2), g.x2_point(i % n2));
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..g.len() {
            let y = Point::new(g.x1.point(j / n2), g.x2_point(j % n2));
            acc += linear_kernel(&f, &x, &y, &g).unwrap() * h.values[j] * g.weight(j);
        }
        assert!((acc - fh.values[i]).norm() <= 1e-8 * peak, "node {i}: {acc} vs {}", fh.values[i]);
    }
}

#[test]
fn kernel_rejects_uncovered_support() {
    let g = grid();
    let p = Point::new(vec![0.0], vec![0.0]);
    assert!(linear_kernel(&Symbol1D::riesz(1.0, 50.0), &p, &p, &g).is_err());
    assert_eq!(linear_kernel(&Symbol1D::zero(), &p, &p, &g).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn sobolev_h1_of_bump_by_finite_differences() {
    let f = Symbol1D::dyadic_bump(1.0);
    let (a, b) = f.support;
    let m = 200_000;
    let dx = (b - a) / m as f64;
    let v = |t: f64| f.eval(t).re;
    let mut s = 0.0;
    for i in 0..m {
        let t = a + (i as f64 + 0.5) * dx;
        let d = (v(t + 0.5 * dx) - v(t - 0.5 * dx)) / dx;
        s += (v(t).powi(2) + d * d) * dx;
    }
    let got = sobolev_norm_1d(&f, 1.0, 8192, 0.5).unwrap().powi(2);
    assert!((got - s).abs() / s < 1e-6, "{got} vs {s}");
    let l2 = sobolev_norm_1d(&f, 0.0, 8192, 0.5).unwrap().powi(2);
    let direct: f64 = (0..m).map(|i| v(a + (i as f64 + 0.5) * dx).powi(2) * dx).sum();
    assert!((l2 - direct).abs() / direct < 1e-8);
}

proptest! {
    #[test]
    fn k_max_brackets_the_support(eta in 0.01f64..50.0, lam in 0.001f64..5.0, d1 in 1usize..4) {
        match k_max(eta, lam, d1) {
            None => prop_assert!((d1 as f64) * lam > eta),
            Some(k) => {
                prop_assert!(((2 * k + d1) as f64) * lam <= eta * (1.0 + 1e-11));
                prop_assert!(((2 * k + 2 + d1) as f64) * lam > eta);
            }
        }
    }

    #[test]
    fn multipliers_compose(seed in any::<u64>(), c1 in 0.3f64..3.0, c2 in 0.3f64..3.0) {
        let g = grid();
        let field = random_field(&g, g.resolvable_support(4), 4, seed).unwrap();
        let (a, b) = (Symbol1D::gaussian(c1), Symbol1D::riesz(2.0, c2));
        let lhs = apply_linear_multiplier(&a, &apply_linear_multiplier(&b, &field));
        let rhs = apply_linear_multiplier(&a.mul(&b), &field);
        for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
            prop_assert!((x - y).norm() <= 1e-14 * x.norm().max(1.0));
        }
    }
}
