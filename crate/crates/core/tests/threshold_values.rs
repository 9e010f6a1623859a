use grushin::dims::Dims;
use grushin::thresholds::{threshold, threshold_inv, threshold_table, Region, Source, Variant};
use proptest::prelude::*;

fn t(u1: f64, u2: f64, v: Variant) -> Option<f64> {
    threshold_inv(u1, u2, Dims::default(), v).unwrap().threshold
}

#[test]
fn general_corners() {
    let v = Variant::General;
    assert_eq!(t(0.0, 0.0, v), Some(1.5));
    assert_eq!(t(0.5, 0.0, v), Some(0.5));
    assert_eq!(t(0.0, 0.5, v), Some(0.5));
    assert_eq!(t(0.5, 0.5, v), Some(0.0));
    assert_eq!(t(1.0, 0.0, v), Some(1.5));
    assert_eq!(t(0.0, 1.0, v), Some(1.5));
    assert_eq!(t(1.0, 0.5, v), Some(1.0));
    assert_eq!(t(0.5, 1.0, v), Some(1.0));
    assert_eq!(t(1.0, 1.0, v), Some(2.0));
}

#[test]
fn restricted_corners() {
    let v = Variant::Restricted;
    assert_eq!(t(0.0, 0.0, v), Some(1.5));
    assert_eq!(t(0.5, 0.0, v), Some(0.5));
    assert_eq!(t(0.5, 0.5, v), Some(0.0));
    assert_eq!(t(1.0, 0.0, v), Some(1.0));
    assert_eq!(t(0.0, 1.0, v), Some(1.0));
    assert_eq!(t(1.0, 0.5, v), Some(1.0));
    assert_eq!(t(1.0, 1.0, v), Some(2.0));
}

#[test]
fn corner_closure_is_labelled() {
    let r = threshold_inv(0.0, 0.0, Dims::default(), Variant::General).unwrap();
    assert_eq!(r.source, Source::Corner);
    assert_eq!(r.region, Region::II);
}

#[test]
fn larger_dimensions() {
    // d1 = 2, d2 = 1: d = 3, Q = 4, D = 3
    let dims = Dims::new(2, 1).unwrap();
    assert_eq!((dims.d(), dims.q(), dims.big_d(), dims.frak_d()), (3, 4, 3, 3));
    assert_eq!(threshold_inv(0.5, 0.5, dims, Variant::General).unwrap().threshold, Some(0.0));
    assert_eq!(threshold_inv(1.0, 1.0, dims, Variant::Restricted).unwrap().threshold, Some(3.0));
    // d1 = 1, d2 = 2: D = 4 > d, 𝔇 = d + 1 = 4
    let dims = Dims::new(1, 2).unwrap();
    assert_eq!((dims.big_d(), dims.frak_d()), (4, 4));
}

#[test]
fn table_covers_lattice() {
    let rows = threshold_table(Dims::default(), Variant::General, 10).unwrap();
    assert_eq!(rows.len(), 121);
    assert!(threshold(0.5, 2.0, Dims::default(), Variant::General).is_err());
    assert!(Variant::parse("other").is_err());
}

fn unit() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0f64..=1.0]
}

proptest! {
    #[test]
    fn symmetric_and_nonnegative(u1 in unit(), u2 in unit(), d1 in 1usize..4, d2 in 1usize..4) {
        let dims = Dims::new(d1, d2).unwrap();
        for v in [Variant::General, Variant::Restricted] {
            let a = threshold_inv(u1, u2, dims, v).unwrap().threshold;
            let b = threshold_inv(u2, u1, dims, v).unwrap().threshold;
            prop_assert_eq!(a, b);
            if let Some(a) = a {
                prop_assert!(a >= 0.0);
            }
        }
    }

    #[test]
    fn restricted_never_worse(u1 in unit(), u2 in unit()) {
        if let Some(g) = t(u1, u2, Variant::General) {
            let r = t(u1, u2, Variant::Restricted);
            prop_assert!(r.is_some_and(|r| r <= g + 1e-15));
        }
    }

    #[test]
    fn exponent_and_reciprocal_forms_agree(p1 in 1.0f64..50.0, p2 in 1.0f64..50.0) {
        let a = threshold(p1, p2, Dims::default(), Variant::General).unwrap();
        let b = threshold_inv(1.0 / p1, 1.0 / p2, Dims::default(), Variant::General).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn big_d_is_d_when_d2_small(d1 in 1usize..8, d2 in 1usize..8) {
        let dims = Dims::new(d1, d2).unwrap();
        if d2 <= d1 {
            prop_assert_eq!(dims.big_d(), dims.d());
            prop_assert_eq!(dims.frak_d(), dims.d());
        } else {
            prop_assert_eq!(dims.big_d(), 2 * d2);
        }
        prop_assert!(dims.frak_d() <= dims.d() + 1);
    }
}
