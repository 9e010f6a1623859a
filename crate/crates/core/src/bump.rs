//! Pinned smooth cutoffs built from the mollifier `s(t) = e^{-1/t}`.
//!
//! * [`theta`]: bump supported in `[1/2, 2]` with `Σ_M Θ(2^M τ) = 1` for
//!   every `τ > 0`; also used as the dyadic bump `φ`.
//! * [`plateau`]: `χ̃`, equal to 1 on `[-1, 1]` and 0 outside `[-3/2, 3/2]`.
//! * [`lower_cutoff`]: 1 on `[-1/4, ∞)`, 0 on `(-∞, -1/2]`.

#[inline]
pub fn mollifier(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    let a = mollifier(x);
    let b = mollifier(1.0 - x);
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Unnormalized bump on `(1/2, 2)`.
#[inline]
pub fn raw_bump(t: f64) -> f64 {
    mollifier(t - 0.5) * mollifier(2.0 - t)
}

/// Binary mantissa of a positive finite number, in `[1, 2)`.
fn mantissa(u: f64) -> f64 {
    let mut e = u.log2().floor() as i32;
    let mut b = u * 2f64.powi(-e);
    while b >= 2.0 {
        e += 1;
        b = u * 2f64.powi(-e);
    }
    while b < 1.0 {
        e -= 1;
        b = u * 2f64.powi(-e);
    }
    b
}

/// `Σ_M ρ(2^M u)`. Only two dyadic multiples of `u` land in `(1/2, 2)`:
/// `b/2` and `b` with `b` the mantissa. Depending on `u` through `b` only
/// makes the normalization identical along a dyadic orbit.
fn dyadic_sum(u: f64) -> f64 {
    let b = mantissa(u);
    raw_bump(0.5 * b) + raw_bump(b)
}

/// `Θ(τ)`: smooth, supported in `[1/2, 2]`, dyadic partition of unity.
pub fn theta(t: f64) -> f64 {
    if !(t > 0.5 && t < 2.0) {
        return 0.0;
    }
    raw_bump(t) / dyadic_sum(t)
}

/// `Θ_M(τ) = Θ(2^M τ)`.
pub fn theta_m(m: i32, tau: f64) -> f64 {
    theta(2f64.powi(m) * tau)
}

/// `χ̃`.
pub fn plateau(t: f64) -> f64 {
    smooth_step((1.5 - t.abs()) / 0.5)
}

/// Cutoff used to continue the dyadic pieces smoothly to negative `η₂`.
pub fn lower_cutoff(t: f64) -> f64 {
    smooth_step((t + 0.5) / 0.25)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity() {
        for i in 0..2000 {
            let tau = 1e-6 * 1.0137f64.powi(i);
            let s: f64 = (-40..40).map(|m| theta_m(m, tau)).sum();
            assert!((s - 1.0).abs() < 1e-15, "{tau} {s}");
        }
    }

    #[test]
    fn normalized_at_one() {
        assert_eq!(theta(1.0), 1.0);
        assert_eq!(theta(0.5), 0.0);
        assert_eq!(theta(2.0), 0.0);
    }

    #[test]
    fn plateau_shape() {
        assert_eq!(plateau(0.3), 1.0);
        assert_eq!(plateau(-1.0), 1.0);
        assert_eq!(plateau(1.5), 0.0);
        assert!(plateau(1.25) > 0.0 && plateau(1.25) < 1.0);
        assert_eq!(lower_cutoff(-0.25), 1.0);
        assert_eq!(lower_cutoff(-0.5), 0.0);
    }
}
