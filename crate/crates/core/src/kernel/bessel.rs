//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! For `x <= 2` the ascending series (in `x²/4`, with the logarithmic term) is
//! summed directly; it converges like `1/(k!)²`. For `x > 2` Steed's continued
//! fraction for `K_0` and the ratio `K_1/K_0` is used. Both routes are accurate
//! to a few ulps over the whole range.

use crate::error::{Error, Result};
use crate::math::{self, EULER_GAMMA, PI};

const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 200;

/// `K_0(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_domain("K0", x)?;
    Ok(k0_k1(x).0)
}

/// `K_1(x)` for `x > 0`.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_domain("K1", x)?;
    Ok(k0_k1(x).1)
}

fn check_domain(function: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain { function, x })
    }
}

/// `(K_0(x), K_1(x))` without the domain check. `x` must be positive.
pub(crate) fn k0_k1(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        series(x)
    } else if x > 700.0 {
        (0.0, 0.0)
    } else {
        steed(x)
    }
}

fn series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let log_half = math::ln(0.5 * x);

    // K0 = -(ln(x/2) + γ) I0 + Σ H_k y^k / (k!)²
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut harmonic_sum = 0.0;
    let mut h = 0.0;
    // K1 = 1/x + (x/2) Σ y^k / (k!(k+1)!) [ln(x/2) + γ - (H_k + H_{k+1})/2]
    let mut u = 1.0;
    let mut k1_sum = log_half + EULER_GAMMA - 0.5;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= y / (kf * kf);
        h += 1.0 / kf;
        i0 += term;
        harmonic_sum += h * term;

        u *= y / (kf * (kf + 1.0));
        let h_next = h + 1.0 / (kf + 1.0);
        k1_sum += u * (log_half + EULER_GAMMA - 0.5 * (h + h_next));

        if term < 1e-18 * i0 && u < 1e-18 {
            break;
        }
    }
    let k0 = -(log_half + EULER_GAMMA) * i0 + harmonic_sum;
    let k1 = 1.0 / x + 0.5 * x * k1_sum;
    (k0, k1)
}

// Continued fraction CF2 (Steed's algorithm, Thompson & Barnett) for order zero.
fn steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < f64::EPSILON {
            break;
        }
    }
    let h = a1 * h;
    let k0 = math::sqrt(PI / (2.0 * x)) * math::exp(-x) / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `K_ν(x) = ∫_0^∞ exp(-x cosh t) cosh(ν t) dt` by the trapezoidal rule,
    /// which converges geometrically for this analytic, doubly decaying integrand.
    fn quadrature(nu: f64, x: f64) -> f64 {
        let h = 2e-3;
        let mut sum = 0.5 * math::exp(-x);
        let mut t = h;
        loop {
            let v = math::exp(-x * libm::cosh(t)) * libm::cosh(nu * t);
            sum += v;
            if v < 1e-300 || t > 40.0 {
                break;
            }
            t += h;
        }
        sum * h
    }

    #[test]
    fn k0_reference_values() {
        assert!((bessel_k0(1.0).unwrap() - 0.4210244382).abs() < 1e-10);
        assert!((bessel_k0(0.5).unwrap() - 0.9244190712).abs() < 1e-10);
    }

    #[test]
    fn k1_reference_values() {
        assert!((bessel_k1(1.0).unwrap() - 0.6019072302).abs() < 1e-10);
        assert!((bessel_k1(2.0).unwrap() - 0.1398658818).abs() < 1e-10);
    }

    #[test]
    fn matches_quadrature_over_range() {
        let mut x = 1e-6;
        while x <= 30.0 {
            let (k0, k1) = k0_k1(x);
            let q0 = quadrature(0.0, x);
            let q1 = quadrature(1.0, x);
            assert!((k0 - q0).abs() <= 1e-9, "K0({x}): {k0} vs {q0}");
            // K1 ~ 1/x, so compare relatively near the origin
            assert!((k1 - q1).abs() <= 1e-9 * q1.max(1.0), "K1({x}): {k1} vs {q1}");
            x *= 1.07;
        }
        for x in [1.999, 2.0, 2.001, 2.5, 7.0, 29.9] {
            assert!((k0_k1(x).0 - quadrature(0.0, x)).abs() < 1e-12);
            assert!((k0_k1(x).1 - quadrature(1.0, x)).abs() < 1e-12);
        }
    }

    #[test]
    fn small_argument_expansion() {
        let x = 1e-4;
        let k0 = bessel_k0(x).unwrap();
        assert!((k0 + math::ln(x / 2.0) + EULER_GAMMA).abs() < 1e-6);
    }

    #[test]
    fn derivative_of_k0_is_minus_k1() {
        let (x, h) = (1.0, 1e-5);
        let fd = -(bessel_k0(x + h).unwrap() - bessel_k0(x - h).unwrap()) / (2.0 * h);
        assert!((fd - bessel_k1(x).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn monotone_and_positive() {
        let mut prev = k0_k1(1e-6);
        let mut x = 1e-6;
        while x < 30.0 {
            x *= 1.01;
            let cur = k0_k1(x);
            assert!(cur.0 < prev.0 && cur.1 < prev.1, "not decreasing at {x}");
            assert!(cur.0 > 0.0 && cur.1 > 0.0);
            prev = cur;
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_k0(0.0), Err(Error::Domain { .. })));
        assert!(matches!(bessel_k1(-1.0), Err(Error::Domain { .. })));
        assert!(bessel_k0(f64::NAN).is_err());
    }
}
