use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Largest accepted `|x|`.
pub const BESSEL_MAX_ARG: f64 = 700.0;
/// Switch from the power series to the asymptotic expansion.
pub const BESSEL_SEAM: f64 = 12.0;

/// Bessel function of the first kind of order 0.
pub fn bessel_j0(x: f64) -> Result<f64> {
    bessel(0, x)
}

/// Bessel function of the first kind of order 1, `J₁ = −J₀'`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    bessel(1, x)
}

fn bessel(order: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside [-{BESSEL_MAX_ARG}, {BESSEL_MAX_ARG}]"
        )));
    }
    let parity = if order == 1 && x < 0.0 { -1.0 } else { 1.0 };
    let ax = x.abs();
    let v = if ax <= BESSEL_SEAM {
        series(order, ax)
    } else {
        asymptotic(order, ax)
    };
    Ok(parity * v)
}

/// `Σ_k (−1)^k (x/2)^{2k+ν} / (k! (k+ν)!)`.
pub(crate) fn series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    for k in 1..200 {
        term *= q / (k as f64 * (k + order as usize) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 5 {
            break;
        }
    }
    sum
}

/// Hankel expansion `√(2/πx) (P cos ω − Q sin ω)`, truncated at its smallest term.
pub(crate) fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let omega = x - order as f64 * PI / 2.0 - FRAC_PI_4;
    let (mut p, mut q) = (1.0, 0.0);
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..100 {
        let m = (2 * k - 1) as f64;
        a *= (mu - m * m) / (k as f64 * 8.0 * x);
        if a.abs() >= last {
            break;
        }
        last = a.abs();
        // Terms alternate P, Q with signs + , − , − , + , + , ...
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
    }
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bisect(mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if series(0, lo).signum() == series(0, mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn value_at_zero() {
        assert_eq!(bessel_j0(0.0).unwrap(), 1.0);
        assert_eq!(bessel_j1(0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_zero() {
        let root = bisect(2.0, 3.0);
        assert!((root - 2.404825557695773).abs() < 1e-12);
        assert!(bessel_j0(2.404825557695773).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn seam_agreement() {
        for x in [11.5, 12.0, 12.5, 14.0] {
            for order in [0, 1] {
                let d = (series(order, x) - asymptotic(order, x)).abs();
                assert!(d <= 1e-9, "order {order} x {x}: {d:e}");
            }
        }
    }

    #[test]
    fn j1_is_minus_j0_derivative() {
        for x in [0.3, 2.0, 7.7, 13.0, 40.0, -5.0] {
            let h = 1e-5;
            let fd = (bessel_j0(x + h).unwrap() - bessel_j0(x - h).unwrap()) / (2.0 * h);
            assert!((fd + bessel_j1(x).unwrap()).abs() < 1e-9, "x {x}");
        }
    }

    #[test]
    fn large_argument_zero_and_domain() {
        // McMahon's expansion of the 100th zero of J₀.
        let b = (100.0 - 0.25) * PI;
        let z = b + 1.0 / (8.0 * b) - 124.0 / (3.0 * (8.0 * b).powi(3));
        assert!(bessel_j0(z).unwrap().abs() < 1e-10);
        assert!(bessel_j0(700.0).is_ok());
        assert!(matches!(bessel_j0(700.5), Err(Error::Domain(_))));
        assert!(bessel_j0(f64::NAN).is_err());
    }
}
