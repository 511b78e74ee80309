//! Associated Legendre functions for the angular equation
//! `S'' + λS + (S' sinθ cosθ − n²S)/sin²θ = 0` with `S(θ) = P_l^n(cos θ)`
//! and `λ = l(l+1)`. Condon–Shortley phase throughout.

use crate::error::{Error, Result};
use crate::residual::second_derivative_real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMode {
    l: u32,
    n: i32,
    lambda: f64,
}

impl AngularMode {
    pub fn new(l: u32, n: i32) -> Result<Self> {
        if n.unsigned_abs() > l {
            return Err(Error::OrderExceedsDegree { degree: l, order: n.unsigned_abs() });
        }
        let lf = l as f64;
        Ok(AngularMode { l, n, lambda: lf * (lf + 1.0) })
    }

    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn n(&self) -> i32 {
        self.n
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// `P_l^m(x)` and `P_{l−1}^m(x)` for `m ≥ 0`, by upward recurrence in l
/// starting from `P_m^m = (−1)^m (2m−1)!! (1−x²)^{m/2}`.
fn legendre_pair(l: u32, m: u32, x: f64) -> (f64, f64) {
    let somx2 = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    let mut fact = 1.0;
    for _ in 0..m {
        pmm *= -fact * somx2;
        fact += 2.0;
    }
    if l == m {
        return (pmm, 0.0);
    }
    let mut prev = pmm;
    let mut cur = x * (2 * m + 1) as f64 * pmm;
    for ll in (m + 2)..=l {
        let next = (x * (2 * ll - 1) as f64 * cur - (ll + m - 1) as f64 * prev) / (ll - m) as f64;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn negative_order_factor(l: u32, m: u32) -> f64 {
    // P_l^{−m} = (−1)^m (l−m)!/(l+m)! P_l^m
    let mut ratio = 1.0;
    for j in (l - m + 1)..=(l + m) {
        ratio /= j as f64;
    }
    if m % 2 == 1 {
        -ratio
    } else {
        ratio
    }
}

fn check(l: u32, n: i32, x: f64) -> Result<u32> {
    let m = n.unsigned_abs();
    if m > l {
        return Err(Error::OrderExceedsDegree { degree: l, order: m });
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(format!("|x| must not exceed 1, got {x}")));
    }
    Ok(m)
}

pub fn assoc_legendre(l: u32, n: i32, x: f64) -> Result<f64> {
    let m = check(l, n, x)?;
    let (p, _) = legendre_pair(l, m, x);
    Ok(if n < 0 { p * negative_order_factor(l, m) } else { p })
}

/// `dS/dθ` for `S(θ) = P_l^n(cos θ)`, from
/// `sinθ dS/dθ = l x P_l^m − (l+m) P_{l−1}^m`, valid for `0 < θ < π`.
pub fn assoc_legendre_theta_derivative(l: u32, n: i32, theta: f64) -> Result<f64> {
    let x = theta.cos();
    let m = check(l, n, x)?;
    let s = theta.sin();
    if s == 0.0 {
        return Err(Error::TooCloseToPole { theta, h: 0.0 });
    }
    let (p, p_prev) = legendre_pair(l, m, x);
    let d = (l as f64 * x * p - (l + m) as f64 * p_prev) / s;
    Ok(if n < 0 { d * negative_order_factor(l, m) } else { d })
}

/// Normalized residual of the angular equation at θ, using the separation
/// constant `lambda` (pass `mode.lambda()` for the eigenvalue itself).
pub fn angular_residual_with(mode: &AngularMode, lambda: f64, theta: f64, h: f64) -> Result<f64> {
    if !(theta > 10.0 * h && theta < std::f64::consts::PI - 10.0 * h) {
        return Err(Error::TooCloseToPole { theta, h });
    }
    let (l, n) = (mode.l, mode.n);
    let s = assoc_legendre(l, n, theta.cos())?;
    let ds = assoc_legendre_theta_derivative(l, n, theta)?;
    let d2s = second_derivative_real(|t| assoc_legendre_theta_derivative(l, n, t).unwrap_or(f64::NAN), theta, h);
    let (sin, cos) = theta.sin_cos();
    let n2 = (n as f64) * (n as f64);
    let terms = [d2s, lambda * s, ds * cos / sin, -n2 * s / (sin * sin)];
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    let total: f64 = terms.iter().sum();
    if !total.is_finite() {
        return Err(Error::TooCloseToPole { theta, h });
    }
    Ok(if scale == 0.0 { 0.0 } else { total.abs() / scale })
}

pub fn angular_residual(mode: &AngularMode, theta: f64, h: f64) -> Result<f64> {
    angular_residual_with(mode, mode.lambda, theta, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        assert!((assoc_legendre(1, 0, 0.3).unwrap() - 0.3).abs() < 1e-16);
        assert!((assoc_legendre(2, 0, 0.5).unwrap() + 0.125).abs() < 1e-16);
        assert!((assoc_legendre(1, 1, 0.0).unwrap() + 1.0).abs() < 1e-16);
        // P_2^2 = 3(1−x²), P_3^1 = −(3/2)(5x²−1)√(1−x²)
        let x: f64 = 0.4;
        assert!((assoc_legendre(2, 2, x).unwrap() - 3.0 * (1.0 - x * x)).abs() < 1e-14);
        let expect = -1.5 * (5.0 * x * x - 1.0) * (1.0 - x * x).sqrt();
        assert!((assoc_legendre(3, 1, x).unwrap() - expect).abs() < 1e-14);
        // P_1^{-1} = −½ P_1^1
        assert!((assoc_legendre(1, -1, x).unwrap() - 0.5 * (1.0 - x * x).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn order_and_range_errors() {
        assert_eq!(assoc_legendre(1, 2, 0.1), Err(Error::OrderExceedsDegree { degree: 1, order: 2 }));
        assert!(matches!(assoc_legendre(2, 1, 1.2), Err(Error::OutOfDomain(_))));
        assert!(AngularMode::new(2, -3).is_err());
    }

    #[test]
    fn theta_derivative_matches_difference_quotient() {
        for (l, n) in [(3u32, 2i32), (5, -1), (7, 0)] {
            let t: f64 = 1.1;
            let h = 1e-6;
            let fd = (assoc_legendre(l, n, (t + h).cos()).unwrap() - assoc_legendre(l, n, (t - h).cos()).unwrap()) / (2.0 * h);
            let an = assoc_legendre_theta_derivative(l, n, t).unwrap();
            assert!((fd - an).abs() < 1e-7 * an.abs().max(1.0), "l={l} n={n}: {fd} vs {an}");
        }
    }

    #[test]
    fn residual_examples() {
        let mode = AngularMode::new(1, 0).unwrap();
        assert!(angular_residual(&mode, std::f64::consts::FRAC_PI_3, 1e-5).unwrap() < 1e-10);
        let mode = AngularMode::new(5, 3).unwrap();
        for t in [0.5, 1.0, 2.0] {
            assert!(angular_residual(&mode, t, 1e-5).unwrap() < 1e-8);
            assert!(angular_residual_with(&mode, mode.lambda() + 0.1, t, 1e-5).unwrap() > 1e-3);
        }
        assert!(matches!(angular_residual(&mode, 5e-5, 1e-5), Err(Error::TooCloseToPole { .. })));
    }
}
