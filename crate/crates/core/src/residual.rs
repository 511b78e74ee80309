//! Finite-difference helpers shared by the residual checks.

use num_complex::Complex64;

use crate::error::Result;
use crate::heun::EvalResult;

/// Default step `max(1e-6, 1e-4·|x|)`.
pub fn default_step(x: f64) -> f64 {
    (1e-4 * x.abs()).max(1e-6)
}

/// Second derivative from the analytically supplied first derivative, by the
/// fourth-order central stencil
/// `(−f'(x+2h) + 8f'(x+h) − 8f'(x−h) + f'(x−2h)) / 12h`.
///
/// Returns the evaluation at `x` together with the second derivative.
pub fn second_derivative<F>(f: F, x: f64, h: f64) -> Result<(EvalResult, Complex64)>
where
    F: Fn(f64) -> Result<EvalResult>,
{
    let centre = f(x)?;
    let p1 = f(x + h)?.derivative;
    let p2 = f(x + 2.0 * h)?.derivative;
    let m1 = f(x - h)?.derivative;
    let m2 = f(x - 2.0 * h)?.derivative;
    let d2 = (-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * h);
    Ok((centre, d2))
}

/// Same stencil for a plain real function, used where the first derivative
/// is available in closed form.
pub fn second_derivative_real<F>(df: F, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    (-df(x + 2.0 * h) + 8.0 * df(x + h) - 8.0 * df(x - h) + df(x - 2.0 * h)) / (12.0 * h)
}

/// `|Σ terms| / Σ |terms|`, or 0 when every term vanishes.
pub fn normalized(terms: &[Complex64]) -> f64 {
    let total: Complex64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.norm()).sum();
    if scale == 0.0 {
        0.0
    } else {
        total.norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_is_exact_for_quartics() {
        // f' = x^4 → f'' = 4x^3; the stencil is exact up to degree 4 in f'.
        let d2 = second_derivative_real(|x| x.powi(4), 1.3, 1e-2);
        assert!((d2 - 4.0 * 1.3f64.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn normalized_handles_zero() {
        assert_eq!(normalized(&[Complex64::new(0.0, 0.0); 3]), 0.0);
        let r = normalized(&[Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert_eq!(r, 0.0);
    }
}
