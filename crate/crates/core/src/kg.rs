//! Massless Klein–Gordon radial problem on the two-horizon background.
//!
//! The separated radial equation is
//! `F'' + (Δ'/Δ) F' + ((r⁴ω² − λΔ)/Δ²) F = 0`, solved in `u = r − r₁` by
//! two closed forms with Heun argument `−u/(r₁ − r₂)`.

use num_complex::Complex64;

use crate::closed_form::{Branch, ClosedForm, PowerFactor};
use crate::error::{Error, Result};
use crate::heun::{ConfluentHeunParams, EvalResult};
use crate::residual::{normalized, second_derivative};
use crate::spacetimes::{kg_delta, kg_horizons, KGBackground, KGMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGRadialCoeffs {
    pub friction: f64,
    pub potential: f64,
}

pub fn kg_radial_coeffs(bg: &KGBackground, mode: &KGMode, r: f64) -> Result<KGRadialCoeffs> {
    let (r1, r2) = kg_horizons(bg);
    let delta = kg_delta(bg, r);
    if r == r1 || r == r2 || delta == 0.0 {
        return Err(Error::OnHorizon(r));
    }
    let friction = (2.0 * r - 2.0 * bg.m()) / delta;
    let potential = (r.powi(4) * mode.omega * mode.omega - mode.lambda * delta) / (delta * delta);
    Ok(KGRadialCoeffs { friction, potential })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KGClosedSpec {
    pub branch: Branch,
}

impl KGClosedSpec {
    pub fn new(branch: Branch) -> Self {
        KGClosedSpec { branch }
    }

    /// The published argument lists; the two branches differ only in the
    /// sign of the `u` exponent and of β.
    pub fn closed_form(&self, bg: &KGBackground, mode: &KGMode) -> ClosedForm {
        let (r1, r2) = kg_horizons(bg);
        let w = mode.omega;
        let lam = mode.lambda;
        let s = r1 - r2;
        let i = Complex64::i();
        let sign = match self.branch {
            Branch::Regular => 1.0,
            Branch::Second => -1.0,
        };
        let alpha = 2.0 * i * w * s;
        let beta = sign * 2.0 * i * r1 * r1 * w / s;
        let gamma = 2.0 * i * r2 * r2 * w / s;
        let delta = Complex64::new((-2.0 * r1 * r1 + 2.0 * r2 * r2) * w * w, 0.0);
        let eta = Complex64::new(
            (2.0 * r1.powi(4) * w * w - 4.0 * r1.powi(3) * w * w * r2 - lam * r1 * r1 + 2.0 * r1 * r2 * lam - lam * r2 * r2) / (s * s),
            0.0,
        );
        ClosedForm {
            params: ConfluentHeunParams::new(alpha, beta, gamma, delta, eta),
            exp_rate: -i * w,
            factors: vec![PowerFactor::new(1.0, 0.0, sign * i * r1 * r1 * w / s), PowerFactor::new(1.0, s, i * r2 * r2 * w / s)],
            z_slope: -1.0 / s,
        }
    }
}

/// `F(u)` and `dF/du` for one of the two closed forms, `u = r − r₁ > 0`.
pub fn kg_closed_solution(bg: &KGBackground, mode: &KGMode, spec: KGClosedSpec, u: f64, tol: f64) -> Result<EvalResult> {
    if !(u > 0.0) {
        return Err(Error::OutOfDomain(format!("radial solution needs u > 0, got u = {u}")));
    }
    spec.closed_form(bg, mode).eval(u, tol)
}

/// Normalized residual `|F'' + friction·F' + potential·F| / Σ|terms|`.
pub fn kg_residual<F>(bg: &KGBackground, mode: &KGMode, solution: F, u: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<EvalResult>,
{
    if !(u > 0.0) {
        return Err(Error::OutOfDomain(format!("residual needs u > 0, got {u}")));
    }
    if h > u / 10.0 {
        return Err(Error::StepTooLarge { h, at: u });
    }
    let (r1, _) = kg_horizons(bg);
    let co = kg_radial_coeffs(bg, mode, u + r1)?;
    let (f, d2) = second_derivative(solution, u, h)?;
    Ok(normalized(&[d2, f.derivative * co.friction, f.value * co.potential]))
}
