//! Confluent Heun function `H_C(α, β, γ, δ, η, z)`.
//!
//! The function is the exponent-0 Frobenius solution at `z = 0`, normalized to
//! `H_C(0) = 1`, of
//!
//! ```text
//! H'' + (α + (γ+1)/(z−1) + (β+1)/z) H' + (μ/z + ν/(z−1)) H = 0
//! ```
//!
//! where the accessory pair (μ, ν) is tied to (δ, η) by
//!
//! ```text
//! δ = μ + ν − α(β+γ+2)/2
//! η = α(β+1)/2 − μ − (β+γ+βγ)/2
//! ```
//!
//! This is the only argument convention supported. For `|z| ≤ 0.5` the
//! power series is summed directly; elsewhere on the real axis (`z < 0` or
//! `0.5 < z < 1`) the series value at `z₀ = ±0.25` is continued by adaptive
//! integration of the equation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{self, State, Tolerance};

/// Radius inside which the Frobenius series is summed directly.
pub const SERIES_RADIUS: f64 = 0.5;
/// Starting point magnitude for the continuation.
pub const CONTINUATION_START: f64 = 0.25;
const MAX_TERMS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfluentHeunParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
    pub eta: Complex64,
}

impl ConfluentHeunParams {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64, eta: Complex64) -> Self {
        ConfluentHeunParams { alpha, beta, gamma, delta, eta }
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self::new(z, z, z, z, z)
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.delta, self.eta].iter().all(|c| c.is_finite())
    }

    pub fn accessory(&self) -> AccessoryPair {
        accessory_from_params(self)
    }

    /// True when β is a negative integer and the regular branch does not exist.
    pub fn beta_is_negative_integer(&self) -> bool {
        let b = self.beta;
        b.im == 0.0 && b.re < 0.0 && b.re.fract() == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessoryPair {
    pub mu: Complex64,
    pub nu: Complex64,
}

/// Value, first derivative and estimated absolute error of the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: Complex64,
    pub derivative: Complex64,
    pub err_estimate: f64,
}

pub fn accessory_from_params(p: &ConfluentHeunParams) -> AccessoryPair {
    let ConfluentHeunParams { alpha, beta, gamma, delta, eta } = *p;
    let mu = alpha * (beta + 1.0) / 2.0 - eta - (beta + gamma + beta * gamma) / 2.0;
    let nu = delta + alpha * (beta + gamma + 2.0) / 2.0 - mu;
    AccessoryPair { mu, nu }
}

pub fn params_from_accessory(alpha: Complex64, beta: Complex64, gamma: Complex64, acc: AccessoryPair) -> ConfluentHeunParams {
    let AccessoryPair { mu, nu } = acc;
    let delta = mu + nu - alpha * (beta + gamma + 2.0) / 2.0;
    let eta = alpha * (beta + 1.0) / 2.0 - mu - (beta + gamma + beta * gamma) / 2.0;
    ConfluentHeunParams { alpha, beta, gamma, delta, eta }
}

fn check_params(p: &ConfluentHeunParams) -> Result<()> {
    if !p.is_finite() {
        return Err(Error::InvalidParameter("confluent Heun parameters must be finite".into()));
    }
    if p.beta_is_negative_integer() {
        return Err(Error::BranchUnavailable(p.beta));
    }
    Ok(())
}

/// Sum the Frobenius series at `z` (any `|z| < 1`, accurate for `|z| ≤ 0.5`).
///
/// Coefficients follow from multiplying the equation by `z(z−1)`:
///
/// ```text
/// (n+1)(n+1+β) c_{n+1} = [n(n−1) + n(β+γ+2−α) − μ] c_n + [α(n−1) + μ + ν] c_{n−1}
/// ```
///
/// with `c₀ = 1`, `c₋₁ = 0`. The error estimate is the last term plus a
/// round-off bound from the largest term, which dominates when large
/// parameters make the partial sums cancel.
pub fn heun_series(p: &ConfluentHeunParams, z: f64, tol: f64) -> Result<EvalResult> {
    check_params(p)?;
    let AccessoryPair { mu, nu } = p.accessory();
    let one = Complex64::new(1.0, 0.0);
    if z == 0.0 {
        return Ok(EvalResult { value: one, derivative: -mu / (p.beta + 1.0), err_estimate: 0.0 });
    }
    if z.abs() >= 1.0 {
        return Err(Error::OutOfDomain(format!("series evaluated outside the unit disk at z = {z}")));
    }
    let b2 = p.beta + p.gamma + 2.0 - p.alpha;
    let mut c_prev = Complex64::new(0.0, 0.0);
    let mut c_cur = one;
    let mut value = one;
    let mut derivative = Complex64::new(0.0, 0.0);
    let mut zpow = 1.0; // z^n
    let mut small_run = 0;
    let mut last_term = 0.0;
    let mut max_term = 1.0f64;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let numer = (nf * (nf - 1.0) + b2 * nf - mu) * c_cur + (p.alpha * (nf - 1.0) + mu + nu) * c_prev;
        let c_next = numer / ((nf + 1.0) * (p.beta + nf + 1.0));
        // term of order n+1
        let dterm = c_next * ((nf + 1.0) * zpow);
        zpow *= z;
        let term = c_next * zpow;
        value += term;
        derivative += dterm;
        last_term = term.norm();
        max_term = max_term.max(last_term);
        if last_term < tol * value.norm() && dterm.norm() < tol * derivative.norm().max(value.norm()) {
            small_run += 1;
            if small_run >= 3 {
                let roundoff = f64::EPSILON * max_term * ((n + 2) as f64).sqrt();
                return Ok(EvalResult { value, derivative, err_estimate: last_term + roundoff });
            }
        } else {
            small_run = 0;
        }
        c_prev = c_cur;
        c_cur = c_next;
        if !c_cur.is_finite() {
            break;
        }
    }
    Err(Error::DidNotConverge { at: z, reason: format!("series did not converge in {MAX_TERMS} terms (last term {last_term:e})") })
}

fn rhs(p: &ConfluentHeunParams, acc: AccessoryPair) -> impl Fn(f64, &State) -> State + '_ {
    move |z: f64, y: &State| {
        let friction = p.alpha + (p.gamma + 1.0) / (z - 1.0) + (p.beta + 1.0) / z;
        let potential = acc.mu / z + acc.nu / (z - 1.0);
        [y[1], -(friction * y[1]) - potential * y[0]]
    }
}

/// Continue the series value at `z0` to `z` by integrating the equation.
pub fn heun_continued_from(p: &ConfluentHeunParams, z0: f64, z: f64, tol: f64) -> Result<EvalResult> {
    check_params(p)?;
    if z0 == 0.0 || z0 * z <= 0.0 {
        return Err(Error::OutOfDomain(format!("continuation path from {z0} to {z} passes through z = 0")));
    }
    if z0 >= 1.0 || z >= 1.0 {
        return Err(Error::OutOfDomain(format!("continuation to z = {z} would cross z = 1")));
    }
    let start = heun_series(p, z0, tol * 1e-3)?;
    integrate_from(p, z0, start, z, tol)
}

fn integrate_from(p: &ConfluentHeunParams, z0: f64, start: EvalResult, z: f64, tol: f64) -> Result<EvalResult> {
    let acc = p.accessory();
    let mut local = tol / 10.0;
    for _ in 0..4 {
        let (y, err) = ode::integrate(rhs(p, acc), z0, [start.value, start.derivative], z, Tolerance::new(local, local))?;
        let total = err + start.err_estimate;
        if total <= tol * y[0].norm().max(1.0) {
            return Ok(EvalResult { value: y[0], derivative: y[1], err_estimate: total });
        }
        if local <= 1e-15 {
            break;
        }
        local = (local * 0.1).max(1e-15);
    }
    Err(Error::DidNotConverge { at: z, reason: format!("continuation error estimate above tolerance {tol:e}") })
}

/// Continue to `z` from the first of `z0, z0/2, z0/4, …` at which the
/// series error uses at most a tenth of the budget.
fn continue_from_conditioned(p: &ConfluentHeunParams, mut z0: f64, z: f64, tol: f64) -> Result<EvalResult> {
    for _ in 0..40 {
        let start = heun_series(p, z0, tol * 1e-3)?;
        if start.err_estimate <= 0.1 * tol * start.value.norm().max(1.0) {
            return integrate_from(p, z0, start, z, tol);
        }
        z0 *= 0.5;
    }
    Err(Error::DidNotConverge { at: z, reason: "series is ill-conditioned at every starting point tried".into() })
}

/// Evaluate `H_C` and `dH_C/dz` at a real point `z < 1`.
pub fn heun_eval(p: &ConfluentHeunParams, z: f64, tol: f64) -> Result<EvalResult> {
    if !(tol > 0.0) || !z.is_finite() {
        return Err(Error::InvalidParameter(format!("need finite z and tol > 0 (z = {z}, tol = {tol})")));
    }
    if z == 1.0 {
        return Err(Error::SingularPoint(1.0));
    }
    if z > 1.0 {
        return Err(Error::OutOfDomain(format!("z = {z} lies beyond the singular point z = 1")));
    }
    check_params(p)?;
    if z.abs() <= SERIES_RADIUS {
        let s = heun_series(p, z, tol)?;
        if s.err_estimate <= tol * s.value.norm().max(1.0) || z == 0.0 {
            return Ok(s);
        }
        continue_from_conditioned(p, 0.5 * z, z, tol)
    } else {
        continue_from_conditioned(p, CONTINUATION_START.copysign(z), z, tol)
    }
}

/// Left-hand side of the confluent Heun equation for supplied value and derivatives.
pub fn ode_residual(p: &ConfluentHeunParams, z: f64, value: Complex64, d1: Complex64, d2: Complex64) -> Result<Complex64> {
    if z == 0.0 || z == 1.0 {
        return Err(Error::SingularPoint(z));
    }
    let AccessoryPair { mu, nu } = p.accessory();
    let friction = p.alpha + (p.gamma + 1.0) / (z - 1.0) + (p.beta + 1.0) / z;
    Ok(d2 + friction * d1 + (mu / z + nu / (z - 1.0)) * value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularPoint {
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicialExponents {
    pub first: Complex64,
    pub second: Complex64,
    /// Both roots coincide (logarithmic second solution).
    pub degenerate: bool,
}

/// Roots of the indicial equation `s(s−1) + (1+κ)s = 0` with κ = β at z=0, γ at z=1.
pub fn indicial_exponents(p: &ConfluentHeunParams, point: RegularPoint) -> IndicialExponents {
    let kappa = match point {
        RegularPoint::Zero => p.beta,
        RegularPoint::One => p.gamma,
    };
    let second = -kappa;
    IndicialExponents { first: Complex64::new(0.0, 0.0), second, degenerate: second.norm() == 0.0 }
}

/// Generalized spheroidal wave form
/// `z(z−1)U'' + (B₁ + B₂z)U' + [B₃ − 2ηω(z−1) + ω²z(z−1)]U = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpheroidalForm {
    pub b1: Complex64,
    pub b2: Complex64,
    pub b3: Complex64,
    pub eta: Complex64,
    pub omega: Complex64,
}

/// Map to the spheroidal form with `H_C(z) = e^{iωz} U(z)`.
///
/// Substituting removes the `αz(z−1)` friction term when `α = −2iω`, which
/// leaves `B₁ = −(β+1)`, `B₂ = β+γ+2`, `B₃ = ν − α(γ+1)/2` and `η = iδ/α`.
pub fn to_spheroidal(p: &ConfluentHeunParams) -> Result<SpheroidalForm> {
    if p.alpha.norm() == 0.0 {
        return Err(Error::NotIrregular);
    }
    let AccessoryPair { nu, .. } = p.accessory();
    let i = Complex64::i();
    let omega = i * p.alpha / 2.0;
    Ok(SpheroidalForm {
        b1: -(p.beta + 1.0),
        b2: p.beta + p.gamma + 2.0,
        b3: nu - p.alpha * (p.gamma + 1.0) / 2.0,
        eta: i * p.delta / p.alpha,
        omega,
    })
}

pub fn from_spheroidal(s: &SpheroidalForm) -> ConfluentHeunParams {
    let i = Complex64::i();
    let alpha = -2.0 * i * s.omega;
    let beta = -s.b1 - 1.0;
    let gamma = s.b2 + s.b1 - 1.0;
    let delta = -2.0 * s.omega * s.eta;
    let nu = s.b3 + alpha * (gamma + 1.0) / 2.0;
    let mu = delta + alpha * s.b2 / 2.0 - nu;
    params_from_accessory(alpha, beta, gamma, AccessoryPair { mu, nu })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThomeBranch {
    Plus,
    Minus,
}

/// Leading large-z behaviour `exp(exp_rate·z) · z^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub exp_rate: Complex64,
    pub power: Complex64,
}

/// First term of the Thomé solution `U ~ e^{±iωz} z^{∓iη − B₂/2}`.
pub fn thome_leading(s: &SpheroidalForm, branch: ThomeBranch) -> Result<Asymptotic> {
    if s.omega.norm() == 0.0 {
        return Err(Error::InvalidParameter("Thomé solution needs omega != 0".into()));
    }
    let i = Complex64::i();
    let sign = match branch {
        ThomeBranch::Plus => 1.0,
        ThomeBranch::Minus => -1.0,
    };
    Ok(Asymptotic { exp_rate: i * s.omega * sign, power: -(i * s.eta * sign) - s.b2 / 2.0 })
}

/// Necessary condition `μ + ν + Nα = 0` for a degree-N polynomial solution.
/// The accompanying determinant condition is not evaluated.
pub fn polynomial_condition(p: &ConfluentHeunParams, degree: u32) -> bool {
    let AccessoryPair { mu, nu } = p.accessory();
    let n = degree as f64;
    let lhs = mu + nu + p.alpha * n;
    lhs.norm() <= 1e-12 * (mu.norm() + nu.norm() + n * p.alpha.norm() + 1.0)
}
