//! Massless Dirac radial problem on the twisted background.
//!
//! The first-order system in `r` is
//!
//! ```text
//! T₁' + i(k/H²) T₁ = λ/√(r²−2Mr) T₂
//! T₂' − i(k/H²) T₂ = λ/√(r²−2Mr) T₁
//! ```
//!
//! Eliminating `T₂` gives, with `u = r − 2M`,
//! `A T₁'' + B T₁' + (C + D + E) T₁ = 0`. Four closed forms of `T₁` are
//! encoded: two expanded around `r = 0` (argument `r/2M`) and two around the
//! horizon `u = 0` (argument `−u/2M`).
//!
//! Evaluation for `0 < r < 2M` is formal: the background is only physical
//! outside the horizon.

use num_complex::Complex64;

use crate::closed_form::{Branch, ClosedForm, PowerFactor};
use crate::error::{Error, Result};
use crate::heun::{self, ConfluentHeunParams, EvalResult, ThomeBranch};
use crate::ode::{self, State, Tolerance};
use crate::residual::{normalized, second_derivative};
use crate::spacetimes::{rsq_f, DiracBackground, DiracMode};

/// Coefficients of the second-order equation in `u = r − 2M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: Complex64,
    pub e: f64,
    pub csum: Complex64,
}

/// Evaluate `A, B, C, D, E` at `u`.
///
/// `E = −λ²(u+2M)u`: this is the sign produced by eliminating `T₂` from the
/// first-order system, and the one all four closed forms satisfy.
pub fn second_order_coeffs(bg: &DiracBackground, mode: &DiracMode, u: f64) -> SecondOrderCoeffs {
    let (m, p, a) = (bg.m(), bg.p(), bg.a());
    let k = mode.k;
    let r = u + 2.0 * m;
    let kappa = bg.kappa();
    let i = Complex64::i();

    let a_coef = r * r * u * u;
    let b_coef = (m + u) * r * u;
    let area =
        ((p / 2.0 + 0.5) * a * a + p / 2.0 - 0.5) * r * r - ((p + 1.0) * a * a - 2.0 * a + p - 1.0) * m * r + m * m * bg.area_minus();
    let c_coef = area * area * k * k;
    let d_coef = (i * (0.5 + 0.5 * p) * a * a + i * (0.5 * p - 0.5)) * r.powi(3) - i * 1.5 * m * kappa * r * r
        + i * (a - 1.0) * m * m * (a + 1.0) * r
        + i * m.powi(3) * bg.area_minus();
    let d_coef = d_coef * k;
    let e_coef = -mode.lambda * mode.lambda * r * u;
    SecondOrderCoeffs { a: a_coef, b: b_coef, c: c_coef, d: d_coef, e: e_coef, csum: d_coef + c_coef + e_coef }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinorPair {
    pub t1: Complex64,
    pub t2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExpansionPoint {
    /// Around `r = 0`, valid for `0 < r < 2M`; position is `r`.
    Origin,
    /// Around `r = 2M`, valid for `u = r − 2M > 0`; position is `u`.
    Horizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClosedSolutionSpec {
    pub expansion: ExpansionPoint,
    pub branch: Branch,
}

impl ClosedSolutionSpec {
    pub const ALL: [ClosedSolutionSpec; 4] = [
        ClosedSolutionSpec { expansion: ExpansionPoint::Origin, branch: Branch::Regular },
        ClosedSolutionSpec { expansion: ExpansionPoint::Origin, branch: Branch::Second },
        ClosedSolutionSpec { expansion: ExpansionPoint::Horizon, branch: Branch::Regular },
        ClosedSolutionSpec { expansion: ExpansionPoint::Horizon, branch: Branch::Second },
    ];

    pub fn new(expansion: ExpansionPoint, branch: Branch) -> Self {
        ClosedSolutionSpec { expansion, branch }
    }

    /// Prefactors and Heun arguments, transcribed term by term from the
    /// published solutions. Each entry is checked against the second-order
    /// equation in the tests.
    pub fn closed_form(&self, bg: &DiracBackground, mode: &DiracMode) -> ClosedForm {
        let (m, p, a) = (bg.m(), bg.p(), bg.a());
        let (k, lam) = (mode.k, mode.lambda);
        let kp = bg.kappa();
        let am = bg.area_minus();
        let ap = bg.area_plus();
        let i = Complex64::i();
        let c = |x: f64| Complex64::new(x, 0.0);
        let a2 = a * a;
        let sq = (a2 + 1.0) * (a2 + 1.0);

        let alpha = 2.0 * i * m * kp * k;
        match (self.expansion, self.branch) {
            (ExpansionPoint::Origin, branch) => {
                let (beta, r_power) = match branch {
                    Branch::Regular => (-0.5 + i * k * am * m, i * 0.5 * k * am * m),
                    Branch::Second => (0.5 - i * k * am * m, 0.5 - i * 0.5 * k * am * m),
                };
                let gamma = 0.5 + i * k * ap * m;
                let delta = (4.0 * m * a * k + i) * m * kp * k;
                let eta = match branch {
                    Branch::Regular => {
                        0.5 * k * k * m * m * sq * p * p
                            - 0.5 * m * (a2 + 1.0) * (-2.0 * m * a2 * k + 4.0 * m * a * k + 2.0 * k * m + i) * k * p
                            - 2.0 * k * k * a.powi(3) * m * m
                            - 0.5 * m * k * (-4.0 * k * m + i) * a2
                            + m * (2.0 * k * m + i) * k * a
                            + i * 0.5 * k * m
                            - lam * lam
                            + 3.0 / 8.0
                    }
                    Branch::Second => {
                        0.5 * m * m * k * k * sq * p * p
                            - 0.5 * m * (a2 + 1.0) * (-2.0 * m * a2 * k + 4.0 * k * m * a + 2.0 * k * m + i) * k * p
                            - 2.0 * k * k * a.powi(3) * m * m
                            - 0.5 * m * (-4.0 * k * m + i) * k * a2
                            + m * (2.0 * k * m + i) * k * a
                            + i * 0.5 * m * k
                            - lam * lam
                            + 3.0 / 8.0
                    }
                };
                ClosedForm {
                    params: ConfluentHeunParams::new(alpha, beta, gamma, delta, c(0.0) + eta),
                    exp_rate: i * 0.5 * kp * k,
                    factors: vec![PowerFactor::new(1.0, 0.0, r_power), PowerFactor::new(-1.0, 2.0 * m, 0.5 + i * 0.5 * k * ap * m)],
                    z_slope: 1.0 / (2.0 * m),
                }
            }
            (ExpansionPoint::Horizon, branch) => {
                let (beta, u_power) = match branch {
                    Branch::Regular => (-0.5 - i * ap * k * m, -i * 0.5 * ap * k * m),
                    Branch::Second => (0.5 + i * ap * k * m, 0.5 + i * 0.5 * ap * k * m),
                };
                let gamma = -0.5 + i * k * am * m;
                let delta = -m * kp * (4.0 * k * m * a + i) * k;
                let eta = match branch {
                    Branch::Regular => {
                        0.5 * m * m * k * k * sq * p * p
                            + 0.5 * m * (a2 + 1.0) * (2.0 * m * a2 * k + 4.0 * k * m * a - 2.0 * m * k + i) * k * p
                            + 2.0 * k * k * a.powi(3) * m * m
                            + 0.5 * m * (4.0 * m * k + i) * k * a2
                            + m * k * (-2.0 * m * k + i) * a
                            - i * 0.5 * m * k
                            - lam * lam
                            + 3.0 / 8.0
                    }
                    Branch::Second => {
                        0.5 * m * m * k * k * sq * p * p
                            + 0.5 * m * (a2 + 1.0) * (2.0 * m * a2 * k + 4.0 * k * m * a - 2.0 * k * m + i) * k * p
                            + 2.0 * k * k * a.powi(3) * m * m
                            + 0.5 * m * (4.0 * k * m + i) * k * a2
                            + k * m * (-2.0 * k * m + i) * a
                            - i * 0.5 * m * k
                            - lam * lam
                            + 3.0 / 8.0
                    }
                };
                ClosedForm {
                    params: ConfluentHeunParams::new(alpha, beta, gamma, delta, c(0.0) + eta),
                    exp_rate: -i * 0.5 * k * kp,
                    factors: vec![PowerFactor::new(1.0, 2.0 * m, i * 0.5 * k * am * m), PowerFactor::new(1.0, 0.0, u_power)],
                    z_slope: -1.0 / (2.0 * m),
                }
            }
        }
    }
}

/// Evaluate `T₁` and `dT₁/d(position)` for one of the closed forms.
pub fn closed_solution(bg: &DiracBackground, mode: &DiracMode, spec: ClosedSolutionSpec, position: f64, tol: f64) -> Result<EvalResult> {
    let two_m = 2.0 * bg.m();
    match spec.expansion {
        ExpansionPoint::Origin if !(position > 0.0 && position < two_m) => {
            return Err(Error::OutOfDomain(format!("origin expansion needs 0 < r < {two_m}, got r = {position}")))
        }
        ExpansionPoint::Horizon if !(position > 0.0) => {
            return Err(Error::OutOfDomain(format!("horizon expansion needs u > 0, got u = {position}")))
        }
        _ => {}
    }
    spec.closed_form(bg, mode).eval(position, tol)
}

/// `k/H²` and `λ/√(r²−2Mr)` at radius `r` (principal square root inside the horizon).
fn system_coefficients(bg: &DiracBackground, mode: &DiracMode, r: f64) -> (f64, Complex64) {
    let g = r * (r - 2.0 * bg.m());
    let drift = mode.k * rsq_f(bg, r) / g;
    let coupling = mode.lambda / Complex64::new(g, 0.0).sqrt();
    (drift, coupling)
}

fn check_interval(bg: &DiracBackground, lo: f64, hi: f64) -> Result<()> {
    let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let two_m = 2.0 * bg.m();
    let hits = |s: f64| lo <= s && s <= hi;
    if hits(0.0) || hits(two_m) || !bg.area_positive_on(lo, hi) {
        return Err(Error::IntervalContainsSingularity { from: lo, to: hi });
    }
    Ok(())
}

/// Integrate the first-order system from `(r_start, initial)` through `points`.
pub fn integrate_system_at(
    bg: &DiracBackground,
    mode: &DiracMode,
    r_start: f64,
    initial: SpinorPair,
    points: &[f64],
    tol: f64,
) -> Result<Vec<SpinorPair>> {
    let Some(&last) = points.last() else { return Ok(vec![]) };
    let far = points.iter().copied().fold(last, |acc, p| if (p - r_start).abs() > (acc - r_start).abs() { p } else { acc });
    check_interval(bg, r_start, far)?;
    let i = Complex64::i();
    let rhs = |r: f64, y: &State| {
        let (drift, coupling) = system_coefficients(bg, mode, r);
        [coupling * y[1] - i * drift * y[0], coupling * y[0] + i * drift * y[1]]
    };
    let out = ode::integrate_through(rhs, r_start, [initial.t1, initial.t2], points, Tolerance::new(tol, tol * 1e-3))?;
    Ok(out.states.into_iter().map(|s| SpinorPair { t1: s[0], t2: s[1] }).collect())
}

/// Sampled trajectory of the first-order system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<(f64, SpinorPair)>,
}

pub const TRAJECTORY_SAMPLES: usize = 257;

/// Integrate from `r_start` to `r_end`, sampling the solution at
/// [`TRAJECTORY_SAMPLES`] evenly spaced radii (both ends included).
pub fn integrate_system(
    bg: &DiracBackground,
    mode: &DiracMode,
    r_start: f64,
    r_end: f64,
    initial: SpinorPair,
    tol: f64,
) -> Result<Trajectory> {
    if r_start == r_end {
        return Err(Error::InvalidParameter("empty integration interval".into()));
    }
    let n = TRAJECTORY_SAMPLES;
    let pts: Vec<f64> = (1..n).map(|j| r_start + (r_end - r_start) * j as f64 / (n - 1) as f64).collect();
    let states = integrate_system_at(bg, mode, r_start, initial, &pts, tol)?;
    let mut samples = Vec::with_capacity(n);
    samples.push((r_start, initial));
    samples.extend(pts.into_iter().zip(states));
    Ok(Trajectory { samples })
}

/// Recover `T₂` from `T₁` and its `r`-derivative via the first equation.
pub fn spinor_from_t1(bg: &DiracBackground, mode: &DiracMode, r: f64, t1: &EvalResult) -> Result<SpinorPair> {
    if mode.lambda == 0.0 {
        return Err(Error::InvalidParameter("T2 is not determined by T1 when lambda = 0".into()));
    }
    if r == 0.0 || r == 2.0 * bg.m() {
        return Err(Error::SingularPoint(r));
    }
    let (drift, coupling) = system_coefficients(bg, mode, r);
    let t2 = (t1.derivative + Complex64::i() * drift * t1.value) / coupling;
    Ok(SpinorPair { t1: t1.value, t2 })
}

fn residual_at<F>(bg: &DiracBackground, mode: &DiracMode, solution: F, x: f64, u: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<EvalResult>,
{
    let (t, d2) = second_derivative(solution, x, h)?;
    let co = second_order_coeffs(bg, mode, u);
    Ok(normalized(&[d2 * co.a, t.derivative * co.b, t.value * co.csum]))
}

/// Normalized residual of the second-order equation at `u > 0`, for a
/// solution given as a function of `u`.
pub fn residual_second_order<F>(bg: &DiracBackground, mode: &DiracMode, solution: F, u: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<EvalResult>,
{
    if !(u > 0.0) {
        return Err(Error::OutOfDomain(format!("residual needs u > 0, got {u}")));
    }
    if h > u / 10.0 {
        return Err(Error::StepTooLarge { h, at: u });
    }
    residual_at(bg, mode, solution, u, u, h)
}

/// The same residual for a solution given as a function of `r ∈ (0, 2M)`.
pub fn residual_origin<F>(bg: &DiracBackground, mode: &DiracMode, solution: F, r: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<EvalResult>,
{
    let two_m = 2.0 * bg.m();
    if !(r > 0.0 && r < two_m) {
        return Err(Error::OutOfDomain(format!("residual needs 0 < r < {two_m}, got {r}")));
    }
    if h > r.min(two_m - r) / 10.0 {
        return Err(Error::StepTooLarge { h, at: r });
    }
    residual_at(bg, mode, solution, r, r - two_m, h)
}

/// Large-`u` branches of the horizon solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticBranch {
    /// Constant amplitude: the Heun factor tends to a power of `z` alone.
    Oscillatory,
    /// The Heun factor carries `e^{−αz}` and decays like `u^{−1}` overall.
    Decaying,
}

/// Leading large-`u` behaviour `exp(exp_rate·u) · u^power` of `T₁`, composed
/// from the horizon prefactor and the leading Thomé term of the Heun factor.
pub fn asymptotic_behavior(bg: &DiracBackground, mode: &DiracMode, branch: AsymptoticBranch) -> Result<heun::Asymptotic> {
    let cf = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular).closed_form(bg, mode);
    let s = heun::to_spheroidal(&cf.params)?;
    // H_C = e^{iωz} U, so the Heun factor's exponential rate in z is iω plus the Thomé rate.
    let thome = heun::thome_leading(
        &s,
        match branch {
            AsymptoticBranch::Oscillatory => ThomeBranch::Minus,
            AsymptoticBranch::Decaying => ThomeBranch::Plus,
        },
    )?;
    let heun_rate_z = Complex64::i() * s.omega + thome.exp_rate;
    let prefactor_power: Complex64 = cf.factors.iter().map(|f| f.exponent).sum();
    Ok(heun::Asymptotic { exp_rate: cf.exp_rate + heun_rate_z * cf.z_slope, power: prefactor_power + thome.power })
}

/// The two analytic candidates for the plane-wave angular frequency in `u`:
/// the horizon prefactor rate `½k[(p+1)a²+p−1]` and the rate printed with
/// the asymptotic form, `2[(p+1)a²+p−1]Mk`.
pub fn phase_rate_candidates(bg: &DiracBackground, mode: &DiracMode) -> (f64, f64) {
    let kp = bg.kappa();
    (0.5 * mode.k * kp, 2.0 * kp * bg.m() * mode.k)
}

/// `T_a T_b' − T_a' T_b`.
pub fn wronskian(a: &EvalResult, b: &EvalResult) -> Complex64 {
    a.value * b.derivative - a.derivative * b.value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residual::default_step;

    fn fig() -> (DiracBackground, DiracMode) {
        (DiracBackground::figure(), DiracMode::figure())
    }

    #[test]
    fn coefficients_at_horizon_and_unit_u() {
        let (bg, mode) = fig();
        let co = second_order_coeffs(&bg, &mode, 0.0);
        assert_eq!((co.a, co.b), (0.0, 0.0));
        let area = rsq_f(&bg, 10.0);
        assert!((co.c - (0.2 * area).powi(2)).abs() < 1e-9);
        assert!((co.c - 2652.25).abs() < 1e-9);
        let co = second_order_coeffs(&bg, &mode, 1.0);
        assert_eq!(co.a, 121.0);
        assert!((co.e + 0.49 * 11.0).abs() < 1e-12);
    }

    #[test]
    fn c_is_k_squared_area_squared_everywhere() {
        let (bg, mode) = fig();
        for u in [-9.0, -3.3, 0.5, 7.0, 42.0] {
            let co = second_order_coeffs(&bg, &mode, u);
            let area = rsq_f(&bg, u + 10.0);
            assert!((co.c - (mode.k * area).powi(2)).abs() < 1e-9 * co.c.abs().max(1.0));
        }
    }

    #[test]
    fn horizon_regular_has_unit_modulus_at_horizon() {
        let (bg, mode) = fig();
        let spec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular);
        let t = closed_solution(&bg, &mode, spec, 1e-9, 1e-12).unwrap();
        assert!((t.value.norm() - 1.0).abs() < 1e-7);
    }

    #[test]
    fn horizon_second_vanishes_like_sqrt() {
        let (bg, mode) = fig();
        let spec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Second);
        let a = closed_solution(&bg, &mode, spec, 1e-6, 1e-12).unwrap().value.norm();
        let b = closed_solution(&bg, &mode, spec, 4e-6, 1e-12).unwrap().value.norm();
        assert!((b / a - 2.0).abs() < 1e-4, "{}", b / a);
        assert!(a < 1e-2);
    }

    #[test]
    fn closed_solution_domain_checks() {
        let (bg, mode) = fig();
        let o = ClosedSolutionSpec::new(ExpansionPoint::Origin, Branch::Regular);
        let h = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular);
        assert!(matches!(closed_solution(&bg, &mode, o, 10.0, 1e-10), Err(Error::OutOfDomain(_))));
        assert!(matches!(closed_solution(&bg, &mode, o, 0.0, 1e-10), Err(Error::OutOfDomain(_))));
        assert!(matches!(closed_solution(&bg, &mode, h, -1.0, 1e-10), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn all_four_forms_solve_the_second_order_equation() {
        let (bg, mode) = fig();
        for spec in ClosedSolutionSpec::ALL {
            let f = |x: f64| closed_solution(&bg, &mode, spec, x, 1e-12);
            let positions: &[f64] = match spec.expansion {
                ExpansionPoint::Origin => &[0.7, 3.0, 6.5, 9.3],
                ExpansionPoint::Horizon => &[0.6, 2.0, 11.0, 40.0],
            };
            for &x in positions {
                let res = match spec.expansion {
                    ExpansionPoint::Origin => residual_origin(&bg, &mode, f, x, default_step(x)),
                    ExpansionPoint::Horizon => residual_second_order(&bg, &mode, f, x, default_step(x)),
                }
                .unwrap();
                assert!(res < 1e-8, "{spec:?} at {x}: {res:e}");
            }
        }
    }

    #[test]
    fn printed_lambda_sign_does_not_solve_equation() {
        // With E = +λ²(u+2M)u the regular horizon form leaves an O(1e-3) residual.
        let (bg, mode) = fig();
        let spec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular);
        let u = 2.0;
        let f = |x: f64| closed_solution(&bg, &mode, spec, x, 1e-13);
        let (t, d2) = second_derivative(f, u, default_step(u)).unwrap();
        let co = second_order_coeffs(&bg, &mode, u);
        let flipped = co.csum - 2.0 * co.e;
        let res = normalized(&[d2 * co.a, t.derivative * co.b, t.value * flipped]);
        assert!(res > 1e-4, "{res:e}");
    }

    #[test]
    fn corrupted_delta_is_detected() {
        let (bg, mode) = fig();
        let mut cf = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular).closed_form(&bg, &mode);
        let clean = residual_second_order(&bg, &mode, |x| cf.eval(x, 1e-13), 2.0, 1e-4).unwrap();
        cf.params.delta *= 1.01;
        let res = residual_second_order(&bg, &mode, |x| cf.eval(x, 1e-13), 2.0, 1e-4).unwrap();
        // a 1% shift of δ moves the residual from round-off level to ~4e-5
        assert!(clean < 1e-10 && res > 1e-5, "clean {clean:e}, corrupted {res:e}");
    }

    #[test]
    fn residual_step_guard() {
        let (bg, mode) = fig();
        let spec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular);
        let f = |x: f64| closed_solution(&bg, &mode, spec, x, 1e-12);
        assert!(matches!(residual_second_order(&bg, &mode, f, 1.0, 0.2), Err(Error::StepTooLarge { .. })));
    }

    #[test]
    fn regular_horizon_mapping_has_vanishing_mu_plus_nu() {
        let (bg, mode) = fig();
        let cf = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular).closed_form(&bg, &mode);
        let acc = cf.params.accessory();
        assert!((acc.mu + acc.nu).norm() < 1e-12);
    }

    #[test]
    fn branch_exponents_match_indicial_roots() {
        let (bg, mode) = fig();
        for exp in [ExpansionPoint::Origin, ExpansionPoint::Horizon] {
            let reg = ClosedSolutionSpec::new(exp, Branch::Regular).closed_form(&bg, &mode);
            let sec = ClosedSolutionSpec::new(exp, Branch::Second).closed_form(&bg, &mode);
            let diff = sec.power_at_origin() - reg.power_at_origin();
            let roots = heun::indicial_exponents(&reg.params, heun::RegularPoint::Zero);
            assert!((diff - roots.second).norm() < 1e-12, "{exp:?}");
            // the second form's own β is the negated first β
            assert!((sec.params.beta + reg.params.beta).norm() < 1e-12);
        }
        let reg = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular).closed_form(&bg, &mode);
        let roots = heun::indicial_exponents(&reg.params, heun::RegularPoint::Zero);
        let expect = Complex64::new(0.5, bg.area_plus() * mode.k * bg.m());
        assert!((roots.second - expect).norm() < 1e-12);
    }

    #[test]
    fn decoupled_system_preserves_modulus() {
        let bg = DiracBackground::figure();
        let mode = DiracMode::new(0.2, 0.0).unwrap();
        let init = SpinorPair { t1: Complex64::new(0.6, 0.8), t2: Complex64::new(0.3, 0.0) };
        let tr = integrate_system(&bg, &mode, 10.5, 60.0, init, 1e-12).unwrap();
        for (_, s) in &tr.samples {
            assert!((s.t1.norm() - 1.0).abs() < 1e-9);
            assert!((s.t2.norm() - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_mode_is_constant() {
        let bg = DiracBackground::figure();
        let mode = DiracMode::new(0.0, 0.0).unwrap();
        let init = SpinorPair { t1: Complex64::new(0.6, 0.8), t2: Complex64::new(-1.0, 2.0) };
        let tr = integrate_system(&bg, &mode, 12.0, 30.0, init, 1e-12).unwrap();
        assert_eq!(tr.samples.len(), TRAJECTORY_SAMPLES);
        for (_, s) in &tr.samples {
            assert_eq!(*s, init);
        }
    }

    #[test]
    fn integration_refuses_singular_intervals() {
        let (bg, mode) = fig();
        let init = SpinorPair { t1: Complex64::new(1.0, 0.0), t2: Complex64::new(0.0, 0.0) };
        assert!(matches!(integrate_system(&bg, &mode, 5.0, 15.0, init, 1e-10), Err(Error::IntervalContainsSingularity { .. })));
        assert!(matches!(integrate_system(&bg, &mode, -1.0, 3.0, init, 1e-10), Err(Error::IntervalContainsSingularity { .. })));
    }

    #[test]
    fn asymptotic_moduli() {
        let (bg, mode) = fig();
        let osc = asymptotic_behavior(&bg, &mode, AsymptoticBranch::Oscillatory).unwrap();
        let dec = asymptotic_behavior(&bg, &mode, AsymptoticBranch::Decaying).unwrap();
        assert!(osc.exp_rate.re.abs() < 1e-14 && osc.power.re.abs() < 1e-12, "{osc:?}");
        assert!(dec.exp_rate.re.abs() < 1e-14);
        assert!((dec.power.re + 1.0).abs() < 1e-12, "{dec:?}");
        // Heun factor alone decays as u^{4ikMa − 1}
        let cf = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular).closed_form(&bg, &mode);
        let pre: Complex64 = cf.factors.iter().map(|f| f.exponent).sum();
        let heun_power = dec.power - pre;
        let expect = Complex64::new(-1.0, 4.0 * mode.k * bg.m() * bg.a());
        assert!((heun_power - expect).norm() < 1e-12, "{heun_power}");
    }
}
