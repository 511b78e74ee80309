//! Numerical verification suites. Each suite returns a [`Report`] of named
//! checks with the measured quantity and the threshold it was held to.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::angular::{angular_residual, angular_residual_with, assoc_legendre, assoc_legendre_theta_derivative, AngularMode};
use crate::closed_form::Branch;
use crate::dirac::{self, ClosedSolutionSpec, ExpansionPoint};
use crate::error::{Error, Result};
use crate::figures::{grid, SampledCurve};
use crate::heun::{self, ConfluentHeunParams};
use crate::kg::{kg_closed_solution, kg_residual, KGClosedSpec};
use crate::residual::{default_step, normalized, second_derivative, second_derivative_real};
use crate::spacetimes::{kg_delta, kg_horizons, DiracBackground, DiracMode, KGBackground, KGMode};

pub const DEFAULT_SEED: u64 = 20_190_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gate {
    Below,
    Above,
    Zero,
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
    gate: Gate,
}

impl Check {
    /// Passes when `measured < threshold`.
    pub fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), measured, threshold, passed: measured < threshold, note: String::new(), gate: Gate::Below }
    }

    /// Passes only when `measured` is exactly zero.
    pub fn zero(name: impl Into<String>, measured: f64) -> Self {
        Check { name: name.into(), measured, threshold: 0.0, passed: measured == 0.0, note: String::new(), gate: Gate::Zero }
    }

    /// Passes when `measured > threshold`.
    pub fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check { name: name.into(), measured, threshold, passed: measured > threshold, note: String::new(), gate: Gate::Above }
    }

    /// Reported value with no gate.
    pub fn info(name: impl Into<String>, measured: f64) -> Self {
        Check { name: name.into(), measured, threshold: f64::NAN, passed: true, note: String::new(), gate: Gate::Info }
    }

    pub fn failed(name: impl Into<String>, err: &Error) -> Self {
        Check {
            name: name.into(),
            measured: f64::NAN,
            threshold: f64::NAN,
            passed: false,
            note: format!("ERROR {}: {err}", err.code()),
            gate: Gate::Below,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        self.note = if self.note.is_empty() { note } else { format!("{}; {note}", self.note) };
        self
    }

    fn from_result(name: &str, r: Result<f64>, gate: impl FnOnce(&str, f64) -> Check) -> Check {
        match r {
            Ok(v) => gate(name, v),
            Err(e) => Check::failed(name, &e),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match (self.gate, self.passed) {
            (Gate::Info, _) => "info",
            (_, true) => "pass",
            (_, false) => "FAIL",
        };
        write!(f, "  {tag}  {:<52} {:>12.4e}", self.name, self.measured)?;
        match self.gate {
            Gate::Below if !self.threshold.is_nan() => write!(f, "  < {}", plain(self.threshold))?,
            Gate::Above if !self.threshold.is_nan() => write!(f, "  > {}", plain(self.threshold))?,
            Gate::Zero => write!(f, "  == 0")?,
            _ => {}
        }
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

fn plain(t: f64) -> String {
    if t == 0.0 || (1e-3..1e4).contains(&t.abs()) {
        format!("{t}")
    } else {
        format!("{t:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub id: u32,
    pub title: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// The single summary line, `PASS <id> <title>` or `FAIL <id> <title>`.
    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            format!("PASS {} {}", self.id, self.title)
        } else {
            format!("FAIL {} {} [{}]", self.id, self.title, failed.join("; "))
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary())?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Least-squares line `y = slope·x + intercept` and its R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Standard deviation over mean.
pub fn coefficient_of_variation(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean.abs()
}

/// Continuous phase from a sequence of complex samples.
pub fn unwrapped_phase(values: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for v in values {
        let a = v.arg();
        if let Some(p) = prev {
            let d = a - p;
            if d > PI {
                offset -= 2.0 * PI;
            } else if d < -PI {
                offset += 2.0 * PI;
            }
        }
        prev = Some(a);
        out.push(a + offset);
    }
    out
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    grid(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

/// Largest value, or the first error.
fn worst(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m = 0.0f64;
    for v in values {
        m = m.max(v?);
    }
    Ok(m)
}

fn random_complex(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), rng.gen_range(-PI..PI))
}

/// Random parameters with every field of modulus at most 5 and β at least
/// 0.25 away from the negative integers.
pub fn random_heun_params(rng: &mut ChaCha8Rng) -> ConfluentHeunParams {
    let beta = loop {
        let b = random_complex(rng, 5.0);
        if (1..=5).all(|j| (b + j as f64).norm() >= 0.25) {
            break b;
        }
    };
    ConfluentHeunParams::new(random_complex(rng, 5.0), beta, random_complex(rng, 5.0), random_complex(rng, 5.0), random_complex(rng, 5.0))
}

/// Normalized residual of the confluent Heun equation at `z`, second
/// derivative from the stencil applied to the returned first derivative.
pub fn heun_residual(p: &ConfluentHeunParams, z: f64, tol: f64) -> Result<f64> {
    let h = default_step(z);
    let (v, d2) = second_derivative(|x| heun::heun_eval(p, x, tol), z, h)?;
    let acc = p.accessory();
    let friction = p.alpha + (p.gamma + 1.0) / (z - 1.0) + (p.beta + 1.0) / z;
    let potential = acc.mu / z + acc.nu / (z - 1.0);
    Ok(normalized(&[d2, friction * v.derivative, potential * v.value]))
}

pub const HEUN_SETS: usize = 100;

pub fn heun_suite(seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sets: Vec<ConfluentHeunParams> = (0..HEUN_SETS).map(|_| random_heun_params(&mut rng)).collect();
    let zs: Vec<f64> = grid(-0.9, 0.45, 28).into_iter().filter(|z| z.abs() > 1e-9).collect();
    let tol = 1e-12;
    let residual = worst(sets.par_iter().map(|p| worst(zs.iter().map(|&z| heun_residual(p, z, tol)))).collect::<Vec<_>>());
    let mut value_at_zero = 0.0f64;
    let mut slope_at_zero = 0.0f64;
    let mut origin_err = None;
    for p in &sets {
        match heun::heun_eval(p, 0.0, tol) {
            Ok(v) => {
                value_at_zero = value_at_zero.max((v.value - 1.0).norm());
                let expect = -p.accessory().mu / (p.beta + 1.0);
                slope_at_zero = slope_at_zero.max((v.derivative - expect).norm() / expect.norm().max(1.0));
            }
            Err(e) => origin_err = Some(e),
        }
    }
    let mut checks = vec![Check::from_result("max normalized residual, z in [-0.9, 0.45]", residual, |n, v| Check::below(n, v, 1e-6))
        .with_note(format!("{HEUN_SETS} random sets, seed {seed}"))];
    match origin_err {
        Some(e) => checks.push(Check::failed("H(0) = 1 and H'(0) = -mu/(beta+1)", &e)),
        None => {
            checks.push(Check::zero("max |H(0) - 1|", value_at_zero));
            checks.push(Check::below("max |H'(0) + mu/(beta+1)| (relative)", slope_at_zero, 1e-12));
        }
    }
    Report { id: 1, title: "confluent Heun residual suite".into(), checks }
}

/// The figure parameters followed by `n` random ±20% perturbations of all five.
pub fn dirac_parameter_sets(seed: u64, n: usize) -> Vec<(DiracBackground, DiracMode)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![(DiracBackground::figure(), DiracMode::figure())];
    let (bg, mode) = out[0];
    for _ in 0..n {
        let mut f = || rng.gen_range(0.8..1.2);
        let b = DiracBackground::new(bg.m() * f(), bg.p() * f(), (bg.a() * f()).min(1.0)).expect("perturbed background");
        let m = DiracMode::new(mode.k * f(), mode.lambda * f()).expect("perturbed mode");
        out.push((b, m));
    }
    out
}

/// Residual of one closed form at position `x` (u for the horizon forms, r for the origin forms).
pub fn dirac_residual(bg: &DiracBackground, mode: &DiracMode, spec: ClosedSolutionSpec, x: f64, tol: f64) -> Result<f64> {
    let f = |y: f64| dirac::closed_solution(bg, mode, spec, y, tol);
    match spec.expansion {
        ExpansionPoint::Horizon => dirac::residual_second_order(bg, mode, f, x, default_step(x)),
        ExpansionPoint::Origin => dirac::residual_origin(bg, mode, f, x, default_step(x)),
    }
}

fn spec_label(spec: ClosedSolutionSpec) -> &'static str {
    match (spec.expansion, spec.branch) {
        (ExpansionPoint::Origin, Branch::Regular) => "origin/regular",
        (ExpansionPoint::Origin, Branch::Second) => "origin/second",
        (ExpansionPoint::Horizon, Branch::Regular) => "horizon/regular",
        (ExpansionPoint::Horizon, Branch::Second) => "horizon/second",
    }
}

pub fn dirac_suite(seed: u64) -> Report {
    let sets = dirac_parameter_sets(seed, 10);
    let tol = 1e-11;
    let mut checks = Vec::new();
    for spec in [
        ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular),
        ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Second),
        ClosedSolutionSpec::new(ExpansionPoint::Origin, Branch::Regular),
        ClosedSolutionSpec::new(ExpansionPoint::Origin, Branch::Second),
    ] {
        let per_set: Vec<Result<f64>> = sets
            .par_iter()
            .map(|(bg, mode)| {
                let xs = match spec.expansion {
                    ExpansionPoint::Horizon => log_grid(0.5, 50.0, 30),
                    // [0.5, 9.5] at M = 5, kept 0.5 away from both ends for other M
                    ExpansionPoint::Origin => grid(0.5, 2.0 * bg.m() - 0.5, 30),
                };
                worst(xs.into_iter().map(|x| dirac_residual(bg, mode, spec, x, tol)))
            })
            .collect();
        let range = match spec.expansion {
            ExpansionPoint::Horizon => "u in [0.5, 50]",
            ExpansionPoint::Origin => "r in [0.5, 2M-0.5]",
        };
        checks.push(
            Check::from_result(&format!("{} max residual, {range}", spec_label(spec)), worst(per_set), |n, v| Check::below(n, v, 1e-8))
                .with_note(format!("figure set + 10 perturbed, seed {seed}")),
        );
    }
    Report { id: 2, title: "Dirac closed-form residuals".into(), checks }
}

/// Largest relative deviation between the integrated first-order system and
/// the regular horizon form, with initial data taken from the closed form at `u = 0.5`.
pub fn oracle_deviation(bg: &DiracBackground, mode: &DiracMode, tol: f64) -> Result<f64> {
    let spec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular);
    let two_m = 2.0 * bg.m();
    let u0 = 0.5;
    let start = dirac::closed_solution(bg, mode, spec, u0, 1e-13)?;
    let init = dirac::spinor_from_t1(bg, mode, u0 + two_m, &start)?;
    let us = grid(u0, 50.0, 100);
    let rs: Vec<f64> = us[1..].iter().map(|u| u + two_m).collect();
    let states = dirac::integrate_system_at(bg, mode, u0 + two_m, init, &rs, tol)?;
    worst(us[1..].iter().zip(states).map(|(&u, s)| {
        let t = dirac::closed_solution(bg, mode, spec, u, 1e-13)?;
        Ok((s.t1 - t.value).norm() / t.value.norm())
    }))
}

pub fn oracle_suite() -> Report {
    let (bg, mode) = (DiracBackground::figure(), DiracMode::figure());
    let dev = oracle_deviation(&bg, &mode, 1e-11);
    Report {
        id: 3,
        title: "first-order system oracle".into(),
        checks: vec![Check::from_result("max relative deviation of T1, u in [0.5, 50]", dev, |n, v| Check::below(n, v, 1e-6))],
    }
}

/// `max |c(x) − c(x₀)| / |c(x₀)|` over the samples.
fn spread(values: &[Complex64]) -> f64 {
    let c0 = values[0];
    values.iter().map(|c| (c - c0).norm() / c0.norm()).fold(0.0, f64::max)
}

pub fn dirac_wronskian_spread(bg: &DiracBackground, mode: &DiracMode) -> Result<f64> {
    let m2 = 2.0 * bg.m();
    let reg = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Regular);
    let sec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, Branch::Second);
    let vals = log_grid(0.5, 50.0, 25)
        .into_iter()
        .map(|u| {
            let a = dirac::closed_solution(bg, mode, reg, u, 1e-12)?;
            let b = dirac::closed_solution(bg, mode, sec, u, 1e-12)?;
            Ok(dirac::wronskian(&a, &b) * (u * (u + m2)).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(spread(&vals))
}

pub fn kg_wronskian_spread(bg: &KGBackground, mode: &KGMode) -> Result<f64> {
    let (r1, _) = kg_horizons(bg);
    let vals = log_grid(0.5, 50.0, 25)
        .into_iter()
        .map(|u| {
            let a = kg_closed_solution(bg, mode, KGClosedSpec::new(Branch::Regular), u, 1e-12)?;
            let b = kg_closed_solution(bg, mode, KGClosedSpec::new(Branch::Second), u, 1e-12)?;
            Ok(dirac::wronskian(&a, &b) * kg_delta(bg, u + r1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(spread(&vals))
}

pub fn identity_suite() -> Report {
    let (bg, mode) = (DiracBackground::figure(), DiracMode::figure());
    let kbg = KGBackground::new(5.0, 0.1).expect("kg background");
    let kmode = KGMode::legendre(0.3, 1, 0).expect("kg mode");
    let mut checks = Vec::new();
    for spec in ClosedSolutionSpec::ALL {
        let acc = spec.closed_form(&bg, &mode).params.accessory();
        checks.push(Check::below(format!("|mu + nu| Dirac {}", spec_label(spec)), (acc.mu + acc.nu).norm(), 1e-12));
    }
    for (label, branch) in [("regular", Branch::Regular), ("second", Branch::Second)] {
        let acc = KGClosedSpec::new(branch).closed_form(&kbg, &kmode).params.accessory();
        checks.push(Check::below(format!("|mu + nu| KG {label}"), (acc.mu + acc.nu).norm(), 1e-12));
    }
    checks.push(Check::from_result("Dirac W*sqrt(u(u+2M)) relative spread, u in [0.5, 50]", dirac_wronskian_spread(&bg, &mode), |n, v| {
        Check::below(n, v, 1e-7)
    }));
    checks.push(Check::from_result("KG W*Delta relative spread, u in [0.5, 50]", kg_wronskian_spread(&kbg, &kmode), |n, v| {
        Check::below(n, v, 1e-7)
    }));
    let mut root = 0.0f64;
    for m in [1.0, 5.0, 10.0] {
        for a in [0.1, 0.5, 0.9, 1.0] {
            let b = KGBackground::new(m, a).expect("kg background");
            let (r1, r2) = kg_horizons(&b);
            root = root.max(kg_delta(&b, r1).abs().max(kg_delta(&b, r2).abs()) / (m * m));
        }
    }
    checks.push(Check::below("max |Delta(M(1+-a))| / M^2", root, 1e-12));
    Report { id: 4, title: "identity suite".into(), checks }
}

fn horizon_values(bg: &DiracBackground, mode: &DiracMode, branch: Branch, us: &[f64], tol: f64) -> Result<Vec<Complex64>> {
    let spec = ClosedSolutionSpec::new(ExpansionPoint::Horizon, branch);
    us.iter().map(|&u| dirac::closed_solution(bg, mode, spec, u, tol).map(|e| e.value)).collect()
}

/// Log-log slope of `|T₁|` for the given horizon branch on `[lo, hi]`.
pub fn modulus_slope(bg: &DiracBackground, mode: &DiracMode, branch: Branch, lo: f64, hi: f64) -> Result<f64> {
    modulus_slope_tol(bg, mode, branch, lo, hi, 1e-12)
}

fn modulus_slope_tol(bg: &DiracBackground, mode: &DiracMode, branch: Branch, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let us = log_grid(lo, hi, 60);
    let vals = horizon_values(bg, mode, branch, &us, tol)?;
    let xs: Vec<f64> = us.iter().map(|u| u.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.norm().ln()).collect();
    Ok(linear_fit(&xs, &ys).0)
}

/// Modulus coefficient of variation, phase-fit R² and fitted angular frequency on `[lo, hi]`.
pub fn plane_wave_fit(bg: &DiracBackground, mode: &DiracMode, branch: Branch, lo: f64, hi: f64) -> Result<(f64, f64, f64)> {
    let us = grid(lo, hi, 400);
    let vals = horizon_values(bg, mode, branch, &us, 1e-12)?;
    let moduli: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    let (slope, _, r2) = linear_fit(&us, &unwrapped_phase(&vals));
    Ok((coefficient_of_variation(&moduli), r2, slope.abs()))
}

pub fn asymptotic_suite() -> Report {
    let (bg, mode) = (DiracBackground::figure(), DiracMode::figure());
    let mut checks = Vec::new();
    match modulus_slope(&bg, &mode, Branch::Second, 50.0, 100.0) {
        Ok(s) => checks
            .push(Check::below("decaying branch |slope + 1|, u in [50, 100]", (s + 1.0).abs(), 0.05).with_note(format!("slope {s:.4}"))),
        Err(e) => checks.push(Check::failed("decaying branch |slope + 1|, u in [50, 100]", &e)),
    }
    let decreasing = horizon_values(&bg, &mode, Branch::Second, &grid(20.0, 50.0, 300), 1e-12).map(|v| {
        // largest relative step up; negative when the modulus strictly decreases
        v.windows(2).map(|w| (w[1].norm() - w[0].norm()) / w[0].norm()).fold(f64::NEG_INFINITY, f64::max)
    });
    checks.push(Check::from_result("decaying branch max relative increment, u in [20, 50]", decreasing, |n, v| Check::below(n, v, 0.0)));
    match plane_wave_fit(&bg, &mode, Branch::Regular, 20.0, 50.0) {
        Ok((cv, r2, freq)) => {
            let (c1, c2) = dirac::phase_rate_candidates(&bg, &mode);
            checks.push(Check::below("oscillatory branch modulus CV, u in [20, 50]", cv, 0.10));
            checks.push(Check::above("oscillatory branch phase fit R^2, u in [20, 50]", r2, 0.999));
            checks.push(Check::info("fitted phase rate", freq));
            checks.push(Check::info("candidate k[(p+1)a^2+p-1]/2", c1).with_note(format!("ratio {:.4}", freq / c1)));
            checks.push(Check::info("candidate 2[(p+1)a^2+p-1]Mk", c2).with_note(format!("ratio {:.4}", freq / c2)));
        }
        Err(e) => checks.push(Check::failed("oscillatory branch plane-wave fit", &e)),
    }
    // slope further out, to show where the decaying branch is heading
    for (lo, hi) in [(100.0, 200.0), (200.0, 400.0), (400.0, 800.0)] {
        if let Ok(s) = modulus_slope_tol(&bg, &mode, Branch::Second, lo, hi, 1e-10) {
            checks.push(Check::info(format!("decaying branch slope, u in [{lo}, {hi}]"), s));
        }
    }
    Report { id: 5, title: "large-u asymptotics".into(), checks }
}

pub struct KgGridPoint {
    pub bg: KGBackground,
    pub mode: KGMode,
}

/// M ∈ {1,5,10}, a ∈ {0.1,0.5,0.9}, ω ∈ {0.1,0.3,1}, λ ∈ {0,2,6}.
pub fn kg_grid() -> Vec<KgGridPoint> {
    let mut out = Vec::with_capacity(81);
    for m in [1.0, 5.0, 10.0] {
        for a in [0.1, 0.5, 0.9] {
            for omega in [0.1, 0.3, 1.0] {
                for lambda in [0.0, 2.0, 6.0] {
                    out.push(KgGridPoint {
                        bg: KGBackground::new(m, a).expect("grid"),
                        mode: KGMode::new(omega, 0, lambda).expect("grid"),
                    });
                }
            }
        }
    }
    out
}

pub fn kg_max_residual(bg: &KGBackground, mode: &KGMode, branch: Branch, us: &[f64], tol: f64) -> Result<f64> {
    let spec = KGClosedSpec::new(branch);
    worst(us.iter().map(|&u| kg_residual(bg, mode, |x| kg_closed_solution(bg, mode, spec, x, tol), u, default_step(u))))
}

/// Normalized residual of the expanded field equation at `(r, θ)` for
/// `Φ = F(r − r₁) P_l^n(cos θ)`, the time and azimuthal factors taken analytically.
pub fn kg_field_residual(bg: &KGBackground, mode: &KGMode, l: u32, branch: Branch, r: f64, theta: f64) -> Result<f64> {
    let (r1, _) = kg_horizons(bg);
    let n = mode.n;
    let u = r - r1;
    let spec = KGClosedSpec::new(branch);
    let (f, f2) = second_derivative(|x| kg_closed_solution(bg, mode, spec, x, 1e-13), u, default_step(u))?;
    let s = assoc_legendre(l, n, theta.cos())?;
    let s1 = assoc_legendre_theta_derivative(l, n, theta)?;
    let s2 = second_derivative_real(|t| assoc_legendre_theta_derivative(l, n, t).unwrap_or(f64::NAN), theta, 1e-5);
    let delta = kg_delta(bg, r);
    let d_delta = 2.0 * r - 2.0 * bg.m();
    let (sin, cos) = theta.sin_cos();
    let sin2 = sin * sin;
    let w2 = mode.omega * mode.omega;
    let nn = (n as f64).powi(2);
    Ok(normalized(&[
        f.value * s * sin2 * r.powi(4) * w2,
        f2 * s * delta * delta * sin2,
        f.derivative * s * delta * sin2 * d_delta,
        -f.value * s * delta * nn,
        f.value * s1 * delta * sin * cos,
        f.value * s2 * delta * sin2,
    ]))
}

pub fn kg_suite() -> Report {
    let points = kg_grid();
    let mut checks = Vec::new();
    for (label, branch) in [("regular", Branch::Regular), ("second", Branch::Second)] {
        let res = worst(
            points
                .par_iter()
                .map(|g| kg_max_residual(&g.bg, &g.mode, branch, &log_grid(0.1 * g.bg.m(), 10.0 * g.bg.m(), 12), 1e-11))
                .collect::<Vec<_>>(),
        );
        checks.push(
            Check::from_result(&format!("{label} max residual, 81-point grid, u in [0.1M, 10M]"), res, |n, v| Check::below(n, v, 1e-8))
                .with_note(format!("{} parameter points", points.len())),
        );
    }
    let bg = KGBackground::new(5.0, 0.1).expect("kg background");
    let mode = KGMode::legendre(0.3, 1, 0).expect("kg mode");
    let (r1, _) = kg_horizons(&bg);
    let rs = grid(r1 + 0.5, r1 + 20.0, 20);
    let thetas = grid(0.2, PI - 0.2, 20);
    let field = worst(
        rs.iter().flat_map(|&r| thetas.iter().map(move |&t| (r, t))).map(|(r, t)| kg_field_residual(&bg, &mode, 1, Branch::Regular, r, t)),
    );
    checks.push(Check::from_result("field equation residual, 20x20 (r, theta), l=1 n=0", field, |n, v| Check::below(n, v, 1e-6)));
    if let Ok(s) = kg_modulus_slope(&bg, &mode, 50.0, 100.0) {
        checks.push(Check::info("regular branch |F| log-log slope, u in [50, 100]", s));
    }
    Report { id: 6, title: "Klein-Gordon suite".into(), checks }
}

pub fn kg_modulus_slope(bg: &KGBackground, mode: &KGMode, lo: f64, hi: f64) -> Result<f64> {
    let us = log_grid(lo, hi, 60);
    let ys = us
        .iter()
        .map(|&u| kg_closed_solution(bg, mode, KGClosedSpec::new(Branch::Regular), u, 1e-12).map(|e| e.value.norm().ln()))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = us.iter().map(|u| u.ln()).collect();
    Ok(linear_fit(&xs, &ys).0)
}

/// Simpson's rule for `∫₋₁¹ P_l^n P_{l'}^n dx` on 2001 points.
pub fn legendre_overlap(l1: u32, l2: u32, n: i32) -> Result<f64> {
    let xs = grid(-1.0, 1.0, 2001);
    let h = 2.0 / 2000.0;
    let mut sum = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let w = if i == 0 || i == 2000 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * assoc_legendre(l1, n, x)? * assoc_legendre(l2, n, x)?;
    }
    Ok(sum * h / 3.0)
}

pub fn angular_suite(seed: u64) -> Report {
    let thetas = grid(0.1, PI - 0.1, 50);
    let h = 1e-5;
    let modes: Vec<AngularMode> =
        (0..=10u32).flat_map(|l| (-(l as i32)..=l as i32).map(move |n| AngularMode::new(l, n).expect("|n| <= l"))).collect();
    let max_res = worst(modes.iter().flat_map(|m| thetas.iter().map(move |&t| angular_residual(m, t, h))));
    let case = AngularMode::new(5, 3).expect("valid mode");
    let control = [0.5, 1.0, 2.0]
        .into_iter()
        .map(|t| angular_residual_with(&case, case.lambda() + 0.1, t, h))
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min));
    // the same control over the whole grid: median over angles, weakest (l, n)
    let grid_control = modes
        .iter()
        .map(|m| {
            let mut v = thetas.iter().map(|&t| angular_residual_with(m, m.lambda() + 0.1, t, h)).collect::<Result<Vec<f64>>>()?;
            v.sort_by(|a, b| a.total_cmp(b));
            Ok(v[v.len() / 2])
        })
        .collect::<Result<Vec<f64>>>()
        .map(|v| v.into_iter().fold(f64::INFINITY, f64::min));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parity = 0.0f64;
    for _ in 0..200 {
        let l = rng.gen_range(0..=10u32);
        let n = rng.gen_range(-(l as i32)..=l as i32);
        let x: f64 = rng.gen_range(-1.0..=1.0);
        let sign = if (l as i32 + n).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let a = assoc_legendre(l, n, -x).unwrap_or(f64::NAN);
        let b = assoc_legendre(l, n, x).unwrap_or(f64::NAN);
        parity = parity.max((a - sign * b).abs() / b.abs().max(1.0));
    }
    let mut overlap = Ok(0.0f64);
    'outer: for n in 0..=3i32 {
        for l1 in n as u32..=6 {
            for l2 in (l1 + 1)..=6 {
                let norm = legendre_overlap(l1, l1, n).and_then(|a| legendre_overlap(l2, l2, n).map(|b| (a * b).sqrt()));
                match legendre_overlap(l1, l2, n).and_then(|v| norm.map(|d| v / d)) {
                    Ok(v) => overlap = overlap.map(|o| o.max(v.abs())),
                    Err(e) => {
                        overlap = Err(e);
                        break 'outer;
                    }
                }
            }
        }
    }
    Report {
        id: 7,
        title: "angular suite".into(),
        checks: vec![
            Check::from_result("max residual, l <= 10, |n| <= l, 50 angles", max_res, |n, v| Check::below(n, v, 1e-8)),
            Check::from_result("negative control (lambda + 0.1), l=5 n=3, min over 3 angles", control, |n, v| Check::above(n, v, 1e-3)),
            Check::from_result("negative control over l <= 10, weakest median", grid_control, |n, v| Check::info(n, v)),
            Check::below("parity P(-x) = (-1)^(l+n) P(x), 200 random draws", parity, 1e-12),
            Check::from_result("normalized overlap, Simpson 2001 points, l,l' <= 6", overlap, |n, v| Check::below(n, v, 1e-8)),
        ],
    }
}

/// Local rate of phase change of the samples in the coordinate window.
fn phase_rate(curve: &SampledCurve, lo: f64, hi: f64) -> f64 {
    let w = curve.window(lo, hi);
    let vals: Vec<Complex64> = w.iter().map(|s| Complex64::new(s.re, s.im)).collect();
    let ph = unwrapped_phase(&vals);
    let span = w[w.len() - 1].coordinate - w[0].coordinate;
    (ph[ph.len() - 1] - ph[0]).abs() / span
}

/// Qualitative properties of the two figure curves. `m` is the mass used for Figure 1.
pub fn figure_checks(fig1: &SampledCurve, fig2: &SampledCurve, m: f64) -> Report {
    let mut checks = Vec::new();
    let last = fig1.rows[fig1.rows.len() - 1];
    let near_mid = fig1.rows.iter().min_by(|a, b| (a.coordinate - m).abs().total_cmp(&(b.coordinate - m).abs())).expect("non-empty");
    checks.push(
        Check::above("fig1 |T| at r_max over |T| at r=M", last.abs / near_mid.abs, 1.0).with_note(format!("r_max = {}", last.coordinate)),
    );
    let outer: Vec<f64> = fig1.window(m, last.coordinate).iter().map(|s| s.abs).collect();
    let rises = outer.windows(2).filter(|w| w[1] >= w[0]).count() as f64 / (outer.len() - 1) as f64;
    checks.push(Check::above("fig1 fraction of rising |T| steps on [M, r_max]", rises, 0.95));
    let hi = last.coordinate;
    let span = hi - fig1.rows[0].coordinate;
    let edge = phase_rate(fig1, hi - 0.05 * span, hi);
    let middle = phase_rate(fig1, m - 0.025 * span, m + 0.025 * span);
    checks.push(Check::above("fig1 phase rate near r=2M over phase rate at r=M", edge / middle, 3.0));
    let moduli: Vec<f64> = fig2.window(20.0, 50.0).iter().map(|s| s.abs).collect();
    checks.push(Check::below("fig2 |T| coefficient of variation, u in [20, 50]", coefficient_of_variation(&moduli), 0.10));
    let vals: Vec<Complex64> = fig2.window(20.0, 50.0).iter().map(|s| Complex64::new(s.re, s.im)).collect();
    let us: Vec<f64> = fig2.window(20.0, 50.0).iter().map(|s| s.coordinate).collect();
    checks.push(Check::above("fig2 phase fit R^2, u in [20, 50]", linear_fit(&us, &unwrapped_phase(&vals)).2, 0.999));
    Report { id: 8, title: "figure reproduction".into(), checks }
}

/// Figure checks on curves sampled in-process from the presets.
pub fn figure_suite() -> Report {
    use crate::figures::{sample_curve, RunConfig};
    let c1 = RunConfig::fig1();
    match (sample_curve(&c1), sample_curve(&RunConfig::fig2())) {
        (Ok(a), Ok(b)) => figure_checks(&a, &b, c1.m),
        (Err(e), _) | (_, Err(e)) => {
            Report { id: 8, title: "figure reproduction".into(), checks: vec![Check::failed("sample presets", &e)] }
        }
    }
}

pub fn all_suites(seed: u64) -> Vec<Report> {
    vec![
        heun_suite(seed),
        dirac_suite(seed),
        oracle_suite(),
        identity_suite(),
        asymptotic_suite(),
        kg_suite(),
        angular_suite(seed),
        figure_suite(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let (s, i, r2) = linear_fit(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-14 && (i + 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unwrap_follows_rotation() {
        let vals: Vec<Complex64> = (0..100).map(|j| Complex64::from_polar(1.0, 0.5 * j as f64)).collect();
        let ph = unwrapped_phase(&vals);
        assert!((ph[99] - 49.5).abs() < 1e-12);
    }

    #[test]
    fn cv_of_constant_is_zero() {
        assert_eq!(coefficient_of_variation(&[2.0; 5]), 0.0);
    }

    #[test]
    fn random_params_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let p = random_heun_params(&mut rng);
            for x in [p.alpha, p.beta, p.gamma, p.delta, p.eta] {
                assert!(x.norm() <= 5.0);
            }
            assert!(!p.beta_is_negative_integer());
        }
    }

    #[test]
    fn reports_flag_failures() {
        let r = Report {
            id: 9,
            title: "t".into(),
            checks: vec![Check::below("a", 1.0, 2.0), Check::above("b", 1.0, 2.0), Check::info("c", 3.0)],
        };
        assert!(!r.passed());
        assert_eq!(r.summary(), "FAIL 9 t [b]");
        assert!(Check::failed("x", &Error::EmptyCurve).note.contains("EMPTY_CURVE"));
    }
}
