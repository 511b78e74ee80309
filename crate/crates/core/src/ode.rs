//! Adaptive Gragg–Bulirsch–Stoer integration of two-component complex
//! first-order systems along the real axis.
//!
//! Each step runs the modified midpoint rule with the substep sequence
//! 2, 4, 6, …, 16 and extrapolates the results to zero step size. The
//! difference between the last two diagonal entries of the tableau is an
//! embedded (order k versus order k−1) estimate of the local error; steps
//! are accepted once that estimate drops below the requested tolerance.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Two complex components, usually (value, derivative).
pub type State = [Complex64; 2];

const SEQUENCE: [usize; 8] = [2, 4, 6, 8, 10, 12, 14, 16];
const MAX_STEPS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }
}

/// Result of integrating through a list of output points.
#[derive(Debug, Clone)]
pub struct Integration {
    /// State at each requested output point, in request order.
    pub states: Vec<State>,
    /// Accumulated absolute local-error estimate up to each output point.
    pub errors: Vec<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

fn axpy(y: &State, h: f64, k: &State) -> State {
    [y[0] + k[0] * h, y[1] + k[1] * h]
}

fn midpoint<F>(f: &F, x: f64, y: &State, big_h: f64, n: usize) -> State
where
    F: Fn(f64, &State) -> State,
{
    let h = big_h / n as f64;
    let mut prev = *y;
    let mut cur = axpy(y, h, &f(x, y));
    for m in 1..n {
        let d = f(x + m as f64 * h, &cur);
        let next = axpy(&prev, 2.0 * h, &d);
        prev = cur;
        cur = next;
    }
    let d = f(x + big_h, &cur);
    let end = axpy(&prev, h, &d);
    [(cur[0] + end[0]) * 0.5, (cur[1] + end[1]) * 0.5]
}

fn scaled_rms(diff: &State, y0: &State, y1: &State, tol: Tolerance) -> (f64, f64) {
    let mut acc = 0.0;
    let mut abs_acc = 0.0;
    for i in 0..2 {
        let sc = tol.abs + tol.rel * y0[i].norm().max(y1[i].norm());
        let d = diff[i].norm();
        acc += (d / sc).powi(2);
        abs_acc += d * d;
    }
    ((acc / 2.0).sqrt(), abs_acc.sqrt())
}

/// One extrapolated step of size `big_h`. Returns the new state, the
/// scaled error, the absolute error estimate and the column that converged,
/// or `None` when no column met the tolerance.
fn bs_step<F>(f: &F, x: f64, y: &State, big_h: f64, tol: Tolerance) -> (Option<(State, f64, f64)>, f64, usize)
where
    F: Fn(f64, &State) -> State,
{
    let mut table: Vec<State> = Vec::with_capacity(SEQUENCE.len());
    let mut last_err = f64::INFINITY;
    for (j, &nj) in SEQUENCE.iter().enumerate() {
        let mut row: Vec<State> = Vec::with_capacity(j + 1);
        row.push(midpoint(f, x, y, big_h, nj));
        for k in 1..=j {
            let ratio = (nj as f64 / SEQUENCE[j - k] as f64).powi(2) - 1.0;
            let a = row[k - 1];
            let b = table_entry(&table, j - 1, k - 1);
            row.push([a[0] + (a[0] - b[0]) / ratio, a[1] + (a[1] - b[1]) / ratio]);
        }
        if j >= 2 {
            let best = row[j];
            let prev = row[j - 1];
            let diff = [best[0] - prev[0], best[1] - prev[1]];
            let (err, abs_err) = scaled_rms(&diff, y, &best, tol);
            last_err = err;
            if err <= 1.0 {
                return (Some((best, err, abs_err)), err, j);
            }
        }
        // flatten the row into the table store (only the diagonal band is reused)
        store_row(&mut table, row);
    }
    (None, last_err, SEQUENCE.len() - 1)
}

// The tableau is stored row-major in a flat vector: row j holds j+1 entries.
fn table_entry(table: &[State], row: usize, col: usize) -> State {
    table[row * (row + 1) / 2 + col]
}

fn store_row(table: &mut Vec<State>, row: Vec<State>) {
    table.extend(row);
}

fn step_factor(err: f64, column: usize) -> f64 {
    let order = (2 * column + 1) as f64;
    if err == 0.0 {
        return 4.0;
    }
    (0.94 * (0.65 / err).powf(1.0 / order)).clamp(0.2, 4.0)
}

/// Integrate `y' = f(x, y)` from `(x0, y0)` through every point of `points`
/// (monotone, all on the same side of `x0`), landing on each exactly.
pub fn integrate_through<F>(f: F, x0: f64, y0: State, points: &[f64], tol: Tolerance) -> Result<Integration>
where
    F: Fn(f64, &State) -> State,
{
    if points.is_empty() {
        return Ok(Integration { states: vec![], errors: vec![], accepted_steps: 0, rejected_steps: 0 });
    }
    let dir = if points[points.len() - 1] >= x0 { 1.0 } else { -1.0 };
    let mut prev_pt = x0;
    for &p in points {
        if (p - prev_pt) * dir < 0.0 || !p.is_finite() {
            return Err(Error::InvalidParameter("output points must be monotone away from the start".into()));
        }
        prev_pt = p;
    }

    let span = (points[points.len() - 1] - x0).abs();
    let mut h = dir * (span / 8.0).clamp(1e-6, 0.05);
    let mut x = x0;
    let mut y = y0;
    let mut err_acc = 0.0;
    let mut states = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    let (mut accepted, mut rejected) = (0usize, 0usize);

    for &target in points {
        while (target - x) * dir > 0.0 {
            if accepted + rejected > MAX_STEPS {
                return Err(Error::DidNotConverge { at: x, reason: "step budget exhausted".into() });
            }
            let remaining = target - x;
            let clipped = remaining.abs() <= h.abs() * 1.0000001;
            let this_h = if clipped { remaining } else { h };
            if this_h.abs() < 1e-14 * x.abs().max(1.0) {
                return Err(Error::DidNotConverge { at: x, reason: "step size underflow".into() });
            }
            match bs_step(&f, x, &y, this_h, tol) {
                (Some((ynew, err, abs_err)), _, col) => {
                    if !(ynew[0].is_finite() && ynew[1].is_finite()) {
                        return Err(Error::DidNotConverge { at: x, reason: "non-finite state".into() });
                    }
                    accepted += 1;
                    err_acc += abs_err;
                    x = if clipped { target } else { x + this_h };
                    y = ynew;
                    let grown = this_h * step_factor(err, col);
                    // keep the pre-clip step length when the clip shortened it a lot
                    h = if clipped && grown.abs() < h.abs() { h } else { grown };
                }
                (None, err, col) => {
                    rejected += 1;
                    let fac = if err.is_finite() { step_factor(err, col).min(0.5) } else { 0.2 };
                    h = this_h * fac;
                }
            }
        }
        states.push(y);
        errors.push(err_acc);
    }
    Ok(Integration { states, errors, accepted_steps: accepted, rejected_steps: rejected })
}

/// Integrate from `x0` to a single end point.
pub fn integrate<F>(f: F, x0: f64, y0: State, x1: f64, tol: Tolerance) -> Result<(State, f64)>
where
    F: Fn(f64, &State) -> State,
{
    let out = integrate_through(f, x0, y0, &[x1], tol)?;
    Ok((out.states[0], out.errors[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn harmonic_oscillator_matches_cosine() {
        let w = 3.0;
        let f = |_x: f64, y: &State| [y[1], -y[0] * (w * w)];
        let (y, _) = integrate(f, 0.0, [c(1.0), c(0.0)], 10.0, Tolerance::new(1e-12, 1e-12)).unwrap();
        assert!((y[0].re - (w * 10.0).cos()).abs() < 1e-9, "{}", y[0]);
        assert!((y[1].re + w * (w * 10.0).sin()).abs() < 1e-8);
    }

    #[test]
    fn complex_exponential_backwards() {
        let k = Complex64::new(0.3, 2.0);
        let f = move |_x: f64, y: &State| [y[0] * k, y[1] * (-k)];
        let (y, _) = integrate(f, 0.0, [c(1.0), c(1.0)], -4.0, Tolerance::new(1e-12, 1e-12)).unwrap();
        let exact = (k * -4.0).exp();
        assert!((y[0] - exact).norm() / exact.norm() < 1e-10);
        assert!((y[1] - (k * 4.0).exp()).norm() / (k * 4.0).exp().norm() < 1e-10);
    }

    #[test]
    fn lands_on_every_output_point() {
        let f = |_x: f64, _y: &State| [c(1.0), c(0.0)];
        let pts = [0.1, 0.25, 0.25, 1.0, 3.5];
        let out = integrate_through(f, 0.0, [c(0.0), c(0.0)], &pts, Tolerance::new(1e-12, 1e-12)).unwrap();
        for (p, s) in pts.iter().zip(&out.states) {
            assert!((s[0].re - p).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_non_monotone_points() {
        let f = |_x: f64, _y: &State| [c(1.0), c(0.0)];
        assert!(integrate_through(f, 0.0, [c(0.0), c(0.0)], &[1.0, 0.5], Tolerance::new(1e-8, 1e-8)).is_err());
    }
}
