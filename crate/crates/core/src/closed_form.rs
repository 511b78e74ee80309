//! Closed-form solutions of the shape
//! `exp(rate·x) · Π (slope·x + offset)^exponent · H_C(params, z_slope·x)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::heun::{heun_eval, ConfluentHeunParams, EvalResult};

/// Which of the two local Frobenius solutions a printed formula represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Analytic at the expansion point.
    Regular,
    /// Carries the extra `^(−β)` power of the expansion coordinate.
    Second,
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Ok(Branch::Regular),
            "second" => Ok(Branch::Second),
            other => Err(Error::InvalidParameter(format!("unknown branch '{other}' (expected regular|second)"))),
        }
    }
}

/// `(slope·x + offset)^exponent` on the principal branch; the base must stay positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFactor {
    pub slope: f64,
    pub offset: f64,
    pub exponent: Complex64,
}

impl PowerFactor {
    pub fn new(slope: f64, offset: f64, exponent: Complex64) -> Self {
        PowerFactor { slope, offset, exponent }
    }

    fn base(&self, x: f64) -> f64 {
        self.slope * x + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedForm {
    pub params: ConfluentHeunParams,
    pub exp_rate: Complex64,
    pub factors: Vec<PowerFactor>,
    pub z_slope: f64,
}

impl ClosedForm {
    pub fn heun_argument(&self, x: f64) -> f64 {
        self.z_slope * x
    }

    /// Prefactor value and its logarithmic derivative at `x`.
    pub fn prefactor(&self, x: f64) -> Result<(Complex64, Complex64)> {
        let mut log_value = self.exp_rate * x;
        let mut log_deriv = self.exp_rate;
        for f in &self.factors {
            let base = f.base(x);
            if !(base > 0.0) {
                return Err(Error::OutOfDomain(format!("power base {base} is not positive at x = {x}")));
            }
            log_value += f.exponent * base.ln();
            log_deriv += f.exponent * (f.slope / base);
        }
        Ok((log_value.exp(), log_deriv))
    }

    pub fn eval(&self, x: f64, tol: f64) -> Result<EvalResult> {
        let (pre, log_deriv) = self.prefactor(x)?;
        let h = heun_eval(&self.params, self.heun_argument(x), tol)?;
        Ok(EvalResult {
            value: pre * h.value,
            derivative: pre * (log_deriv * h.value + h.derivative * self.z_slope),
            err_estimate: pre.norm() * h.err_estimate,
        })
    }

    /// Sum of the exponents of the factors whose base vanishes at `x = 0`.
    pub fn power_at_origin(&self) -> Complex64 {
        self.factors.iter().filter(|f| f.offset == 0.0).map(|f| f.exponent).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefactor_rejects_nonpositive_base() {
        let cf = ClosedForm {
            params: ConfluentHeunParams::zero(),
            exp_rate: Complex64::new(0.0, 1.0),
            factors: vec![PowerFactor::new(1.0, 0.0, Complex64::new(0.5, 0.0))],
            z_slope: 0.1,
        };
        assert!(cf.eval(-1.0, 1e-10).is_err());
        assert!(cf.eval(0.0, 1e-10).is_err());
        let r = cf.eval(4.0, 1e-12).unwrap();
        assert!((r.value - Complex64::new(0.0, 4.0).exp() * 2.0).norm() < 1e-14);
        // d/dx [e^{ix} x^{1/2}] = e^{ix} x^{1/2} (i + 1/(2x))
        let expect = r.value * Complex64::new(1.0 / 8.0, 1.0);
        assert!((r.derivative - expect).norm() < 1e-14);
    }

    #[test]
    fn branch_parses() {
        assert_eq!("Regular".parse::<Branch>().unwrap(), Branch::Regular);
        assert_eq!("second".parse::<Branch>().unwrap(), Branch::Second);
        assert!("third".parse::<Branch>().is_err());
    }
}
