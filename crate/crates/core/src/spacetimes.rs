//! The two background geometries: the twisted Schwarzschild–Bertotti–Robinson
//! interpolation used for the Dirac field, and the two-horizon metric with
//! `Δ = r² − 2Mr + M²(1−a²)` used for the Klein–Gordon field.

use crate::error::{Error, Result};

/// Metric parameters of the Dirac background: mass `M`, twist `p`,
/// interpolation parameter `a ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracBackground {
    m: f64,
    p: f64,
    a: f64,
}

impl DiracBackground {
    pub fn new(m: f64, p: f64, a: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("M must be positive, got {m}")));
        }
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!("p must be finite, got {p}")));
        }
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidParameter(format!("a must lie in [0, 1], got {a}")));
        }
        Ok(DiracBackground { m, p, a })
    }

    /// Parameters used for both published plots: M=5, p=10, a=0.1.
    pub fn figure() -> Self {
        DiracBackground { m: 5.0, p: 10.0, a: 0.1 }
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn a(&self) -> f64 {
        self.a
    }

    /// `(p+1)a² + p − 1`, twice the coefficient of `r²` in `r²f(r)`.
    pub fn kappa(&self) -> f64 {
        (self.p + 1.0) * self.a * self.a + self.p - 1.0
    }

    /// `a²p − 2a + p`, so that `r²f(0) = M² · area_minus`.
    pub fn area_minus(&self) -> f64 {
        self.a * self.a * self.p - 2.0 * self.a + self.p
    }

    /// `a²p + 2a + p`, so that `r²f(2M) = M² · area_plus`.
    pub fn area_plus(&self) -> f64 {
        self.a * self.a * self.p + 2.0 * self.a + self.p
    }

    /// Checks `r²f(r) > 0` on `[lo, hi]`; `r²f` is a quadratic in `r`,
    /// so endpoints plus the vertex suffice.
    pub fn area_positive_on(&self, lo: f64, hi: f64) -> bool {
        let quad = 0.5 * (self.p * (1.0 + self.a * self.a) + self.a * self.a - 1.0);
        let mut pts = vec![lo, hi];
        if quad != 0.0 {
            let lin = -self.m * (self.p * (1.0 + self.a * self.a) + self.a * self.a - 1.0) + 2.0 * self.m * self.a;
            let vertex = -lin / (2.0 * quad);
            if vertex > lo && vertex < hi {
                pts.push(vertex);
            }
        }
        pts.into_iter().all(|r| rsq_f(self, r) > 0.0)
    }
}

/// Mode parameters of the Dirac radial system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiracMode {
    pub k: f64,
    pub lambda: f64,
}

impl DiracMode {
    pub fn new(k: f64, lambda: f64) -> Result<Self> {
        if !k.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter("k and lambda must be finite".into()));
        }
        Ok(DiracMode { k, lambda })
    }

    pub fn figure() -> Self {
        DiracMode { k: 0.2, lambda: 0.7 }
    }
}

/// Two-horizon background with mass `M` and external parameter `a ∈ (0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGBackground {
    m: f64,
    a: f64,
}

impl KGBackground {
    /// `a = 0` is rejected: the horizons merge and the Heun argument scale
    /// `r₁ − r₂` vanishes.
    pub fn new(m: f64, a: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("M must be positive, got {m}")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidParameter(format!("a must lie in (0, 1], got {a}")));
        }
        Ok(KGBackground { m, a })
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn a(&self) -> f64 {
        self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KGMode {
    pub omega: f64,
    pub n: i32,
    /// Separation constant; `l(l+1)` on the Legendre branch.
    pub lambda: f64,
}

impl KGMode {
    pub fn new(omega: f64, n: i32, lambda: f64) -> Result<Self> {
        if !omega.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter("omega and lambda must be finite".into()));
        }
        Ok(KGMode { omega, n, lambda })
    }

    /// Mode on the associated-Legendre branch, `λ = l(l+1)` with `l ≥ |n|`.
    pub fn legendre(omega: f64, l: u32, n: i32) -> Result<Self> {
        if n.unsigned_abs() > l {
            return Err(Error::OrderExceedsDegree { degree: l, order: n.unsigned_abs() });
        }
        let lf = l as f64;
        Self::new(omega, n, lf * (lf + 1.0))
    }
}

/// `r²f(r) = ½ r(r−2M)[p(1+a²) + a² − 1] + 2Mar + M²[p(1+a²) − 2a]`.
pub fn rsq_f(bg: &DiracBackground, r: f64) -> f64 {
    let (m, p, a) = (bg.m, bg.p, bg.a);
    0.5 * r * (r - 2.0 * m) * (p * (1.0 + a * a) + a * a - 1.0) + 2.0 * m * a * r + m * m * (p * (1.0 + a * a) - 2.0 * a)
}

/// `H² = (r² − 2Mr) / r²f(r)`.
pub fn h_squared(bg: &DiracBackground, r: f64) -> Result<f64> {
    let area = rsq_f(bg, r);
    if area == 0.0 {
        return Err(Error::DivisionBySingularArea(r));
    }
    Ok((r * r - 2.0 * bg.m * r) / area)
}

pub fn kg_delta(bg: &KGBackground, r: f64) -> f64 {
    r * r - 2.0 * bg.m * r + bg.m * bg.m * (1.0 - bg.a * bg.a)
}

/// Outer and inner horizon `(M(1+a), M(1−a))`.
pub fn kg_horizons(bg: &KGBackground) -> (f64, f64) {
    (bg.m * (1.0 + bg.a), bg.m * (1.0 - bg.a))
}
