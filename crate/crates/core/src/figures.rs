//! Sampling of the closed-form solutions and CSV/SVG output.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::closed_form::{Branch, ClosedForm};
use crate::dirac::{ClosedSolutionSpec, ExpansionPoint};
use crate::error::{Error, Result};
use crate::kg::KGClosedSpec;
use crate::spacetimes::{DiracBackground, DiracMode, KGBackground, KGMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    DiracOrigin,
    DiracHorizon,
    KG,
}

impl FromStr for Problem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirac-origin" | "origin" => Ok(Problem::DiracOrigin),
            "dirac-horizon" | "horizon" => Ok(Problem::DiracHorizon),
            "kg" => Ok(Problem::KG),
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::DiracOrigin => "dirac-origin",
            Problem::DiracHorizon => "dirac-horizon",
            Problem::KG => "kg",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Config(format!("unknown format '{other}' (expected csv or svg)"))),
        }
    }
}

impl Format {
    /// Guess the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Format> {
        path.extension().and_then(|e| e.to_str()).and_then(|e| e.parse().ok())
    }
}

pub const DEFAULT_SAMPLES: usize = 800;
pub const DEFAULT_TOL: f64 = 1e-10;

/// Everything needed to sample one curve. Parameters that do not apply to
/// the chosen problem are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub branch: Branch,
    pub m: f64,
    pub p: f64,
    pub a: f64,
    pub k: f64,
    /// Dirac coupling, or the KG separation constant. For KG, `None` means `l(l+1)`.
    pub lambda: Option<f64>,
    pub omega: f64,
    pub l: u32,
    pub n: i32,
    pub range: (f64, f64),
    pub samples: usize,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

impl RunConfig {
    pub fn defaults(problem: Problem) -> Self {
        let (m, a, range) = match problem {
            Problem::DiracOrigin => (5.0, 0.1, (0.1, 9.9)),
            Problem::DiracHorizon => (5.0, 0.1, (0.1, 50.0)),
            Problem::KG => (5.0, 0.1, (0.5, 50.0)),
        };
        RunConfig {
            problem,
            branch: Branch::Regular,
            m,
            p: 10.0,
            a,
            k: 0.2,
            lambda: match problem {
                Problem::KG => None,
                _ => Some(0.7),
            },
            omega: 0.3,
            l: 1,
            n: 0,
            range,
            samples: DEFAULT_SAMPLES,
            tol: DEFAULT_TOL,
            out: None,
            format: None,
        }
    }

    /// Figure 1: the origin expansion inside the horizon.
    pub fn fig1() -> Self {
        RunConfig { out: Some("fig1".into()), ..Self::defaults(Problem::DiracOrigin) }
    }

    /// Figure 2: the horizon expansion outside.
    pub fn fig2() -> Self {
        RunConfig { out: Some("fig2".into()), ..Self::defaults(Problem::DiracHorizon) }
    }

    pub fn lambda(&self) -> f64 {
        match (self.problem, self.lambda) {
            (_, Some(l)) => l,
            (Problem::KG, None) => (self.l as f64) * (self.l as f64 + 1.0),
            (_, None) => 0.7,
        }
    }

    /// Set one `key = value` pair, as found in a config file.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
        }
        match key {
            "M" | "m" => self.m = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "a" => self.a = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "lambda" => self.lambda = Some(num(key, value)?),
            "omega" => self.omega = num(key, value)?,
            "l" => self.l = num(key, value)?,
            "n" => self.n = num(key, value)?,
            "range" => self.range = parse_range(value)?,
            "samples" => self.samples = num(key, value)?,
            "tol" => self.tol = num(key, value)?,
            "branch" => {
                self.branch = value.parse().map_err(|_| Error::Config(format!("branch: expected regular or second, got '{value}'")))?
            }
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.parse()?),
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn coordinate_name(&self) -> &'static str {
        match self.problem {
            Problem::DiracOrigin => "r",
            Problem::DiracHorizon | Problem::KG => "u",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidParameter(format!("range must satisfy lo < hi, got {lo}:{hi}")));
        }
        if self.samples < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 samples, got {}", self.samples)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        let two_m = 2.0 * self.m;
        let ok = match self.problem {
            Problem::DiracOrigin => lo > 0.0 && hi < two_m,
            Problem::DiracHorizon | Problem::KG => lo > 0.0,
        };
        if !ok {
            let want = match self.problem {
                Problem::DiracOrigin => format!("(0, {two_m})"),
                _ => "(0, inf)".to_string(),
            };
            return Err(Error::OutOfDomain(format!("range {lo}:{hi} must lie inside {want}")));
        }
        Ok(())
    }

    /// The closed form selected by this configuration.
    pub fn closed_form(&self) -> Result<ClosedForm> {
        match self.problem {
            Problem::DiracOrigin | Problem::DiracHorizon => {
                let bg = DiracBackground::new(self.m, self.p, self.a)?;
                let mode = DiracMode::new(self.k, self.lambda())?;
                let exp = if self.problem == Problem::DiracOrigin { ExpansionPoint::Origin } else { ExpansionPoint::Horizon };
                Ok(ClosedSolutionSpec::new(exp, self.branch).closed_form(&bg, &mode))
            }
            Problem::KG => {
                let bg = KGBackground::new(self.m, self.a)?;
                if self.n.unsigned_abs() > self.l {
                    return Err(Error::OrderExceedsDegree { degree: self.l, order: self.n.unsigned_abs() });
                }
                let mode = KGMode::new(self.omega, self.n, self.lambda())?;
                Ok(KGClosedSpec::new(self.branch).closed_form(&bg, &mode))
            }
        }
    }

    /// One-line description of the resolved parameters.
    pub fn describe(&self) -> String {
        let branch = match self.branch {
            Branch::Regular => "regular",
            Branch::Second => "second",
        };
        let physics = match self.problem {
            Problem::DiracOrigin | Problem::DiracHorizon => {
                format!("M={} p={} a={} k={} lambda={}", self.m, self.p, self.a, self.k, self.lambda())
            }
            Problem::KG => format!("M={} a={} omega={} l={} n={} lambda={}", self.m, self.a, self.omega, self.l, self.n, self.lambda()),
        };
        format!(
            "{} {} {} {}={}:{} samples={} tol={:e}",
            self.problem,
            branch,
            physics,
            self.coordinate_name(),
            self.range.0,
            self.range.1,
            self.samples,
            self.tol
        )
    }
}

pub fn parse_range(s: &str) -> Result<(f64, f64)> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| Error::Config(format!("range must look like LO:HI, got '{s}'")))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("range: cannot parse '{t}'")));
    Ok((parse(lo)?, parse(hi)?))
}

/// Parse a plain `key = value` file. Blank lines and lines starting with
/// `#` are skipped.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub coordinate: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    pub coordinate_name: String,
    pub title: String,
    pub rows: Vec<Sample>,
    pub max_err_estimate: f64,
}

impl SampledCurve {
    pub fn column(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    /// Rows with `lo ≤ coordinate ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Vec<Sample> {
        self.rows.iter().copied().filter(|s| s.coordinate >= lo && s.coordinate <= hi).collect()
    }
}

pub fn grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    let last = samples - 1;
    (0..samples).map(|i| if i == last { hi } else { lo + (hi - lo) * i as f64 / last as f64 }).collect()
}

/// Evaluate the configured solution on a uniform grid. Points are computed
/// in parallel; the result does not depend on the thread count.
pub fn sample_curve(cfg: &RunConfig) -> Result<SampledCurve> {
    cfg.validate()?;
    let cf = cfg.closed_form()?;
    let xs = grid(cfg.range.0, cfg.range.1, cfg.samples);
    let evals: Vec<Result<_>> = xs.par_iter().map(|&x| cf.eval(x, cfg.tol)).collect();
    let mut rows = Vec::with_capacity(xs.len());
    let mut max_err = 0.0f64;
    for (index, (x, ev)) in xs.iter().zip(evals).enumerate() {
        let ev = ev.map_err(|e| Error::AtSample { index, coordinate: *x, source: Box::new(e) })?;
        max_err = max_err.max(ev.err_estimate);
        rows.push(Sample { coordinate: *x, re: ev.value.re, im: ev.value.im, abs: ev.value.norm() });
    }
    Ok(SampledCurve { coordinate_name: cfg.coordinate_name().to_string(), title: cfg.describe(), rows, max_err_estimate: max_err })
}

pub fn write_csv<W: Write>(curve: &SampledCurve, mut w: W) -> Result<()> {
    if curve.rows.is_empty() {
        return Err(Error::EmptyCurve);
    }
    w.write_all(csv_string(curve).as_bytes())?;
    Ok(())
}

fn csv_string(curve: &SampledCurve) -> String {
    let mut s = String::from("coordinate,re,im,abs\n");
    for r in &curve.rows {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e}", r.coordinate, r.re, r.im, r.abs);
    }
    s
}

/// Read back a CSV written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<Sample>> {
    let mut lines = text.lines();
    if lines.next() != Some("coordinate,re,im,abs") {
        return Err(Error::Config("missing csv header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("csv row {}: bad number '{t}'", i + 1))))
                .collect::<Result<_>>()?;
            match v[..] {
                [coordinate, re, im, abs] => Ok(Sample { coordinate, re, im, abs }),
                _ => Err(Error::Config(format!("csv row {}: expected 4 fields", i + 1))),
            }
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

pub fn svg_string(curve: &SampledCurve) -> Result<String> {
    if curve.rows.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let x0 = curve.rows[0].coordinate;
    let x1 = curve.rows[curve.rows.len() - 1].coordinate;
    let (mut y0, mut y1) = curve
        .rows
        .iter()
        .flat_map(|r| [r.re, r.im, r.abs])
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !(y0 < y1) {
        let c = if y0.is_finite() { y0 } else { 0.0 };
        y0 = c - 1.0;
        y1 = c + 1.0;
    }
    let pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / xspan * pw;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(&curve.title));
    // axes and ticks
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1" fill="none">"#);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}"/>"#, TOP + ph, LEFT + pw, TOP + ph);
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}"/>"#, TOP + ph);
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##,
            py(0.0),
            LEFT + pw,
            py(0.0)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g fill="black">"#);
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = x0 + t * xspan;
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, px(xv), TOP + ph + 18.0, tick_label(xv));
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py(yv) + 4.0, tick_label(yv));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(&curve.coordinate_name)
    );
    let _ = writeln!(s, "</g>");

    type Series = (&'static str, &'static str, fn(&Sample) -> f64);
    let series: [Series; 3] = [("re", "#1f77b4", |r| r.re), ("im", "#d62728", |r| r.im), ("abs", "#2ca02c", |r| r.abs)];
    for (name, color, get) in series {
        let pts: Vec<String> = curve.rows.iter().map(|r| format!("{:.2},{:.2}", px(r.coordinate), py(get(r)))).collect();
        let _ = writeln!(s, r#"<polyline id="{name}" fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, pts.join(" "));
    }
    for (i, (name, color, _)) in series.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = LEFT + pw + 20.0;
        let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 24.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{name}</text>"#, x + 30.0, y + 4.0);
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Write the curve to `path` in the given format.
pub fn emit(curve: &SampledCurve, format: Format, path: &Path) -> Result<()> {
    let body = match format {
        Format::Csv => {
            if curve.rows.is_empty() {
                return Err(Error::EmptyCurve);
            }
            csv_string(curve)
        }
        Format::Svg => svg_string(curve)?,
    };
    std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SampledCurve {
        SampledCurve {
            coordinate_name: "u".into(),
            title: "a < b & c".into(),
            rows: vec![
                Sample { coordinate: 0.1, re: 1.0 / 3.0, im: -2.0f64.sqrt(), abs: (1.0f64 / 9.0 + 2.0).sqrt() },
                Sample { coordinate: 0.2, re: 1e-300, im: 6.02e23, abs: 6.02e23 },
            ],
            max_err_estimate: 0.0,
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let c = tiny();
        let mut buf = Vec::new();
        write_csv(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        assert_eq!(read_csv(&text).unwrap(), c.rows);
    }

    #[test]
    fn empty_curve_is_refused() {
        let mut c = tiny();
        c.rows.clear();
        assert_eq!(write_csv(&c, Vec::new()), Err(Error::EmptyCurve));
        assert_eq!(svg_string(&c), Err(Error::EmptyCurve));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        assert_eq!(emit(&c, Format::Csv, &path), Err(Error::EmptyCurve));
        assert!(!path.exists());
    }

    #[test]
    fn svg_is_self_contained() {
        let s = svg_string(&tiny()).unwrap();
        assert_eq!(s.matches("<polyline").count(), 3);
        assert!(s.contains("a &lt; b &amp; c"));
        assert!(!s.contains("href"));
        assert_eq!(s, svg_string(&tiny()).unwrap());
    }

    #[test]
    fn config_parsing() {
        let pairs = parse_config("# comment\n\nM = 3\nrange= 0.5 : 4\n branch = second \n").unwrap();
        let mut cfg = RunConfig::defaults(Problem::DiracHorizon);
        for (k, v) in &pairs {
            cfg.apply(k, v).unwrap();
        }
        assert_eq!(cfg.m, 3.0);
        assert_eq!(cfg.range, (0.5, 4.0));
        assert_eq!(cfg.branch, Branch::Second);
        assert!(parse_config("nonsense").is_err());
        assert!(cfg.apply("bogus", "1").is_err());
        assert!(cfg.apply("samples", "many").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::fig1();
        assert!(cfg.validate().is_ok());
        cfg.range = (0.1, 10.5);
        assert!(matches!(cfg.validate(), Err(Error::OutOfDomain(_))));
        cfg.range = (3.0, 2.0);
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::fig2();
        cfg.samples = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn kg_lambda_defaults_to_legendre_value() {
        let mut cfg = RunConfig::defaults(Problem::KG);
        cfg.l = 3;
        assert_eq!(cfg.lambda(), 12.0);
        cfg.lambda = Some(2.5);
        assert_eq!(cfg.lambda(), 2.5);
    }

    #[test]
    fn sampling_is_ordered_and_deterministic() {
        let mut cfg = RunConfig::fig2();
        cfg.samples = 40;
        let a = sample_curve(&cfg).unwrap();
        assert_eq!(a.rows.len(), 40);
        assert_eq!(a.rows[0].coordinate, 0.1);
        assert_eq!(a.rows[39].coordinate, 50.0);
        assert!(a.rows.windows(2).all(|w| w[0].coordinate < w[1].coordinate));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_curve(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failing_point_reports_index() {
        // 1e-15 is below what the error control can certify
        let mut cfg = RunConfig::fig1();
        cfg.range = (1.0, 9.9);
        cfg.samples = 10;
        cfg.tol = 1e-15;
        match sample_curve(&cfg) {
            Err(Error::AtSample { index, coordinate, source }) => {
                assert_eq!(coordinate, grid(1.0, 9.9, 10)[index]);
                assert_eq!(source.code(), "DID_NOT_CONVERGE");
            }
            other => panic!("{other:?}"),
        }
    }
}
