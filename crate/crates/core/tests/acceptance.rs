//! Acceptance suite: one PASS/FAIL line per criterion, then the measured
//! values behind each line. Exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;

use heun_radial::figures::{read_csv, SampledCurve};
use heun_radial::verify::{self, Check, Report, DEFAULT_SEED};

fn run_cli(dir: &Path, args: &[&str], threads: Option<&str>) -> Result<(), String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_heunrad"));
    cmd.current_dir(dir).args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).trim().to_string());
    }
    Ok(())
}

fn curve_from_csv(path: &Path, name: &str) -> Result<SampledCurve, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let rows = read_csv(&text).map_err(|e| e.to_string())?;
    Ok(SampledCurve { coordinate_name: name.into(), title: String::new(), rows, max_err_estimate: 0.0 })
}

/// Runs both presets twice (default and single-threaded) through the
/// binary, compares the bytes, then checks the qualitative shape.
fn figure_criterion() -> Report {
    let fail = |name: &str, msg: String| Report {
        id: 8,
        title: "figure reproduction".into(),
        checks: vec![Check::below(name, f64::NAN, 0.0).with_note(msg)],
    };
    let dirs = match (tempfile::tempdir(), tempfile::tempdir()) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return fail("temporary directories", "could not create".into()),
    };
    for (dir, threads) in [(&dirs.0, None), (&dirs.1, Some("1"))] {
        for preset in ["fig1", "fig2"] {
            if let Err(e) = run_cli(dir.path(), &[preset], threads) {
                return fail(&format!("heunrad {preset}"), e);
            }
        }
    }
    let mut identical = 0.0;
    let mut compared = 0.0;
    let mut svg_ok = true;
    for file in ["fig1.csv", "fig1.svg", "fig2.csv", "fig2.svg"] {
        let a = std::fs::read(dirs.0.path().join(file)).unwrap_or_default();
        let b = std::fs::read(dirs.1.path().join(file)).unwrap_or_default();
        compared += 1.0;
        if !a.is_empty() && a == b {
            identical += 1.0;
        }
        if file.ends_with(".svg") {
            let s = String::from_utf8_lossy(&a);
            svg_ok &= s.matches("<polyline").count() == 3 && !s.contains("href") && s.contains("lambda=0.7");
        }
    }
    let curves = (curve_from_csv(&dirs.0.path().join("fig1.csv"), "r"), curve_from_csv(&dirs.0.path().join("fig2.csv"), "u"));
    let (c1, c2) = match curves {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail("read preset csv", e),
    };
    let mut report = verify::figure_checks(&c1, &c2, 5.0);
    report.checks.insert(0, Check::above("byte-identical outputs across thread counts (fraction)", identical / compared, 0.999));
    report.checks.insert(1, Check::above("svg self-contained with 3 series and parameter title", if svg_ok { 1.0 } else { 0.0 }, 0.5));
    report.checks.insert(2, Check::above("fig1 sample count", c1.rows.len() as f64, 799.0));
    report
}

fn main() {
    let seed = DEFAULT_SEED;
    let reports = vec![
        verify::heun_suite(seed),
        verify::dirac_suite(seed),
        verify::oracle_suite(),
        verify::identity_suite(),
        verify::asymptotic_suite(),
        verify::kg_suite(),
        verify::angular_suite(seed),
        figure_criterion(),
    ];
    println!("\nacceptance criteria (seed {seed})");
    for r in &reports {
        println!("{}", r.summary());
    }
    println!("\ndetails");
    for r in &reports {
        print!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("\n{} of {} criteria passed", reports.len() - failed, reports.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
