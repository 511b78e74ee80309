use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heun_radial::figures::{self, Format, Problem, RunConfig};
use heun_radial::verify;
use heun_radial::{Error, Result};

#[derive(Parser)]
#[command(name = "heunrad", version, about = "Closed-form Dirac and Klein-Gordon radial solutions via confluent Heun functions")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Figure 1 preset: origin expansion, 0.1 < r < 9.9; writes CSV and SVG
    Fig1(RunArgs),
    /// Figure 2 preset: horizon expansion, 0.1 < u < 50; writes CSV and SVG
    Fig2(RunArgs),
    /// Sample a Dirac closed form
    Dirac {
        /// Expansion point of the closed form
        #[arg(long, value_parser = ["origin", "horizon"])]
        point: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample a Klein-Gordon closed form
    Kg(RunArgs),
    /// Run the verification suites
    Verify {
        /// Seed for the randomized suites
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        /// Run only these suites (1-8); repeatable
        #[arg(long = "suite")]
        suites: Vec<u32>,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    #[arg(long = "M", allow_negative_numbers = true)]
    m: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Dirac coupling, or the KG separation constant (default l(l+1))
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i32>,
    /// Sampling interval LO:HI in r (origin) or u (horizon, kg)
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
    /// regular or second
    #[arg(long)]
    branch: Option<String>,
    /// Output path; for the presets a file stem
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "svg"])]
    format: Option<String>,
    /// File of `key = value` lines; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self, mut cfg: RunConfig) -> Result<RunConfig> {
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            for (k, v) in figures::parse_config(&text)? {
                cfg.apply(&k, &v)?;
            }
        }
        let flags: [(&str, Option<String>); 14] = [
            ("M", self.m.map(|v| v.to_string())),
            ("p", self.p.map(|v| v.to_string())),
            ("a", self.a.map(|v| v.to_string())),
            ("k", self.k.map(|v| v.to_string())),
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("omega", self.omega.map(|v| v.to_string())),
            ("l", self.l.map(|v| v.to_string())),
            ("n", self.n.map(|v| v.to_string())),
            ("range", self.range.clone()),
            ("samples", self.samples.map(|v| v.to_string())),
            ("tol", self.tol.map(|v| v.to_string())),
            ("branch", self.branch.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.apply(k, &v)?;
            }
        }
        Ok(cfg)
    }
}

fn report_run(cfg: &RunConfig, curve: &figures::SampledCurve, to: &mut dyn Write) -> Result<()> {
    writeln!(to, "parameters: {}", cfg.describe())?;
    writeln!(to, "max err_estimate: {:e}", curve.max_err_estimate)?;
    Ok(())
}

fn run_preset(cfg: RunConfig) -> Result<()> {
    let curve = figures::sample_curve(&cfg)?;
    let mut out = std::io::stdout().lock();
    report_run(&cfg, &curve, &mut out)?;
    let stem = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figure"));
    let stem = match Format::from_path(&stem) {
        Some(_) => stem.with_extension(""),
        None => stem,
    };
    let formats = match cfg.format {
        Some(f) => vec![f],
        None => vec![Format::Csv, Format::Svg],
    };
    for f in formats {
        let path = stem.with_extension(match f {
            Format::Csv => "csv",
            Format::Svg => "svg",
        });
        figures::emit(&curve, f, &path)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn run_single(cfg: RunConfig) -> Result<()> {
    let curve = figures::sample_curve(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let format = cfg.format.or_else(|| Format::from_path(path)).unwrap_or(Format::Csv);
            let mut out = std::io::stdout().lock();
            report_run(&cfg, &curve, &mut out)?;
            figures::emit(&curve, format, Path::new(path))?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => {
            // data on stdout, diagnostics on stderr
            report_run(&cfg, &curve, &mut std::io::stderr().lock())?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => figures::write_csv(&curve, std::io::stdout().lock())?,
                Format::Svg => std::io::stdout().lock().write_all(figures::svg_string(&curve)?.as_bytes())?,
            }
        }
    }
    Ok(())
}

type Runner = Box<dyn Fn() -> verify::Report>;

fn run_verify(seed: u64, suites: &[u32]) -> Result<bool> {
    let wanted = |id: u32| suites.is_empty() || suites.contains(&id);
    let runners: [(u32, Runner); 8] = [
        (1, Box::new(move || verify::heun_suite(seed))),
        (2, Box::new(move || verify::dirac_suite(seed))),
        (3, Box::new(verify::oracle_suite)),
        (4, Box::new(verify::identity_suite)),
        (5, Box::new(verify::asymptotic_suite)),
        (6, Box::new(verify::kg_suite)),
        (7, Box::new(move || verify::angular_suite(seed))),
        (8, Box::new(verify::figure_suite)),
    ];
    if let Some(bad) = suites.iter().find(|s| !(1..=8).contains(*s)) {
        return Err(Error::InvalidParameter(format!("no suite {bad}; suites are numbered 1-8")));
    }
    let mut out = std::io::stdout().lock();
    writeln!(out, "seed: {seed}")?;
    let mut failed = 0;
    let mut total = 0;
    for (id, run) in runners.iter() {
        if !wanted(*id) {
            continue;
        }
        let report = run();
        total += 1;
        if !report.passed() {
            failed += 1;
        }
        write!(out, "{report}")?;
    }
    writeln!(out, "{} of {total} suites passed", total - failed)?;
    if failed > 0 {
        eprintln!("ERROR VERIFICATION_FAILED: {failed} of {total} suites failed");
    }
    Ok(failed == 0)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Fig1(args) => run_preset(args.resolve(RunConfig::fig1())?)?,
        Command::Fig2(args) => run_preset(args.resolve(RunConfig::fig2())?)?,
        Command::Dirac { point, run } => {
            let problem = match point.as_deref() {
                Some("origin") => Problem::DiracOrigin,
                _ => Problem::DiracHorizon,
            };
            run_single(run.resolve(RunConfig::defaults(problem))?)?
        }
        Command::Kg(args) => run_single(args.resolve(RunConfig::defaults(Problem::KG))?)?,
        Command::Verify { seed, suites } => return run_verify(seed, &suites),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
            {
                e.exit();
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("ERROR USAGE: {first}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("ERROR {}: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
