use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fibgap::dispersion::bloch_point;
use fibgap::superbandgap::{estimator_h, PointStatus};
use fibgap::transmission::SampleFlag;
use fibgap::validate::{validate, Suite};
use fibgap::{Error, FrequencyGrid, GapInterval, StackSpec, SystemSpec, TilingRule};
use serde::Serialize;

mod config;

use config::RunConfig;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "fibgap",
    version,
    about = "Pass bands, super band gaps and transmission of generalised Fibonacci wave systems"
)]
struct Cli {
    /// Worker threads for grid sweeps [default: available parallelism]
    #[arg(long, global = true, env = "FIBGAP_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace sequence x_n (and t_n when carried) at given frequencies
    Trace(TraceArgs),
    /// Bloch dispersion of periodic approximants F_n
    Bands(BandsArgs),
    /// Certified super band gap S_N on a frequency grid
    Sbg(SbgArgs),
    /// Transmission coefficient of a finite stack
    Transmit(TransmitArgs),
    /// Run the built-in consistency suites
    Validate(ValidateArgs),
    /// Print the tiling word F_n
    Word(WordArgs),
}

#[derive(Args)]
struct SystemArgs {
    /// System configuration (JSON)
    #[arg(long, alias = "system")]
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    l: u32,
}

#[derive(Args, Default)]
pub struct GridArgs {
    #[arg(long)]
    pub omega_min: Option<f64>,
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args)]
struct OutArgs {
    /// Output file [default: stdout]
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Explicit frequencies (comma separated); overrides the grid
    #[arg(long, value_delimiter = ',')]
    omega: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct BandsArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Orders, e.g. "2,5" or "2..6"
    #[arg(long, default_value = "2")]
    n: String,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct SbgArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    order: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// JSON report destination [default: stdout]
    #[command(flatten)]
    out: OutArgs,
    /// Also write the per-point membership mask as CSV
    #[arg(long)]
    mask: Option<PathBuf>,
}

#[derive(Args)]
struct TransmitArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// "quasicrystal:LO..HI" or "periodic:n=N,repeats=R"
    #[arg(long, default_value = "quasicrystal:0..6")]
    stack: String,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct WordArgs {
    #[arg(long, default_value_t = 1)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    l: u32,
    #[arg(long)]
    n: usize,
}

/// Failure with the process exit status it maps to.
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BeamPole { .. } | Error::DegenerateEntry { .. } => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = setup_workers(cli.workers).and_then(|_| run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("fibgap: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("fibgap: numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn setup_workers(workers: Option<usize>) -> Outcome {
    if let Some(n) = workers {
        if n == 0 {
            return Err(Failure::Config("worker count must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    Ok(())
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Trace(a) => trace(a),
        Command::Bands(a) => bands(a),
        Command::Sbg(a) => sbg(a),
        Command::Transmit(a) => transmit(a),
        Command::Validate(a) => run_validate(a),
        Command::Word(a) => {
            let word = TilingRule::new(a.m, a.l)?.word(a.n)?;
            println!("{word}");
            Ok(())
        }
    }
}

fn open_output(path: Option<&Path>) -> Outcome<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// CSV writer preceded by a `#` line recording tool version and config hash.
fn csv_out(path: Option<&Path>, cfg: &RunConfig, header: &[&str]) -> Outcome<csv::Writer<Box<dyn Write>>> {
    let mut raw = open_output(path)?;
    writeln!(
        raw,
        "# fibgap {VERSION} config_sha256={} system={}",
        cfg.sha256,
        cfg.spec.kind_name()
    )?;
    let mut w = csv::Writer::from_writer(raw);
    w.write_record(header)?;
    Ok(w)
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn load(system: &SystemArgs) -> Outcome<(RunConfig, TilingRule)> {
    Ok((RunConfig::load(&system.config)?, TilingRule::new(system.m, system.l)?))
}

fn all_poles(points: usize, poles: usize) -> Outcome {
    if points > 0 && poles == points {
        return Err(Failure::Numerical("every grid point lies on a beam pole".into()));
    }
    Ok(())
}

fn trace(a: TraceArgs) -> Outcome {
    let (cfg, rule) = load(&a.system)?;
    let omegas = if a.omega.is_empty() {
        cfg.grid(&a.grid)?.omegas()
    } else {
        a.omega.clone()
    };
    let mut w = csv_out(
        a.out.output.as_deref(),
        &cfg,
        &["omega", "omega_normalised", "n", "x_n", "t_n", "escaped"],
    )?;
    let mut poles = 0;
    for &omega in &omegas {
        let seq = match fibgap::trace_sequence(&cfg.spec, rule, omega, a.n_max) {
            Ok(s) => s,
            Err(Error::BeamPole { .. }) => {
                poles += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for n in 0..=a.n_max {
            let t = seq.t(n).map(num).unwrap_or_default();
            w.write_record([
                num(omega),
                num(cfg.spec.normalised_frequency(omega)),
                n.to_string(),
                num(seq.xs[n]),
                t,
                u8::from(seq.is_escaped(n)).to_string(),
            ])?;
        }
    }
    w.flush()?;
    all_poles(omegas.len(), poles)
}

fn parse_orders(s: &str) -> Outcome<Vec<usize>> {
    let bad = || Failure::Config(format!("cannot parse orders '{s}'"));
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((lo, hi)) = part.split_once("..") {
            let lo: usize = lo.parse().map_err(|_| bad())?;
            let hi: usize = hi.trim_start_matches('=').parse().map_err(|_| bad())?;
            if lo > hi {
                return Err(bad());
            }
            out.extend(lo..=hi);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    Ok(out)
}

fn bands(a: BandsArgs) -> Outcome {
    let (cfg, rule) = load(&a.system)?;
    let orders = parse_orders(&a.n)?;
    let grid = cfg.grid(&a.grid)?;
    let mut w = csv_out(
        a.out.output.as_deref(),
        &cfg,
        &["omega", "omega_normalised", "n", "K_L", "attenuation", "propagating"],
    )?;
    let omegas = grid.omegas();
    let mut poles = 0;
    for &n in &orders {
        rule.fib_number(n)?;
        let points: Vec<_> = {
            use rayon::prelude::*;
            omegas
                .par_iter()
                .map(|&omega| bloch_point(&cfg.spec, rule, n, omega))
                .collect()
        };
        for (omega, p) in omegas.iter().zip(points) {
            let p = match p {
                Ok(p) => p,
                Err(Error::BeamPole { .. }) => {
                    poles += 1;
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            w.write_record([
                num(*omega),
                num(cfg.spec.normalised_frequency(*omega)),
                n.to_string(),
                num(p.k_l),
                num(p.attenuation),
                u8::from(p.propagating).to_string(),
            ])?;
        }
    }
    w.flush()?;
    all_poles(omegas.len() * orders.len(), poles)
}

#[derive(Serialize)]
struct SbgOutput<'a> {
    tool_version: &'static str,
    config_sha256: &'a str,
    system: &'a SystemSpec,
    rule: TilingRule,
    order: usize,
    grid: FrequencyGrid,
    /// Factor mapping ω to the normalised frequency.
    normalisation: f64,
    intervals: &'a [GapInterval],
    pole_points: usize,
}

fn sbg(a: SbgArgs) -> Outcome {
    let (cfg, rule) = load(&a.system)?;
    let grid = cfg.grid(&a.grid)?;
    let report = fibgap::sweep(&cfg.spec, rule, &grid, a.order)?;
    all_poles(report.samples.len(), report.pole_count())?;
    let out = SbgOutput {
        tool_version: VERSION,
        config_sha256: &cfg.sha256,
        system: &cfg.spec,
        rule,
        order: a.order,
        grid,
        normalisation: cfg.spec.normalisation(),
        intervals: &report.intervals,
        pole_points: report.pole_count(),
    };
    let mut o = open_output(a.out.output.as_deref())?;
    serde_json::to_writer_pretty(&mut o, &out)?;
    writeln!(o)?;
    o.flush()?;

    if let Some(path) = a.mask.as_deref() {
        let mut w = csv_out(Some(path), &cfg, &["omega", "omega_normalised", "status", "H_2"])?;
        for s in &report.samples {
            let (status, h) = match s.status {
                PointStatus::Certified => ("certified", estimator_h(&cfg.spec, rule, s.omega, 2)?),
                PointStatus::Uncertified => ("uncertified", estimator_h(&cfg.spec, rule, s.omega, 2)?),
                PointStatus::Pole => ("pole", f64::NAN),
            };
            w.write_record([
                num(s.omega),
                num(cfg.spec.normalised_frequency(s.omega)),
                status.into(),
                num(h),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn transmit(a: TransmitArgs) -> Outcome {
    let (cfg, rule) = load(&a.system)?;
    let grid = cfg.grid(&a.grid)?;
    let stack = a.stack.parse::<StackSpec>()?.build(rule, cfg.spec)?;
    let profile = fibgap::transmission_profile(&stack, &grid)?;
    let poles = profile.values.iter().filter(|v| v.flag == SampleFlag::Pole).count();
    all_poles(profile.values.len(), poles)?;
    let mut w = csv_out(
        a.out.output.as_deref(),
        &cfg,
        &["omega", "omega_normalised", "T_c", "log10_abs_Tc", "flag"],
    )?;
    for v in &profile.values {
        let flag = match v.flag {
            SampleFlag::Ok => "ok",
            SampleFlag::Pole => "pole",
            SampleFlag::Degenerate => "degenerate",
        };
        w.write_record([
            num(v.omega),
            num(cfg.spec.normalised_frequency(v.omega)),
            num(v.t_c),
            num(v.log10_abs_tc),
            flag.into(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run_validate(a: ValidateArgs) -> Outcome {
    let suite: Suite = a.suite.parse()?;
    let report = validate(suite, a.seed)?;
    let mut o = open_output(a.out.output.as_deref())?;
    serde_json::to_writer_pretty(&mut o, &report)?;
    writeln!(o)?;
    o.flush()?;
    for s in &report.suites {
        eprintln!("{}: {}", s.suite, if s.passed { "pass" } else { "FAIL" });
    }
    Ok(())
}
