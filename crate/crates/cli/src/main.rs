use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dpcheck::data::{read_data, report_to_json, write_samples};
use dpcheck::scenario::{kevlar_standin, read_scenarios, write_records_csv};
use dpcheck::{
    d_min, run_check, run_scenarios, table_scenarios, CheckConfig, ContinuousDistribution, Error,
    ParametricFamily,
};

#[derive(Parser)]
#[command(
    name = "dpcheck",
    version,
    about = "Model checking with a Dirichlet process prior and relative belief"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a data file against a parametric family.
    Check(CheckArgs),
    /// Run a simulation table or a scenario file.
    Simulate(SimulateArgs),
    /// Minimum distance between a distribution and a family.
    Dmin(DminArgs),
    /// Write a synthetic stand-in for the Kevlar lifetimes.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct Knobs {
    /// Series truncation level.
    #[arg(long = "N", default_value_t = 1000)]
    truncation: usize,
    /// Prior distance draws.
    #[arg(long, default_value_t = 1000)]
    r1: usize,
    /// Posterior distance draws.
    #[arg(long, default_value_t = 1000)]
    r2: usize,
    /// Number of prior-quantile bins.
    #[arg(long = "M", default_value_t = 20)]
    bins: usize,
    /// Evidence quantile; must be a multiple of 1/M.
    #[arg(long, default_value_t = 0.05)]
    p0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Knobs {
    fn config(&self, a: f64) -> Result<CheckConfig, Failure> {
        let scaled = self.p0 * self.bins as f64;
        let i0 = scaled.round();
        if (scaled - i0).abs() > 1e-9 || i0 < 1.0 {
            return Err(Failure::usage(format!(
                "--p0 {} is not a positive multiple of 1/M = 1/{}",
                self.p0, self.bins
            )));
        }
        let cfg = CheckConfig {
            a,
            truncation: self.truncation,
            r1: self.r1,
            r2: self.r2,
            bins: self.bins,
            i0: i0 as usize,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct CheckArgs {
    /// One number per line; a header line is optional.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    family: ParametricFamily,
    /// Prior concentration.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Use DP(a, H) for this H instead of the fitted model.
    #[arg(long)]
    base_override: Option<ContinuousDistribution>,
    /// JSON report destination; `-` for standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Prior and posterior distance draws as `which,distance` CSV.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in table: 1, 2, 3 or 5.
    #[arg(
        long,
        conflicts_with = "scenario_file",
        required_unless_present = "scenario_file"
    )]
    table: Option<u8>,
    /// JSON list of scenarios.
    #[arg(long)]
    scenario_file: Option<PathBuf>,
    /// Replications per row of a built-in table.
    #[arg(long, default_value_t = 20)]
    replications: usize,
    /// Output path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    knobs: Knobs,
}

#[derive(Args)]
struct DminArgs {
    /// Distribution spec, e.g. `t(3)`.
    #[arg(long)]
    dist: ContinuousDistribution,
    #[arg(long)]
    family: ParametricFamily,
}

#[derive(Args)]
struct FixtureArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output path; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure { code: 2, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            Error::Degenerate { .. } | Error::NoConvergence { .. } => 4,
            _ => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check(args: CheckArgs) -> Result<(), Failure> {
    let cfg = args.knobs.config(args.a)?;
    let data = read_data(&args.data)?;
    let report = run_check(&data, args.family, args.base_override.as_ref(), &cfg)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }

    let json_to_stdout = args.out.as_ref().is_some_and(|p| p.as_os_str() == "-");
    if json_to_stdout {
        eprintln!("{}", report.summary());
    } else {
        println!("{}", report.summary());
    }
    if let Some(path) = &args.out {
        let mut out = open_output(Some(path))?;
        writeln!(out, "{}", report_to_json(&report)?)?;
        out.flush()?;
    }
    if let Some(path) = &args.samples_out {
        write_samples(
            File::create(path)?,
            &report.prior_distances,
            &report.posterior_distances,
        )?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let template = args.knobs.config(1.0)?;
    let scenarios = match (&args.table, &args.scenario_file) {
        (Some(t), _) => table_scenarios(*t, args.replications, args.knobs.seed)?,
        (None, Some(path)) => read_scenarios(File::open(path)?)?,
        (None, None) => unreachable!("clap requires one of the two"),
    };
    let records = run_scenarios(&scenarios, &template)?;
    let mut out = open_output(args.out.as_ref())?;
    match args.format {
        Format::Csv => write_records_csv(&mut out, &records)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &records).map_err(Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn dmin(args: DminArgs) -> Result<(), Failure> {
    let m = d_min(&args.dist, args.family)?;
    let theta: Vec<String> = m.theta.iter().map(|t| format!("{t:.6}")).collect();
    println!("{:.4} at theta = ({})", m.root(), theta.join(", "));
    Ok(())
}

fn fixture(args: FixtureArgs) -> Result<(), Failure> {
    let mut out = open_output(args.out.as_ref())?;
    writeln!(out, "lifetime")?;
    for x in kevlar_standin(args.seed) {
        writeln!(out, "{x}")?;
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check(a) => check(a),
        Command::Simulate(a) => simulate(a),
        Command::Dmin(a) => dmin(a),
        Command::Fixture(a) => fixture(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
