use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fermitree::bounds::{
    bound_table, build_single_scale, power_counting_fit, synthetic_scale_covariant, BoundTableConfig,
    PowerCountingFit, ScaleModel, ScaleSample,
};
use fermitree::verify::{self, CaseRow, Suite, VerifyConfig};
use fermitree::Error;

/// Usage errors exit with 2, failed checks with 1.
const EXIT_USAGE: u8 = 2;
const EXIT_FAILURE: u8 = 1;

#[derive(Parser)]
#[command(name = "fermitree", version, about = "Verification suites, bound tables and scaling fits for fermionic tree amplitudes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded oracle suites; exits nonzero if any instance fails.
    Verify(VerifyArgs),
    /// Re-run the rows of a JSON-lines verification report.
    Replay(ReplayArgs),
    /// Tabulate bounds (and amplitudes where feasible) over a tree class.
    Bounds(BoundsArgs),
    /// Fit power-counting slopes of covariance norms across scales.
    Scaling(ScalingArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (comma separated or repeated); all if absent.
    #[arg(long, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    /// Largest tree size of the recursion suite.
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// Lattice length of the recursion suite.
    #[arg(long, default_value_t = 8)]
    lattice: usize,
    /// Momentum configurations per recursion combination.
    #[arg(long, default_value_t = 20)]
    configs: usize,
    /// Run only the leading instances of each suite.
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance for every suite; suite defaults otherwise.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReplayArgs {
    /// JSON-lines report, as written by `verify --format json`.
    report: PathBuf,
    /// Replay only the failed rows.
    #[arg(long)]
    failed_only: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Tree sizes 1..=m, or caterpillars T_1..T_m.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Keep only trees with this branch excess.
    #[arg(long)]
    branches: Option<usize>,
    #[arg(long)]
    caterpillar: bool,
    /// Allowed legs per vertex.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
    legs: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    #[arg(long, default_value_t = 4)]
    lattice: usize,
    #[arg(long, default_value_t = 1)]
    nspin: usize,
    /// Constant of the perturbative bound.
    #[arg(long = "const", default_value_t = 1.0)]
    const_param: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ScalingArgs {
    /// Scale ratio M > 1.
    #[arg(long = "M", default_value_t = 2.0)]
    m_scale: f64,
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    j_min: i32,
    #[arg(long, default_value_t = 5, allow_negative_numbers = true)]
    j_max: i32,
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Points per axis; the adequate size for each scale if absent.
    #[arg(long)]
    lattice: Option<usize>,
    /// Use the synthetic scale-covariant family instead of the model.
    #[arg(long)]
    synthetic: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct ScalingReport {
    samples: Vec<ScaleSample>,
    fit: PowerCountingFit,
}

enum Failure {
    Usage(String),
    Run(String),
    Checks(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::DegenerateFit(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn threads() -> usize {
    verify::env_threads().unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let suites = match args.suite {
        None => Suite::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Suite>, Error>>()?,
    };
    let config = VerifyConfig {
        suites,
        seed: args.seed,
        tol: args.tol,
        m_max: args.m,
        n_max: args.n_max,
        configs: args.configs,
        lattice: args.lattice,
        limit: args.limit,
    };
    let report = verify::run(&config, threads())?;
    let summary = report.summary_csv()?;
    let text = match args.output.format {
        Format::Json => report.to_jsonl()?,
        Format::Csv => summary.clone(),
    };
    write_output(args.output.out.as_deref(), &text)?;
    eprint!("{summary}");
    let failed: Vec<&CaseRow> = report.failures().collect();
    for row in &failed {
        eprintln!("FAILED {}", serde_json::to_string(row).map_err(|e| Failure::Run(e.to_string()))?);
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed.len()))
    }
}

fn cmd_replay(args: ReplayArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.report)?;
    let mut failures = 0;
    let mut replayed = 0;
    for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row: CaseRow =
            serde_json::from_str(line).map_err(|e| Failure::Usage(format!("line {}: {e}", k + 1)))?;
        if args.failed_only && row.passed {
            continue;
        }
        let again = verify::replay(&row);
        replayed += 1;
        if !again.passed {
            failures += 1;
        }
        println!("{}", serde_json::to_string(&again).map_err(|e| Failure::Run(e.to_string()))?);
    }
    eprintln!("replayed {replayed} rows, {failures} failed");
    if failures == 0 {
        Ok(())
    } else {
        Err(Failure::Checks(failures))
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Failure> {
    let config = BoundTableConfig {
        m: args.m,
        caterpillar: args.caterpillar,
        branches: args.branches,
        legs: args.legs,
        n_max: args.n_max,
        lattice: args.lattice,
        nspin: args.nspin,
        seed: args.seed,
        const_param: args.const_param,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads())
        .build()
        .map_err(|e| Failure::Run(e.to_string()))?;
    let report = pool.install(|| bound_table(&config))?;
    let text = match args.output.format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    write_output(args.output.out.as_deref(), &text)?;
    let bound_only = report.rows.iter().filter(|r| r.bound_only()).count();
    let violations: Vec<_> = report.rows.iter().filter(|r| !r.violations(0.0).is_empty()).collect();
    eprintln!("{} rows, {bound_only} bound-only, {} domination failures", report.rows.len(), violations.len());
    for row in &violations {
        eprintln!("VIOLATION {} n={:?}: {:?}", row.tree, row.n, row.violations(0.0));
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(violations.len()))
    }
}

fn cmd_scaling(args: ScalingArgs) -> Result<(), Failure> {
    if args.j_max < args.j_min || args.j_max - args.j_min < 2 {
        return Err(Failure::Usage(format!(
            "scale range {}..={} has fewer than 3 scales",
            args.j_min, args.j_max
        )));
    }
    let mut samples = Vec::new();
    for j in args.j_min..=args.j_max {
        let cov = if args.synthetic {
            synthetic_scale_covariant(args.m_scale, j)?
        } else {
            let mut model = ScaleModel::new(args.m_scale, j, args.d)?;
            if let Some(points) = args.lattice {
                model.lattice = vec![points; args.d + 1];
            }
            build_single_scale(&model)?
        };
        samples.push(ScaleSample::from_covariance(j, &cov));
    }
    let d = if args.synthetic { 1 } else { args.d };
    let fit = power_counting_fit(&samples, args.m_scale, d)?;
    let text = match args.output.format {
        Format::Json => {
            let report = ScalingReport { samples, fit: fit.clone() };
            serde_json::to_string_pretty(&report).map_err(|e| Failure::Run(e.to_string()))? + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["j", "sup_hat", "l1_hat", "l1_pos", "grad_sup", "grad_l1", "frak_c"])
                .map_err(|e| Failure::Run(e.to_string()))?;
            for s in &samples {
                let n = s.norms;
                w.write_record(
                    [s.j as f64, n.sup_hat, n.l1_hat, n.l1_pos, n.grad_sup, n.grad_l1, n.frak_c()].map(|v| v.to_string()),
                )
                .map_err(|e| Failure::Run(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Failure::Run(e.to_string()))?)
                .map_err(|e| Failure::Run(e.to_string()))?
        }
    };
    write_output(args.output.out.as_deref(), &text)?;
    for e in &fit.estimates {
        eprintln!(
            "{:<8} slope {:+.4}  95% [{:+.4}, {:+.4}]  expected {}",
            e.quantity, e.slope, e.ci95.0, e.ci95.1, e.expected
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Replay(a) => cmd_replay(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Scaling(a) => cmd_scaling(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_FAILURE)
        }
        Err(Failure::Checks(n)) => {
            eprintln!("{n} checks failed");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
