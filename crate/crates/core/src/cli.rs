//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors such as
//! unreadable files or a property that does not fit the model. The number of
//! worker threads is taken from `PROBSAFE_THREADS` when it is set.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{certify_union, mc_box_mass, CertifyConfig, DiagonalGaussian, Method, SafeWeightSet};
use crate::error::{Error, Result};
use crate::estimate::{mc_estimate_psafe, mc_pointwise_robustness, McEstimate};
use crate::io::{
    load_boxes, load_model, load_property, spec_check_label, to_json_string, write_sweep_csv, CertifyReport,
    EstimateReport, MeasureReport, PointEstimate, RegionReport, SweepRow, REPORT_VERSION,
};
use crate::lbp::McCormickVariant;
use crate::model::{sample_weights_stream, MarginSemantics};

pub const THREADS_ENV: &str = "PROBSAFE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "probsafe",
    version,
    about = "Certified lower bounds on the probabilistic safety of Bayesian neural networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify a property and report a lower bound on its probability.
    Certify(CertifyArgs),
    /// Monte Carlo estimate of the probability of safety.
    Estimate(EstimateArgs),
    /// Certify over a grid of sample counts, margins and methods (CSV).
    Sweep(SweepArgs),
    /// Posterior mass of weight-space boxes.
    Measure(MeasureArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Ibp,
    Lbp,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ibp => Method::Ibp,
            MethodArg::Lbp => Method::Lbp,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Stddev,
    Variance,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum McCormickArg {
    Lower,
    Envelope,
}

#[derive(Debug, Args)]
struct ModelProperty {
    /// Model JSON file.
    #[arg(long)]
    model: PathBuf,
    /// Property JSON file (input region and output specification).
    #[arg(long)]
    property: PathBuf,
}

#[derive(Debug, Args)]
struct CheckOptions {
    #[arg(long, value_enum, default_value = "stddev")]
    margin_semantics: SemanticsArg,
    #[arg(long, value_enum, default_value = "lower")]
    mccormick: McCormickArg,
    /// Cap on the pieces kept when a rectangle is split against earlier ones.
    #[arg(long, default_value_t = crate::certify::DEFAULT_MAX_FRAGMENTS)]
    max_fragments: usize,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    io: ModelProperty,
    #[arg(long, value_enum, default_value = "ibp")]
    method: MethodArg,
    /// Number of posterior samples N.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Weight margin gamma.
    #[arg(long, default_value_t = 1.0)]
    margin: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    check: CheckOptions,
    /// Include the certified rectangles in the report.
    #[arg(long)]
    rectangles: bool,
    /// Include wall-clock times in the report.
    #[arg(long)]
    timing: bool,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    io: ModelProperty,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    io: ModelProperty,
    /// Comma-separated sample counts.
    #[arg(long, value_delimiter = ',', default_values_t = vec![100usize, 300, 1000])]
    samples: Vec<usize>,
    /// Comma-separated weight margins.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1.0f64])]
    margins: Vec<f64>,
    /// Comma-separated methods.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["ibp", "lbp"])]
    methods: Vec<MethodArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    check: CheckOptions,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MeasureArgs {
    #[arg(long)]
    model: PathBuf,
    /// JSON file with a `boxes` (or `safe_set`) list of weight boxes.
    #[arg(long)]
    boxes: PathBuf,
    /// Also estimate the mass of the union from this many posterior samples.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(method: Method, n: usize, gamma: f64, seed: u64, check: &CheckOptions) -> CertifyConfig {
    CertifyConfig {
        n_samples: n,
        weight_margin: gamma,
        method,
        seed,
        margin_semantics: match check.margin_semantics {
            SemanticsArg::Stddev => MarginSemantics::Stddev,
            SemanticsArg::Variance => MarginSemantics::Variance,
        },
        mccormick: match check.mccormick {
            McCormickArg::Lower => McCormickVariant::Lower,
            McCormickArg::Envelope => McCormickVariant::Envelope,
        },
        max_fragments: check.max_fragments,
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn run_certify(a: &CertifyArgs) -> Result<()> {
    let start = Instant::now();
    let model = load_model(&a.io.model)?;
    let prop = load_property(&a.io.property, &model)?;
    let cfg = config(a.method.into(), a.samples, a.margin, a.seed, &a.check);
    let res = certify_union(&model, &prop.region, &prop.spec, &cfg)?;
    let report = CertifyReport {
        report_version: REPORT_VERSION,
        p_lower: res.p_lower,
        config: cfg.clone(),
        spec_check: spec_check_label(cfg.method).to_string(),
        regions: res
            .per_region
            .iter()
            .map(|r| RegionReport::from_result(r, a.rectangles, a.timing))
            .collect(),
        wall_time_seconds: a.timing.then(|| start.elapsed().as_secs_f64()),
    };
    if !a.timing {
        eprintln!("certified in {:.3} s", start.elapsed().as_secs_f64());
    }
    emit(&a.out, &to_json_string(&report))
}

fn run_estimate(a: &EstimateArgs) -> Result<()> {
    let model = load_model(&a.io.model)?;
    let prop = load_property(&a.io.property, &model)?;
    let region = mc_estimate_psafe(&model, &prop.region, &prop.spec, a.samples, a.seed)?;
    let box_centres = prop
        .region
        .boxes()
        .iter()
        .map(|b| {
            let x = b.center();
            let estimate = mc_pointwise_robustness(&model, &x, &prop.spec, a.samples, a.seed)?;
            Ok(PointEstimate { x, estimate })
        })
        .collect::<Result<Vec<_>>>()?;
    let report = EstimateReport {
        report_version: REPORT_VERSION,
        seed: a.seed,
        region,
        box_centres,
    };
    emit(&a.out, &to_json_string(&report))
}

fn run_sweep(a: &SweepArgs) -> Result<()> {
    let model = load_model(&a.io.model)?;
    let prop = load_property(&a.io.property, &model)?;
    let mut rows = Vec::new();
    for method in &a.methods {
        for &gamma in &a.margins {
            for &n in &a.samples {
                let cfg = config((*method).into(), n, gamma, a.seed, &a.check);
                let start = Instant::now();
                let res = certify_union(&model, &prop.region, &prop.spec, &cfg)?;
                rows.push(SweepRow {
                    method: cfg.method,
                    n_samples: n,
                    gamma,
                    seed: a.seed,
                    p_lower: res.p_lower,
                    accepted: res.per_region.iter().map(|r| r.accepted).sum(),
                    rejected: res.per_region.iter().map(|r| r.rejected).sum(),
                    seconds: start.elapsed().as_secs_f64(),
                });
            }
        }
    }
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).expect("writing to memory");
    emit(&a.out, &String::from_utf8(buf).expect("csv is utf-8"))
}

fn run_measure(a: &MeasureArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let boxes = load_boxes(&a.boxes)?;
    let g = DiagonalGaussian::from_model(&model);
    let masses = boxes.iter().map(|b| g.box_mass(b)).collect::<Result<Vec<_>>>()?;
    let set = SafeWeightSet::new(boxes.clone());
    let disjoint = set.is_ok();
    let monte_carlo = match a.samples {
        Some(n) => {
            let samples: Vec<_> = (0..n as u64).map(|i| sample_weights_stream(&model, a.seed, i)).collect();
            Some(match &set {
                Ok(set) => mc_box_mass(&samples, set)?,
                Err(_) => {
                    if n == 0 {
                        return Err(Error::InvalidArgument("sample list is empty".into()));
                    }
                    let hits = samples
                        .iter()
                        .filter(|w| boxes.iter().any(|b| b.contains_point(w.values())))
                        .count();
                    McEstimate::from_counts(hits, n)
                }
            })
        }
        None => None,
    };
    let report = MeasureReport {
        report_version: REPORT_VERSION,
        total: masses.iter().sum(),
        masses,
        disjoint,
        monte_carlo,
    };
    emit(&a.out, &to_json_string(&report))
}

fn thread_pool() -> std::result::Result<Option<rayon::ThreadPool>, String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer, got `{raw}`"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| e.to_string())
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let run = || match &cli.command {
        Command::Certify(a) => run_certify(a),
        Command::Estimate(a) => run_estimate(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Measure(a) => run_measure(a),
    };
    let result = match pool {
        Some(p) => p.install(run),
        None => run(),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e @ Error::InvalidArgument(_)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
