mod report;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{builder::PossibleValuesParser, Args, Parser, Subcommand, ValueEnum};
use hawkes_core::cascade_io::{parse_cascade, write_events, write_intensity_trace, ColumnMap, ParseOptions, TiePolicy};
use hawkes_core::inference::{fit_mle, FitConfig, FitFamily};
use hawkes_core::kernels::{
    ExponentialParams, KernelSpec, MarkDistribution, MarkedExponentialParams, MarkedPowerLawParams, PowerLawParams,
};
use hawkes_core::prediction::{simulate_continuations, total_cascade_size, ContinuationConfig, ContinuationStatus, Regime};
use hawkes_core::process::{BackgroundSpec, Event, EventSequence, HawkesModel};
use hawkes_core::simulation::{
    simulate_cluster, simulate_exp_decomposition, simulate_thinning, DecompositionParams, MarkSource,
    SimulatedSequence, SimulationConfig, StopRule,
};
use hawkes_core::stats::{median, Summary};
use hawkes_core::verify::{run_suite, Suite, VerifyConfig};
use hawkes_core::HawkesError;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_SUPERCRITICAL: u8 = 4;
const EXIT_VERIFY: u8 = 5;

/// Branching factors above this get a reliability warning from `predict`.
const HIGH_N_STAR: f64 = 0.95;

#[derive(Parser)]
#[command(name = "hawkes", version, about = "Simulate, fit and predict self-exciting point processes")]
struct Cli {
    /// Worker threads for parallel starts and runs (default: logical cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate events and write them as CSV.
    Simulate(SimulateArgs),
    /// Fit a model to a cascade by maximum likelihood.
    Fit(FitArgs),
    /// Predict the final size of a cascade.
    Predict(PredictArgs),
    /// Write the intensity of a model over a cascade on a time grid.
    Intensity(IntensityArgs),
    /// Run the built-in oracle suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelFamily {
    Exponential,
    PowerLaw,
    MarkedPowerlaw,
    MarkedExponential,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum)]
    kernel: Option<KernelFamily>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Exponent of the Pareto mark law P(m) = (a-1) m^-a on [1, inf).
    #[arg(long, allow_negative_numbers = true)]
    mark_exponent: Option<f64>,
}

#[derive(Args)]
struct CascadeArgs {
    /// Cascade CSV with `time,magnitude` columns.
    #[arg(long)]
    input: PathBuf,
    /// Observation window end; later events are ignored.
    #[arg(long, allow_negative_numbers = true)]
    window: Option<f64>,
    #[arg(long, value_enum, default_value = "reject")]
    ties: Ties,
    /// Rename input columns, e.g. `time=ts,magnitude=followers`.
    #[arg(long)]
    column_map: Option<String>,
    /// Accept a first event after time 0, as in background-driven sequences.
    #[arg(long)]
    any_origin: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    Reject,
    Perturb,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Constant background rate, or the initial background rate with `--a`.
    #[arg(long, allow_negative_numbers = true)]
    lambda0: Option<f64>,
    /// Background floor of `a + (lambda0 - a) e^{-delta t}`.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    /// Exponential jump size; selects the linear-time decomposition sampler.
    #[arg(long, allow_negative_numbers = true, conflicts_with = "alpha")]
    gamma: Option<f64>,
    /// Simulate the offspring cluster of one immigrant with this mark at t = 0.
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["lambda0", "a", "gamma"])]
    immigrant_mark: Option<f64>,
    #[arg(long, allow_negative_numbers = true, conflicts_with = "n")]
    horizon: Option<f64>,
    /// Number of events to generate.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Consecutive rejected proposals tolerated before giving up.
    #[arg(long)]
    stall_budget: Option<u64>,
    /// Output CSV (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Exponential,
    MarkedPowerlaw,
    MarkedExponential,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    cascade: CascadeArgs,
    #[arg(long, value_enum, default_value = "marked-powerlaw")]
    family: Family,
    #[arg(long, allow_negative_numbers = true)]
    mark_exponent: Option<f64>,
    #[arg(long, default_value_t = 10)]
    starts: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Accept a window extending past the last event in the file.
    #[arg(long)]
    allow_window_beyond_data: bool,
    /// Fit without the subcritical penalty.
    #[arg(long)]
    no_subcritical: bool,
    /// key=value report (default: standard output).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the full result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    cascade: CascadeArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Take kernel parameters and mark exponent from a `fit` report.
    #[arg(long, conflicts_with = "kernel")]
    fit_report: Option<PathBuf>,
    /// Also simulate this many continuations and report their sizes.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on the size of one simulated continuation.
    #[arg(long, default_value_t = 10_000)]
    max_events: usize,
    /// Fail with exit code 4 when the process is supercritical.
    #[arg(long)]
    require_finite: bool,
}

#[derive(Args)]
struct IntensityArgs {
    #[command(flatten)]
    cascade: CascadeArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Constant background rate (default: none).
    #[arg(long, allow_negative_numbers = true)]
    lambda0: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    /// Grid end (default: the observation end).
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    step: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (default: all).
    #[arg(long, value_parser = PossibleValuesParser::new(Suite::ALL.map(|s| s.name())))]
    suite: Vec<String>,
    /// Main sample size of each selected suite.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<HawkesError> for Failure {
    fn from(e: HawkesError) -> Self {
        let code = match e {
            HawkesError::Io(_) => EXIT_IO,
            HawkesError::Stalled { .. } => EXIT_NOT_CONVERGED,
            HawkesError::Supercritical { .. } => EXIT_SUPERCRITICAL,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be >= 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fit(args) => fit(args),
        Command::Predict(args) => predict(args),
        Command::Intensity(args) => intensity(args),
        Command::Verify(args) => verify(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// Seeds are mandatory for randomized commands when `CI` is set.
fn require_seed(seed: Option<u64>) -> Result<u64, Failure> {
    match seed {
        Some(s) => Ok(s),
        None if std::env::var_os("CI").is_some() => {
            Err(Failure::usage("--seed is required when CI is set"))
        }
        None => Ok(0),
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let written = match path {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush())
        }
    };
    written.map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("writing output: {e}"),
    })
}

fn need(value: Option<f64>, flag: &str, family: &str) -> Result<f64, Failure> {
    value.ok_or_else(|| Failure::usage(format!("--kernel {family} needs --{flag}")))
}

impl KernelArgs {
    fn build(&self, alpha_override: Option<f64>) -> Result<KernelSpec, Failure> {
        let family = self.kernel.ok_or_else(|| Failure::usage("--kernel is required"))?;
        let kernel: KernelSpec = match family {
            KernelFamily::Exponential => {
                let alpha = match alpha_override {
                    Some(g) => g,
                    None => need(self.alpha, "alpha", "exponential")?,
                };
                ExponentialParams::new(alpha, need(self.delta, "delta", "exponential")?)?.into()
            }
            KernelFamily::PowerLaw => PowerLawParams::new(
                need(self.alpha, "alpha", "power-law")?,
                need(self.delta, "delta", "power-law")?,
                need(self.eta, "eta", "power-law")?,
            )?
            .into(),
            KernelFamily::MarkedPowerlaw => MarkedPowerLawParams::new(
                need(self.kappa, "kappa", "marked-powerlaw")?,
                need(self.beta, "beta", "marked-powerlaw")?,
                need(self.c, "c", "marked-powerlaw")?,
                need(self.theta, "theta", "marked-powerlaw")?,
            )?
            .into(),
            KernelFamily::MarkedExponential => MarkedExponentialParams::new(
                need(self.kappa, "kappa", "marked-exponential")?,
                need(self.beta, "beta", "marked-exponential")?,
                need(self.theta, "theta", "marked-exponential")?,
            )?
            .into(),
        };
        Ok(kernel)
    }

    fn mark_law(&self) -> Result<Option<MarkDistribution>, Failure> {
        Ok(self.mark_exponent.map(MarkDistribution::new).transpose()?)
    }
}

impl CascadeArgs {
    /// The full file, and the part observed up to `--window`.
    fn load(&self) -> Result<(EventSequence, EventSequence), Failure> {
        let columns = match &self.column_map {
            Some(spec) => ColumnMap::parse(spec)?,
            None => ColumnMap::default(),
        };
        let opts = ParseOptions {
            tie_policy: match self.ties {
                Ties::Reject => TiePolicy::Reject,
                Ties::Perturb => TiePolicy::Perturb,
            },
            columns,
            require_origin: !self.any_origin,
            ..ParseOptions::default()
        };
        let file = fs::File::open(&self.input).map_err(|e| Failure {
            code: EXIT_USAGE,
            message: format!("{}: {e}", self.input.display()),
        })?;
        let full = parse_cascade(std::io::BufReader::new(file), &opts).map_err(|e| {
            let f = Failure::from(e);
            Failure {
                message: format!("{}: {}", self.input.display(), f.message),
                ..f
            }
        })?;
        let observed = match self.window {
            Some(w) => full.observed_until(w)?,
            None => full.clone(),
        };
        Ok((full, observed))
    }
}

fn n_star_text(kernel: &KernelSpec, law: Option<&MarkDistribution>) -> String {
    kernel
        .expected_branching_factor(law)
        .map_or_else(|_| "n/a".to_string(), |n| n.to_string())
}

fn simulate(args: SimulateArgs) -> Outcome {
    let seed = require_seed(args.seed)?;
    let kernel = args.kernel.build(args.gamma)?;
    let law = args.kernel.mark_law()?;
    if kernel.is_marked() && law.is_none() {
        return Err(Failure::usage("marked kernels need --mark-exponent to draw offspring marks"));
    }
    let stop = match (args.n, args.horizon, args.immigrant_mark) {
        (Some(n), None, _) => StopRule::MaxEvents(n),
        (None, Some(h), _) => StopRule::Horizon(h),
        (None, None, Some(_)) => StopRule::Horizon(f64::MAX),
        _ => return Err(Failure::usage("give --n or --horizon")),
    };
    let mut cfg = SimulationConfig::new(stop, seed);
    if let Some(b) = args.stall_budget {
        cfg = cfg.with_stall_budget(b);
    }
    if let Some(d) = law {
        cfg = cfg.with_marks(MarkSource::ParetoDraw(d));
    }

    let result = if let Some(mark) = args.immigrant_mark {
        let model = HawkesModel::new(BackgroundSpec::Zero, kernel)?;
        simulate_cluster(&model, Event::new(0.0, mark), &cfg)
    } else if let Some(gamma) = args.gamma {
        let lambda0 = args
            .lambda0
            .ok_or_else(|| Failure::usage("the decomposition sampler needs --lambda0"))?;
        let delta = need(args.kernel.delta, "delta", "exponential")?;
        let params = DecompositionParams::new(args.a.unwrap_or(lambda0), lambda0, delta, gamma)?;
        simulate_exp_decomposition(&params, &cfg)
    } else {
        let lambda0 = args
            .lambda0
            .ok_or_else(|| Failure::usage("give --lambda0 for a background or --immigrant-mark for a cluster"))?;
        let background = match args.a {
            Some(a) => BackgroundSpec::ExponentialDecay {
                a,
                lambda0,
                delta: need(args.kernel.delta, "delta", "exponential")?,
            },
            None => BackgroundSpec::Constant { rate: lambda0 },
        };
        simulate_thinning(&HawkesModel::new(background, kernel)?, &cfg)
    };

    let (sim, stalled): (SimulatedSequence, Option<String>) = match result {
        Ok(sim) => (sim, None),
        Err(HawkesError::Stalled { partial, reason }) => (*partial, Some(reason)),
        Err(e) => return Err(e.into()),
    };
    let seq = sim.to_event_sequence()?;
    let mut buf = Vec::new();
    write_events(&seq, &mut buf)?;
    emit(args.output.as_deref(), &buf)?;
    // an unbounded run to extinction has no meaningful horizon
    let end = if sim.observation_end == f64::MAX {
        sim.events.last().map_or(0.0, |e| e.time)
    } else {
        sim.observation_end
    };
    eprintln!(
        "events={} end={} n_star={} rejected={} termination={:?}",
        sim.len(),
        end,
        n_star_text(&kernel, law.as_ref()),
        sim.rejected_count,
        sim.termination
    );
    match stalled {
        None => Ok(0),
        Some(reason) => {
            eprintln!("error: simulation stalled ({reason}); partial output written");
            Ok(EXIT_NOT_CONVERGED)
        }
    }
}

fn fit(args: FitArgs) -> Outcome {
    let seed = require_seed(args.seed)?;
    let (full, observed) = args.cascade.load()?;
    if let Some(w) = args.cascade.window {
        let last = full.events().last().map_or(0.0, |e| e.time);
        if w > last && !args.allow_window_beyond_data {
            return Err(Failure::usage(format!(
                "--window {w} lies beyond the last event at {last}; pass --allow-window-beyond-data to accept"
            )));
        }
    }
    let family = match args.family {
        Family::Exponential => FitFamily::Exponential,
        Family::MarkedPowerlaw => FitFamily::MarkedPowerLaw,
        Family::MarkedExponential => FitFamily::MarkedExponential,
    };
    let mut cfg = FitConfig::new(family).with_starts(args.starts).with_seed(seed);
    cfg.enforce_subcritical = !args.no_subcritical;
    if family != FitFamily::Exponential {
        let a = args
            .mark_exponent
            .ok_or_else(|| Failure::usage(format!("--family {} needs --mark-exponent", family.label())))?;
        cfg = cfg.with_mark_exponent(a);
    }
    let result = fit_mle(&observed, &cfg)?;
    let text = report::render_fit(&result, observed.len(), observed.observation_end(), cfg.mark_exponent);
    emit(args.report.as_deref(), text.as_bytes())?;
    if let Some(path) = &args.json {
        let doc = serde_json::json!({
            "events": observed.len(),
            "observation_end": observed.observation_end(),
            "mark_exponent": cfg.mark_exponent,
            "fit": result,
        });
        let mut body = serde_json::to_string_pretty(&doc).map_err(|e| Failure {
            code: EXIT_IO,
            message: e.to_string(),
        })?;
        body.push('\n');
        emit(Some(path), body.as_bytes())?;
    }
    let converged = result.starts.iter().filter(|s| s.converged()).count();
    eprintln!(
        "{converged}/{} starts converged; log_likelihood={} n_star={}",
        result.starts.len(),
        result.log_likelihood,
        result.n_star
    );
    if result.converged {
        Ok(0)
    } else {
        eprintln!("error: no start converged");
        Ok(EXIT_NOT_CONVERGED)
    }
}

fn predict(args: PredictArgs) -> Outcome {
    let (kernel, mut mark_exponent) = match &args.fit_report {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            report::kernel_from_report(&text).map_err(Failure::usage)?
        }
        None => (args.kernel.build(None)?, None),
    };
    if args.kernel.mark_exponent.is_some() {
        mark_exponent = args.kernel.mark_exponent;
    }
    let law = mark_exponent.map(MarkDistribution::new).transpose()?;
    if kernel.is_marked() && law.is_none() {
        return Err(Failure::usage("marked kernels need --mark-exponent"));
    }
    let seed = match args.runs {
        Some(_) => Some(require_seed(args.seed)?),
        None => None,
    };
    let (_, observed) = args.cascade.load()?;
    let report = total_cascade_size(&kernel, law.as_ref(), &observed)?;

    let mut out = String::new();
    out.push_str(&format!("a1={}\n", report.a1));
    out.push_str(&format!("n_star={}\n", report.n_star));
    out.push_str(&format!("n_observed={}\n", report.n_observed));
    match report.n_infinity {
        Some(n) => out.push_str(&format!("n_infinity={n}\n")),
        None => out.push_str("n_infinity=SUPERCRITICAL\n"),
    }
    let regime = match report.regime {
        Regime::Subcritical => "subcritical",
        Regime::Supercritical => "supercritical",
    };
    out.push_str(&format!("regime={regime}\n"));
    out.push_str(&format!("numerically_unstable={}\n", report.numerically_unstable));

    if let (Some(runs), Some(seed)) = (args.runs, seed) {
        if report.regime == Regime::Supercritical {
            eprintln!("warning: simulating a supercritical process; runs stop at --max-events");
        }
        let mut cfg = ContinuationConfig::new(runs, seed);
        cfg.max_events = args.max_events;
        let sims = simulate_continuations(&kernel, law.as_ref(), &observed, &cfg)?;
        let sizes: Vec<f64> = sims.iter().map(|r| r.final_size as f64).collect();
        let s = Summary::of(sizes.iter().copied());
        let count = |status| sims.iter().filter(|r| r.status == status).count();
        out.push_str(&format!("continuation_runs={runs}\n"));
        out.push_str(&format!("continuation_mean={}\n", s.mean));
        out.push_str(&format!("continuation_se={}\n", s.standard_error()));
        out.push_str(&format!("continuation_median={}\n", median(&sizes)));
        out.push_str(&format!("continuation_capped={}\n", count(ContinuationStatus::Capped)));
        out.push_str(&format!("continuation_stalled={}\n", count(ContinuationStatus::Stalled)));
    }
    emit(None, out.as_bytes())?;

    if report.n_star >= HIGH_N_STAR && report.regime == Regime::Subcritical {
        eprintln!(
            "warning: branching factor {} is close to 1; the size prediction is very sensitive to the parameters",
            report.n_star
        );
    }
    if report.regime == Regime::Supercritical && args.require_finite {
        eprintln!("error: supercritical process (n_star = {}); the expected size is unbounded", report.n_star);
        return Ok(EXIT_SUPERCRITICAL);
    }
    Ok(0)
}

fn intensity(args: IntensityArgs) -> Outcome {
    let kernel = args.kernel.build(None)?;
    let background = match args.lambda0 {
        Some(rate) => BackgroundSpec::Constant { rate },
        None => BackgroundSpec::Zero,
    };
    let model = HawkesModel::new(background, kernel)?;
    let (_, observed) = args.cascade.load()?;
    let t1 = args.t1.unwrap_or(observed.observation_end());
    let mut buf = Vec::new();
    write_intensity_trace(&model, &observed, args.t0, t1, args.step, &mut buf)?;
    emit(args.output.as_deref(), &buf)?;
    Ok(0)
}

fn verify(args: VerifyArgs) -> Outcome {
    let mut cfg = VerifyConfig::default();
    if args.seed.is_some() || std::env::var_os("CI").is_some() {
        cfg.seed = require_seed(args.seed)?;
    }
    cfg.size = args.n;
    let suites: Vec<Suite> = if args.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suite.iter().filter_map(|s| Suite::from_name(s)).collect()
    };
    let mut failed = Vec::new();
    for suite in suites {
        let report = run_suite(suite, &cfg)?;
        print!("{report}");
        if !report.passed() {
            failed.push(suite.name());
        }
    }
    if failed.is_empty() {
        Ok(0)
    } else {
        eprintln!("error: failing suites: {}", failed.join(", "));
        Ok(EXIT_VERIFY)
    }
}
