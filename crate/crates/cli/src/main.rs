//! `alterna`: algebra inspection, single-operator evaluation, verification
//! runs and convergence studies. Results go to stdout as JSON or CSV, logs to
//! stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use alterna::algebra::{build_algebra, Algebra, AlgebraKind, Element};
use alterna::fd::FdOptions;
use alterna::formulas::{
    bm_integral, bm_singular_pv, cauchy_pompeiu, dbar_data, plemelj_limits, solid_angle, solve_inhomogeneous,
    teodorescu, Approach, InhomogeneousConfig, PVConfig, SolidAngleMethod,
};
use alterna::functions::{catalog, dirac, CatalogSpec};
use alterna::quadrature::{DomainSpec, Estimate, QuadratureConfig};
use alterna::verify::{self, Format, Ladder, RunOptions, Suite};
use alterna::{Error, KernelContext, Subspace};

/// Exit status of a usage or configuration error.
const USAGE: u8 = 2;
const FAILED: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "alterna", version, about = "Function theory over alternative *-algebras, checked numerically")]
struct Cli {
    /// Seed of every random component.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads; falls back to ALTERNA_THREADS, then 1.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log verbosity on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect or validate an algebra.
    Algebra {
        #[command(subcommand)]
        command: AlgebraCommand,
    },
    /// Evaluate one operator and print its value.
    Eval(EvalArgs),
    /// Run a verification suite and write reports.
    Verify(VerifyArgs),
    /// Run one case over a custom refinement ladder.
    Converge(ConvergeArgs),
    /// Run the default Hartogs extension case.
    Hartogs(HartogsArgs),
}

#[derive(Subcommand, Debug)]
enum AlgebraCommand {
    /// Multiplication table, involution and an alternativity check.
    Inspect {
        /// complex, quaternions, octonions, clifford:<m> or file:<path>
        #[arg(long)]
        kind: String,
    },
    /// Validate an algebra description file.
    Validate {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Op {
    BmIntegral,
    CauchyPompeiu,
    BmSingularPv,
    PlemeljLimits,
    SolidAngle,
    Teodorescu,
    Inhomogeneous,
    Dirac,
    Kernel,
    Function,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    op: Op,
    /// JSON file with the evaluation setup; omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluation point, comma separated; overrides the config.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Catalog function, e.g. `fueter:1,1`; overrides the config.
    #[arg(long)]
    function: Option<CatalogSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// `default` or a path to a suite file.
    #[arg(long, default_value = "default")]
    suite: String,
    /// Case ids or tags to run; all cases when omitted.
    #[arg(long, value_delimiter = ',')]
    filter: Vec<String>,
    /// Reports are written to `<out>/<suite>/<case>.{json,csv}`.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Skip writing report files.
    #[arg(long)]
    no_write: bool,
    /// Record wall-clock seconds (reports are then no longer reproducible).
    #[arg(long)]
    timings: bool,
    /// Summary format on stdout.
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    #[arg(long)]
    case: String,
    /// `q=8,12,16,24` or `samples=10000,40000`; defaults to the case's own ladder.
    #[arg(long)]
    ladder: Option<Ladder>,
    #[arg(long, default_value = "default")]
    suite: String,
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: OutFormat,
}

#[derive(Args, Debug)]
struct HartogsArgs {
    /// Run the built-in concentric-box case.
    #[arg(long, required = true)]
    demo: bool,
    #[arg(long)]
    timings: bool,
}

/// Outcome of a subcommand: `Err` carries the exit status and message.
type Outcome = std::result::Result<(), (u8, String)>;

fn usage_err(e: Error) -> (u8, String) {
    (USAGE, e.to_string())
}

/// Writes to stdout; a closed pipe is not an error.
fn print_out(text: &str) -> Outcome {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err((FAILED, format!("writing stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_json(v: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(v).map_err(|e| (USAGE, e.to_string()))?;
    print_out(&format!("{text}\n"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let threads = match cli
        .threads
        .map(Ok)
        .or_else(|| std::env::var("ALTERNA_THREADS").ok().map(|s| s.trim().parse::<usize>()))
    {
        Some(Ok(t)) if t > 0 => t,
        None => 1,
        _ => {
            eprintln!("error: thread count must be a positive integer");
            return ExitCode::from(USAGE);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        log::warn!("could not configure the thread pool: {e}");
    }
    let outcome = match &cli.command {
        Command::Algebra { command: AlgebraCommand::Inspect { kind } } => inspect(kind, cli.seed),
        Command::Algebra { command: AlgebraCommand::Validate { file } } => validate(file),
        Command::Eval(args) => eval(args, cli.seed),
        Command::Verify(args) => run_verify(args, cli.seed),
        Command::Converge(args) => converge(args, cli.seed),
        Command::Hartogs(args) => hartogs(args, cli.seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

const INSPECT_SAMPLES: usize = 1000;

fn inspect(kind: &str, seed: u64) -> Outcome {
    let kind: AlgebraKind = kind.parse().map_err(usage_err)?;
    let alg = build_algebra(&kind).map_err(usage_err)?;
    let d = alg.dim();
    let table: Vec<String> =
        (1..d).flat_map(|s| (1..d).map(move |t| (s, t))).map(|(s, t)| alg.format_product(s, t)).collect();
    let involution: Vec<String> = (0..d)
        .map(|s| format!("{}^c = {}", alg.basis_names()[s], alg.format_element(&alg.conj(&alg.basis(s)))))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..INSPECT_SAMPLES {
        let x = random_element(&alg, &mut rng);
        let y = random_element(&alg, &mut rng);
        worst = worst.max(alg.associator(&x, &x, &y).norm()).max(alg.associator(&x, &y, &y).norm());
    }
    let structural = alg.validate();
    print_json(&json!({
        "name": alg.name(),
        "dim": d,
        "basis": alg.basis_names(),
        "table": table,
        "involution": involution,
        "alternativity": {
            "valid": structural.is_ok(),
            "error": structural.err().map(|e| e.to_string()),
            "samples": INSPECT_SAMPLES,
            "max_associator": worst,
        },
    }))
}

fn random_element(alg: &Algebra, rng: &mut ChaCha8Rng) -> Element {
    let v: Vec<f64> = (0..alg.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Element::from_slice(&v)
}

fn validate(file: &Path) -> Outcome {
    match Algebra::from_file(file).and_then(|a| a.validate().map(|_| a)) {
        Ok(alg) => print_json(&json!({ "valid": true, "name": alg.name(), "dim": alg.dim() })),
        Err(e @ (Error::Io(_) | Error::Json(_))) => Err(usage_err(e)),
        Err(e) => {
            print_json(&json!({ "valid": false, "error": e.to_string() }))?;
            Err((FAILED, format!("{} is not a valid algebra", file.display())))
        }
    }
}

fn default_subspace() -> String {
    "H-CJ".into()
}

fn default_n() -> usize {
    2
}

fn default_function() -> CatalogSpec {
    CatalogSpec::Constant(vec![1.0])
}

fn default_j() -> usize {
    1
}

/// Setup of a single evaluation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalConfig {
    #[serde(default = "default_subspace")]
    subspace: String,
    #[serde(default = "default_n")]
    n: usize,
    /// Defaults to the cube `[-1, 1]^D`.
    #[serde(default)]
    domain: Option<DomainSpec>,
    #[serde(default = "default_function")]
    function: CatalogSpec,
    #[serde(default)]
    point: Option<Vec<f64>>,
    #[serde(default)]
    quadrature: QuadratureConfig,
    #[serde(default)]
    pv: Option<PVConfig>,
    #[serde(default)]
    approach: Option<Approach>,
    /// Solid-angle method; analytic by default.
    #[serde(default)]
    method: Option<SolidAngleMethod>,
    #[serde(default)]
    inhomogeneous: Option<InhomogeneousConfig>,
    /// Variable index of `dirac` and `kernel`, from 1.
    #[serde(default = "default_j")]
    j: usize,
}

#[derive(Serialize)]
struct EvalOutput {
    op: String,
    value_coeffs: Vec<f64>,
    /// Standard error, extrapolation or rule-difference estimate.
    est_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
    config_echo: EvalConfig,
}

fn eval(args: &EvalArgs, seed: u64) -> Outcome {
    let mut cfg: EvalConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage_err(e.into()))?;
            serde_json::from_str(&text).map_err(|e| usage_err(e.into()))?
        }
        None => serde_json::from_str("{}").expect("every field has a default"),
    };
    if let Some(p) = &args.point {
        cfg.point = Some(p.clone());
    }
    if let Some(f) = &args.function {
        cfg.function = f.clone();
    }
    cfg.quadrature.seed = seed;
    let (value, est_error, detail) = eval_op(args.op, &mut cfg, seed).map_err(usage_err)?;
    let op = args.op.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
    print_json(&EvalOutput { op, value_coeffs: value, est_error, detail, config_echo: cfg })
}

/// Error estimate of a quadrature value: the standard error of sampled
/// rules, else the change against the next coarser rule.
fn rule_error(est: &Estimate, coarse: impl FnOnce() -> alterna::Result<Estimate>) -> alterna::Result<f64> {
    if est.std_error.is_some() {
        return Ok(est.max_std_error());
    }
    Ok((&est.value - &coarse()?.value).max_abs())
}

fn coarser(cfg: &QuadratureConfig) -> QuadratureConfig {
    let mut c = cfg.clone();
    c.boundary = c.boundary.coarser();
    c.volume = c.volume.coarser();
    c
}

type EvalValue = (Vec<f64>, f64, Option<serde_json::Value>);

fn eval_op(op: Op, cfg: &mut EvalConfig, seed: u64) -> alterna::Result<EvalValue> {
    let sub = Arc::new(Subspace::preset(&cfg.subspace)?);
    let ctx = KernelContext::new(sub.clone(), cfg.n)?;
    let dim = ctx.dim();
    let dom = cfg.domain.get_or_insert_with(|| DomainSpec::cube(dim, 1.0)).clone();
    let f = catalog(&sub, cfg.n, &cfg.function)?;
    let coords =
        cfg.point.clone().ok_or_else(|| Error::InvalidConfig("an evaluation point is required (--point)".into()))?;
    let x = sub.point(cfg.n, coords.clone())?;
    let q = &cfg.quadrature;
    let pv = cfg.pv.clone().unwrap_or_else(|| PVConfig::from_quadrature(q));
    Ok(match op {
        Op::BmIntegral => {
            let e = bm_integral(&ctx, &dom, q, &f, &x)?;
            let err = rule_error(&e, || bm_integral(&ctx, &dom, &coarser(q), &f, &x))?;
            (e.value.into_vec(), err, None)
        }
        Op::CauchyPompeiu => {
            let e = cauchy_pompeiu(&ctx, &dom, q, &f, &x)?;
            let err = rule_error(&e, || cauchy_pompeiu(&ctx, &dom, &coarser(q), &f, &x))?;
            (e.value.into_vec(), err, None)
        }
        Op::Teodorescu => {
            let e = teodorescu(&ctx, &dom, q, &f, &x)?;
            let err = rule_error(&e, || teodorescu(&ctx, &dom, &coarser(q), &f, &x))?;
            (e.value.into_vec(), err, None)
        }
        Op::BmSingularPv => {
            let r = bm_singular_pv(&ctx, &dom, q, &pv, &f, &x)?;
            let detail = json!({ "beta": r.beta, "fit_residual": r.fit_residual });
            (r.value.into_vec(), r.est_error, Some(detail))
        }
        Op::PlemeljLimits => {
            let approach = cfg.approach.clone().unwrap_or_default();
            let r = plemelj_limits(&ctx, &dom, q, &pv, &f, &x, &approach)?;
            let jump = &r.interior_limit - &r.exterior_limit;
            let detail = json!({
                "interior_limit": r.interior_limit.coeffs(),
                "exterior_limit": r.exterior_limit.coeffs(),
                "boundary_value": r.boundary_value.coeffs(),
                "tau": r.tau,
                "interior_residual": r.interior_residual(),
                "exterior_residual": r.exterior_residual(),
                "jump_residual": r.jump_residual(),
            });
            let err = r.interior_error.max(r.exterior_error).max(r.boundary_error);
            (jump.into_vec(), err, Some(detail))
        }
        Op::SolidAngle => {
            let method = cfg.method.unwrap_or(SolidAngleMethod::Analytic);
            let method = match method {
                SolidAngleMethod::MonteCarlo { samples, .. } => SolidAngleMethod::MonteCarlo { samples, seed },
                m => m,
            };
            let s = solid_angle(&dom, &coords, method)?;
            (vec![s.tau], s.std_error.unwrap_or(0.0), None)
        }
        Op::Inhomogeneous => {
            let icfg = cfg.inhomogeneous.clone().unwrap_or_default();
            let g = dbar_data(&ctx, &f)?;
            let v = solve_inhomogeneous(&ctx, &g, &x, &icfg)?;
            let coarse = InhomogeneousConfig { q: (2 * icfg.q).div_ceil(3).max(2), ..icfg.clone() };
            let err = (&v - &solve_inhomogeneous(&ctx, &g, &x, &coarse)?).max_abs();
            (v.into_vec(), err, None)
        }
        Op::Dirac => {
            let d = dirac(&sub, &f, cfg.j, &coords, &FdOptions::default())?;
            (d.value.into_vec(), d.est_error, Some(json!({ "method": d.method })))
        }
        Op::Kernel => (ctx.bm_component(cfg.j, &x)?.into_vec(), 0.0, None),
        Op::Function => (f.value(&coords)?.into_vec(), 0.0, None),
    })
}

#[derive(Serialize)]
struct CaseSummary<'a> {
    case_id: &'a str,
    theorem: verify::Theorem,
    pass: bool,
    final_residual: f64,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

fn first_failure(reports: &[verify::ConvergenceReport]) -> Outcome {
    match reports.iter().find(|r| !r.pass) {
        None => Ok(()),
        Some(r) => {
            let why = r
                .error
                .clone()
                .unwrap_or_else(|| format!("residual {:e} >= tolerance {:e}", r.final_residual, r.tolerance));
            Err((FAILED, format!("case {} failed: {why}", r.case_id)))
        }
    }
}

fn run_verify(args: &VerifyArgs, seed: u64) -> Outcome {
    let suite = Suite::resolve(&args.suite).map_err(usage_err)?;
    let opts = RunOptions { seed, timings: args.timings };
    let reports = verify::run_suite(&suite, &args.filter, &opts).map_err(usage_err)?;
    let dir = if args.no_write {
        None
    } else {
        Some(verify::write_results(&args.out, &suite.name, &reports).map_err(usage_err)?)
    };
    match args.format {
        OutFormat::Json => {
            let cases: Vec<CaseSummary> = reports
                .iter()
                .map(|r| CaseSummary {
                    case_id: &r.case_id,
                    theorem: r.theorem,
                    pass: r.pass,
                    final_residual: r.final_residual,
                    tolerance: r.tolerance,
                    error: r.error.as_deref(),
                })
                .collect();
            print_json(&json!({
                "suite": suite.name,
                "seed": seed,
                "results_dir": dir,
                "passed": reports.iter().filter(|r| r.pass).count(),
                "failed": reports.iter().filter(|r| !r.pass).count(),
                "cases": cases,
            }))?;
        }
        OutFormat::Csv => print_out(&verify::emit_csv_table(&reports))?,
    }
    first_failure(&reports)
}

fn converge(args: &ConvergeArgs, seed: u64) -> Outcome {
    let suite = Suite::resolve(&args.suite).map_err(usage_err)?;
    let case =
        suite.case(&args.case).ok_or_else(|| (USAGE, format!("no case `{}` in suite {}", args.case, suite.name)))?;
    let case = match &args.ladder {
        Some(l) => case.with_ladder(l),
        None => case.clone(),
    };
    let report = verify::run_case(&case, &RunOptions { seed, timings: args.timings }).map_err(usage_err)?;
    let format = match args.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    let bytes = verify::emit(&report, format).map_err(usage_err)?;
    print_out(&String::from_utf8_lossy(&bytes))?;
    first_failure(std::slice::from_ref(&report))
}

const HARTOGS_CASE: &str = "hartogs-default";

fn hartogs(args: &HartogsArgs, seed: u64) -> Outcome {
    debug_assert!(args.demo);
    let suite = Suite::default_suite();
    let case = suite.case(HARTOGS_CASE).expect("default suite has a Hartogs case");
    let report = verify::run_case(case, &RunOptions { seed, timings: args.timings }).map_err(usage_err)?;
    let last = report.rungs.last();
    print_json(&json!({
        "case_id": report.case_id,
        "omega": case.setup.domain,
        "hole": case.setup.hole,
        "function": case.setup.functions,
        "residuals": last.map(|r| &r.detail),
        "final_residual": report.final_residual,
        "tolerance": report.tolerance,
        "pass": report.pass,
    }))?;
    first_failure(std::slice::from_ref(&report))
}
