//! Acceptance run: the default suite plus test-only controls, one line per
//! criterion. Runs without the libtest harness so the lines always print.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use alterna::algebra::Element;
use alterna::formulas::{check_compatibility, CompatibilityOptions};
use alterna::functions::{catalog, CatalogSpec, EvalFn, FieldFunction, Smoothness};
use alterna::kernels::cauchy_kernel_block;
use alterna::quadrature::{integrate_boundary, Target};
use alterna::verify::{emit, run_case, ConvergenceReport, Format, RunOptions, Suite};
use alterna::{KernelContext, Subspace};

struct Run {
    report: ConvergenceReport,
    seconds: f64,
}

struct Line {
    ok: bool,
    text: String,
}

fn get<'a>(runs: &'a BTreeMap<String, Run>, id: &str) -> &'a Run {
    runs.get(id).unwrap_or_else(|| panic!("default suite lacks case {id}"))
}

fn detail(run: &Run, key: &str) -> f64 {
    run.report.rungs.last().and_then(|r| r.detail.get(key).copied()).unwrap_or(f64::NAN)
}

/// Pass line for a set of suite cases under a runtime limit.
fn criterion(runs: &BTreeMap<String, Run>, ids: &[&str], limit: f64, extra: &str) -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut seconds = 0.0;
    for id in ids {
        let r = get(runs, id);
        ok &= r.report.pass;
        seconds += r.seconds;
        let status = if r.report.pass { "" } else { " FAILED" };
        let err = r.report.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default();
        parts.push(format!("{id} {:.2e}/{:.0e}{status}{err}", r.report.final_residual, r.report.tolerance));
    }
    ok &= seconds < limit;
    let extra = if extra.is_empty() { String::new() } else { format!("; {extra}") };
    Line { ok, text: format!("{}{extra}; {seconds:.1} s (limit {limit:.0} s)", parts.join(", ")) }
}

/// `|(E nu) f - f(x)|` in standard errors, with the kernel and the normal
/// multiplied first; the library keeps `E (nu f)`.
fn reassociated_z(suite: &Suite) -> f64 {
    let case = suite.case("bm-reproduce-octonions-mc").unwrap();
    let sub = Arc::new(Subspace::preset(&case.setup.subspace).unwrap());
    let ctx = KernelContext::new(sub.clone(), 1).unwrap();
    let alg = sub.algebra().clone();
    let dom = case.setup.domain.clone().unwrap();
    let x = case.setup.points[0].clone();
    let f = catalog(&sub, 1, &CatalogSpec::SkewPair { j: 1 }).unwrap();
    let mut cfg = case.refinement_ladder.last().unwrap().clone();
    cfg.seed = 42;
    let sigma = ctx.sigma_block();
    let est = integrate_boundary(&dom, &cfg, Target::Point(&x), alg.dim(), |node| {
        let z: Vec<f64> = node.point.iter().zip(&x).map(|(a, b)| a - b).collect();
        let e = cauchy_kernel_block(&sub, sigma, &z);
        alg.mul(&alg.mul(&e, &sub.embed_block(&node.normal)), &f.eval(&node.point))
    })
    .unwrap();
    (&est.value - &f.eval(&x)).norm() / est.std_error.unwrap().norm()
}

/// Compatibility residual of `g = (bump, 0)`, which is not a `dbar` system.
fn incompatible_residual() -> f64 {
    let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
    let ctx = KernelContext::new(sub.clone(), 2).unwrap();
    let bump = catalog(&sub, 2, &"bump:0,0,0,0;0.5;1,0,0.5,0".parse().unwrap()).unwrap();
    let support = bump.support.clone().unwrap();
    let zero: EvalFn = Arc::new(|_: &[f64]| Element::zeros(4));
    let g = vec![bump, FieldFunction::new("0", 4, Smoothness::CInfinity, zero).with_support(support)];
    let samples = vec![vec![0.1, -0.05, 0.1, 0.02], vec![-0.1, 0.1, 0.0, 0.05], vec![0.0, 0.0, 0.15, -0.1]];
    check_compatibility(&ctx, &g, &samples, &CompatibilityOptions::default()).unwrap().residual
}

fn main() {
    let suite = Suite::default_suite();
    let opts = RunOptions::default();
    let start = Instant::now();
    let mut runs = BTreeMap::new();
    for case in &suite.cases {
        let t = Instant::now();
        let report = run_case(case, &opts).unwrap_or_else(|e| panic!("{}: {e}", case.id));
        runs.insert(case.id.clone(), Run { report, seconds: t.elapsed().as_secs_f64() });
    }
    let suite_seconds = start.elapsed().as_secs_f64();

    let mut lines: Vec<Line> = Vec::new();
    lines.push(criterion(
        &runs,
        &[
            "algebra-laws-complex",
            "algebra-laws-quaternions",
            "algebra-laws-octonions",
            "algebra-laws-cl02",
            "algebra-laws-cl03",
        ],
        5.0,
        "10^4 samples each, involution on all basis pairs",
    ));
    lines.push(criterion(
        &runs,
        &[
            "kernel-divergence-d4",
            "kernel-divergence-d6",
            "kernel-divergence-d16",
            "kernel-divergence-fd-d4",
            "kernel-divergence-fd-d6",
            "kernel-divergence-fd-d16",
        ],
        10.0,
        "10^3 points per dimension",
    ));
    lines.push(criterion(&runs, &["kernel-harmonic-d4", "kernel-gradient-d4"], 10.0, "100 points"));

    let bm_in = get(&runs, "bm-reproduce-quaternions");
    let bm_out = get(&runs, "bm-exterior-quaternions");
    let orders: Vec<String> = [bm_in, bm_out]
        .iter()
        .map(|r| {
            r.report.rungs.iter().filter_map(|g| g.order_est).map(|o| format!("{o:.1}")).collect::<Vec<_>>().join("/")
        })
        .collect();
    let q_last = bm_in.report.rungs.last().map_or(0, |r| r.q_or_samples);
    lines.push(criterion(
        &runs,
        &["bm-reproduce-quaternions", "bm-exterior-quaternions"],
        120.0,
        &format!("q={q_last}, empirical orders interior {} exterior {}", orders[0], orders[1]),
    ));
    lines.push(criterion(&runs, &["cauchy-pompeiu-quaternions", "cauchy-pompeiu-h-full"], 180.0, ""));
    let pv = get(&runs, "pv-constant");
    lines.push(criterion(
        &runs,
        &["pv-constant"],
        120.0,
        &format!(
            "face, edge and corner; Monte Carlo solid angle within {:.1} standard errors",
            detail(pv, "solid_angle_z")
        ),
    ));
    let pj = get(&runs, "plemelj-jump");
    lines.push(criterion(
        &runs,
        &["plemelj-jump"],
        300.0,
        &format!(
            "interior {:.1e}, exterior {:.1e}, jump {:.1e}",
            detail(pj, "interior"),
            detail(pj, "exterior"),
            detail(pj, "jump")
        ),
    ));
    lines.push(criterion(&runs, &["teodorescu-inverse"], 300.0, "3^4 interior grid"));

    let t = Instant::now();
    let bad = incompatible_residual();
    let mut l9 = criterion(
        &runs,
        &["compatibility", "inhomogeneous-solve", "inhomogeneous-outside"],
        300.0 - t.elapsed().as_secs_f64(),
        &format!("control g = (bump, 0) has compatibility residual {bad:.2e}"),
    );
    l9.ok &= bad > 1e-2;
    lines.push(l9);

    let h = get(&runs, "hartogs-default");
    lines.push(criterion(
        &runs,
        &["hartogs-default"],
        600.0,
        &format!(
            "inside K {:.1e}, in Omega minus K {:.1e}, monogenicity {:.1e}",
            detail(h, "inside"),
            detail(h, "outside"),
            detail(h, "monogenicity")
        ),
    ));

    let t = Instant::now();
    let z = reassociated_z(&suite);
    let control_seconds = t.elapsed().as_secs_f64();
    let mc_tol = get(&runs, "bm-reproduce-octonions-mc").report.tolerance;
    let mut l11 = criterion(
        &runs,
        &[
            "kernel-divergence-d8",
            "kernel-divergence-fd-d8",
            "kernel-harmonic-d8",
            "kernel-gradient-d8",
            "bm-reproduce-octonions-mc",
            "bm-exterior-octonions-mc",
        ],
        600.0 - control_seconds,
        &format!("re-associated kernel on skew_pair:1 misses by {z:.1} standard errors"),
    );
    l11.ok &= z > 10.0 * mc_tol;
    lines.push(l11);

    let out = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_alterna"))
        .args(["verify", "--suite", "default", "--out"])
        .arg(out.path())
        .env("RUST_LOG", "error")
        .stdout(std::process::Stdio::null())
        .status()
        .unwrap();
    let mut identical = status.success();
    let mut mismatched = Vec::new();
    for (id, r) in &runs {
        for (ext, format) in [("json", Format::Json), ("csv", Format::Csv)] {
            let written = std::fs::read(out.path().join("default").join(format!("{id}.{ext}"))).unwrap_or_default();
            if written != emit(&r.report, format).unwrap() {
                identical = false;
                mismatched.push(format!("{id}.{ext}"));
            }
        }
    }
    let detail12 =
        if mismatched.is_empty() { String::new() } else { format!("; differing: {}", mismatched.join(", ")) };
    lines.push(Line {
        ok: identical,
        text: format!(
            "{} reports from a second run (separate process) compared byte for byte{detail12}",
            2 * runs.len()
        ),
    });

    let mut all = true;
    for (k, line) in lines.iter().enumerate() {
        all &= line.ok;
        println!("criterion {:>2}: {}  {}", k + 1, if line.ok { "PASS" } else { "FAIL" }, line.text);
    }
    let passed = runs.values().filter(|r| r.report.pass).count();
    println!("default suite: {passed}/{} cases pass in {suite_seconds:.1} s", runs.len());
    if !all || passed != runs.len() {
        std::process::exit(1);
    }
}
