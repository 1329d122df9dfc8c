//! Named verification cases binding each identity to a concrete setup,
//! run over a refinement ladder with machine-readable reports.

mod checks;
mod suite;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{Approach, Cutoff, InhomogeneousConfig, PVConfig};
use crate::functions::CatalogSpec;
use crate::quadrature::{DomainSpec, QuadratureConfig, Rule};

pub use suite::Suite;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    BmReproduce,
    BmExterior,
    CauchyPompeiu,
    KernelDivergence,
    KernelHarmonic,
    KernelGradientRelation,
    PvConstant,
    PlemeljJump,
    TeodorescuInverse,
    InhomogeneousSolve,
    Compatibility,
    Hartogs,
    AlgebraLaws,
    IntegralLaws,
    NormBound,
}

impl Theorem {
    pub const ALL: [Theorem; 15] = [
        Theorem::BmReproduce,
        Theorem::BmExterior,
        Theorem::CauchyPompeiu,
        Theorem::KernelDivergence,
        Theorem::KernelHarmonic,
        Theorem::KernelGradientRelation,
        Theorem::PvConstant,
        Theorem::PlemeljJump,
        Theorem::TeodorescuInverse,
        Theorem::InhomogeneousSolve,
        Theorem::Compatibility,
        Theorem::Hartogs,
        Theorem::AlgebraLaws,
        Theorem::IntegralLaws,
        Theorem::NormBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::BmReproduce => "bm_reproduce",
            Theorem::BmExterior => "bm_exterior",
            Theorem::CauchyPompeiu => "cauchy_pompeiu",
            Theorem::KernelDivergence => "kernel_divergence",
            Theorem::KernelHarmonic => "kernel_harmonic",
            Theorem::KernelGradientRelation => "kernel_gradient_relation",
            Theorem::PvConstant => "pv_constant",
            Theorem::PlemeljJump => "plemelj_jump",
            Theorem::TeodorescuInverse => "teodorescu_inverse",
            Theorem::InhomogeneousSolve => "inhomogeneous_solve",
            Theorem::Compatibility => "compatibility",
            Theorem::Hartogs => "hartogs",
            Theorem::AlgebraLaws => "algebra_laws",
            Theorem::IntegralLaws => "integral_laws",
            Theorem::NormBound => "norm_bound",
        }
    }

    /// Group tag shared by related identities.
    pub fn group(self) -> &'static str {
        match self {
            Theorem::AlgebraLaws | Theorem::IntegralLaws | Theorem::NormBound => "section2",
            Theorem::KernelDivergence
            | Theorem::KernelHarmonic
            | Theorem::KernelGradientRelation
            | Theorem::BmReproduce
            | Theorem::BmExterior
            | Theorem::CauchyPompeiu => "section3",
            Theorem::PvConstant | Theorem::PlemeljJump => "section4",
            Theorem::TeodorescuInverse | Theorem::InhomogeneousSolve | Theorem::Compatibility | Theorem::Hartogs => {
                "section5"
            }
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Theorem> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown theorem `{s}`")))
    }
}

fn one() -> usize {
    1
}

/// Everything a case needs besides the quadrature ladder. Fields a theorem
/// does not use must be left empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseSetup {
    /// Hypercomplex subspace preset, e.g. `H-CJ`.
    pub subspace: String,
    #[serde(default = "one")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub functions: Vec<CatalogSpec>,
    /// Explicit evaluation points.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    /// Number of seeded random points (or algebra samples).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Region the random points are drawn from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_region: Option<DomainSpec>,
    /// Points per axis of an interior tensor grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv: Option<PVConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approach: Option<Approach>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hole: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Cutoff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inhomogeneous: Option<InhomogeneousConfig>,
    /// Finite-difference step of derivative checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    /// Kernel checks: compare with finite differences instead of the closed
    /// form. Compatibility: also evaluate the integral form.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub cross_check: bool,
    /// Residuals are z-scores `|error| / standard error` of Monte Carlo rules.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub statistical: bool,
    /// Known value of the norm-bound constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationCase {
    pub id: String,
    pub theorem: Theorem,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
    pub setup: CaseSetup,
    pub tolerance: f64,
    pub refinement_ladder: Vec<QuadratureConfig>,
}

impl VerificationCase {
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::InvalidConfig(format!("case id `{}` must be a non-empty file name", self.id)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!("{}: tolerance must be positive", self.id)));
        }
        if self.refinement_ladder.is_empty() {
            return Err(Error::InvalidConfig(format!("{}: refinement ladder is empty", self.id)));
        }
        for cfg in &self.refinement_ladder {
            cfg.validate()?;
        }
        Ok(())
    }

    /// Explicit tags plus the theorem name and its group.
    pub fn all_tags(&self) -> Vec<&str> {
        let mut tags: Vec<&str> = vec![self.theorem.name(), self.theorem.group()];
        tags.extend(self.tags.iter().map(String::as_str));
        tags
    }
}

/// Gauss orders (`q=8,12`) or Monte Carlo sample counts (`samples=1000,4000`)
/// replacing a case's refinement ladder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub monte_carlo: bool,
    pub sizes: Vec<usize>,
}

impl FromStr for Ladder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Ladder> {
        let (key, list) = s
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("expected `q=...` or `samples=...`, got `{s}`")))?;
        let monte_carlo = match key.trim() {
            "q" => false,
            "samples" => true,
            other => return Err(Error::InvalidConfig(format!("unknown ladder key `{other}`"))),
        };
        let sizes = list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::InvalidConfig(format!("bad ladder size `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if sizes.is_empty() {
            return Err(Error::InvalidConfig("ladder is empty".into()));
        }
        Ok(Ladder { monte_carlo, sizes })
    }
}

impl Theorem {
    /// Whether refinement acts on the volume rule; the boundary rule otherwise.
    pub fn refines_volume(self) -> bool {
        matches!(
            self,
            Theorem::CauchyPompeiu
                | Theorem::TeodorescuInverse
                | Theorem::InhomogeneousSolve
                | Theorem::Compatibility
                | Theorem::Hartogs
                | Theorem::IntegralLaws
        )
    }
}

impl VerificationCase {
    /// The case with one rung per ladder size, each derived from the last
    /// rung of the original ladder.
    pub fn with_ladder(&self, ladder: &Ladder) -> VerificationCase {
        let base = self.refinement_ladder.last().cloned().unwrap_or_default();
        let mut case = self.clone();
        case.refinement_ladder = ladder
            .sizes
            .iter()
            .map(|&size| {
                let rule =
                    if ladder.monte_carlo { Rule::MonteCarlo { samples: size } } else { Rule::Gauss { q: size } };
                let mut cfg = base.clone();
                if self.theorem.refines_volume() {
                    cfg.volume = rule;
                } else {
                    cfg.boundary = rule;
                }
                cfg
            })
            .collect();
        case
    }
}

/// Options shared by every case of a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Seeds every random component.
    pub seed: u64,
    /// Record wall-clock seconds in reports (breaks byte-identity).
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { seed: 42, timings: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RungResult {
    pub rung: usize,
    /// Gauss order or sample count of the rung; the point count for
    /// pointwise checks.
    pub q_or_samples: usize,
    pub residual: f64,
    /// `log(r_{k-1} / r_k) / log(s_k / s_{k-1})`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_est: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    /// Named partial residuals and diagnostics.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub detail: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Norm of the deviation from the exact value.
    Absolute,
    /// Deviation in units of the Monte Carlo standard error.
    ZScore,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub case_id: String,
    pub theorem: Theorem,
    pub metric: Metric,
    pub tolerance: f64,
    pub rungs: Vec<RungResult>,
    /// Residual of the last rung; infinite when the case errored.
    pub final_residual: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

impl ConvergenceReport {
    fn failed(case: &VerificationCase, err: &Error) -> ConvergenceReport {
        ConvergenceReport {
            case_id: case.id.clone(),
            theorem: case.theorem,
            metric: metric_of(case),
            tolerance: case.tolerance,
            rungs: Vec::new(),
            final_residual: f64::INFINITY,
            pass: false,
            error: Some(err.to_string()),
            seconds: None,
        }
    }
}

fn metric_of(case: &VerificationCase) -> Metric {
    if case.setup.statistical {
        Metric::ZScore
    } else {
        Metric::Absolute
    }
}

fn order_estimate(prev: &RungResult, cur: &RungResult) -> Option<f64> {
    let (r0, r1) = (prev.residual, cur.residual);
    let (s0, s1) = (prev.q_or_samples as f64, cur.q_or_samples as f64);
    if r0 > 0.0 && r1 > 0.0 && s1 != s0 {
        Some((r0 / r1).ln() / (s1 / s0).ln())
    } else {
        None
    }
}

/// Runs every rung of a case. Setup problems are reported before any
/// computation.
pub fn run_case(case: &VerificationCase, opts: &RunOptions) -> Result<ConvergenceReport> {
    case.validate()?;
    let prepared = checks::prepare(case, opts.seed)?;
    let start = Instant::now();
    let mut rungs: Vec<RungResult> = Vec::with_capacity(case.refinement_ladder.len());
    for (k, cfg) in case.refinement_ladder.iter().enumerate() {
        let mut cfg = cfg.clone();
        cfg.seed = opts.seed;
        let t = Instant::now();
        let out = checks::run_rung(case, &prepared, &cfg, opts.seed)?;
        if !(out.residual >= 0.0) {
            return Err(Error::InvalidConfig(format!("{}: residual is not a non-negative number", case.id)));
        }
        log::info!("{} rung {k}: residual {:.3e}", case.id, out.residual);
        let mut rung = RungResult {
            rung: k,
            q_or_samples: out.size,
            residual: out.residual,
            order_est: None,
            seconds: opts.timings.then(|| t.elapsed().as_secs_f64()),
            detail: out.detail,
        };
        rung.order_est = rungs.last().and_then(|prev| order_estimate(prev, &rung));
        rungs.push(rung);
    }
    let final_residual = rungs.last().map_or(f64::INFINITY, |r| r.residual);
    Ok(ConvergenceReport {
        case_id: case.id.clone(),
        theorem: case.theorem,
        metric: metric_of(case),
        tolerance: case.tolerance,
        rungs,
        final_residual,
        pass: final_residual < case.tolerance,
        error: None,
        seconds: opts.timings.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Cases of `suite` matching any tag of `filter` (all cases when empty), in
/// suite order. Unknown tags are an error.
pub fn select<'a>(suite: &'a Suite, filter: &[String]) -> Result<Vec<&'a VerificationCase>> {
    for tag in filter {
        let known = suite.cases.iter().any(|c| c.id == *tag || c.all_tags().contains(&tag.as_str()));
        if !known {
            return Err(Error::UnknownTag(tag.clone()));
        }
    }
    Ok(suite
        .cases
        .iter()
        .filter(|c| filter.is_empty() || filter.iter().any(|t| c.id == *t || c.all_tags().contains(&t.as_str())))
        .collect())
}

/// Runs the selected cases. A case whose computation fails is reported as
/// failed with the error message; an unknown tag fails the whole call.
pub fn run_suite(suite: &Suite, filter: &[String], opts: &RunOptions) -> Result<Vec<ConvergenceReport>> {
    let cases = select(suite, filter)?;
    let mut reports = Vec::with_capacity(cases.len());
    for case in cases {
        log::info!("running {} ({})", case.id, case.theorem);
        let report = run_case(case, opts).unwrap_or_else(|e| {
            log::error!("{}: {e}", case.id);
            ConvergenceReport::failed(case, &e)
        });
        reports.push(report);
    }
    Ok(reports)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

pub const CSV_HEADER: &str = "case_id,rung,q_or_samples,residual,order_est,seconds";

fn csv_rows(report: &ConvergenceReport, out: &mut String) {
    for r in &report.rungs {
        let order = r.order_est.map(|o| format!("{o}")).unwrap_or_default();
        let secs = r.seconds.map(|s| format!("{s}")).unwrap_or_default();
        out.push_str(&format!("{},{},{},{},{order},{secs}\n", report.case_id, r.rung, r.q_or_samples, r.residual));
    }
}

/// Serializes one report.
pub fn emit(report: &ConvergenceReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut bytes = serde_json::to_vec_pretty(report)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut s = format!("{CSV_HEADER}\n");
            csv_rows(report, &mut s);
            Ok(s.into_bytes())
        }
    }
}

/// One CSV table over several reports.
pub fn emit_csv_table(reports: &[ConvergenceReport]) -> String {
    let mut s = format!("{CSV_HEADER}\n");
    for r in reports {
        csv_rows(r, &mut s);
    }
    s
}

/// Writes `<root>/<suite>/<case>.json` and `.csv` for every report and
/// returns the suite directory.
pub fn write_results(root: &Path, suite_name: &str, reports: &[ConvergenceReport]) -> Result<PathBuf> {
    let dir = root.join(suite_name);
    std::fs::create_dir_all(&dir)?;
    for r in reports {
        std::fs::write(dir.join(format!("{}.json", r.case_id)), emit(r, Format::Json)?)?;
        std::fs::write(dir.join(format!("{}.csv", r.case_id)), emit(r, Format::Csv)?)?;
    }
    Ok(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_names_roundtrip() {
        for t in Theorem::ALL {
            assert_eq!(t.name().parse::<Theorem>().unwrap(), t);
            assert_eq!(serde_json::to_string(&t).unwrap(), format!("\"{}\"", t.name()));
        }
    }

    #[test]
    fn order_estimate_of_power_law() {
        let mk = |s: usize, r: f64| RungResult {
            rung: 0,
            q_or_samples: s,
            residual: r,
            order_est: None,
            seconds: None,
            detail: BTreeMap::new(),
        };
        let o = order_estimate(&mk(8, 1e-2), &mk(16, 1e-2 / 16.0)).unwrap();
        assert!((o - 4.0).abs() < 1e-12);
        assert!(order_estimate(&mk(8, 0.0), &mk(16, 1.0)).is_none());
    }

    #[test]
    fn ladder_override_targets_the_refined_rule() {
        let suite = Suite::default_suite();
        let bm = suite.case("bm-reproduce-quaternions").unwrap();
        let l: Ladder = "q=8,12".parse().unwrap();
        let c = bm.with_ladder(&l);
        assert_eq!(c.refinement_ladder.len(), 2);
        assert_eq!(c.refinement_ladder[1].boundary, Rule::Gauss { q: 12 });
        let h = suite.case("hartogs-default").unwrap().with_ladder(&"q=6".parse().unwrap());
        assert_eq!(h.refinement_ladder[0].volume, Rule::Gauss { q: 6 });
        assert!("p=1".parse::<Ladder>().is_err());
        assert!("q=".parse::<Ladder>().is_err());
    }

    #[test]
    fn invalid_cases_are_rejected_before_running() {
        let mut case = Suite::default_suite().cases[0].clone();
        case.tolerance = 0.0;
        assert!(run_case(&case, &RunOptions::default()).is_err());
        case.tolerance = 1.0;
        case.refinement_ladder.clear();
        assert!(run_case(&case, &RunOptions::default()).is_err());
    }
}
