//! Per-theorem setup validation and the computation behind one rung.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Theorem, VerificationCase};
use crate::algebra::{norm_bound_constant, Element};
use crate::error::{Error, Result};
use crate::fd::{self, FdOptions};
use crate::formulas::{
    bm_integral, bm_singular_pv, cauchy_pompeiu, check_compatibility, dbar_data, hartogs_extend, plemelj_limits,
    solid_angle, solve_inhomogeneous, teodorescu_dbar_residual, CompatibilityOptions, InhomogeneousConfig, PVConfig,
    SolidAngleMethod, DBAR_CHECK_STEP,
};
use crate::functions::{catalog, dirac_fd, CatalogSpec, FieldFunction};
use crate::hypercomplex::{MultiPoint, Subspace};
use crate::kernels::KernelContext;
use crate::quadrature::sphere::random_direction;
use crate::quadrature::{integrate_boundary, integrate_volume, DomainSpec, QuadratureConfig, Rule, Target};

/// Stream of the case-level point sampler; Monte Carlo rules use others.
const SAMPLER_STREAM: u64 = 1 << 32;
/// Random points of kernel checks keep at least this distance from the pole.
const KERNEL_MIN_RADIUS: f64 = 0.25;
/// Sampled points keep this distance from the boundary of their domain.
const SAMPLE_MARGIN: f64 = 0.05;
const DEFAULT_ALGEBRA_SAMPLES: usize = 10_000;
const DEFAULT_NORM_SEARCH_SAMPLES: usize = 2_000;
const SOLID_ANGLE_SAMPLES: usize = 20_000;

pub(super) struct Prepared {
    sub: Arc<Subspace>,
    ctx: KernelContext,
    functions: Vec<FieldFunction>,
    points: Vec<Vec<f64>>,
    /// Hartogs: points inside the hole.
    hole_points: Vec<Vec<f64>>,
}

pub(super) struct RungOutcome {
    pub residual: f64,
    pub size: usize,
    pub detail: BTreeMap<String, f64>,
}

fn bad(case: &VerificationCase, msg: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("{}: {msg}", case.id))
}

fn sample_in(region: &DomainSpec, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    match region {
        DomainSpec::Box { lo, hi } => {
            for k in 0..out.len() {
                out[k] = rng.random_range(lo[k]..hi[k]);
            }
        }
        DomainSpec::Ball { center, radius } => {
            let d = out.len();
            random_direction(rng, d, out);
            let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
            for k in 0..d {
                out[k] = center[k] + r * out[k];
            }
        }
    }
}

/// `count` seeded points of `region` accepted by `keep`.
fn sample_points(
    region: &DomainSpec,
    count: usize,
    rng: &mut ChaCha8Rng,
    keep: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Vec<f64>>> {
    let d = region.ambient_dim();
    let mut pts = Vec::with_capacity(count);
    let mut tries = 0usize;
    while pts.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(Error::InvalidConfig("sample region rejects almost every point".into()));
        }
        let mut p = vec![0.0; d];
        sample_in(region, rng, &mut p);
        if keep(&p) {
            pts.push(p);
        }
    }
    Ok(pts)
}

/// Interior tensor grid with `g` points per axis at `lo + (i + 1) w / (g + 1)`.
fn interior_grid(dom: &DomainSpec, g: usize) -> Vec<Vec<f64>> {
    let (lo, hi): (Vec<f64>, Vec<f64>) = match dom {
        DomainSpec::Box { lo, hi } => (lo.clone(), hi.clone()),
        DomainSpec::Ball { center, radius } => {
            let h = radius / (center.len() as f64).sqrt();
            (center.iter().map(|c| c - h).collect(), center.iter().map(|c| c + h).collect())
        }
    };
    let d = lo.len();
    let total = g.pow(d as u32);
    (0..total)
        .map(|mut idx| {
            (0..d)
                .map(|k| {
                    let i = idx % g;
                    idx /= g;
                    lo[k] + (i + 1) as f64 * (hi[k] - lo[k]) / (g + 1) as f64
                })
                .collect()
        })
        .collect()
}

fn require_domain(case: &VerificationCase) -> Result<&DomainSpec> {
    let dom = case.setup.domain.as_ref().ok_or_else(|| bad(case, "setup needs a domain"))?;
    dom.validate()?;
    Ok(dom)
}

pub(super) fn prepare(case: &VerificationCase, seed: u64) -> Result<Prepared> {
    let s = &case.setup;
    let sub = Arc::new(Subspace::preset(&s.subspace)?);
    let ctx = KernelContext::new(sub.clone(), s.n)?;
    let dim = ctx.dim();
    let functions = s.functions.iter().map(|spec| catalog(&sub, s.n, spec)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SAMPLER_STREAM);
    if let Some(dom) = &s.domain {
        dom.validate()?;
        if dom.ambient_dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: dom.ambient_dim() });
        }
    }
    let mut points = s.points.clone();
    for p in &points {
        if p.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
        }
    }
    if let Some(g) = s.grid {
        points.extend(interior_grid(require_domain(case)?, g));
    }
    if s.statistical && !matches!(case.theorem, Theorem::BmReproduce | Theorem::BmExterior) {
        return Err(bad(case, "statistical residuals are only defined for boundary reproduction"));
    }
    if s.statistical && case.refinement_ladder.iter().any(|c| !c.boundary.is_monte_carlo()) {
        return Err(bad(case, "statistical residuals need a Monte Carlo boundary rule on every rung"));
    }
    let need_functions = |k: Option<usize>| -> Result<()> {
        match k {
            Some(k) if functions.len() != k => Err(bad(case, format!("setup needs exactly {k} function(s)"))),
            None if functions.is_empty() => Err(bad(case, "setup needs at least one function")),
            _ => Ok(()),
        }
    };
    let need_points = |pts: &[Vec<f64>]| -> Result<()> {
        if pts.is_empty() {
            Err(bad(case, "setup needs evaluation points"))
        } else {
            Ok(())
        }
    };
    let mut hole_points = Vec::new();
    match case.theorem {
        Theorem::AlgebraLaws | Theorem::NormBound => {}
        Theorem::IntegralLaws => {
            require_domain(case)?;
            need_functions(None)?;
        }
        Theorem::KernelDivergence | Theorem::KernelHarmonic | Theorem::KernelGradientRelation => {
            if let Some(count) = s.samples {
                let region = s.sample_region.clone().unwrap_or_else(|| DomainSpec::cube(dim, 1.0));
                let far = |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>().sqrt() >= KERNEL_MIN_RADIUS;
                points.extend(sample_points(&region, count, &mut rng, far)?);
            }
            need_points(&points)?;
            if points.iter().any(|p| p.iter().all(|&c| c == 0.0)) {
                return Err(bad(case, "kernel checks cannot use the pole"));
            }
        }
        Theorem::BmReproduce | Theorem::BmExterior | Theorem::CauchyPompeiu => {
            let dom = require_domain(case)?;
            need_functions(None)?;
            if let (Some(count), Some(region)) = (s.samples, &s.sample_region) {
                points
                    .extend(sample_points(region, count, &mut rng, |p| dom.signed_distance(p).abs() > SAMPLE_MARGIN)?);
            }
            need_points(&points)?;
            for p in &points {
                let sd = dom.signed_distance(p);
                let ok = match case.theorem {
                    Theorem::BmReproduce => sd > 0.0,
                    Theorem::BmExterior => sd < 0.0,
                    _ => !dom.on_boundary(p),
                };
                if !ok {
                    return Err(bad(case, format!("point {p:?} is on the wrong side of the boundary")));
                }
            }
        }
        Theorem::PvConstant | Theorem::PlemeljJump => {
            let dom = require_domain(case)?;
            need_functions(None)?;
            need_points(&points)?;
            for p in &points {
                dom.check_on_boundary(p)?;
            }
            if case.theorem == Theorem::PvConstant && !s.functions.iter().all(|f| matches!(f, CatalogSpec::Constant(_)))
            {
                return Err(bad(case, "the principal-value law is stated for constant functions"));
            }
            if let Some(pv) = &s.pv {
                pv.validate()?;
            }
        }
        Theorem::TeodorescuInverse => {
            let dom = require_domain(case)?;
            need_functions(None)?;
            need_points(&points)?;
            if s.n != 1 {
                return Err(bad(case, "the Teodorescu transform needs n = 1"));
            }
            let h = s.fd_step.unwrap_or(DBAR_CHECK_STEP);
            for p in &points {
                if dom.signed_distance(p) <= 2.0 * h {
                    return Err(bad(case, format!("point {p:?} is too close to the boundary for step {h}")));
                }
            }
        }
        Theorem::InhomogeneousSolve | Theorem::Compatibility => {
            need_functions(Some(1))?;
            if functions[0].support.is_none() {
                return Err(bad(case, "the potential must have compact support"));
            }
            if let (Some(count), Some(region)) = (s.samples, &s.sample_region) {
                points.extend(sample_points(region, count, &mut rng, |_| true)?);
            }
            need_points(&points)?;
        }
        Theorem::Hartogs => {
            let omega = require_domain(case)?;
            let hole = case.setup.hole.as_ref().ok_or_else(|| bad(case, "setup needs a hole"))?;
            hole.validate()?;
            need_functions(Some(1))?;
            let count = s.samples.ok_or_else(|| bad(case, "setup needs a sample count"))?;
            hole_points = sample_points(hole, count, &mut rng, |_| true)?;
            let region = s.sample_region.as_ref().unwrap_or(omega);
            let outer = sample_points(region, count, &mut rng, |p| {
                hole.signed_distance(p) < 0.0 && omega.signed_distance(p) > SAMPLE_MARGIN
            })?;
            points.extend(outer);
        }
    }
    Ok(Prepared { sub, ctx, functions, points, hole_points })
}

fn multipoint(p: &Prepared, x: &[f64]) -> Result<MultiPoint> {
    MultiPoint::new(p.ctx.n(), p.ctx.block_len(), x.to_vec())
}

fn gauss_q(cfg: &QuadratureConfig) -> usize {
    cfg.volume.size()
}

/// The inhomogeneous rule of the setup with the rung's Gauss order.
fn inhomogeneous_rule(case: &VerificationCase, cfg: &QuadratureConfig) -> Result<InhomogeneousConfig> {
    let mut icfg = case.setup.inhomogeneous.clone().unwrap_or_default();
    match cfg.volume {
        Rule::Gauss { q } => icfg.q = q,
        Rule::MonteCarlo { .. } => return Err(bad(case, "the inhomogeneous solver uses Gauss rules")),
    }
    Ok(icfg)
}

struct Max(BTreeMap<String, f64>);

impl Max {
    fn new() -> Self {
        Max(BTreeMap::new())
    }

    fn put(&mut self, key: &str, v: f64) {
        let e = self.0.entry(key.to_string()).or_insert(0.0);
        // NaN must not be swallowed by max
        *e = if v.is_nan() || e.is_nan() { f64::NAN } else { e.max(v) };
    }

    fn residual(&self, keys: &[&str]) -> f64 {
        keys.iter().map(|k| self.0.get(*k).copied().unwrap_or(0.0)).fold(0.0, |a: f64, b| {
            if b.is_nan() {
                f64::NAN
            } else {
                a.max(b)
            }
        })
    }
}

fn random_element(rng: &mut ChaCha8Rng, dim: usize) -> Element {
    let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    Element::from_slice(&v)
}

fn deviation(case: &VerificationCase, est: &crate::quadrature::Estimate, expected: &Element) -> f64 {
    let err = (&est.value - expected).norm();
    if !case.setup.statistical {
        return err;
    }
    let se = est.std_error.as_ref().map_or(0.0, |e| e.norm());
    if se > 0.0 {
        err / se
    } else if err == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub(super) fn run_rung(
    case: &VerificationCase,
    p: &Prepared,
    cfg: &QuadratureConfig,
    seed: u64,
) -> Result<RungOutcome> {
    let s = &case.setup;
    let sub = &p.sub;
    let alg = sub.algebra();
    let ctx = &p.ctx;
    let mut m = Max::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SAMPLER_STREAM + 1);
    let (keys, size): (Vec<&str>, usize) = match case.theorem {
        Theorem::AlgebraLaws => {
            let d = alg.dim();
            for a in 0..d {
                for b in 0..d {
                    let (ea, eb) = (alg.basis(a), alg.basis(b));
                    let lhs = alg.conj(&alg.mul(&ea, &eb));
                    let rhs = alg.mul(&alg.conj(&eb), &alg.conj(&ea));
                    m.put("involution", (&lhs - &rhs).max_abs());
                }
            }
            let samples = s.samples.unwrap_or(DEFAULT_ALGEBRA_SAMPLES);
            for _ in 0..samples {
                let x = random_element(&mut rng, d);
                let y = random_element(&mut rng, d);
                let r = alg.scalar(rng.random_range(-1.0..1.0));
                let coords: Vec<f64> = (0..sub.block_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let xm = sub.embed_block(&coords);
                m.put("alternative_left", alg.associator(&x, &x, &y).norm());
                m.put("alternative_right", alg.associator(&x, &y, &y).norm());
                m.put("real_associator", alg.associator(&r, &x, &y).norm());
                m.put("artin", alg.associator(&xm, &xm, &y).norm());
                m.put("artin_conjugate", alg.associator(&alg.conj(&xm), &xm, &y).norm());
            }
            (
                vec![
                    "involution",
                    "alternative_left",
                    "alternative_right",
                    "real_associator",
                    "artin",
                    "artin_conjugate",
                ],
                samples,
            )
        }
        Theorem::NormBound => {
            let search = s.samples.unwrap_or(DEFAULT_NORM_SEARCH_SAMPLES);
            let nb = norm_bound_constant(sub, search, seed);
            m.put("constant", nb.constant);
            for _ in 0..DEFAULT_ALGEBRA_SAMPLES {
                let coords: Vec<f64> = (0..sub.block_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let x = sub.embed_block(&coords);
                let y = random_element(&mut rng, alg.dim());
                let ratio = alg.mul(&x, &y).norm() / (x.norm() * y.norm());
                m.put("max_ratio", ratio);
                m.put("violation", (ratio - nb.constant).max(0.0));
            }
            if let Some(c) = s.expected {
                m.put("deviation", (nb.constant - c).abs());
            }
            (vec!["violation", "deviation"], search)
        }
        Theorem::IntegralLaws => {
            let dom = require_domain(case)?;
            let d = alg.dim();
            let a = random_element(&mut rng, d);
            let halves: Option<[DomainSpec; 2]> = match dom {
                DomainSpec::Box { lo, hi } => {
                    let mid = 0.5 * (lo[0] + hi[0]);
                    let (mut hi1, mut lo2) = (hi.clone(), lo.clone());
                    hi1[0] = mid;
                    lo2[0] = mid;
                    Some([DomainSpec::Box { lo: lo.clone(), hi: hi1 }, DomainSpec::Box { lo: lo2, hi: hi.clone() }])
                }
                DomainSpec::Ball { .. } => None,
            };
            for f in &p.functions {
                let vol = |dom: &DomainSpec, g: &(dyn Fn(&[f64]) -> Element + Sync), dim: usize| {
                    integrate_volume(dom, cfg, None, dim, g).map(|e| e.value)
                };
                let i = vol(dom, &|y| f.eval(y), d)?;
                let scale = 1.0 + a.norm() * vol(dom, &|y| Element::scalar(1, f.eval(y).norm()), 1)?[0];
                let ia = vol(dom, &|y| alg.mul(&a, &f.eval(y)), d)?;
                let ifa = vol(dom, &|y| alg.mul(&f.eval(y), &a), d)?;
                let abs = vol(dom, &|y| Element::scalar(1, f.eval(y).norm()), 1)?[0];
                m.put("volume_left_linear", (&ia - &alg.mul(&a, &i)).norm() / scale);
                m.put("volume_right_linear", (&ifa - &alg.mul(&i, &a)).norm() / scale);
                m.put("volume_triangle", (i.norm() - abs).max(0.0) / scale);
                if let Some([d1, d2]) = &halves {
                    let mut split = vol(d1, &|y| f.eval(y), d)?;
                    split += &vol(d2, &|y| f.eval(y), d)?;
                    m.put("volume_additive", (&i - &split).norm() / scale);
                }
                let bnd = |g: &(dyn Fn(&[f64]) -> Element + Sync), dim: usize| {
                    integrate_boundary(dom, cfg, Target::Regular, dim, |node| g(&node.point)).map(|e| e.value)
                };
                let i = bnd(&|y| f.eval(y), d)?;
                let abs = bnd(&|y| Element::scalar(1, f.eval(y).norm()), 1)?[0];
                let scale = 1.0 + a.norm() * abs;
                let ia = bnd(&|y| alg.mul(&a, &f.eval(y)), d)?;
                let ifa = bnd(&|y| alg.mul(&f.eval(y), &a), d)?;
                m.put("boundary_left_linear", (&ia - &alg.mul(&a, &i)).norm() / scale);
                m.put("boundary_right_linear", (&ifa - &alg.mul(&i, &a)).norm() / scale);
                m.put("boundary_triangle", (i.norm() - abs).max(0.0) / scale);
            }
            (
                vec![
                    "volume_left_linear",
                    "volume_right_linear",
                    "volume_triangle",
                    "volume_additive",
                    "boundary_left_linear",
                    "boundary_right_linear",
                    "boundary_triangle",
                ],
                gauss_q(cfg),
            )
        }
        Theorem::KernelDivergence => {
            let lead = sub.block_len() as f64 / ctx.sigma_d();
            let dim = ctx.dim() as f64;
            for x in &p.points {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                // size of each summand of the closed form
                let scale = lead * r2.powf(-0.5 * dim);
                let div = ctx.bm_divergence(&multipoint(p, x)?)?;
                if !s.cross_check {
                    m.put("closed_form", div.total.abs() / scale);
                    continue;
                }
                let opts = s.fd_step.map_or_else(FdOptions::default, FdOptions::with_step);
                let b = ctx.block_len();
                for j0 in 0..ctx.n() {
                    let k = |y: &[f64]| ctx.k_raw(j0, y);
                    let mut acc = alg.zero();
                    for t in 0..b {
                        let (dk, _) = fd::partial(&k, x, j0 * b + t, &opts)?;
                        acc += &alg.mul(sub.v(t), &dk);
                    }
                    acc[0] -= div.terms[j0];
                    m.put("fd_terms", acc.norm() / scale);
                }
            }
            (vec!["closed_form", "fd_terms"], p.points.len())
        }
        Theorem::KernelHarmonic => {
            let dim = ctx.dim();
            for x in &p.points {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let h = s.fd_step.unwrap_or(2e-3) * r;
                // magnitude of second derivatives of |x|^{1-D}
                let scale = 1.0 / (ctx.sigma_d() * r.powi(dim as i32 + 1));
                for j0 in 0..ctx.n() {
                    let k = |y: &[f64]| ctx.k_raw(j0, y);
                    let mut lap = alg.zero();
                    for i in 0..dim {
                        lap += &fd::second_partial(&k, x, i, h)?;
                    }
                    m.put("laplacian", lap.norm() / scale);
                }
            }
            (vec!["laplacian"], p.points.len())
        }
        Theorem::KernelGradientRelation => {
            let b = ctx.block_len();
            let opts = s.fd_step.map_or_else(FdOptions::default, FdOptions::with_step);
            let g = |y: &[f64]| ctx.g_raw(y);
            for x in &p.points {
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let scale = 1.0 / (ctx.sigma_d() * r.powi(ctx.dim() as i32 - 1));
                for j0 in 0..ctx.n() {
                    let mut grad = alg.zero();
                    for t in 0..b {
                        let (dg, _) = fd::partial_scalar(&g, x, j0 * b + t, &opts)?;
                        grad.axpy(dg, sub.v_conj(t));
                    }
                    m.put("gradient", (&ctx.k_raw(j0, x) - &grad).norm() / scale);
                }
            }
            (vec!["gradient"], p.points.len())
        }
        Theorem::BmReproduce | Theorem::BmExterior => {
            let dom = require_domain(case)?;
            for f in &p.functions {
                for x in &p.points {
                    let est = bm_integral(ctx, dom, cfg, f, &multipoint(p, x)?)?;
                    let expected = if case.theorem == Theorem::BmReproduce { f.value(x)? } else { alg.zero() };
                    m.put("deviation", deviation(case, &est, &expected));
                }
            }
            (vec!["deviation"], cfg.boundary.size())
        }
        Theorem::CauchyPompeiu => {
            let dom = require_domain(case)?;
            for f in &p.functions {
                for x in &p.points {
                    let est = cauchy_pompeiu(ctx, dom, cfg, f, &multipoint(p, x)?)?;
                    if dom.contains(x) {
                        m.put("interior", (&est.value - &f.value(x)?).norm());
                    } else {
                        m.put("exterior", est.value.norm());
                    }
                }
            }
            (vec!["interior", "exterior"], cfg.volume.size())
        }
        Theorem::PvConstant => {
            let dom = require_domain(case)?;
            let pv = s.pv.clone().unwrap_or_else(|| PVConfig::from_quadrature(cfg));
            for x in &p.points {
                let tau = solid_angle(dom, x, SolidAngleMethod::Analytic)?.tau;
                let mc = solid_angle(dom, x, SolidAngleMethod::MonteCarlo { samples: SOLID_ANGLE_SAMPLES, seed })?;
                let se = mc.std_error.unwrap_or(0.0);
                m.put("solid_angle_z", if se > 0.0 { (mc.tau - tau).abs() / se } else { 0.0 });
                for f in &p.functions {
                    let r = bm_singular_pv(ctx, dom, cfg, &pv, f, &multipoint(p, x)?)?;
                    m.put("deviation", (&r.value - &f.value(x)?.scale(tau)).norm());
                    m.put("fit_residual", r.fit_residual);
                }
            }
            (vec!["deviation"], cfg.boundary.size())
        }
        Theorem::PlemeljJump => {
            let dom = require_domain(case)?;
            let pv = s.pv.clone().unwrap_or_else(|| PVConfig::from_quadrature(cfg));
            let approach = s.approach.clone().unwrap_or_default();
            for f in &p.functions {
                for x in &p.points {
                    let j = plemelj_limits(ctx, dom, cfg, &pv, f, &multipoint(p, x)?, &approach)?;
                    m.put("interior", j.interior_residual());
                    m.put("exterior", j.exterior_residual());
                    m.put("jump", j.jump_residual());
                    m.put("extrapolation_error", j.interior_error.max(j.exterior_error));
                }
            }
            (vec!["interior", "exterior", "jump"], cfg.boundary.size())
        }
        Theorem::TeodorescuInverse => {
            let dom = require_domain(case)?;
            let h = s.fd_step.unwrap_or(DBAR_CHECK_STEP);
            for f in &p.functions {
                for x in &p.points {
                    let (_, r) = teodorescu_dbar_residual(ctx, dom, cfg, f, &multipoint(p, x)?, h)?;
                    m.put("dbar_residual", r);
                }
            }
            (vec!["dbar_residual"], cfg.volume.size())
        }
        Theorem::InhomogeneousSolve => {
            let icfg = inhomogeneous_rule(case, cfg)?;
            let big_f = &p.functions[0];
            let g = dbar_data(ctx, big_f)?;
            for x in &p.points {
                let v = solve_inhomogeneous(ctx, &g, &multipoint(p, x)?, &icfg)?;
                m.put("deviation", (&v - &big_f.value(x)?).norm());
            }
            (vec!["deviation"], icfg.q)
        }
        Theorem::Compatibility => {
            let icfg = inhomogeneous_rule(case, cfg)?;
            let g = dbar_data(ctx, &p.functions[0])?;
            let mut opts = CompatibilityOptions { integral_form: s.cross_check, integral: icfg, ..Default::default() };
            if let Some(h) = s.fd_step {
                opts.h = h;
                opts.h_laplacian = 2.0 * h;
            }
            let rep = check_compatibility(ctx, &g, &p.points, &opts)?;
            m.put("pointwise", rep.residual);
            if let Some(r) = rep.integral_residual {
                m.put("integral", r);
            }
            (vec!["pointwise", "integral"], opts.integral.q)
        }
        Theorem::Hartogs => {
            let icfg = inhomogeneous_rule(case, cfg)?;
            let omega = require_domain(case)?;
            let hole = s.hole.as_ref().ok_or_else(|| bad(case, "setup needs a hole"))?;
            let f = &p.functions[0];
            let cutoff = s.cutoff.unwrap_or_default();
            let ext = hartogs_extend(ctx, omega, hole, f, &cutoff, &icfg)?;
            let ff = ext.as_field_function();
            let h = s.fd_step.unwrap_or(DBAR_CHECK_STEP);
            for (key, pts) in [("inside", &p.hole_points), ("outside", &p.points)] {
                for x in pts {
                    let v = ext.eval(&multipoint(p, x)?)?;
                    m.put(key, (&v - &f.value(x)?).norm());
                    for j in 1..=ctx.n() {
                        let d = dirac_fd(sub, &ff, j, x, &FdOptions::plain(h))?;
                        m.put("monogenicity", d.value.norm());
                    }
                }
            }
            (vec!["inside", "outside", "monogenicity"], icfg.q)
        }
    };
    let residual = m.residual(&keys);
    Ok(RungOutcome { residual, size, detail: m.0 })
}
