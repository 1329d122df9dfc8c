//! Boundary integrals with the Bochner-Martinelli kernel: off-boundary
//! values, the Cauchy-Pompeiu representation, principal values on the
//! boundary and the one-sided limits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::extrapolate::{fit_power_law, neville_zero};
use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::fd::FdOptions;
use crate::functions::{dirac, FieldFunction};
use crate::hypercomplex::MultiPoint;
use crate::kernels::KernelContext;
use crate::quadrature::sphere::random_direction;
use crate::quadrature::{integrate_boundary, integrate_volume, DomainSpec, Estimate, QuadratureConfig, Target};

type Coords = SmallVec<[f64; 16]>;

fn diff(y: &[f64], x: &[f64]) -> Coords {
    y.iter().zip(x).map(|(a, b)| a - b).collect()
}

fn check_dims(ctx: &KernelContext, dom: &DomainSpec, f: &FieldFunction, x: &[f64]) -> Result<()> {
    for got in [dom.ambient_dim(), f.dim(), x.len()] {
        if got != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: ctx.dim(), got });
        }
    }
    Ok(())
}

/// `C_Gamma[f](x) = int_Gamma sum_j K_j(y - x) (nu_j(y) f(y)) dS(y)` for `x`
/// off the boundary.
pub fn bm_integral(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    f: &FieldFunction,
    x: &MultiPoint,
) -> Result<Estimate> {
    let xs = x.coords();
    check_dims(ctx, dom, f, xs)?;
    if dom.on_boundary(xs) {
        return Err(Error::Singularity(xs.to_vec()));
    }
    let alg_dim = ctx.subspace().algebra().dim();
    let integrand = |node: &crate::quadrature::BoundaryNode| {
        ctx.bm_pair_raw(&diff(&node.point, xs), &node.normal, &f.eval(&node.point))
    };
    let est = integrate_boundary(dom, cfg, Target::Point(xs), alg_dim, integrand)?;
    // closer to the boundary than a typical node gap: compare with a coarser rule
    let gap = cfg.spacing_for(dom) / cfg.boundary.size().max(2) as f64;
    if !cfg.boundary.is_monte_carlo() && dom.signed_distance(xs).abs() < gap {
        let mut coarse = cfg.clone();
        coarse.boundary = cfg.boundary.coarser();
        let c = integrate_boundary(dom, &coarse, Target::Point(xs), alg_dim, integrand)?;
        log::warn!(
            "evaluation point within one node gap of the boundary; estimated error {:.3e}",
            (&c.value - &est.value).max_abs()
        );
    }
    Ok(est)
}

/// `C_Gamma[f](x) - sum_j int_Omega K_j(y - x) (dbar_j f(y)) dV(y)`: equals
/// `f(x)` inside and `0` outside for `C^1` data. The weak volume singularity
/// at `y = x` is removed by the pyramid or polar rule of the volume planner.
pub fn cauchy_pompeiu(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    f: &FieldFunction,
    x: &MultiPoint,
) -> Result<Estimate> {
    let boundary = bm_integral(ctx, dom, cfg, f, x)?;
    let xs = x.coords();
    let alg = ctx.subspace().algebra();
    let sub = ctx.subspace();
    let n = ctx.n();
    let opts = FdOptions::default();
    let volume = integrate_volume(dom, cfg, Some(xs), alg.dim(), |y| {
        let g: SmallVec<[Element; 4]> = (1..=n)
            .map(|j| match dirac(sub, f, j, y, &opts) {
                Ok(r) => r.value,
                Err(_) => Element::scalar(alg.dim(), f64::NAN),
            })
            .collect();
        ctx.k_dot_raw(&diff(y, xs), &g)
    })?;
    Ok(boundary.combine(&volume, -1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum SolidAngleMethod {
    /// Orthant fraction `2^-k` for `k` active box constraints; `1/2` on spheres.
    Analytic,
    /// Fraction of points on small spheres about `x` that fall inside.
    #[serde(alias = "mc")]
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidAngle {
    pub tau: f64,
    pub std_error: Option<f64>,
    /// `(radius, fraction)` per refinement level, Monte Carlo only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<(f64, f64)>,
}

/// Radii of the Monte Carlo spheres relative to the domain scale.
const SOLID_ANGLE_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Solid angle `tau(x)` of the tangent cone at a boundary point.
pub fn solid_angle(dom: &DomainSpec, x: &[f64], method: SolidAngleMethod) -> Result<SolidAngle> {
    dom.validate()?;
    dom.check_on_boundary(x)?;
    match method {
        SolidAngleMethod::Analytic => {
            let tau = match dom {
                DomainSpec::Box { .. } => 0.5f64.powi(dom.active_constraints(x).len() as i32),
                DomainSpec::Ball { .. } => 0.5,
            };
            Ok(SolidAngle { tau, std_error: None, levels: Vec::new() })
        }
        SolidAngleMethod::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(Error::InvalidConfig("solid angle sampling needs at least 2 samples".into()));
            }
            let d = x.len();
            let mut levels = Vec::new();
            let mut dir = vec![0.0; d];
            let mut y = vec![0.0; d];
            for (level, rel) in SOLID_ANGLE_RADII.iter().enumerate() {
                let r = rel * dom.scale();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(level as u64);
                let mut inside = 0usize;
                for _ in 0..samples {
                    random_direction(&mut rng, d, &mut dir);
                    for k in 0..d {
                        y[k] = x[k] + r * dir[k];
                    }
                    if dom.signed_distance(&y) > 0.0 {
                        inside += 1;
                    }
                }
                levels.push((r, inside as f64 / samples as f64));
            }
            let p = levels.last().map_or(0.0, |l| l.1);
            let se = (p * (1.0 - p) / (samples - 1) as f64).sqrt();
            Ok(SolidAngle { tau: p, std_error: Some(se), levels })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    /// Fit `A + B eps^beta` and report `A`.
    Richardson,
    /// Report the value at the smallest `eps`.
    None,
}

/// Exclusion radii for principal values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PVConfig {
    pub epsilons: Vec<f64>,
    pub extrapolation: Extrapolation,
}

impl Default for PVConfig {
    fn default() -> Self {
        PVConfig { epsilons: vec![0.4, 0.2, 0.1, 0.05], extrapolation: Extrapolation::Richardson }
    }
}

impl PVConfig {
    pub fn from_quadrature(cfg: &QuadratureConfig) -> Self {
        PVConfig { epsilons: cfg.pv_epsilons.clone(), extrapolation: Extrapolation::Richardson }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidConfig("pv epsilons must be positive and non-empty".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("pv epsilons must be strictly decreasing".into()));
        }
        if self.extrapolation == Extrapolation::Richardson && self.epsilons.len() < 3 {
            return Err(Error::InvalidConfig("pv extrapolation needs at least 3 epsilons".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PvResult {
    pub value: Element,
    pub per_epsilon: Vec<(f64, Element)>,
    pub beta: Option<f64>,
    pub fit_residual: f64,
    pub est_error: f64,
}

/// Principal value `lim_{eps -> 0} int_{Gamma \ B(x, eps)} K(x, y) * f(y)` at a
/// boundary point.
pub fn bm_singular_pv(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    pv: &PVConfig,
    f: &FieldFunction,
    x: &MultiPoint,
) -> Result<PvResult> {
    pv.validate()?;
    let xs = x.coords();
    check_dims(ctx, dom, f, xs)?;
    dom.check_on_boundary(xs)?;
    let alg_dim = ctx.subspace().algebra().dim();
    let mut per_epsilon = Vec::with_capacity(pv.epsilons.len());
    for &eps in &pv.epsilons {
        let e = integrate_boundary(dom, cfg, Target::Pv { x: xs, eps }, alg_dim, |node| {
            ctx.bm_pair_raw(&diff(&node.point, xs), &node.normal, &f.eval(&node.point))
        })?;
        per_epsilon.push((eps, e.value));
    }
    let vals: Vec<Element> = per_epsilon.iter().map(|(_, v)| v.clone()).collect();
    let last = vals[vals.len() - 1].clone();
    let (value, beta, fit_residual, est_error) = match pv.extrapolation {
        Extrapolation::Richardson => {
            let fit = fit_power_law(&pv.epsilons, &vals)?;
            (fit.limit, fit.beta, fit.residual, fit.residual)
        }
        Extrapolation::None => {
            let est = if vals.len() > 1 { (&last - &vals[vals.len() - 2]).max_abs() } else { 0.0 };
            (last, None, 0.0, est)
        }
    };
    Ok(PvResult { value, per_epsilon, beta, fit_residual, est_error })
}

/// Non-tangential approach to a boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Approach {
    /// Direction into the domain; defaults to the inward normal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    pub h0: f64,
    pub levels: usize,
}

impl Default for Approach {
    fn default() -> Self {
        Approach { direction: None, h0: 0.1, levels: 4 }
    }
}

/// Smallest admissible `|cos|` between the approach direction and the normal.
const MIN_NORMAL_COS: f64 = 0.1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpResult {
    pub interior_limit: Element,
    pub exterior_limit: Element,
    pub boundary_value: Element,
    pub tau: f64,
    pub f_value: Element,
    pub interior_error: f64,
    pub exterior_error: f64,
    pub boundary_error: f64,
}

impl JumpResult {
    /// `|C+ - C_Gamma - (1 - tau) f(x)|`.
    pub fn interior_residual(&self) -> f64 {
        let mut r = &self.interior_limit - &self.boundary_value;
        r.axpy(-(1.0 - self.tau), &self.f_value);
        r.norm()
    }

    /// `|C- - C_Gamma + tau f(x)|`.
    pub fn exterior_residual(&self) -> f64 {
        let mut r = &self.exterior_limit - &self.boundary_value;
        r.axpy(self.tau, &self.f_value);
        r.norm()
    }

    /// `|C+ - C- - f(x)|`.
    pub fn jump_residual(&self) -> f64 {
        (&(&self.interior_limit - &self.exterior_limit) - &self.f_value).norm()
    }

    pub fn max_residual(&self) -> f64 {
        self.interior_residual().max(self.exterior_residual()).max(self.jump_residual())
    }
}

fn approach_direction(dom: &DomainSpec, x: &[f64], approach: &Approach) -> Result<Vec<f64>> {
    let d = match &approach.direction {
        Some(d) => {
            if d.len() != x.len() {
                return Err(Error::DimensionMismatch { expected: x.len(), got: d.len() });
            }
            let n = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !(n > 0.0) {
                return Err(Error::InvalidConfig("approach direction must be non-zero".into()));
            }
            d.iter().map(|c| c / n).collect()
        }
        None => dom.outward_normal(x)?.iter().map(|c| -c).collect::<Vec<f64>>(),
    };
    match dom.outward_normal(x) {
        Ok(nu) => {
            let cos = -d.iter().zip(&nu).map(|(a, b)| a * b).sum::<f64>();
            if cos.abs() < MIN_NORMAL_COS {
                return Err(Error::TangentialDirection(cos.abs()));
            }
            if cos < 0.0 {
                return Err(Error::InvalidConfig("approach direction must point into the domain".into()));
            }
        }
        Err(_) => {
            // edges and corners: require the ray to cross the boundary at x
            let h = 1e-6 * dom.scale();
            let inside: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let outside: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a - h * b).collect();
            if !(dom.signed_distance(&inside) > 0.0 && dom.signed_distance(&outside) < 0.0) {
                return Err(Error::TangentialDirection(0.0));
            }
        }
    }
    Ok(d)
}

/// One-sided limits `C+` and `C-` along `x +- h_k d`, `h_k = h0 2^-k`,
/// extrapolated to `h = 0`, together with the principal value and `tau(x)`.
pub fn plemelj_limits(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    pv: &PVConfig,
    f: &FieldFunction,
    x: &MultiPoint,
    approach: &Approach,
) -> Result<JumpResult> {
    let xs = x.coords();
    check_dims(ctx, dom, f, xs)?;
    dom.check_on_boundary(xs)?;
    if approach.levels < 2 || !(approach.h0 > 0.0) {
        return Err(Error::InvalidConfig("approach needs h0 > 0 and at least 2 levels".into()));
    }
    let d = approach_direction(dom, xs, approach)?;
    let hs: Vec<f64> = (0..approach.levels).map(|k| approach.h0 * 0.5f64.powi(k as i32)).collect();
    let mut plus = Vec::with_capacity(hs.len());
    let mut minus = Vec::with_capacity(hs.len());
    for &h in &hs {
        for (sign, out) in [(1.0, &mut plus), (-1.0, &mut minus)] {
            let p: Vec<f64> = xs.iter().zip(&d).map(|(a, b)| a + sign * h * b).collect();
            let sd = dom.signed_distance(&p);
            if sign * sd <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "approach point at h = {h} lies on the wrong side of the boundary; reduce h0"
                )));
            }
            let mp = MultiPoint::new(x.n(), x.block_len(), p)?;
            out.push(bm_integral(ctx, dom, cfg, f, &mp)?.value);
        }
    }
    let (interior_limit, interior_error) = neville_zero(&hs, &plus)?;
    let (exterior_limit, exterior_error) = neville_zero(&hs, &minus)?;
    let pvr = bm_singular_pv(ctx, dom, cfg, pv, f, x)?;
    let tau = solid_angle(dom, xs, SolidAngleMethod::Analytic)?.tau;
    Ok(JumpResult {
        interior_limit,
        exterior_limit,
        boundary_value: pvr.value,
        tau,
        f_value: f.value(xs)?,
        interior_error,
        exterior_error,
        boundary_error: pvr.est_error,
    })
}
