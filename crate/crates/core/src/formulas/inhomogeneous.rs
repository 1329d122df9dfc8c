//! Compactly supported solutions of `dbar_j f = g_j`, `j = 1..n`, for
//! `n >= 2`, and the compatibility conditions on the data.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::fd::{self, FdOptions};
use crate::functions::{conj_dirac, dirac_fd, laplacian, BoundingBox, EvalFn, FieldFunction};
use crate::hypercomplex::MultiPoint;
use crate::kernels::{cauchy_kernel_block, KernelContext};
use crate::quadrature::{integrate_volume, DomainSpec, QuadratureConfig};

/// Rule for the one-variable integrals over the support of `g_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InhomogeneousConfig {
    /// Gauss order per cell.
    pub q: usize,
    /// Cells per side of the integration box.
    pub cells_per_side: usize,
    /// Relative growth of the support box (0.1 adds 10%).
    pub inflate: f64,
}

impl Default for InhomogeneousConfig {
    fn default() -> Self {
        InhomogeneousConfig { q: 8, cells_per_side: 16, inflate: 0.1 }
    }
}

impl InhomogeneousConfig {
    fn validate(&self) -> Result<()> {
        if self.q < 2 || self.cells_per_side == 0 || !(self.inflate >= 0.0) {
            return Err(Error::InvalidConfig("need q >= 2, cells_per_side >= 1 and inflate >= 0".into()));
        }
        Ok(())
    }

    fn box_and_rule(&self, bb: &BoundingBox) -> Result<(DomainSpec, QuadratureConfig)> {
        let bb = bb.inflate(self.inflate);
        let dom = DomainSpec::Box { lo: bb.lo.clone(), hi: bb.hi.clone() };
        dom.validate()?;
        let cfg = QuadratureConfig::gauss(self.q, self.q).with_spacing(dom.scale() / self.cells_per_side as f64);
        Ok((dom, cfg))
    }
}

/// `-int E(u - x_1) phi(u) du` over the block-1 box `dom`, singular at `x_1`.
fn block_potential<F>(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    x1: &[f64],
    phi: F,
) -> Result<Element>
where
    F: Fn(&[f64]) -> Element + Sync,
{
    let sub = ctx.subspace();
    let alg = sub.algebra();
    let sigma = ctx.sigma_block();
    let est = integrate_volume(dom, cfg, Some(x1), alg.dim(), |u| {
        let z: SmallVec<[f64; 16]> = u.iter().zip(x1).map(|(a, b)| a - b).collect();
        alg.mul(&cauchy_kernel_block(sub, sigma, &z), &phi(u)).scale(-1.0)
    })?;
    Ok(est.value)
}

fn with_block1(u: &[f64], rest: &[f64]) -> SmallVec<[f64; 16]> {
    u.iter().chain(rest).copied().collect()
}

fn check_data(ctx: &KernelContext, g: &[FieldFunction]) -> Result<()> {
    if ctx.n() < 2 {
        return Err(Error::InvalidConfig("the inhomogeneous system needs n >= 2".into()));
    }
    if g.len() != ctx.n() {
        return Err(Error::DimensionMismatch { expected: ctx.n(), got: g.len() });
    }
    for gj in g {
        if gj.dim() != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: ctx.dim(), got: gj.dim() });
        }
    }
    Ok(())
}

/// `f(x) = -int E(y_1) g_1(y_1 + x_1, x^0) dy_1`, with `x^0` the remaining
/// variables. The integral runs over the block-1 support box of `g_1`.
pub fn solve_inhomogeneous(
    ctx: &KernelContext,
    g: &[FieldFunction],
    x: &MultiPoint,
    cfg: &InhomogeneousConfig,
) -> Result<Element> {
    check_data(ctx, g)?;
    cfg.validate()?;
    let xs = x.coords();
    if xs.len() != ctx.dim() {
        return Err(Error::DimensionMismatch { expected: ctx.dim(), got: xs.len() });
    }
    let support = g[0]
        .support
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig(format!("g_1 `{}` has no compact-support metadata", g[0].label)))?;
    let b = ctx.block_len();
    let (x1, rest) = xs.split_at(b);
    // g_1 vanishes identically on this slice
    if !support.slice(b..ctx.dim()).contains(rest) {
        return Ok(ctx.subspace().algebra().zero());
    }
    let (dom, rule) = cfg.box_and_rule(&support.slice(0..b))?;
    block_potential(ctx, &dom, &rule, x1, |u| g[0].eval(&with_block1(u, rest)))
}

/// The solution as a field function; failed evaluations become NaN.
pub fn solution_function(ctx: &KernelContext, g: &[FieldFunction], cfg: &InhomogeneousConfig) -> FieldFunction {
    let (ctx, g, cfg) = (ctx.clone(), g.to_vec(), cfg.clone());
    let dim = ctx.dim();
    let alg_dim = ctx.subspace().algebra().dim();
    let (n, b) = (ctx.n(), ctx.block_len());
    let eval: EvalFn = Arc::new(move |y: &[f64]| {
        MultiPoint::new(n, b, y.to_vec())
            .and_then(|p| solve_inhomogeneous(&ctx, &g, &p, &cfg))
            .unwrap_or_else(|_| Element::scalar(alg_dim, f64::NAN))
    });
    FieldFunction::new("inhomogeneous solution", dim, crate::functions::Smoothness::CInfinity, eval)
}

/// Data `g_j = dbar_j F`, `j = 1..n`, which satisfy the compatibility
/// conditions by construction. Uses the analytic derivative of `F` when one
/// is attached and inherits its support.
pub fn dbar_data(ctx: &KernelContext, f: &FieldFunction) -> Result<Vec<FieldFunction>> {
    if f.dim() != ctx.dim() {
        return Err(Error::DimensionMismatch { expected: ctx.dim(), got: f.dim() });
    }
    let alg_dim = ctx.subspace().algebra().dim();
    Ok((0..ctx.n())
        .map(|j0| {
            let (sub, f2) = (ctx.subspace().clone(), f.clone());
            let eval: EvalFn = Arc::new(move |y: &[f64]| match f2.analytic_dbar(j0, y) {
                Some(v) => v,
                None => crate::functions::dirac(&sub, &f2, j0 + 1, y, &FdOptions::default())
                    .map_or_else(|_| Element::scalar(alg_dim, f64::NAN), |r| r.value),
            });
            let mut gj = FieldFunction::new(format!("dbar_{} {}", j0 + 1, f.label), ctx.dim(), f.smoothness, eval);
            gj.support = f.support.clone();
            gj
        })
        .collect())
}

/// Finite-difference steps for the compatibility check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityOptions {
    /// Step of each first-order difference.
    pub h: f64,
    /// Step of the second differences in the Laplacian.
    pub h_laplacian: f64,
    /// Also evaluate the equivalent integral form.
    pub integral_form: bool,
    pub integral: InhomogeneousConfig,
}

impl Default for CompatibilityOptions {
    fn default() -> Self {
        CompatibilityOptions {
            h: 1e-3,
            h_laplacian: 2e-3,
            integral_form: false,
            integral: InhomogeneousConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompatibilityReport {
    /// `max |dbar_i (d_j g_j) - Delta_j g_i|` over `i`, `j` and samples.
    pub residual: f64,
    /// `(i, j, sample index)` of the largest violation.
    pub worst: Option<(usize, usize, usize)>,
    /// `max_j |sum_s v_s int E(y_1) (d_{1,s} g_j - d_{j,s} g_1)(y_1 + x_1, x^0) dy_1|`.
    pub integral_residual: Option<f64>,
    pub samples: usize,
}

/// Checks `dbar_i (d_j g_j) = Delta_j g_i` at the samples by nested
/// differences, and on request the integral form of the condition.
pub fn check_compatibility(
    ctx: &KernelContext,
    g: &[FieldFunction],
    samples: &[Vec<f64>],
    opts: &CompatibilityOptions,
) -> Result<CompatibilityReport> {
    check_data(ctx, g)?;
    let sub = ctx.subspace();
    let n = ctx.n();
    let alg_dim = sub.algebra().dim();
    let inner_opts = FdOptions::plain(opts.h);
    // d_j g_j as functions
    let div: Vec<FieldFunction> = (1..=n)
        .map(|j| {
            let (sub, gj) = (sub.clone(), g[j - 1].clone());
            let smoothness = gj.smoothness;
            let eval: EvalFn = Arc::new(move |y: &[f64]| match conj_dirac(&sub, &gj, j, y, &inner_opts) {
                Ok(r) => r.value,
                Err(_) => Element::scalar(alg_dim, f64::NAN),
            });
            FieldFunction::new(format!("d_{j} g_{j}"), ctx.dim(), smoothness, eval)
        })
        .collect();
    let mut residual: f64 = 0.0;
    let mut worst = None;
    for (k, x) in samples.iter().enumerate() {
        if x.len() != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: ctx.dim(), got: x.len() });
        }
        for j in 1..=n {
            for i in 1..=n {
                let lhs = dirac_fd(sub, &div[j - 1], i, x, &inner_opts)?.value;
                let rhs = laplacian(sub, &g[i - 1], j, x, Some(opts.h_laplacian))?;
                let r = (&lhs - &rhs).norm();
                if !r.is_finite() {
                    return Err(Error::NonFiniteValue(x.clone()));
                }
                if r > residual || worst.is_none() {
                    residual = residual.max(r);
                    worst = Some((i, j, k));
                }
            }
        }
    }
    let integral_residual = if opts.integral_form { Some(integral_condition(ctx, g, samples, opts)?) } else { None };
    Ok(CompatibilityReport { residual, worst, integral_residual, samples: samples.len() })
}

fn integral_condition(
    ctx: &KernelContext,
    g: &[FieldFunction],
    samples: &[Vec<f64>],
    opts: &CompatibilityOptions,
) -> Result<f64> {
    let sub = ctx.subspace();
    let alg = sub.algebra();
    let b = ctx.block_len();
    let fd_opts = FdOptions::plain(opts.h);
    let partial = |f: &FieldFunction, y: &[f64], k: usize| -> Element {
        fd::partial(&|p: &[f64]| f.eval(p), y, k, &fd_opts)
            .map_or_else(|_| Element::scalar(alg.dim(), f64::NAN), |r| r.0)
    };
    let support_of = |f: &FieldFunction| {
        f.support.clone().ok_or_else(|| Error::InvalidConfig(format!("`{}` has no compact-support metadata", f.label)))
    };
    let s1 = support_of(&g[0])?;
    let mut worst: f64 = 0.0;
    for j in 2..=ctx.n() {
        let sj = support_of(&g[j - 1])?;
        let lo: Vec<f64> = (0..b).map(|k| s1.lo[k].min(sj.lo[k])).collect();
        let hi: Vec<f64> = (0..b).map(|k| s1.hi[k].max(sj.hi[k])).collect();
        let (dom, rule) = opts.integral.box_and_rule(&BoundingBox::new(lo, hi)?)?;
        for x in samples {
            let (x1, rest) = x.split_at(b);
            let mut total = alg.zero();
            for s in 0..b {
                // block_potential carries a minus sign; it cancels in the norm
                let v = block_potential(ctx, &dom, &rule, x1, |u| {
                    let y = with_block1(u, rest);
                    &partial(&g[j - 1], &y, s) - &partial(&g[0], &y, (j - 1) * b + s)
                })?;
                total += &alg.mul(sub.v(s), &v);
            }
            worst = worst.max(total.norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{catalog, CatalogSpec};
    use crate::hypercomplex::Subspace;

    fn setup() -> (KernelContext, Arc<Subspace>) {
        let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
        (KernelContext::new(sub.clone(), 2).unwrap(), sub)
    }

    fn dbar_of_bump(ctx: &KernelContext, sub: &Arc<Subspace>) -> (FieldFunction, Vec<FieldFunction>) {
        let spec = CatalogSpec::Bump { center: vec![0.0; 4], radius: 0.5, a: vec![1.0, 0.0, 0.5, 0.0] };
        let bump = catalog(sub, 2, &spec).unwrap();
        let g = dbar_data(ctx, &bump).unwrap();
        (bump, g)
    }

    #[test]
    fn zero_data_gives_zero() {
        let (ctx, sub) = setup();
        let zero = catalog(&sub, 2, &CatalogSpec::Constant(vec![0.0]))
            .unwrap()
            .with_support(BoundingBox::cube(&[0.0; 4], 0.5));
        let g = vec![zero.clone(), zero];
        let x = sub.point(2, vec![0.1, 0.2, 0.0, 0.1]).unwrap();
        assert_eq!(solve_inhomogeneous(&ctx, &g, &x, &InhomogeneousConfig::default()).unwrap().max_abs(), 0.0);
        let rep = check_compatibility(&ctx, &g, &[vec![0.1; 4]], &CompatibilityOptions::default()).unwrap();
        assert_eq!(rep.residual, 0.0);
    }

    #[test]
    fn recovers_bump_from_its_derivatives() {
        let (ctx, sub) = setup();
        let (bump, g) = dbar_of_bump(&ctx, &sub);
        let x = sub.point(2, vec![0.1, -0.15, 0.2, 0.05]).unwrap();
        let v = solve_inhomogeneous(&ctx, &g, &x, &InhomogeneousConfig::default()).unwrap();
        assert!((&v - &bump.eval(x.coords())).max_abs() < 1e-3, "{v:?}");
    }

    #[test]
    fn missing_support_is_an_error() {
        let (ctx, sub) = setup();
        let f = catalog(&sub, 2, &CatalogSpec::Constant(vec![1.0])).unwrap();
        let x = sub.point(2, vec![0.0; 4]).unwrap();
        let r = solve_inhomogeneous(&ctx, &[f.clone(), f], &x, &InhomogeneousConfig::default());
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
