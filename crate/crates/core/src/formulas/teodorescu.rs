//! The Teodorescu transform, a right inverse of the one-variable Dirac
//! operator.

use std::sync::Arc;

use smallvec::SmallVec;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::fd::FdOptions;
use crate::functions::{dirac_fd, EvalFn, FieldFunction};
use crate::hypercomplex::MultiPoint;
use crate::kernels::{cauchy_kernel_block, KernelContext};
use crate::quadrature::{integrate_volume, DomainSpec, Estimate, QuadratureConfig};

/// Step of the finite-difference check of `dbar T[f] = f`.
pub const DBAR_CHECK_STEP: f64 = 1e-2;

/// `T[f](x) = -int_Omega E(y - x) f(y) dV(y)` for `n = 1` and interior `x`.
pub fn teodorescu(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    f: &FieldFunction,
    x: &MultiPoint,
) -> Result<Estimate> {
    if ctx.n() != 1 {
        return Err(Error::InvalidConfig(format!("teodorescu needs n = 1, context has n = {}", ctx.n())));
    }
    let xs = x.coords();
    for got in [dom.ambient_dim(), f.dim(), xs.len()] {
        if got != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: ctx.dim(), got });
        }
    }
    dom.check_interior(xs)?;
    let sub = ctx.subspace();
    let alg = sub.algebra();
    let sigma = ctx.sigma_block();
    integrate_volume(dom, cfg, Some(xs), alg.dim(), |y| {
        let z: SmallVec<[f64; 16]> = y.iter().zip(xs).map(|(a, b)| a - b).collect();
        alg.mul(&cauchy_kernel_block(sub, sigma, &z), &f.eval(y)).scale(-1.0)
    })
}

/// `T[f]` as a field function; failed evaluations become NaN.
pub fn teodorescu_function(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    f: &FieldFunction,
) -> FieldFunction {
    let (ctx, dom, cfg, f) = (ctx.clone(), dom.clone(), cfg.clone(), f.clone());
    let dim = ctx.dim();
    let alg_dim = ctx.subspace().algebra().dim();
    let label = format!("T[{}]", f.label);
    let smoothness = f.smoothness;
    let eval: EvalFn = Arc::new(move |y: &[f64]| {
        MultiPoint::new(1, dim, y.to_vec())
            .and_then(|p| teodorescu(&ctx, &dom, &cfg, &f, &p))
            .map_or_else(|_| Element::scalar(alg_dim, f64::NAN), |e| e.value)
    });
    FieldFunction::new(label, dim, smoothness, eval)
}

/// `|dbar T[f](x) - f(x)|` with `dbar` by a fourth-order central difference
/// of step `h`; returns the derivative and the residual.
pub fn teodorescu_dbar_residual(
    ctx: &KernelContext,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    f: &FieldFunction,
    x: &MultiPoint,
    h: f64,
) -> Result<(Element, f64)> {
    let xs = x.coords();
    dom.check_interior(xs)?;
    if dom.signed_distance(xs) <= 2.0 * h {
        return Err(Error::InvalidConfig(format!("difference stencil of step {h} leaves the domain")));
    }
    let t = teodorescu_function(ctx, dom, cfg, f);
    let d = dirac_fd(ctx.subspace(), &t, 1, xs, &FdOptions::plain(h))?.value;
    let residual = (&d - &f.value(xs)?).norm();
    Ok((d, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{catalog, CatalogSpec};
    use crate::hypercomplex::Subspace;

    #[test]
    fn constant_on_centered_ball_vanishes_at_center() {
        let sub = Arc::new(Subspace::preset("H-full").unwrap());
        let ctx = KernelContext::new(sub.clone(), 1).unwrap();
        let dom = DomainSpec::ball(vec![0.0; 4], 1.0);
        let f = catalog(&sub, 1, &CatalogSpec::Constant(vec![1.0])).unwrap();
        let x = sub.point(1, vec![0.0; 4]).unwrap();
        let v = teodorescu(&ctx, &dom, &QuadratureConfig::gauss(6, 6), &f, &x).unwrap().value;
        assert!(v.max_abs() < 1e-12, "{v:?}");
    }

    #[test]
    fn needs_one_variable() {
        let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
        let ctx = KernelContext::new(sub.clone(), 2).unwrap();
        let f = catalog(&sub, 2, &CatalogSpec::Constant(vec![1.0])).unwrap();
        let x = sub.point(2, vec![0.0; 4]).unwrap();
        let r = teodorescu(&ctx, &DomainSpec::cube(4, 1.0), &QuadratureConfig::default(), &f, &x);
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
