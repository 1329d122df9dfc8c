//! Extension of monogenic functions across a compact hole, for `n >= 2`,
//! through a cutoff and the compactly supported solution of the
//! inhomogeneous system.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use super::inhomogeneous::{solve_inhomogeneous, InhomogeneousConfig};
use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::fd::FdOptions;
use crate::functions::{dirac, BoundingBox, EvalFn, FieldFunction, Smoothness};
use crate::hypercomplex::MultiPoint;
use crate::kernels::KernelContext;
use crate::quadrature::DomainSpec;

/// Cutoff `phi`: equal to 1 on `K` grown by `plateau`, zero outside `K`
/// grown by `support`. Growth factors scale half-widths (boxes) or the
/// radius (balls) about the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub plateau: f64,
    pub support: f64,
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff { plateau: 1.1, support: 1.4 }
    }
}

/// `e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})` on `(0, 1)`, 0 below, 1 above, and
/// its derivative.
fn smooth_step(u: f64) -> (f64, f64) {
    if u <= 0.0 {
        return (0.0, 0.0);
    }
    if u >= 1.0 {
        return (1.0, 0.0);
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    let s = a + b;
    (a / s, a * b * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u))) / (s * s))
}

impl Cutoff {
    fn validate(&self) -> Result<()> {
        if !(self.plateau > 1.0 && self.support > self.plateau) {
            return Err(Error::InvalidConfig("cutoff needs 1 < plateau < support".into()));
        }
        Ok(())
    }

    /// `phi(x)` and its gradient for the hole `k`.
    fn eval(&self, k: &DomainSpec, x: &[f64], grad: &mut [f64]) -> f64 {
        match k {
            DomainSpec::Box { lo, hi } => {
                let d = x.len();
                let mut vals: SmallVec<[f64; 16]> = SmallVec::with_capacity(d);
                let mut ders: SmallVec<[f64; 16]> = SmallVec::with_capacity(d);
                for i in 0..d {
                    let (c, half) = (0.5 * (lo[i] + hi[i]), 0.5 * (hi[i] - lo[i]));
                    let (p, s) = (self.plateau * half, self.support * half);
                    let t = x[i] - c;
                    let (v, dv) = smooth_step((s - t.abs()) / (s - p));
                    vals.push(v);
                    ders.push(-dv * t.signum() / (s - p));
                }
                for i in 0..d {
                    grad[i] = ders[i] * (0..d).filter(|&l| l != i).map(|l| vals[l]).product::<f64>();
                }
                vals.iter().product()
            }
            DomainSpec::Ball { center, radius } => {
                let (p, s) = (self.plateau * radius, self.support * radius);
                let r = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let (v, dv) = smooth_step((s - r) / (s - p));
                for i in 0..x.len() {
                    grad[i] = if r > 0.0 { -dv * (x[i] - center[i]) / (r * (s - p)) } else { 0.0 };
                }
                v
            }
        }
    }

    /// Bounding box of `supp phi`.
    fn support_box(&self, k: &DomainSpec) -> BoundingBox {
        match k {
            DomainSpec::Box { lo, hi } => BoundingBox {
                lo: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b) - 0.5 * self.support * (b - a)).collect(),
                hi: lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b) + 0.5 * self.support * (b - a)).collect(),
            },
            DomainSpec::Ball { center, radius } => BoundingBox::cube(center, self.support * radius),
        }
    }

    fn support_box_domain(&self, k: &DomainSpec) -> DomainSpec {
        let bb = self.support_box(k);
        DomainSpec::Box { lo: bb.lo, hi: bb.hi }
    }
}

/// `f~ = (1 - phi) f - g` with `dbar_j g = dbar_j ((1 - phi) f)`.
#[derive(Clone)]
pub struct HartogsExtension {
    ctx: KernelContext,
    omega: DomainSpec,
    hole: DomainSpec,
    cutoff: Cutoff,
    f: FieldFunction,
    h: Vec<FieldFunction>,
    cfg: InhomogeneousConfig,
}

/// Builds the extension of `f`, monogenic on `omega \ hole`, across `hole`.
/// The data `h_j = dbar_j ((1 - phi) f)` are taken to be supported in
/// `supp phi`, which holds when `f` is monogenic off the hole.
pub fn hartogs_extend(
    ctx: &KernelContext,
    omega: &DomainSpec,
    hole: &DomainSpec,
    f: &FieldFunction,
    cutoff: &Cutoff,
    cfg: &InhomogeneousConfig,
) -> Result<HartogsExtension> {
    if ctx.n() < 2 {
        return Err(Error::InvalidConfig("extension across a compact set needs n >= 2".into()));
    }
    cutoff.validate()?;
    omega.validate()?;
    hole.validate()?;
    for got in [omega.ambient_dim(), hole.ambient_dim(), f.dim()] {
        if got != ctx.dim() {
            return Err(Error::DimensionMismatch { expected: ctx.dim(), got });
        }
    }
    // support > 1, so this also keeps the hole strictly inside
    if !strictly_inside(omega, &cutoff.support_box_domain(hole)) {
        return Err(Error::InvalidConfig("the cutoff support escapes the domain".into()));
    }
    let support = cutoff.support_box(hole);
    let h = (0..ctx.n())
        .map(|j0| {
            let (sub, omega, hole, cutoff, f) =
                (ctx.subspace().clone(), omega.clone(), hole.clone(), *cutoff, f.clone());
            let alg_dim = sub.algebra().dim();
            let b = sub.block_len();
            let eval: EvalFn = Arc::new(move |y: &[f64]| {
                if omega.signed_distance(y) <= 0.0 {
                    return Element::zeros(alg_dim);
                }
                let mut grad: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; y.len()];
                let phi = cutoff.eval(&hole, y, &mut grad);
                if phi >= 1.0 {
                    return Element::zeros(alg_dim);
                }
                let alg = sub.algebra();
                let fy = f.eval(y);
                let gj = &grad[j0 * b..(j0 + 1) * b];
                let mut out = if gj.iter().any(|&c| c != 0.0) {
                    alg.mul(&sub.embed_block(gj), &fy).scale(-1.0)
                } else {
                    Element::zeros(alg_dim)
                };
                match dirac(&sub, &f, j0 + 1, y, &FdOptions::default()) {
                    Ok(d) => out.axpy(1.0 - phi, &d.value),
                    Err(_) => return Element::scalar(alg_dim, f64::NAN),
                }
                out
            });
            FieldFunction::new(format!("h_{}", j0 + 1), ctx.dim(), Smoothness::CInfinity, eval)
                .with_support(support.clone())
        })
        .collect();
    Ok(HartogsExtension {
        ctx: ctx.clone(),
        omega: omega.clone(),
        hole: hole.clone(),
        cutoff: *cutoff,
        f: f.clone(),
        h,
        cfg: cfg.clone(),
    })
}

/// Every corner of the box `inner` lies in the interior of the convex `outer`.
fn strictly_inside(outer: &DomainSpec, inner: &DomainSpec) -> bool {
    let DomainSpec::Box { lo, hi } = inner else { return false };
    let d = lo.len();
    if d > 20 {
        return false;
    }
    (0..1usize << d).all(|mask| {
        let corner: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect();
        outer.signed_distance(&corner) > 0.0
    })
}

impl HartogsExtension {
    /// `phi(x)`.
    pub fn cutoff_value(&self, x: &[f64]) -> f64 {
        let mut grad = vec![0.0; x.len()];
        self.cutoff.eval(&self.hole, x, &mut grad)
    }

    /// The data `h_j` of the inhomogeneous system.
    pub fn data(&self) -> &[FieldFunction] {
        &self.h
    }

    /// The correction `g` with `dbar_j g = h_j`.
    pub fn correction(&self, x: &MultiPoint) -> Result<Element> {
        solve_inhomogeneous(&self.ctx, &self.h, x, &self.cfg)
    }

    /// `f~(x)`; `f` is only evaluated where `phi < 1`.
    pub fn eval(&self, x: &MultiPoint) -> Result<Element> {
        let xs = x.coords();
        self.omega.check_interior(xs)?;
        let phi = self.cutoff_value(xs);
        let mut out = self.correction(x)?.scale(-1.0);
        if phi < 1.0 {
            out.axpy(1.0 - phi, &self.f.value(xs)?);
        }
        Ok(out)
    }

    /// `f~` as a field function; failed evaluations become NaN.
    pub fn as_field_function(&self) -> FieldFunction {
        let ext = self.clone();
        let (n, b) = (self.ctx.n(), self.ctx.block_len());
        let alg_dim = self.ctx.subspace().algebra().dim();
        let eval: EvalFn = Arc::new(move |y: &[f64]| {
            MultiPoint::new(n, b, y.to_vec())
                .and_then(|p| ext.eval(&p))
                .unwrap_or_else(|_| Element::scalar(alg_dim, f64::NAN))
        });
        FieldFunction::new(format!("extension of {}", self.f.label), self.ctx.dim(), Smoothness::CInfinity, eval)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{catalog, CatalogSpec};
    use crate::hypercomplex::Subspace;

    #[test]
    fn step_is_smooth_and_monotone() {
        let (v, d) = smooth_step(0.5);
        assert!((v - 0.5).abs() < 1e-15 && d > 0.0);
        let h = 1e-6;
        let fd = (smooth_step(0.3 + h).0 - smooth_step(0.3 - h).0) / (2.0 * h);
        assert!((fd - smooth_step(0.3).1).abs() < 1e-8);
        assert_eq!(smooth_step(-1.0), (0.0, 0.0));
        assert_eq!(smooth_step(2.0), (1.0, 0.0));
    }

    #[test]
    fn cutoff_plateau_and_support() {
        let k = DomainSpec::cube(4, 0.3);
        let c = Cutoff::default();
        let mut g = [0.0; 4];
        assert_eq!(c.eval(&k, &[0.32, 0.0, -0.32, 0.1], &mut g), 1.0);
        assert_eq!(c.eval(&k, &[0.43, 0.0, 0.0, 0.0], &mut g), 0.0);
        let x = [0.38, 0.1, -0.2, 0.0];
        let phi = c.eval(&k, &x, &mut g);
        let h = 1e-6;
        let mut xp = x;
        xp[0] += h;
        let mut tmp = [0.0; 4];
        let fd = (c.eval(&k, &xp, &mut tmp) - phi) / h;
        assert!((fd - g[0]).abs() < 1e-4, "{fd} vs {}", g[0]);
    }

    #[test]
    fn rejects_escaping_cutoff() {
        let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
        let ctx = KernelContext::new(sub.clone(), 2).unwrap();
        let f = catalog(&sub, 2, &CatalogSpec::Fueter { j: 1, s: 1 }).unwrap();
        let r = hartogs_extend(
            &ctx,
            &DomainSpec::cube(4, 1.0),
            &DomainSpec::cube(4, 0.8),
            &f,
            &Cutoff::default(),
            &InhomogeneousConfig::default(),
        );
        assert!(matches!(r, Err(Error::InvalidConfig(_))));
    }
}
