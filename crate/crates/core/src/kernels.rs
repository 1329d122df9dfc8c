//! Cauchy kernel, Bochner-Martinelli component kernels `K_j` and the
//! fundamental solution of the Laplacian on `R^D`, `D = (m+1) n`.

use std::f64::consts::PI;
use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::hypercomplex::{MultiPoint, Subspace};
use crate::quadrature::BoundaryNode;

/// Surface area of the unit sphere `S^{d-1}` in `R^d`, via log-gamma.
pub fn sphere_area(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2.0 * (h * PI.ln() - ln_gamma(h)).exp()
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// `E(z) = z^c / (sigma_{m+1} |z|^{m+1})` on one block, no singularity check.
pub fn cauchy_kernel_block(sub: &Subspace, sigma_block: f64, z: &[f64]) -> Element {
    let r2: f64 = z.iter().map(|c| c * c).sum();
    let scale = 1.0 / (sigma_block * r2.powf(0.5 * z.len() as f64));
    sub.embed_block_conj(z) * scale
}

/// Shared constants for kernels on `M^n`.
#[derive(Clone, Debug)]
pub struct KernelContext {
    sub: Arc<Subspace>,
    n: usize,
    dim: usize,
    sigma_d: f64,
    sigma_block: f64,
}

/// Closed-form per-variable terms of `sum_j dbar_j K_j` and their sum.
#[derive(Clone, Debug)]
pub struct BmDivergence {
    pub terms: Vec<f64>,
    pub total: f64,
}

impl KernelContext {
    pub fn new(sub: Arc<Subspace>, n: usize) -> Result<KernelContext> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        let block = sub.block_len();
        let dim = block * n;
        Ok(KernelContext { sigma_d: sphere_area(dim), sigma_block: sphere_area(block), sub, n, dim })
    }

    pub fn subspace(&self) -> &Arc<Subspace> {
        &self.sub
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension `D = (m+1) n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_len(&self) -> usize {
        self.sub.block_len()
    }

    pub fn sigma_d(&self) -> f64 {
        self.sigma_d
    }

    pub fn sigma_block(&self) -> f64 {
        self.sigma_block
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().all(|&c| c == 0.0) {
            return Err(Error::Singularity(x.to_vec()));
        }
        Ok(())
    }

    fn check_j(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange { index: j, n: self.n });
        }
        Ok(())
    }

    fn block<'a>(&self, x: &'a [f64], j0: usize) -> &'a [f64] {
        let b = self.block_len();
        &x[j0 * b..(j0 + 1) * b]
    }

    /// Cauchy kernel of one variable; requires `n = 1`.
    pub fn cauchy_kernel(&self, x: &MultiPoint) -> Result<Element> {
        if self.n != 1 {
            return Err(Error::InvalidConfig(format!("cauchy_kernel needs n = 1, context has n = {}", self.n)));
        }
        self.check(x.coords())?;
        Ok(cauchy_kernel_block(&self.sub, self.sigma_block, x.coords()))
    }

    /// Cauchy kernel applied to a single block `z` (any `n`).
    pub fn cauchy_on_block(&self, z: &[f64]) -> Result<Element> {
        if z.len() != self.block_len() {
            return Err(Error::DimensionMismatch { expected: self.block_len(), got: z.len() });
        }
        if z.iter().all(|&c| c == 0.0) {
            return Err(Error::Singularity(z.to_vec()));
        }
        Ok(cauchy_kernel_block(&self.sub, self.sigma_block, z))
    }

    /// `K_j(x) = x_j^c / (sigma_D |x|^D)`, `j` 1-based.
    pub fn bm_component(&self, j: usize, x: &MultiPoint) -> Result<Element> {
        self.check_j(j)?;
        self.check(x.coords())?;
        Ok(self.k_raw(j - 1, x.coords()))
    }

    /// Unchecked `K_{j0+1}(x)` on raw coordinates.
    pub fn k_raw(&self, j0: usize, x: &[f64]) -> Element {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let scale = 1.0 / (self.sigma_d * r2.powf(0.5 * self.dim as f64));
        self.sub.embed_block_conj(self.block(x, j0)) * scale
    }

    /// Unchecked fundamental solution.
    pub fn g_raw(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        if self.dim == 2 {
            -r2.ln() / (4.0 * PI)
        } else {
            let d = self.dim as f64;
            r2.powf(0.5 * (2.0 - d)) / ((2.0 - d) * self.sigma_d)
        }
    }

    /// `G(x) = -(1/2pi) log|x|` for `D = 2`, `|x|^{2-D} / ((2-D) sigma_D)`
    /// otherwise.
    pub fn fundamental_solution(&self, x: &MultiPoint) -> Result<f64> {
        self.check(x.coords())?;
        Ok(self.g_raw(x.coords()))
    }

    /// Closed form of `dbar_j K_j(x)`:
    /// `((m+1)/sigma_D) (|x|^{-D} - n |x_j|^2 |x|^{-D-2})`.
    pub fn bm_divergence(&self, x: &MultiPoint) -> Result<BmDivergence> {
        self.check(x.coords())?;
        let x = x.coords();
        let r2: f64 = x.iter().map(|c| c * c).sum();
        let d = self.dim as f64;
        let lead = self.block_len() as f64 / self.sigma_d;
        let r_d = r2.powf(-0.5 * d);
        let terms: Vec<f64> = (0..self.n)
            .map(|j0| {
                let bj: f64 = self.block(x, j0).iter().map(|c| c * c).sum();
                lead * (r_d - self.n as f64 * bj * r_d / r2)
            })
            .collect();
        let total = terms.iter().sum();
        Ok(BmDivergence { terms, total })
    }

    /// `sum_j K_j(y - x) (nu_j(y) f) w` with the inner product `nu_j f` taken first.
    pub fn bm_pair(&self, x: &MultiPoint, node: &BoundaryNode, fval: &Element) -> Result<Element> {
        if node.point.len() != self.dim || x.coords().len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: node.point.len() });
        }
        let diff: Vec<f64> = node.point.iter().zip(x.coords()).map(|(y, x)| y - x).collect();
        if diff.iter().all(|&c| c == 0.0) {
            return Err(Error::Singularity(node.point.clone()));
        }
        Ok(self.bm_pair_raw(&diff, &node.normal, fval) * node.weight)
    }

    /// `sum_j K_j(z) (nu_j f)` for `z = y - x`, unweighted and unchecked.
    pub fn bm_pair_raw(&self, z: &[f64], normal: &[f64], fval: &Element) -> Element {
        let alg = self.sub.algebra();
        let r2: f64 = z.iter().map(|c| c * c).sum();
        let scale = 1.0 / (self.sigma_d * r2.powf(0.5 * self.dim as f64));
        let mut acc = alg.zero();
        for j0 in 0..self.n {
            let nu = self.block(normal, j0);
            if nu.iter().all(|&c| c == 0.0) {
                continue;
            }
            let nu_f = alg.mul(&self.sub.embed_block(nu), fval);
            let kc = self.sub.embed_block_conj(self.block(z, j0));
            acc += &alg.mul(&kc, &nu_f);
        }
        acc * scale
    }

    /// `sum_j K_j(z) g_j` with `K_j` on the left, unchecked.
    pub fn k_dot_raw(&self, z: &[f64], g: &[Element]) -> Element {
        let alg = self.sub.algebra();
        let r2: f64 = z.iter().map(|c| c * c).sum();
        let scale = 1.0 / (self.sigma_d * r2.powf(0.5 * self.dim as f64));
        let mut acc = alg.zero();
        for (j0, gj) in g.iter().enumerate() {
            let kc = self.sub.embed_block_conj(self.block(z, j0));
            acc += &alg.mul(&kc, gj);
        }
        acc * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::{self, FdOptions};

    fn ctx(name: &str, n: usize) -> KernelContext {
        KernelContext::new(Arc::new(Subspace::preset(name).unwrap()), n).unwrap()
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(16) - 2.0 * PI.powi(8) / 5040.0).abs() < 1e-12);
    }

    #[test]
    fn cauchy_kernel_at_one() {
        let c = ctx("H-full", 1);
        let x = c.subspace().point(1, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let e = c.cauchy_kernel(&x).unwrap();
        assert!((e[0] - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        let zero = c.subspace().point(1, vec![0.0; 4]).unwrap();
        assert!(matches!(c.cauchy_kernel(&zero), Err(Error::Singularity(_))));
    }

    #[test]
    fn fundamental_solution_values() {
        let c = ctx("H-CJ", 2);
        let x = c.subspace().point(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let g = c.fundamental_solution(&x).unwrap();
        assert!((g + 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn divergence_vanishes_for_one_variable() {
        let c = ctx("H-full", 1);
        let x = c.subspace().point(1, vec![0.3, -0.2, 0.9, 0.1]).unwrap();
        let d = c.bm_divergence(&x).unwrap();
        assert!(d.terms[0].abs() < 1e-15);
    }

    #[test]
    fn per_term_divergence_matches_fd() {
        let c = ctx("H-CJ", 2);
        let sub = c.subspace().clone();
        let x = [0.4, -0.3, 0.2, 0.7];
        let closed = c.bm_divergence(&sub.point(2, x.to_vec()).unwrap()).unwrap();
        for j0 in 0..2 {
            let k = |y: &[f64]| c.k_raw(j0, y);
            let mut acc = sub.algebra().zero();
            for s in 0..2 {
                let (d, _) = fd::partial(&k, &x, 2 * j0 + s, &FdOptions::default()).unwrap();
                acc += &sub.algebra().mul(sub.v(s), &d);
            }
            assert!((acc[0] - closed.terms[j0]).abs() < 1e-8);
            assert!(acc.coeffs()[1..].iter().all(|c| c.abs() < 1e-8));
        }
    }

    #[test]
    fn pair_on_sphere_reduces_to_weighted_value() {
        let c = ctx("H-full", 1);
        let x = c.subspace().point(1, vec![0.1, 0.2, -0.1, 0.3]).unwrap();
        let dir = [0.5, -0.5, 0.5, 0.5];
        let r = 0.3;
        let y: Vec<f64> = x.coords().iter().zip(dir.iter()).map(|(a, d)| a + r * d).collect();
        let node = BoundaryNode { point: y, normal: dir.to_vec(), weight: 1.0 };
        let f = Element::from_slice(&[0.3, 1.0, -2.0, 0.5]);
        let p = c.bm_pair(&x, &node, &f).unwrap();
        let expect = f.scale(1.0 / (c.sigma_d() * r.powi(3)));
        assert!((&p - &expect).max_abs() < 1e-13);
        assert_eq!(c.bm_pair(&x, &node, &Element::zeros(4)).unwrap(), Element::zeros(4));
    }
}
