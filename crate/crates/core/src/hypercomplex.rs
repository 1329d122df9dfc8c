//! Hypercomplex subspaces `M = span(1, v_1, ..., v_m)` of an algebra and
//! points of `M^n` stored as `(m+1) n` real coordinates.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{build_algebra, Algebra, AlgebraKind, Element, MEMBERSHIP_TOL};
use crate::error::{Error, Result};

/// A hypercomplex basis `(v_0 = 1, v_1, ..., v_m)` inside an algebra.
#[derive(Clone, Debug)]
pub struct Subspace {
    name: String,
    algebra: Arc<Algebra>,
    basis: Vec<Element>,
    conj_basis: Vec<Element>,
    /// Set when every `v_s` is itself an algebra basis vector.
    basis_index: Option<Vec<usize>>,
}

/// One violated hypercomplex-basis condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub indices: Vec<usize>,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const PRESETS: [&str; 7] = ["C-full", "H-CJ", "H-reduced", "H-full", "O-full", "Cl02-paravec", "Cl03-paravec"];

/// Checks `v_0 = 1`, `t(v_s) = 0`, `n(v_s) = 1`, `t(v_s v_t^c) = 0` and cone
/// membership of each `v_s`.
pub fn validate_basis(alg: &Algebra, basis: &[Element]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut push = |condition: &str, indices: Vec<usize>, residual: f64| {
        if residual > MEMBERSHIP_TOL {
            violations.push(Violation { condition: condition.into(), indices, residual });
        }
    };
    if basis.iter().any(|v| v.dim() != alg.dim()) {
        violations.push(Violation {
            condition: "dimension".into(),
            indices: basis.iter().enumerate().filter(|(_, v)| v.dim() != alg.dim()).map(|(s, _)| s).collect(),
            residual: f64::INFINITY,
        });
        return ValidationReport { violations };
    }
    if basis.len() < 2 {
        violations.push(Violation { condition: "m >= 1".into(), indices: vec![], residual: f64::INFINITY });
        return ValidationReport { violations };
    }
    push("v0 = 1", vec![0], (&basis[0] - &alg.one()).max_abs());
    for (s, v) in basis.iter().enumerate().skip(1) {
        push("t(v_s) = 0", vec![s], alg.trace(v).max_abs());
        push("n(v_s) = 1", vec![s], (&alg.qnorm(v) - &alg.one()).max_abs());
        if !alg.quadratic_cone_contains(v) {
            push("v_s in Q_A", vec![s], 1.0);
        }
    }
    for s in 1..basis.len() {
        for t in 1..basis.len() {
            if s != t {
                let p = alg.mul(&basis[s], &alg.conj(&basis[t]));
                push("t(v_s v_t^c) = 0", vec![s, t], alg.trace(&p).max_abs());
            }
        }
    }
    ValidationReport { violations }
}

impl Subspace {
    /// Builds a subspace after validating the hypercomplex-basis conditions.
    pub fn new(name: impl Into<String>, algebra: Arc<Algebra>, basis: Vec<Element>) -> Result<Subspace> {
        let report = validate_basis(&algebra, &basis);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidSubspace(format!(
                "{} violated at {:?} (residual {:.3e})",
                v.condition, v.indices, v.residual
            )));
        }
        let conj_basis = basis.iter().map(|v| algebra.conj(v)).collect();
        let basis_index = basis
            .iter()
            .map(|v| {
                let nz: Vec<usize> = (0..v.dim()).filter(|&u| v[u] != 0.0).collect();
                (nz.len() == 1 && v[nz[0]] == 1.0).then(|| nz[0])
            })
            .collect();
        Ok(Subspace { name: name.into(), algebra, basis, conj_basis, basis_index })
    }

    /// Subspace spanned by algebra basis vectors with the given indices.
    pub fn from_indices(name: impl Into<String>, algebra: Arc<Algebra>, indices: &[usize]) -> Result<Subspace> {
        let basis = indices
            .iter()
            .map(|&i| {
                if i >= algebra.dim() {
                    Err(Error::InvalidSubspace(format!("basis index {i} out of range")))
                } else {
                    Ok(algebra.basis(i))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, algebra, basis)
    }

    pub fn preset(name: &str) -> Result<Subspace> {
        let (kind, indices): (AlgebraKind, Vec<usize>) = match name {
            "C-full" => (AlgebraKind::Complex, vec![0, 1]),
            "H-CJ" => (AlgebraKind::Quaternions, vec![0, 1]),
            "H-reduced" => (AlgebraKind::Quaternions, vec![0, 1, 2]),
            "H-full" => (AlgebraKind::Quaternions, vec![0, 1, 2, 3]),
            "O-full" => (AlgebraKind::Octonions, (0..8).collect()),
            "Cl02-paravec" => (AlgebraKind::Clifford(2), vec![0, 1, 2]),
            "Cl03-paravec" => (AlgebraKind::Clifford(3), vec![0, 1, 2, 3]),
            _ => return Err(Error::UnknownPreset(name.into())),
        };
        Self::from_indices(name, build_algebra(&kind)?, &indices)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    /// `m`, the number of imaginary basis units.
    pub fn m(&self) -> usize {
        self.basis.len() - 1
    }

    /// Coordinates per variable, `m + 1`.
    pub fn block_len(&self) -> usize {
        self.basis.len()
    }

    /// Ambient real dimension `(m+1) n`.
    pub fn ambient_dim(&self, n: usize) -> usize {
        self.block_len() * n
    }

    pub fn basis(&self) -> &[Element] {
        &self.basis
    }

    pub fn v(&self, s: usize) -> &Element {
        &self.basis[s]
    }

    pub fn v_conj(&self, s: usize) -> &Element {
        &self.conj_basis[s]
    }

    /// `sum_s c_s v_s` for one block of coordinates.
    pub fn embed_block(&self, coords: &[f64]) -> Element {
        debug_assert_eq!(coords.len(), self.block_len());
        let mut out = self.algebra.zero();
        match &self.basis_index {
            Some(idx) => {
                for (&c, &u) in coords.iter().zip(idx.iter()) {
                    out[u] += c;
                }
            }
            None => {
                for (&c, v) in coords.iter().zip(self.basis.iter()) {
                    out.axpy(c, v);
                }
            }
        }
        out
    }

    /// `sum_s c_s v_s^c` for one block of coordinates.
    pub fn embed_block_conj(&self, coords: &[f64]) -> Element {
        let mut out = self.algebra.zero();
        for (&c, v) in coords.iter().zip(self.conj_basis.iter()) {
            out.axpy(c, v);
        }
        out
    }

    /// `x_j` as an algebra element, `j` 1-based.
    pub fn embed(&self, j: usize, p: &MultiPoint) -> Result<Element> {
        self.check_point(p)?;
        let block = p.block(j)?;
        Ok(self.embed_block(block))
    }

    /// Coordinates of `x` over the subspace basis (orthogonal projection).
    pub fn project(&self, x: &Element) -> Vec<f64> {
        self.basis.iter().map(|v| v.dot(x)).collect()
    }

    /// Norm of the part of `x` orthogonal to the subspace.
    pub fn off_subspace_norm(&self, x: &Element) -> f64 {
        let coords = self.project(x);
        (x - &self.embed_block(&coords)).norm()
    }

    pub fn point(&self, n: usize, coords: Vec<f64>) -> Result<MultiPoint> {
        MultiPoint::new(n, self.block_len(), coords)
    }

    fn check_point(&self, p: &MultiPoint) -> Result<()> {
        if p.block_len != self.block_len() {
            return Err(Error::DimensionMismatch { expected: self.block_len(), got: p.block_len });
        }
        Ok(())
    }

    pub fn validation_report(&self) -> ValidationReport {
        validate_basis(&self.algebra, &self.basis)
    }
}

/// A point of `M^n`; block `j` holds `(x_{j,0}, ..., x_{j,m})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiPoint {
    n: usize,
    block_len: usize,
    coords: Vec<f64>,
}

impl MultiPoint {
    pub fn new(n: usize, block_len: usize, coords: Vec<f64>) -> Result<MultiPoint> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if coords.len() != n * block_len {
            return Err(Error::DimensionMismatch { expected: n * block_len, got: coords.len() });
        }
        Ok(MultiPoint { n, block_len, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Block `j` (1-based).
    pub fn block(&self, j: usize) -> Result<&[f64]> {
        if j == 0 || j > self.n {
            return Err(Error::IndexOutOfRange { index: j, n: self.n });
        }
        Ok(&self.coords[(j - 1) * self.block_len..j * self.block_len])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let sub = Subspace::preset(name).unwrap();
            assert!(sub.validation_report().is_valid(), "{name}");
        }
        assert!(matches!(Subspace::preset("nope"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn anticommutation() {
        for name in PRESETS {
            let sub = Subspace::preset(name).unwrap();
            let alg = sub.algebra();
            for s in 1..=sub.m() {
                for t in 1..=sub.m() {
                    let sum = &alg.mul(sub.v(s), sub.v(t)) + &alg.mul(sub.v(t), sub.v(s));
                    let expect = alg.scalar(if s == t { -2.0 } else { 0.0 });
                    assert!((&sum - &expect).max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn non_imaginary_vector_rejected() {
        let h = build_algebra(&AlgebraKind::Quaternions).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v1 = h.element(&[r, r, 0.0, 0.0]).unwrap();
        let report = validate_basis(&h, &[h.one(), v1.clone()]);
        assert!(report.violations.iter().any(|v| v.condition == "t(v_s) = 0" && v.indices == vec![1]));
        assert!(Subspace::new("bad", h, vec![h_one(), v1]).is_err());
    }

    fn h_one() -> Element {
        Element::scalar(4, 1.0)
    }

    #[test]
    fn embed_blocks() {
        let sub = Subspace::preset("H-reduced").unwrap();
        let p = sub.point(2, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(sub.embed(1, &p).unwrap(), sub.algebra().one());
        assert_eq!(sub.embed(2, &p).unwrap(), *sub.v(1));
        assert!(matches!(sub.embed(3, &p), Err(Error::IndexOutOfRange { index: 3, n: 2 })));
    }

    #[test]
    fn general_basis_embeds() {
        // rotated imaginary unit (i + j)/sqrt2 spans a valid C_J
        let h = build_algebra(&AlgebraKind::Quaternions).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sub = Subspace::new("CJ'", h.clone(), vec![h.one(), h.element(&[0.0, r, r, 0.0]).unwrap()]).unwrap();
        let x = sub.embed_block(&[3.0, 4.0]);
        assert!((x.norm() - 5.0).abs() < 1e-14);
        assert!(sub.off_subspace_norm(&x) < 1e-14);
    }
}
