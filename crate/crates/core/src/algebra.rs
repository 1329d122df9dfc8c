//! Finite-dimensional real alternative *-algebras with unity.
//!
//! An [`Algebra`] is stored as sparse structure constants over a fixed basis
//! `(v_0, ..., v_{dim-1})` with `v_0 = 1`, together with a signed permutation
//! realizing the anti-involution `x -> x^c`. Built-in algebras carry exact
//! `±1` constants, so the algebra-law checks on them are exact in floating
//! point.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::hypercomplex::Subspace;

/// Absolute tolerance for "is a real scalar" style membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

pub type Coeffs = SmallVec<[f64; 16]>;

/// An element of an algebra, as coordinates over the algebra basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Element(Coeffs);

impl Element {
    pub fn zeros(dim: usize) -> Self {
        Element(smallvec::smallvec![0.0; dim])
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut e = Self::zeros(dim);
        e.0[index] = 1.0;
        e
    }

    pub fn scalar(dim: usize, r: f64) -> Self {
        let mut e = Self::zeros(dim);
        e.0[0] = r;
        e
    }

    pub fn from_slice(coeffs: &[f64]) -> Self {
        Element(Coeffs::from_slice(coeffs))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0.into_vec()
    }

    /// Real part (coefficient of the unit).
    pub fn re(&self) -> f64 {
        self.0[0]
    }

    /// Euclidean norm over the basis.
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn dot(&self, other: &Element) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// True when all non-unit coefficients vanish within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.0[1..].iter().all(|c| c.abs() <= tol)
    }

    /// `self += r * other`
    pub fn axpy(&mut self, r: f64, other: &Element) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += r * b;
        }
    }

    pub fn scale(&self, r: f64) -> Element {
        Element(self.0.iter().map(|c| c * r).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Element {
        Element(self.0.iter().map(|&c| f(c)).collect())
    }
}

impl Index<usize> for Element {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Element {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl AddAssign<&Element> for Element {
    fn add_assign(&mut self, rhs: &Element) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

impl SubAssign<&Element> for Element {
    fn sub_assign(&mut self, rhs: &Element) {
        debug_assert_eq!(self.dim(), rhs.dim());
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a -= b;
        }
    }
}

impl Add<&Element> for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Element> for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Element {
    type Output = Element;
    fn add(mut self, rhs: Element) -> Element {
        self += &rhs;
        self
    }
}

impl Sub for Element {
    type Output = Element;
    fn sub(mut self, rhs: Element) -> Element {
        self -= &rhs;
        self
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(mut self) -> Element {
        for c in self.0.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Mul<f64> for Element {
    type Output = Element;
    fn mul(mut self, r: f64) -> Element {
        for c in self.0.iter_mut() {
            *c *= r;
        }
        self
    }
}

impl Mul<f64> for &Element {
    type Output = Element;
    fn mul(self, r: f64) -> Element {
        self.scale(r)
    }
}

/// Which built-in algebra to construct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    Complex,
    Quaternions,
    Octonions,
    Clifford(usize),
    FromFile(std::path::PathBuf),
}

impl std::str::FromStr for AlgebraKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "complex" | "c" => Ok(AlgebraKind::Complex),
            "quaternions" | "quaternion" | "h" => Ok(AlgebraKind::Quaternions),
            "octonions" | "octonion" | "o" => Ok(AlgebraKind::Octonions),
            _ => {
                if let Some(rest) = lower.strip_prefix("clifford") {
                    let m = rest
                        .trim_matches(|c| c == '(' || c == ')' || c == ':' || c == '-')
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidConfig(format!("bad clifford order in `{s}`")))?;
                    Ok(AlgebraKind::Clifford(m))
                } else if let Some(path) = s.trim().strip_prefix("file:") {
                    Ok(AlgebraKind::FromFile(path.into()))
                } else {
                    Err(Error::InvalidConfig(format!("unknown algebra kind `{s}`")))
                }
            }
        }
    }
}

/// A finite-dimensional real alternative *-algebra with unity `v_0`.
#[derive(Clone, Debug)]
pub struct Algebra {
    name: String,
    dim: usize,
    /// `table[s * dim + t]` lists `(u, c)` with `v_s v_t = sum c v_u`.
    table: Vec<SmallVec<[(u16, f64); 2]>>,
    /// `v_s^c = sign * v_{perm}`.
    involution: Vec<(usize, f64)>,
    basis_names: Vec<String>,
}

/// On-disk algebra description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    #[serde(default)]
    pub name: String,
    /// Entries `[s, t, u, value]`; omitted triples are zero.
    pub structure: Vec<(usize, usize, usize, f64)>,
    /// Entries `[s, s', sign]` meaning `v_s^c = sign * v_{s'}`.
    pub involution: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_names: Option<Vec<String>>,
}

pub fn build_algebra(kind: &AlgebraKind) -> Result<Arc<Algebra>> {
    let alg = match kind {
        AlgebraKind::Complex => Algebra::complex(),
        AlgebraKind::Quaternions => Algebra::quaternions(),
        AlgebraKind::Octonions => Algebra::octonions(),
        AlgebraKind::Clifford(m) => Algebra::clifford(*m)?,
        AlgebraKind::FromFile(path) => Algebra::from_file(path)?,
    };
    Ok(Arc::new(alg))
}

impl Algebra {
    fn reals() -> Algebra {
        Algebra {
            name: "R".into(),
            dim: 1,
            table: vec![smallvec::smallvec![(0u16, 1.0)]],
            involution: vec![(0, 1.0)],
            basis_names: vec!["1".into()],
        }
    }

    /// Cayley-Dickson doubling with `(a,b)(c,d) = (ac - d^c b, da + b c^c)`
    /// and `(a,b)^c = (a^c, -b)`.
    fn cayley_dickson(base: &Algebra, name: &str, names: Vec<String>) -> Algebra {
        let h = base.dim;
        let dim = 2 * h;
        let pair = |e: &Element| -> (Element, Element) {
            (Element::from_slice(&e.coeffs()[..h]), Element::from_slice(&e.coeffs()[h..]))
        };
        let join = |a: &Element, b: &Element| -> Element {
            let mut out = Element::zeros(dim);
            out.coeffs_mut()[..h].copy_from_slice(a.coeffs());
            out.coeffs_mut()[h..].copy_from_slice(b.coeffs());
            out
        };
        let mut table = vec![SmallVec::new(); dim * dim];
        for s in 0..dim {
            for t in 0..dim {
                let (a, b) = pair(&Element::basis(dim, s));
                let (c, d) = pair(&Element::basis(dim, t));
                let first = &base.mul(&a, &c) - &base.mul(&base.conj(&d), &b);
                let second = &base.mul(&d, &a) + &base.mul(&b, &base.conj(&c));
                let prod = join(&first, &second);
                table[s * dim + t] = sparse_entries(&prod);
            }
        }
        // (a, 0)^c = (a^c, 0) and (0, b)^c = (0, -b)
        let involution = (0..dim).map(|s| if s < h { base.involution[s] } else { (s, -1.0) }).collect();
        Algebra { name: name.into(), dim, table, involution, basis_names: names }
    }

    pub fn complex() -> Algebra {
        Self::cayley_dickson(&Self::reals(), "complex", vec!["1".into(), "i".into()])
    }

    pub fn quaternions() -> Algebra {
        let names = ["1", "i", "j", "k"].iter().map(|s| s.to_string()).collect();
        Self::cayley_dickson(&Self::complex(), "quaternions", names)
    }

    pub fn octonions() -> Algebra {
        let mut names = vec!["1".to_string()];
        names.extend((1..8).map(|i| format!("e{i}")));
        Self::cayley_dickson(&Self::quaternions(), "octonions", names)
    }

    /// The Clifford algebra `R_{0,m}` with `e_i e_j + e_j e_i = -2 delta_ij`
    /// and Clifford conjugation as involution. Blades are ordered by grade,
    /// then lexicographically by their sorted index lists.
    pub fn clifford(m: usize) -> Result<Algebra> {
        if m == 0 {
            return Err(Error::InvalidConfig("clifford order must be at least 1".into()));
        }
        if m > 4 {
            return Err(Error::Unsupported(format!(
                "clifford(m) with m = {m}: element storage is sized for dim <= 16"
            )));
        }
        let dim = 1usize << m;
        let mut blades: Vec<u32> = (0..dim as u32).collect();
        blades.sort_by_key(|&b| (b.count_ones(), blade_indices(b)));
        let mut position = vec![0usize; dim];
        for (pos, &b) in blades.iter().enumerate() {
            position[b as usize] = pos;
        }
        let mut table = vec![SmallVec::new(); dim * dim];
        for (s, &a) in blades.iter().enumerate() {
            for (t, &b) in blades.iter().enumerate() {
                let sign = clifford_sign(a, b);
                let u = position[(a ^ b) as usize];
                table[s * dim + t] = smallvec::smallvec![(u as u16, sign)];
            }
        }
        let involution = blades
            .iter()
            .enumerate()
            .map(|(s, &b)| {
                let k = b.count_ones() as i64;
                let sign = if (k * (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                (s, sign)
            })
            .collect();
        let basis_names = blades
            .iter()
            .map(|&b| {
                if b == 0 {
                    "1".to_string()
                } else {
                    let idx: String = blade_indices(b).iter().map(|i| i.to_string()).collect();
                    format!("e{idx}")
                }
            })
            .collect();
        Ok(Algebra { name: format!("clifford(0,{m})"), dim, table, involution, basis_names })
    }

    pub fn from_file(path: &Path) -> Result<Algebra> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Algebra> {
        let file: AlgebraFile = serde_json::from_str(text)?;
        Self::from_description(&file)
    }

    /// Builds and validates an algebra from its file description.
    pub fn from_description(file: &AlgebraFile) -> Result<Algebra> {
        let dim = file.dim;
        let invalid = |inv: &str, detail: String| Error::InvalidAlgebra { invariant: inv.into(), detail };
        if dim == 0 || dim > 16 {
            return Err(invalid("dim", format!("dim must be in 1..=16, got {dim}")));
        }
        let mut table = vec![SmallVec::<[(u16, f64); 2]>::new(); dim * dim];
        for &(s, t, u, c) in &file.structure {
            if s >= dim || t >= dim || u >= dim {
                return Err(invalid("structure", format!("index out of range in [{s},{t},{u}]")));
            }
            if !c.is_finite() {
                return Err(invalid("structure", format!("non-finite value at [{s},{t},{u}]")));
            }
            if c == 0.0 {
                continue;
            }
            let cell = &mut table[s * dim + t];
            match cell.iter_mut().find(|(uu, _)| *uu as usize == u) {
                Some(entry) => entry.1 += c,
                None => cell.push((u as u16, c)),
            }
        }
        let mut involution = vec![None; dim];
        for &(s, p, sign) in &file.involution {
            if s >= dim || p >= dim {
                return Err(invalid("involution", format!("index out of range in [{s},{p}]")));
            }
            if sign != 1.0 && sign != -1.0 {
                return Err(invalid("involution", format!("sign must be +1 or -1, got {sign}")));
            }
            if involution[s].is_some() {
                return Err(invalid("involution", format!("basis element {s} mapped twice")));
            }
            involution[s] = Some((p, sign));
        }
        let involution = involution
            .into_iter()
            .enumerate()
            .map(|(s, e)| e.ok_or_else(|| invalid("involution", format!("basis element {s} has no image"))))
            .collect::<Result<Vec<_>>>()?;
        let basis_names = match &file.basis_names {
            Some(names) if names.len() == dim => names.clone(),
            Some(_) => return Err(invalid("basis_names", "length must equal dim".into())),
            None => (0..dim).map(|i| if i == 0 { "1".to_string() } else { format!("v{i}") }).collect(),
        };
        let name = if file.name.is_empty() { "custom".to_string() } else { file.name.clone() };
        let alg = Algebra { name, dim, table, involution, basis_names };
        alg.validate()?;
        Ok(alg)
    }

    pub fn to_description(&self) -> AlgebraFile {
        let mut structure = Vec::new();
        for s in 0..self.dim {
            for t in 0..self.dim {
                for &(u, c) in &self.table[s * self.dim + t] {
                    structure.push((s, t, u as usize, c));
                }
            }
        }
        let involution = self.involution.iter().enumerate().map(|(s, &(p, sign))| (s, p, sign)).collect();
        AlgebraFile {
            dim: self.dim,
            name: self.name.clone(),
            structure,
            involution,
            basis_names: Some(self.basis_names.clone()),
        }
    }

    /// Checks the unit, involution, anti-homomorphism and alternativity invariants.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim;
        let tol = MEMBERSHIP_TOL;
        let invalid = |inv: &str, detail: String| Err(Error::InvalidAlgebra { invariant: inv.into(), detail });
        for t in 0..dim {
            let e = Element::basis(dim, t);
            let v0 = Element::basis(dim, 0);
            if (&self.mul(&v0, &e) - &e).max_abs() > tol || (&self.mul(&e, &v0) - &e).max_abs() > tol {
                return invalid("unit", format!("v0 is not a two-sided unit on v{t}"));
            }
        }
        if self.involution[0] != (0, 1.0) {
            return invalid("involution", "involution must fix v0".into());
        }
        for s in 0..dim {
            let e = Element::basis(dim, s);
            if (&self.conj(&self.conj(&e)) - &e).max_abs() > tol {
                return invalid("involution", format!("involution does not square to identity on v{s}"));
            }
        }
        for s in 0..dim {
            for t in 0..dim {
                let (a, b) = (Element::basis(dim, s), Element::basis(dim, t));
                let lhs = self.conj(&self.mul(&a, &b));
                let rhs = self.mul(&self.conj(&b), &self.conj(&a));
                if (&lhs - &rhs).max_abs() > tol {
                    return invalid("anti-homomorphism", format!("(v{s} v{t})^c != v{t}^c v{s}^c"));
                }
            }
        }
        // The associator is trilinear, so alternativity on all elements is
        // equivalent to skew-symmetry of the associator on basis triples.
        for s in 0..dim {
            for t in 0..dim {
                for u in 0..dim {
                    let (a, b, c) = (Element::basis(dim, s), Element::basis(dim, t), Element::basis(dim, u));
                    let abc = self.associator(&a, &b, &c);
                    if (&abc + &self.associator(&b, &a, &c)).max_abs() > tol {
                        return invalid("alternativity", format!("[v{s}, v{t}, v{u}] + [v{t}, v{s}, v{u}] != 0"));
                    }
                    if (&abc + &self.associator(&a, &c, &b)).max_abs() > tol {
                        return invalid("alternativity", format!("[v{s}, v{t}, v{u}] + [v{s}, v{u}, v{t}] != 0"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    /// Nonzero structure constants `(u, c)` of `v_s v_t`.
    pub fn product_terms(&self, s: usize, t: usize) -> &[(u16, f64)] {
        &self.table[s * self.dim + t]
    }

    /// The signed image of `v_s` under the involution.
    pub fn involution_of(&self, s: usize) -> (usize, f64) {
        self.involution[s]
    }

    pub fn one(&self) -> Element {
        Element::scalar(self.dim, 1.0)
    }

    pub fn zero(&self) -> Element {
        Element::zeros(self.dim)
    }

    pub fn basis(&self, s: usize) -> Element {
        Element::basis(self.dim, s)
    }

    pub fn scalar(&self, r: f64) -> Element {
        Element::scalar(self.dim, r)
    }

    pub fn element(&self, coeffs: &[f64]) -> Result<Element> {
        self.check(coeffs.len())?;
        Ok(Element::from_slice(coeffs))
    }

    fn check(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    /// Product `xy`, bilinear extension of the structure constants.
    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        debug_assert_eq!(x.dim(), self.dim);
        debug_assert_eq!(y.dim(), self.dim);
        let dim = self.dim;
        let mut out = Element::zeros(dim);
        let (xs, ys) = (x.coeffs(), y.coeffs());
        let o = out.coeffs_mut();
        for (s, &xv) in xs.iter().enumerate() {
            if xv == 0.0 {
                continue;
            }
            let row = &self.table[s * dim..(s + 1) * dim];
            for (t, &yv) in ys.iter().enumerate() {
                if yv == 0.0 {
                    continue;
                }
                let p = xv * yv;
                for &(u, c) in row[t].iter() {
                    o[u as usize] += c * p;
                }
            }
        }
        out
    }

    pub fn try_mul(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x.dim())?;
        self.check(y.dim())?;
        Ok(self.mul(x, y))
    }

    pub fn conj(&self, x: &Element) -> Element {
        let mut out = Element::zeros(self.dim);
        for (s, &c) in x.coeffs().iter().enumerate() {
            let (p, sign) = self.involution[s];
            out[p] += sign * c;
        }
        out
    }

    /// `t(x) = x + x^c`
    pub fn trace(&self, x: &Element) -> Element {
        x + &self.conj(x)
    }

    /// `n(x) = x x^c`
    pub fn qnorm(&self, x: &Element) -> Element {
        self.mul(x, &self.conj(x))
    }

    /// `[x, y, z] = (xy)z - x(yz)`
    pub fn associator(&self, x: &Element, y: &Element, z: &Element) -> Element {
        &self.mul(&self.mul(x, y), z) - &self.mul(x, &self.mul(y, z))
    }

    pub fn commutator(&self, x: &Element, y: &Element) -> Element {
        &self.mul(x, y) - &self.mul(y, x)
    }

    /// `t(x) = 0` and `n(x) = 1`, both within [`MEMBERSHIP_TOL`].
    pub fn is_imaginary_unit(&self, x: &Element) -> bool {
        let t = self.trace(x);
        let n = self.qnorm(x);
        t.max_abs() <= MEMBERSHIP_TOL && n.is_real(MEMBERSHIP_TOL) && (n.re() - 1.0).abs() <= MEMBERSHIP_TOL
    }

    /// Membership in the quadratic cone: reals, or real trace and norm with
    /// `4 n(x) > t(x)^2`.
    pub fn quadratic_cone_contains(&self, x: &Element) -> bool {
        if x.is_real(MEMBERSHIP_TOL) {
            return true;
        }
        let t = self.trace(x);
        let n = self.qnorm(x);
        t.is_real(MEMBERSHIP_TOL) && n.is_real(MEMBERSHIP_TOL) && 4.0 * n.re() > t.re() * t.re()
    }

    /// Matrix of `y -> x y` in the algebra basis.
    pub fn left_mul_matrix(&self, x: &Element) -> DMatrix<f64> {
        let dim = self.dim;
        let mut m = DMatrix::zeros(dim, dim);
        for t in 0..dim {
            let col = self.mul(x, &self.basis(t));
            for u in 0..dim {
                m[(u, t)] = col[u];
            }
        }
        m
    }

    /// Formats `v_s * v_t = ...` using basis names, e.g. `i*j = k`.
    pub fn format_product(&self, s: usize, t: usize) -> String {
        let prod = self.mul(&self.basis(s), &self.basis(t));
        format!("{}*{} = {}", self.basis_names[s], self.basis_names[t], self.format_element(&prod))
    }

    pub fn format_element(&self, x: &Element) -> String {
        let mut parts = Vec::new();
        for (u, &c) in x.coeffs().iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let name = &self.basis_names[u];
            let text = match (c, u) {
                (c, 0) => format!("{c}"),
                (1.0, _) => name.clone(),
                (-1.0, _) => format!("-{name}"),
                (c, _) => format!("{c}{name}"),
            };
            parts.push(text);
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ").replace("+ -", "- ")
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.name, self.dim)
    }
}

fn sparse_entries(e: &Element) -> SmallVec<[(u16, f64); 2]> {
    e.coeffs().iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(u, &c)| (u as u16, c)).collect()
}

fn blade_indices(b: u32) -> Vec<u32> {
    (0..32).filter(|i| b & (1 << i) != 0).map(|i| i + 1).collect()
}

/// Sign of `e_A e_B` in `R_{0,m}`: reordering swaps plus `e_i^2 = -1`.
fn clifford_sign(a: u32, b: u32) -> f64 {
    let mut swaps = 0u32;
    let mut rest = a >> 1;
    while rest != 0 {
        swaps += (rest & b).count_ones();
        rest >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Sampled estimate of the best constant `C` with `|xy| <= C |x||y|` for
/// `x` in a hypercomplex subspace and `y` in the algebra.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormBound {
    pub constant: f64,
    pub samples: usize,
}

/// Maximizes the operator norm of left multiplication over unit `x` in the
/// subspace: dense random sampling followed by a shrinking-step local search
/// around the best samples.
pub fn norm_bound_constant(sub: &Subspace, samples: usize, seed: u64) -> NormBound {
    let alg = sub.algebra();
    let block = sub.block_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let op_norm = |coords: &[f64]| -> f64 {
        let x = sub.embed_block(coords);
        let m = alg.left_mul_matrix(&x);
        let gram = m.transpose() * &m;
        let eig = nalgebra::SymmetricEigen::new(gram);
        eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).sqrt()
    };
    let normalize = |v: &mut Vec<f64>| {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= n);
    };
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(samples + block);
    for s in 0..block {
        let mut v = vec![0.0; block];
        v[s] = 1.0;
        scored.push((op_norm(&v), v));
    }
    for _ in 0..samples {
        let mut v: Vec<f64> = (0..block).map(|_| rng.sample(StandardNormal)).collect();
        normalize(&mut v);
        scored.push((op_norm(&v), v));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].0;
    for (score, start) in scored.iter().take(4) {
        let (mut cur, mut cur_v) = (*score, start.clone());
        let mut step = 0.1;
        while step > 1e-6 {
            let mut improved = false;
            for _ in 0..8 {
                let mut cand: Vec<f64> =
                    cur_v.iter().map(|c| c + step * rng.sample::<f64, _>(StandardNormal)).collect();
                normalize(&mut cand);
                let val = op_norm(&cand);
                if val > cur {
                    cur = val;
                    cur_v = cand;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(cur);
    }
    NormBound { constant: best.max(1.0), samples: scored.len() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quaternion_table() {
        let h = Algebra::quaternions();
        let (i, j, k) = (h.basis(1), h.basis(2), h.basis(3));
        assert_eq!(h.mul(&i, &j), k);
        assert_eq!(h.mul(&j, &i), -k.clone());
        assert_eq!(h.mul(&j, &k), i);
        assert_eq!(h.mul(&k, &i), j);
        assert_eq!(h.mul(&i, &i), h.scalar(-1.0));
        assert_eq!(h.format_product(1, 2), "i*j = k");
    }

    #[test]
    fn clifford_anticommutation() {
        let cl = Algebra::clifford(2).unwrap();
        assert_eq!(cl.basis_names(), &["1", "e1", "e2", "e12"]);
        let (e1, e2) = (cl.basis(1), cl.basis(2));
        let anti = &cl.mul(&e1, &e2) + &cl.mul(&e2, &e1);
        assert_eq!(anti, cl.zero());
        assert_eq!(cl.mul(&e1, &e1), cl.scalar(-1.0));
        assert_eq!(cl.mul(&e1, &e2), cl.basis(3));
    }

    #[test]
    fn clifford_conjugation_signs() {
        let cl = Algebra::clifford(3).unwrap();
        // grade 1 and 2 flip sign, grade 3 keeps it
        assert_eq!(cl.conj(&cl.basis(1)), -cl.basis(1));
        let e12 = cl.mul(&cl.basis(1), &cl.basis(2));
        assert_eq!(cl.conj(&e12), -e12.clone());
        let e123 = cl.mul(&e12, &cl.basis(3));
        assert_eq!(cl.conj(&e123), e123);
    }

    #[test]
    fn octonions_are_not_associative() {
        let o = Algebra::octonions();
        let mut found = false;
        for s in 1..8 {
            for t in 1..8 {
                for u in 1..8 {
                    let a = o.associator(&o.basis(s), &o.basis(t), &o.basis(u));
                    if a.max_abs() > 0.5 {
                        found = true;
                    }
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn builtins_validate() {
        for alg in [
            Algebra::complex(),
            Algebra::quaternions(),
            Algebra::octonions(),
            Algebra::clifford(1).unwrap(),
            Algebra::clifford(2).unwrap(),
            Algebra::clifford(3).unwrap(),
            Algebra::clifford(4).unwrap(),
        ] {
            alg.validate().unwrap();
        }
    }

    #[test]
    fn trace_and_norm() {
        let h = Algebra::quaternions();
        assert_eq!(h.trace(&h.basis(1)), h.zero());
        let x = h.element(&[2.0, 3.0, 0.0, 0.0]).unwrap();
        assert_eq!(h.qnorm(&x), h.scalar(13.0));
        assert!(h.is_imaginary_unit(&h.basis(2)));
        assert!(!h.is_imaginary_unit(&h.element(&[0.0, 2.0, 0.0, 0.0]).unwrap()));
    }

    #[test]
    fn cone_membership() {
        let h = Algebra::quaternions();
        assert!(h.quadratic_cone_contains(&h.element(&[0.3, -1.0, 2.0, 0.5]).unwrap()));
        let cl = Algebra::clifford(3).unwrap();
        let mut para = cl.one();
        para[1] = 1.0;
        assert!(cl.quadratic_cone_contains(&para));
        // 1 + e1 + e23: trace is real but the norm picks up an e123 part
        let mut x = cl.one();
        x[1] = 1.0;
        x[6] = 1.0;
        assert!(!cl.quadratic_cone_contains(&x));
        assert!(cl.quadratic_cone_contains(&cl.scalar(-4.0)));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let h = Algebra::quaternions();
        let bad = Element::zeros(3);
        assert!(matches!(h.try_mul(&bad, &h.one()), Err(Error::DimensionMismatch { expected: 4, got: 3 })));
        assert!(h.element(&[1.0]).is_err());
    }

    #[test]
    fn file_roundtrip_and_validation() {
        let h = Algebra::quaternions();
        let text = serde_json::to_string(&h.to_description()).unwrap();
        let back = Algebra::from_json_str(&text).unwrap();
        assert_eq!(back.mul(&back.basis(1), &back.basis(2)), back.basis(3));

        // break the unit
        let mut desc = h.to_description();
        desc.structure.retain(|&(s, t, _, _)| !(s == 0 && t == 2));
        let err = Algebra::from_description(&desc).unwrap_err();
        assert!(matches!(err, Error::InvalidAlgebra { ref invariant, .. } if invariant == "unit"));

        // a commutative-looking but wrong involution
        let mut desc = h.to_description();
        for entry in desc.involution.iter_mut() {
            entry.2 = 1.0;
        }
        let err = Algebra::from_description(&desc).unwrap_err();
        assert!(matches!(err, Error::InvalidAlgebra { ref invariant, .. } if invariant == "anti-homomorphism"));
    }

    #[test]
    fn sedenion_like_table_fails_alternativity() {
        // doubling the octonions gives the sedenions, which are not alternative
        let o = Algebra::octonions();
        let names = (0..16).map(|i| format!("s{i}")).collect();
        let sed = Algebra::cayley_dickson(&o, "sedenions", names);
        let err = sed.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidAlgebra { ref invariant, .. } if invariant == "alternativity"));
    }
}
