//! Algebra-valued functions on `M^n`, Dirac operators and the test catalog.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::fd::{self, FdOptions};
use crate::hypercomplex::Subspace;
use crate::kernels::{cauchy_kernel_block, sphere_area};

pub type EvalFn = Arc<dyn Fn(&[f64]) -> Element + Send + Sync>;
/// `(j0, x) -> dbar_{j0+1} f(x)`, `j0` zero-based.
pub type DbarFn = Arc<dyn Fn(usize, &[f64]) -> Element + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Analytic,
    CInfinity,
    Ck(u32),
}

/// Axis-aligned box `[lo, hi]` in `R^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<BoundingBox> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidConfig("box needs lo < hi on every axis".into()));
        }
        Ok(BoundingBox { lo, hi })
    }

    pub fn cube(center: &[f64], half: f64) -> BoundingBox {
        BoundingBox { lo: center.iter().map(|c| c - half).collect(), hi: center.iter().map(|c| c + half).collect() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(c, (a, b))| *a <= *c && *c <= *b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Grows every side about the center by `factor` (0.1 adds 10%).
    pub fn inflate(&self, factor: f64) -> BoundingBox {
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for k in 0..lo.len() {
            let grow = 0.5 * factor * (hi[k] - lo[k]);
            lo[k] -= grow;
            hi[k] += grow;
        }
        BoundingBox { lo, hi }
    }

    /// Restriction to the coordinate range `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> BoundingBox {
        BoundingBox { lo: self.lo[range.clone()].to_vec(), hi: self.hi[range].to_vec() }
    }
}

/// An `A`-valued function on `M^n`.
#[derive(Clone)]
pub struct FieldFunction {
    pub label: String,
    pub smoothness: Smoothness,
    pub support: Option<BoundingBox>,
    dim: usize,
    eval: EvalFn,
    dbar: Option<DbarFn>,
}

impl fmt::Debug for FieldFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldFunction")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .field("support", &self.support)
            .field("dim", &self.dim)
            .field("analytic_dbar", &self.dbar.is_some())
            .finish()
    }
}

impl FieldFunction {
    pub fn new(label: impl Into<String>, dim: usize, smoothness: Smoothness, eval: EvalFn) -> FieldFunction {
        FieldFunction { label: label.into(), smoothness, support: None, dim, eval, dbar: None }
    }

    pub fn with_dbar(mut self, dbar: DbarFn) -> Self {
        self.dbar = Some(dbar);
        self
    }

    pub fn with_support(mut self, support: BoundingBox) -> Self {
        self.support = Some(support);
        self
    }

    /// Ambient real dimension the function is defined on.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_dbar(&self) -> bool {
        self.dbar.is_some()
    }

    /// Raw evaluation without finiteness checks.
    pub fn eval(&self, x: &[f64]) -> Element {
        (self.eval)(x)
    }

    pub fn eval_fn(&self) -> &EvalFn {
        &self.eval
    }

    pub fn value(&self, x: &[f64]) -> Result<Element> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let v = (self.eval)(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(x.to_vec()));
        }
        Ok(v)
    }

    /// Analytic `dbar_{j0+1} f(x)` when supplied.
    pub fn analytic_dbar(&self, j0: usize, x: &[f64]) -> Option<Element> {
        self.dbar.as_ref().map(|d| d(j0, x))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiracMethod {
    Analytic,
    Fd,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiracResult {
    pub value: Element,
    pub method: DiracMethod,
    pub est_error: f64,
}

fn block_range(sub: &Subspace, f: &FieldFunction, j: usize) -> Result<std::ops::Range<usize>> {
    let b = sub.block_len();
    let n = f.dim() / b;
    if !f.dim().is_multiple_of(b) {
        return Err(Error::DimensionMismatch { expected: b * n.max(1), got: f.dim() });
    }
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, n });
    }
    Ok((j - 1) * b..j * b)
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    LeftConj,
    Right,
}

fn fd_dirac(
    sub: &Subspace,
    f: &FieldFunction,
    j: usize,
    x: &[f64],
    opts: &FdOptions,
    side: Side,
) -> Result<DiracResult> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: x.len() });
    }
    let range = block_range(sub, f, j)?;
    let alg = sub.algebra();
    let eval = |y: &[f64]| f.eval(y);
    let mut acc = alg.zero();
    let mut err = 0.0;
    for (s, k) in range.enumerate() {
        let (d, e) = fd::partial(&eval, x, k, opts)?;
        let term = match side {
            Side::Left => alg.mul(sub.v(s), &d),
            Side::LeftConj => alg.mul(sub.v_conj(s), &d),
            Side::Right => alg.mul(&d, sub.v(s)),
        };
        acc += &term;
        err += e;
    }
    Ok(DiracResult { value: acc, method: DiracMethod::Fd, est_error: err })
}

/// `dbar_j f(x) = sum_s v_s df/dx_{j,s}`, analytic when available.
pub fn dirac(sub: &Subspace, f: &FieldFunction, j: usize, x: &[f64], opts: &FdOptions) -> Result<DiracResult> {
    block_range(sub, f, j)?;
    if let Some(v) = f.analytic_dbar(j - 1, x) {
        if x.len() != f.dim() {
            return Err(Error::DimensionMismatch { expected: f.dim(), got: x.len() });
        }
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(x.to_vec()));
        }
        return Ok(DiracResult { value: v, method: DiracMethod::Analytic, est_error: 0.0 });
    }
    fd_dirac(sub, f, j, x, opts, Side::Left)
}

/// Finite-difference `dbar_j f(x)`, ignoring any analytic derivative.
pub fn dirac_fd(sub: &Subspace, f: &FieldFunction, j: usize, x: &[f64], opts: &FdOptions) -> Result<DiracResult> {
    fd_dirac(sub, f, j, x, opts, Side::Left)
}

/// `d_j f(x) = sum_s v_s^c df/dx_{j,s}`.
pub fn conj_dirac(sub: &Subspace, f: &FieldFunction, j: usize, x: &[f64], opts: &FdOptions) -> Result<DiracResult> {
    fd_dirac(sub, f, j, x, opts, Side::LeftConj)
}

/// `f dbar_j = sum_s (df/dx_{j,s}) v_s`.
pub fn right_dirac(sub: &Subspace, f: &FieldFunction, j: usize, x: &[f64], opts: &FdOptions) -> Result<DiracResult> {
    fd_dirac(sub, f, j, x, opts, Side::Right)
}

/// `Delta_j f(x)` as the trace of second differences in block `j`.
pub fn laplacian(sub: &Subspace, f: &FieldFunction, j: usize, x: &[f64], h: Option<f64>) -> Result<Element> {
    let range = block_range(sub, f, j)?;
    let h = h.unwrap_or_else(|| fd::default_second_step(x));
    let eval = |y: &[f64]| f.eval(y);
    let mut acc = sub.algebra().zero();
    for k in range {
        acc += &fd::second_partial(&eval, x, k, h)?;
    }
    Ok(acc)
}

/// `d_j (dbar_j f)(x)` by nesting the operators; the inner derivative is
/// analytic when available.
pub fn laplacian_by_factorization(sub: &Subspace, f: &FieldFunction, j: usize, x: &[f64], h: f64) -> Result<Element> {
    let inner_opts = FdOptions::plain(h);
    let sub_c = sub.clone();
    let fc = f.clone();
    let inner: EvalFn = Arc::new(move |y: &[f64]| match dirac(&sub_c, &fc, j, y, &inner_opts) {
        Ok(r) => r.value,
        Err(_) => Element::scalar(sub_c.algebra().dim(), f64::NAN),
    });
    let g = FieldFunction::new("dbar f", f.dim(), f.smoothness, inner);
    Ok(conj_dirac(sub, &g, j, x, &FdOptions::plain(h))?.value)
}

/// Monogenicity residual `max_j |dbar_j f(x)|` against `tol`.
pub fn is_monogenic_at(
    sub: &Subspace,
    f: &FieldFunction,
    x: &[f64],
    tol: f64,
    opts: &FdOptions,
) -> Result<(bool, f64)> {
    let n = f.dim() / sub.block_len();
    let mut residual: f64 = 0.0;
    for j in 1..=n {
        residual = residual.max(dirac(sub, f, j, x, opts)?.value.norm());
    }
    Ok((residual < tol, residual))
}

/// Names and parameters of the built-in test functions.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogSpec {
    /// Algebra coefficients, zero-padded to the algebra dimension.
    Constant(Vec<f64>),
    Coordinate {
        j: usize,
        s: usize,
    },
    Fueter {
        j: usize,
        s: usize,
    },
    /// `y -> E(y_j - a)` with `a` given as block coordinates.
    CauchyPullback {
        j: usize,
        a: Vec<f64>,
    },
    PolyX0Sq {
        j: usize,
    },
    /// `a exp(-1/(1 - |x-c|^2/R^2))` inside the ball, zero outside.
    Bump {
        center: Vec<f64>,
        radius: f64,
        a: Vec<f64>,
    },
    /// `x_k v_l - x_l v_k - x_k' v_l' + x_l' v_k'` in block `j`, for the first
    /// two distinct pairs with `v_k v_l = v_k' v_l'`. Monogenic; exists only
    /// when the basis has such pairs (octonions), and separates the two
    /// parenthesizations of the kernel products.
    SkewPair {
        j: usize,
    },
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad number `{t}`"))))
        .collect()
}

fn parse_usize_pair(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::InvalidConfig(format!("expected `j,s`, got `{s}`")));
    }
    let p = |t: &str| t.trim().parse::<usize>().map_err(|_| Error::InvalidConfig(format!("bad index `{t}`")));
    Ok((p(parts[0])?, p(parts[1])?))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|c| format!("{c}")).collect::<Vec<_>>().join(",")
}

impl FromStr for CatalogSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<CatalogSpec> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let args = args.trim();
        let usize_arg =
            |t: &str| t.trim().parse::<usize>().map_err(|_| Error::InvalidConfig(format!("bad index `{t}`")));
        match name.trim() {
            "constant" => Ok(CatalogSpec::Constant(if args.is_empty() { vec![1.0] } else { parse_list(args)? })),
            "coordinate" => {
                let (j, s) = parse_usize_pair(args)?;
                Ok(CatalogSpec::Coordinate { j, s })
            }
            "fueter" => {
                let (j, s) = parse_usize_pair(args)?;
                Ok(CatalogSpec::Fueter { j, s })
            }
            "cauchy_pullback" => {
                let (j, a) = args
                    .split_once(';')
                    .ok_or_else(|| Error::InvalidConfig(format!("expected `j;a0,a1,...`, got `{args}`")))?;
                Ok(CatalogSpec::CauchyPullback { j: usize_arg(j)?, a: parse_list(a)? })
            }
            "poly_x0_sq" => Ok(CatalogSpec::PolyX0Sq { j: usize_arg(args)? }),
            "skew_pair" => Ok(CatalogSpec::SkewPair { j: usize_arg(args)? }),
            "bump" => {
                let parts: Vec<&str> = args.split(';').collect();
                if parts.len() != 3 {
                    return Err(Error::InvalidConfig(format!("expected `center;radius;a`, got `{args}`")));
                }
                let radius = parts[1]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad radius `{}`", parts[1])))?;
                Ok(CatalogSpec::Bump { center: parse_list(parts[0])?, radius, a: parse_list(parts[2])? })
            }
            other => Err(Error::UnknownFunction(other.to_string())),
        }
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogSpec::Constant(a) => write!(f, "constant:{}", fmt_list(a)),
            CatalogSpec::Coordinate { j, s } => write!(f, "coordinate:{j},{s}"),
            CatalogSpec::Fueter { j, s } => write!(f, "fueter:{j},{s}"),
            CatalogSpec::CauchyPullback { j, a } => write!(f, "cauchy_pullback:{j};{}", fmt_list(a)),
            CatalogSpec::PolyX0Sq { j } => write!(f, "poly_x0_sq:{j}"),
            CatalogSpec::SkewPair { j } => write!(f, "skew_pair:{j}"),
            CatalogSpec::Bump { center, radius, a } => {
                write!(f, "bump:{};{radius};{}", fmt_list(center), fmt_list(a))
            }
        }
    }
}

impl Serialize for CatalogSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CatalogSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn padded(sub: &Subspace, a: &[f64]) -> Result<Element> {
    let dim = sub.algebra().dim();
    if a.len() > dim {
        return Err(Error::DimensionMismatch { expected: dim, got: a.len() });
    }
    let mut e = Element::zeros(dim);
    e.coeffs_mut()[..a.len()].copy_from_slice(a);
    Ok(e)
}

/// Two distinct ordered pairs `(k, l)`, `(k', l')` of imaginary basis
/// indices with `v_k v_l = v_k' v_l'`.
fn equal_product_pairs(sub: &Subspace) -> Option<((usize, usize), (usize, usize))> {
    let alg = sub.algebra();
    let m = sub.m();
    let mut seen: Vec<((usize, usize), Element)> = Vec::new();
    for k in 1..=m {
        for l in k + 1..=m {
            let p = alg.mul(sub.v(k), sub.v(l));
            for (pair, q) in &seen {
                if (&p - q).max_abs() < 1e-12 {
                    return Some((*pair, (k, l)));
                }
                if (&p + q).max_abs() < 1e-12 {
                    return Some((*pair, (l, k)));
                }
            }
            seen.push(((k, l), p));
        }
    }
    None
}

/// `exp(-1/(1-s))` for `s < 1`, else 0.
pub fn bump_profile(s: f64) -> f64 {
    if s < 1.0 {
        (-1.0 / (1.0 - s)).exp()
    } else {
        0.0
    }
}

/// Instantiates a catalog function on `M^n`.
pub fn catalog(sub: &Arc<Subspace>, n: usize, spec: &CatalogSpec) -> Result<FieldFunction> {
    let b = sub.block_len();
    let dim = b * n;
    let alg_dim = sub.algebra().dim();
    let check_j = |j: usize| -> Result<usize> {
        if j == 0 || j > n {
            Err(Error::IndexOutOfRange { index: j, n })
        } else {
            Ok(j - 1)
        }
    };
    let check_s = |s: usize| -> Result<usize> {
        if s > sub.m() {
            Err(Error::InvalidConfig(format!("component index {s} exceeds m = {}", sub.m())))
        } else {
            Ok(s)
        }
    };
    let label = spec.to_string();
    let zero_dbar: DbarFn = Arc::new(move |_, _| Element::zeros(alg_dim));
    let f = match spec {
        CatalogSpec::Constant(a) => {
            let a = padded(sub, a)?;
            FieldFunction::new(label, dim, Smoothness::Analytic, Arc::new(move |_| a.clone())).with_dbar(zero_dbar)
        }
        CatalogSpec::Coordinate { j, s } => {
            let (j0, s) = (check_j(*j)?, check_s(*s)?);
            let k = j0 * b + s;
            let vs = sub.v(s).clone();
            let eval: EvalFn = Arc::new(move |x| Element::scalar(alg_dim, x[k]));
            let dbar: DbarFn = Arc::new(move |jj, _| if jj == j0 { vs.clone() } else { Element::zeros(alg_dim) });
            FieldFunction::new(label, dim, Smoothness::Analytic, eval).with_dbar(dbar)
        }
        CatalogSpec::Fueter { j, s } => {
            let (j0, s) = (check_j(*j)?, check_s(*s)?);
            if s == 0 {
                return Err(Error::InvalidConfig("fueter variable needs s >= 1".into()));
            }
            let vs = sub.v(s).clone();
            let eval: EvalFn = Arc::new(move |x| {
                let mut out = vs.scale(-x[j0 * b]);
                out[0] += x[j0 * b + s];
                out
            });
            FieldFunction::new(label, dim, Smoothness::Analytic, eval).with_dbar(zero_dbar)
        }
        CatalogSpec::CauchyPullback { j, a } => {
            let j0 = check_j(*j)?;
            if a.len() != b {
                return Err(Error::DimensionMismatch { expected: b, got: a.len() });
            }
            let a = a.clone();
            let sub_c = sub.clone();
            let sigma = sphere_area(b);
            let eval: EvalFn = Arc::new(move |x| {
                let z: smallvec::SmallVec<[f64; 8]> = (0..b).map(|s| x[j0 * b + s] - a[s]).collect();
                cauchy_kernel_block(&sub_c, sigma, &z)
            });
            FieldFunction::new(label, dim, Smoothness::Analytic, eval).with_dbar(zero_dbar)
        }
        CatalogSpec::PolyX0Sq { j } => {
            let j0 = check_j(*j)?;
            let eval: EvalFn = Arc::new(move |x| Element::scalar(alg_dim, x[j0 * b] * x[j0 * b]));
            let dbar: DbarFn =
                Arc::new(move |jj, x| Element::scalar(alg_dim, if jj == j0 { 2.0 * x[j0 * b] } else { 0.0 }));
            FieldFunction::new(label, dim, Smoothness::Analytic, eval).with_dbar(dbar)
        }
        CatalogSpec::SkewPair { j } => {
            let j0 = check_j(*j)?;
            let ((k, l), (k2, l2)) = equal_product_pairs(sub).ok_or_else(|| {
                Error::InvalidConfig(format!("`{}` has no two basis pairs with equal products", sub.name()))
            })?;
            let terms: Vec<(usize, f64, Element)> = vec![
                (k, 1.0, sub.v(l).clone()),
                (l, -1.0, sub.v(k).clone()),
                (k2, -1.0, sub.v(l2).clone()),
                (l2, 1.0, sub.v(k2).clone()),
            ];
            let eval: EvalFn = Arc::new(move |x| {
                let mut out = Element::zeros(alg_dim);
                for (s, c, v) in &terms {
                    out.axpy(c * x[j0 * b + s], v);
                }
                out
            });
            FieldFunction::new(label, dim, Smoothness::Analytic, eval).with_dbar(zero_dbar)
        }
        CatalogSpec::Bump { center, radius, a } => {
            if center.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: center.len() });
            }
            if !(*radius > 0.0) {
                return Err(Error::InvalidConfig("bump radius must be positive".into()));
            }
            let a = padded(sub, a)?;
            let (c, r) = (center.clone(), *radius);
            let support = BoundingBox::cube(&c, r);
            let (c2, a2) = (c.clone(), a.clone());
            let eval: EvalFn = Arc::new(move |x| {
                let s: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum::<f64>() / (r * r);
                a.scale(bump_profile(s))
            });
            let sub_c = sub.clone();
            let dbar: DbarFn = Arc::new(move |j0, x| {
                let s: f64 = x.iter().zip(&c2).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum::<f64>() / (r * r);
                let alg = sub_c.algebra();
                if s >= 1.0 {
                    return alg.zero();
                }
                let psi = bump_profile(s);
                let coef = -psi / ((1.0 - s) * (1.0 - s)) * 2.0 / (r * r);
                let grad: smallvec::SmallVec<[f64; 8]> =
                    (0..b).map(|t| coef * (x[j0 * b + t] - c2[j0 * b + t])).collect();
                alg.mul(&sub_c.embed_block(&grad), &a2)
            });
            FieldFunction::new(label, dim, Smoothness::CInfinity, eval).with_dbar(dbar).with_support(support)
        }
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hcj() -> Arc<Subspace> {
        Arc::new(Subspace::preset("H-CJ").unwrap())
    }

    #[test]
    fn parse_roundtrip() {
        for s in [
            "constant:1,0,2",
            "fueter:1,1",
            "coordinate:2,0",
            "cauchy_pullback:1;2.5,0",
            "poly_x0_sq:2",
            "bump:0,0,0,0;0.5;1",
            "skew_pair:1",
        ] {
            let spec: CatalogSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!(matches!("nope:1".parse::<CatalogSpec>(), Err(Error::UnknownFunction(_))));
    }

    #[test]
    fn fueter_value() {
        let sub = Arc::new(Subspace::preset("H-full").unwrap());
        let f = catalog(&sub, 1, &"fueter:1,1".parse().unwrap()).unwrap();
        let v = f.value(&[3.0, 5.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.coeffs(), &[5.0, -3.0, 0.0, 0.0]);
    }

    #[test]
    fn bump_values() {
        let sub = hcj();
        let f = catalog(&sub, 2, &"bump:0,0,0,0;0.5;1".parse().unwrap()).unwrap();
        assert!((f.value(&[0.0; 4]).unwrap()[0] - (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(f.value(&[0.6, 0.0, 0.0, 0.0]).unwrap(), Element::zeros(4));
    }

    #[test]
    fn coordinate_dirac() {
        let sub = hcj();
        let f = catalog(&sub, 2, &"coordinate:1,1".parse().unwrap()).unwrap();
        let x = [0.2, 0.3, -0.1, 0.4];
        let r = dirac_fd(&sub, &f, 1, &x, &FdOptions::default()).unwrap();
        assert!((&r.value - sub.v(1)).max_abs() < 1e-10);
        let x0 = catalog(&sub, 2, &"coordinate:1,0".parse().unwrap()).unwrap();
        let (mono, res) = is_monogenic_at(&sub, &x0, &x, 1e-8, &FdOptions::default()).unwrap();
        assert!(!mono);
        assert!((res - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fueter_is_monogenic_by_fd() {
        let sub = hcj();
        let f = catalog(&sub, 2, &"fueter:2,1".parse().unwrap()).unwrap();
        let x = [0.2, 0.3, -0.1, 0.4];
        for j in 1..=2 {
            assert!(dirac_fd(&sub, &f, j, &x, &FdOptions::default()).unwrap().value.max_abs() < 1e-10);
        }
    }

    #[test]
    fn bad_index_rejected() {
        let sub = hcj();
        assert!(matches!(catalog(&sub, 2, &CatalogSpec::PolyX0Sq { j: 3 }), Err(Error::IndexOutOfRange { .. })));
        let f = catalog(&sub, 2, &CatalogSpec::PolyX0Sq { j: 1 }).unwrap();
        assert!(dirac(&sub, &f, 0, &[0.0; 4], &FdOptions::default()).is_err());
    }

    #[test]
    fn laplacian_two_ways() {
        let sub = Arc::new(Subspace::preset("H-full").unwrap());
        let f = catalog(&sub, 1, &"bump:0.1,0,0,0;0.9;1,2,0,-1".parse().unwrap()).unwrap();
        let x = [0.2, 0.1, -0.2, 0.15];
        let direct = laplacian(&sub, &f, 1, &x, None).unwrap();
        let composed = laplacian_by_factorization(&sub, &f, 1, &x, 1e-2).unwrap();
        assert!((&direct - &composed).max_abs() < 1e-5, "{direct:?} vs {composed:?}");
    }

    #[test]
    fn skew_pair_needs_nonassociative_basis() {
        let oct = Arc::new(Subspace::preset("O-full").unwrap());
        let f = catalog(&oct, 1, &CatalogSpec::SkewPair { j: 1 }).unwrap();
        let x = [0.1, -0.2, 0.3, 0.05, 0.4, -0.1, 0.2, 0.15];
        assert!(dirac_fd(&oct, &f, 1, &x, &FdOptions::default()).unwrap().value.max_abs() < 1e-10);
        assert!(f.value(&x).unwrap().norm() > 0.0);
        let quat = Arc::new(Subspace::preset("H-full").unwrap());
        assert!(matches!(catalog(&quat, 1, &CatalogSpec::SkewPair { j: 1 }), Err(Error::InvalidConfig(_))));
    }
}
