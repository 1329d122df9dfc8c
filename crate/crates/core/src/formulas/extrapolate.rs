//! Limits of sequences: polynomial extrapolation in `h` and power-law fits
//! in `eps`.

use serde::{Deserialize, Serialize};

use crate::algebra::Element;
use crate::error::{Error, Result};

/// Value at `h = 0` of the interpolating polynomial through `(h_k, v_k)`,
/// by Neville's scheme. The error estimate is the distance to the same
/// extrapolation with the coarsest point dropped.
pub fn neville_zero(hs: &[f64], vals: &[Element]) -> Result<(Element, f64)> {
    if hs.is_empty() || hs.len() != vals.len() {
        return Err(Error::InvalidConfig("extrapolation needs matching, non-empty h and value lists".into()));
    }
    let n = hs.len();
    // p[i] holds P_{i..i+level}(0)
    let mut p: Vec<Element> = vals.to_vec();
    let mut prev_best = vals[n - 1].clone();
    for level in 1..n {
        for i in 0..n - level {
            let (hi, hj) = (hs[i], hs[i + level]);
            if hi == hj {
                return Err(Error::InvalidConfig("extrapolation abscissae must be distinct".into()));
            }
            let mut v = p[i].scale(-hj);
            v.axpy(hi, &p[i + 1]);
            p[i] = v.scale(1.0 / (hi - hj));
        }
        // after this level p[1] is P_{1..n-1}
        if level == n - 2 {
            prev_best = p[1].clone();
        }
    }
    let est = if n > 1 { (&p[0] - &prev_best).max_abs() } else { 0.0 };
    Ok((p[0].clone(), est))
}

/// Fit of `v(eps) = A + B eps^beta`; `beta` is `None` for constant data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerFit {
    pub limit: Element,
    pub coef: Element,
    pub beta: Option<f64>,
    /// Root-sum-square misfit over all components and points.
    pub residual: f64,
}

const BETA_RANGE: (f64, f64) = (0.25, 4.0);

fn fit_fixed_beta(eps: &[f64], vals: &[Element], beta: f64) -> (Element, Element, f64) {
    let dim = vals[0].dim();
    let u: Vec<f64> = eps.iter().map(|e| e.powf(beta)).collect();
    let n = u.len() as f64;
    let su: f64 = u.iter().sum();
    let suu: f64 = u.iter().map(|x| x * x).sum();
    let det = n * suu - su * su;
    let mut a = Element::zeros(dim);
    let mut b = Element::zeros(dim);
    let mut res2 = 0.0;
    for k in 0..dim {
        let sv: f64 = vals.iter().map(|v| v[k]).sum();
        let suv: f64 = vals.iter().zip(&u).map(|(v, x)| v[k] * x).sum();
        let bk = (n * suv - su * sv) / det;
        let ak = (sv - bk * su) / n;
        a[k] = ak;
        b[k] = bk;
        res2 += vals.iter().zip(&u).map(|(v, x)| (v[k] - ak - bk * x).powi(2)).sum::<f64>();
    }
    (a, b, res2.sqrt())
}

/// Least-squares fit of `A + B eps^beta` with `beta` free in `[1/4, 4]`:
/// a log-spaced scan followed by golden-section refinement.
pub fn fit_power_law(eps: &[f64], vals: &[Element]) -> Result<PowerFit> {
    if eps.len() < 3 || eps.len() != vals.len() {
        return Err(Error::InvalidConfig("power-law fit needs at least 3 (eps, value) pairs".into()));
    }
    let last = &vals[vals.len() - 1];
    let spread = vals.iter().map(|v| (v - last).max_abs()).fold(0.0, f64::max);
    if spread <= 1e-13 * (1.0 + last.max_abs()) {
        return Ok(PowerFit { limit: last.clone(), coef: Element::zeros(last.dim()), beta: None, residual: spread });
    }
    let misfit = |beta: f64| fit_fixed_beta(eps, vals, beta).2;
    let (lo, hi) = (BETA_RANGE.0.ln(), BETA_RANGE.1.ln());
    let steps = 48;
    let grid: Vec<f64> = (0..=steps).map(|i| (lo + (hi - lo) * i as f64 / steps as f64).exp()).collect();
    let best = (0..grid.len()).min_by(|&a, &b| misfit(grid[a]).total_cmp(&misfit(grid[b]))).unwrap_or(0);
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (misfit(c), misfit(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = misfit(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = misfit(d);
        }
    }
    let beta = if fc < fd { c } else { d };
    let beta = if misfit(grid[best]) < misfit(beta) { grid[best] } else { beta };
    let (limit, coef, residual) = fit_fixed_beta(eps, vals, beta);
    Ok(PowerFit { limit, coef, beta: Some(beta), residual })
}
