//! Central finite differences for algebra-valued maps on `R^N`.

use crate::algebra::Element;
use crate::error::{Error, Result};

/// Step control for first derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdOptions {
    /// Absolute step; `None` uses [`default_step`].
    pub h: Option<f64>,
    /// One Richardson level combining steps `h` and `h/2`.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions { h: None, richardson: true }
    }
}

impl FdOptions {
    pub fn with_step(h: f64) -> Self {
        FdOptions { h: Some(h), richardson: true }
    }

    pub fn plain(h: f64) -> Self {
        FdOptions { h: Some(h), richardson: false }
    }

    pub fn step_at(&self, x: &[f64]) -> f64 {
        self.h.unwrap_or_else(|| default_step(x))
    }
}

/// `1e-3 * max(1, |x|)`.
pub fn default_step(x: &[f64]) -> f64 {
    1e-3 * x.iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0)
}

/// Default step for second derivatives, larger to keep roundoff below
/// truncation.
pub fn default_second_step(x: &[f64]) -> f64 {
    5e-3 * x.iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0)
}

fn shifted<F>(f: &F, x: &[f64], k: usize, delta: f64, buf: &mut Vec<f64>) -> Result<Element>
where
    F: Fn(&[f64]) -> Element + ?Sized,
{
    buf.clear();
    buf.extend_from_slice(x);
    buf[k] += delta;
    let v = f(buf);
    if !v.is_finite() {
        return Err(Error::NonFiniteValue(buf.clone()));
    }
    Ok(v)
}

fn check_step(x: &[f64], k: usize, h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() || x[k] + 0.25 * h == x[k] {
        return Err(Error::StepUnderflow(h));
    }
    Ok(())
}

/// Fourth-order central stencil; also returns the second-order central
/// difference built from the inner pair.
fn stencil<F>(f: &F, x: &[f64], k: usize, h: f64, buf: &mut Vec<f64>) -> Result<(Element, Element)>
where
    F: Fn(&[f64]) -> Element + ?Sized,
{
    let p2 = shifted(f, x, k, 2.0 * h, buf)?;
    let p1 = shifted(f, x, k, h, buf)?;
    let m1 = shifted(f, x, k, -h, buf)?;
    let m2 = shifted(f, x, k, -2.0 * h, buf)?;
    let mut d4 = &p1 - &m1;
    d4 = d4 * 8.0;
    d4 -= &p2;
    d4 += &m2;
    let d4 = d4 * (1.0 / (12.0 * h));
    let d2 = (&p1 - &m1) * (1.0 / (2.0 * h));
    Ok((d4, d2))
}

/// `df/dx_k` with an error estimate (max-abs of the stencil disagreement).
pub fn partial<F>(f: &F, x: &[f64], k: usize, opts: &FdOptions) -> Result<(Element, f64)>
where
    F: Fn(&[f64]) -> Element + ?Sized,
{
    let h = opts.step_at(x);
    check_step(x, k, h)?;
    let mut buf = Vec::with_capacity(x.len());
    let (d_h, d2) = stencil(f, x, k, h, &mut buf)?;
    if !opts.richardson {
        let err = (&d_h - &d2).max_abs();
        return Ok((d_h, err));
    }
    let (d_half, _) = stencil(f, x, k, 0.5 * h, &mut buf)?;
    let mut r = d_half.clone() * 16.0;
    r -= &d_h;
    let r = r * (1.0 / 15.0);
    let err = (&r - &d_half).max_abs();
    Ok((r, err))
}

/// `d^2 f / dx_k^2` by the fourth-order five-point stencil.
pub fn second_partial<F>(f: &F, x: &[f64], k: usize, h: f64) -> Result<Element>
where
    F: Fn(&[f64]) -> Element + ?Sized,
{
    check_step(x, k, h)?;
    let mut buf = Vec::with_capacity(x.len());
    let p2 = shifted(f, x, k, 2.0 * h, &mut buf)?;
    let p1 = shifted(f, x, k, h, &mut buf)?;
    let c = shifted(f, x, k, 0.0, &mut buf)?;
    let m1 = shifted(f, x, k, -h, &mut buf)?;
    let m2 = shifted(f, x, k, -2.0 * h, &mut buf)?;
    let mut acc = (&p1 + &m1) * 16.0;
    acc -= &p2;
    acc -= &m2;
    acc.axpy(-30.0, &c);
    Ok(acc * (1.0 / (12.0 * h * h)))
}

/// Scalar convenience wrapper around [`partial`].
pub fn partial_scalar<F>(f: &F, x: &[f64], k: usize, opts: &FdOptions) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let g = |y: &[f64]| Element::scalar(1, f(y));
    let (v, e) = partial(&g, x, k, opts)?;
    Ok((v[0], e))
}

pub fn second_partial_scalar<F>(f: &F, x: &[f64], k: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let g = |y: &[f64]| Element::scalar(1, f(y));
    Ok(second_partial(&g, x, k, h)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_smooth_function() {
        let f = |x: &[f64]| Element::from_slice(&[x[0].sin() * x[1], x[1].exp()]);
        let x = [0.3, -0.7];
        let (d0, err) = partial(&f, &x, 0, &FdOptions::default()).unwrap();
        assert!((d0[0] - 0.3f64.cos() * -0.7).abs() < 1e-12);
        assert!(err < 1e-9);
        let (d1, _) = partial(&f, &x, 1, &FdOptions::default()).unwrap();
        assert!((d1[1] - (-0.7f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn second_derivative() {
        let g = |x: &[f64]| x[0].powi(4) + x[0] * x[1];
        let x = [0.5, 2.0];
        let d = second_partial_scalar(&g, &x, 0, default_second_step(&x)).unwrap();
        assert!((d - 12.0 * 0.25).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_steps() {
        let f = |x: &[f64]| Element::scalar(1, x[0]);
        assert!(matches!(partial(&f, &[1.0], 0, &FdOptions::with_step(0.0)), Err(Error::StepUnderflow(_))));
        assert!(matches!(partial(&f, &[1e20], 0, &FdOptions::with_step(1e-3)), Err(Error::StepUnderflow(_))));
    }

    #[test]
    fn non_finite_values_propagate() {
        let g = |_: &[f64]| Element::scalar(1, f64::NAN);
        assert!(matches!(partial(&g, &[0.0], 0, &FdOptions::default()), Err(Error::NonFiniteValue(_))));
    }
}
