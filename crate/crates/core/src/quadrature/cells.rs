//! Tensor cells, Duffy pyramids and grids aligned with a singular point.

use smallvec::SmallVec;

use super::gauss;
use crate::error::Result;

/// How the ray parameter `t` of a pyramid is discretized.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Radial {
    /// One Gauss panel on `[0, 1]`; the Jacobian cancels the singularity.
    Plain,
    /// Panels graded geometrically toward `t = 0` for a target at distance
    /// `h` from the apex, off the cell.
    Graded { h: f64 },
    /// Principal-value exclusion `|y - apex| >= eps`, panels doubling from
    /// the cut.
    Excluded { eps: f64 },
}

type Breaks = SmallVec<[f64; 32]>;

/// Appends geometric panels `last, .., 1`, merging a short final panel.
fn push_until_one(out: &mut Breaks, mut next: impl FnMut(f64) -> f64) {
    loop {
        let last = *out.last().expect("non-empty breaks");
        let nxt = next(last);
        if nxt >= 1.0 || 1.0 - nxt < 0.5 * (nxt - last) {
            out.push(1.0);
            return;
        }
        out.push(nxt);
    }
}

/// Panel breakpoints in `t` for a ray of length `len`; empty when the whole
/// ray is excluded.
pub(crate) fn radial_breaks(radial: Radial, len: f64) -> Breaks {
    let mut out = Breaks::new();
    match radial {
        Radial::Plain => out.extend([0.0, 1.0]),
        Radial::Graded { h } => {
            let w0 = 0.5 * h / len;
            out.push(0.0);
            if w0 >= 0.25 {
                out.push(1.0);
            } else {
                let mut k = 0i32;
                push_until_one(&mut out, |_| {
                    k += 1;
                    w0 * (2f64.powi(k) - 1.0)
                });
            }
        }
        Radial::Excluded { eps } => {
            let t_lo = eps / len;
            if t_lo < 1.0 {
                out.push(t_lo);
                push_until_one(&mut out, |last| 2.0 * last);
            }
        }
    }
    out
}

/// Calls `f` on every point of the `q^k` tensor Gauss grid of `[lo, hi]`.
pub(crate) fn for_each_tensor(
    lo: &[f64],
    hi: &[f64],
    q: usize,
    f: &mut dyn FnMut(&[f64], f64) -> Result<()>,
) -> Result<()> {
    let k = lo.len();
    let rule = gauss::rule(q);
    let half: SmallVec<[f64; 16]> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let mid: SmallVec<[f64; 16]> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let scale: f64 = half.iter().product();
    let mut idx: SmallVec<[usize; 16]> = smallvec::smallvec![0; k];
    let mut pt: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; k];
    loop {
        let mut w = scale;
        for d in 0..k {
            pt[d] = mid[d] + half[d] * rule.nodes[idx[d]];
            w *= rule.weights[idx[d]];
        }
        f(&pt, w)?;
        let mut d = 0;
        loop {
            if d == k {
                return Ok(());
            }
            idx[d] += 1;
            if idx[d] < q {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// A `k`-dimensional integration cell in local coordinates.
#[derive(Clone, Debug)]
pub(crate) enum Cell {
    Tensor {
        lo: Vec<f64>,
        hi: Vec<f64>,
        q: usize,
    },
    /// Points `apex + t (p - apex)` for `p` on the facet `{y_axis = far}`
    /// of the box `[lo, hi]`.
    Pyramid {
        apex: Vec<f64>,
        axis: usize,
        far: f64,
        lo: Vec<f64>,
        hi: Vec<f64>,
        q: usize,
        qr: usize,
        radial: Radial,
    },
}

impl Cell {
    pub(crate) fn for_each(&self, f: &mut dyn FnMut(&[f64], f64) -> Result<()>) -> Result<()> {
        match self {
            Cell::Tensor { lo, hi, q } => for_each_tensor(lo, hi, *q, f),
            Cell::Pyramid { apex, axis, far, lo, hi, q, qr, radial } => {
                let k = apex.len();
                let height = (far - apex[*axis]).abs();
                let flo: SmallVec<[f64; 16]> = (0..k).filter(|&d| d != *axis).map(|d| lo[d]).collect();
                let fhi: SmallVec<[f64; 16]> = (0..k).filter(|&d| d != *axis).map(|d| hi[d]).collect();
                let rule = gauss::rule(*qr);
                let mut facet: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; k];
                let mut y: SmallVec<[f64; 16]> = smallvec::smallvec![0.0; k];
                let mut on_facet = |fp: &[f64], wf: f64| -> Result<()> {
                    let mut it = fp.iter();
                    for d in 0..k {
                        facet[d] = if d == *axis { *far } else { *it.next().expect("facet coordinate") };
                    }
                    let len = facet.iter().zip(apex).map(|(p, a)| (p - a) * (p - a)).sum::<f64>().sqrt();
                    let breaks = radial_breaks(*radial, len);
                    for panel in breaks.windows(2) {
                        for (t, wt) in rule.mapped(panel[0], panel[1]) {
                            for d in 0..k {
                                y[d] = apex[d] + t * (facet[d] - apex[d]);
                            }
                            f(&y, wf * wt * t.powi(k as i32 - 1) * height)?;
                        }
                    }
                    Ok(())
                };
                if k == 1 {
                    on_facet(&[], 1.0)
                } else {
                    for_each_tensor(&flo, &fhi, *q, &mut on_facet)
                }
            }
        }
    }
}

/// Breakpoints of `[lo, hi]` at `apex + k w`; returns the breaks and the
/// index of the break equal to `apex`.
fn axis_breaks(lo: f64, hi: f64, apex: f64, w: f64) -> (Vec<f64>, usize) {
    let tiny = 1e-12 * w;
    let mut below = Vec::new();
    let mut b = apex - w;
    while b > lo + tiny {
        below.push(b);
        b -= w;
    }
    let mut out = Vec::new();
    if apex - lo > tiny {
        out.push(lo);
    }
    out.extend(below.into_iter().rev());
    let center = out.len();
    out.push(apex);
    let mut b = apex + w;
    while b < hi - tiny {
        out.push(b);
        b += w;
    }
    if hi - apex > tiny {
        out.push(hi);
    }
    (out, center)
}

/// Tensor cells of `[lo, hi]` on a grid of width `w` aligned with `apex`;
/// the cells having `apex` as a vertex become pyramids with the given
/// radial treatment. `apex` must lie in the closed box.
pub(crate) fn aligned_cells(
    lo: &[f64],
    hi: &[f64],
    apex: &[f64],
    w: f64,
    q: usize,
    qr: usize,
    radial: Radial,
) -> Vec<Cell> {
    let k = lo.len();
    let axes: Vec<(Vec<f64>, usize)> = (0..k).map(|d| axis_breaks(lo[d], hi[d], apex[d], w)).collect();
    let counts: Vec<usize> = axes.iter().map(|(b, _)| b.len() - 1).collect();
    let mut cells = Vec::new();
    let mut idx = vec![0usize; k];
    if counts.contains(&0) {
        return cells;
    }
    loop {
        let clo: Vec<f64> = (0..k).map(|d| axes[d].0[idx[d]]).collect();
        let chi: Vec<f64> = (0..k).map(|d| axes[d].0[idx[d] + 1]).collect();
        let adjacent = (0..k).all(|d| idx[d] + 1 == axes[d].1 || idx[d] == axes[d].1);
        if adjacent {
            for axis in 0..k {
                let far = if idx[axis] == axes[axis].1 { chi[axis] } else { clo[axis] };
                cells.push(Cell::Pyramid {
                    apex: apex.to_vec(),
                    axis,
                    far,
                    lo: clo.clone(),
                    hi: chi.clone(),
                    q,
                    qr,
                    radial,
                });
            }
        } else {
            cells.push(Cell::Tensor { lo: clo, hi: chi, q });
        }
        let mut d = 0;
        loop {
            if d == k {
                return cells;
            }
            idx[d] += 1;
            if idx[d] < counts[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// `s^k` equal sub-boxes of `[lo, hi]` with `q`-point tensor rules.
pub(crate) fn split_cells(lo: &[f64], hi: &[f64], s: usize, q: usize) -> Vec<Cell> {
    let k = lo.len();
    let mut cells = Vec::new();
    let mut idx = vec![0usize; k];
    loop {
        let clo: Vec<f64> = (0..k).map(|d| lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / s as f64).collect();
        let chi: Vec<f64> = (0..k).map(|d| lo[d] + (hi[d] - lo[d]) * (idx[d] + 1) as f64 / s as f64).collect();
        cells.push(Cell::Tensor { lo: clo, hi: chi, q });
        let mut d = 0;
        loop {
            if d == k {
                return cells;
            }
            idx[d] += 1;
            if idx[d] < s {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(cells: &[Cell], g: impl Fn(&[f64]) -> f64) -> f64 {
        let mut total = 0.0;
        for c in cells {
            c.for_each(&mut |y, w| {
                total += w * g(y);
                Ok(())
            })
            .unwrap();
        }
        total
    }

    #[test]
    fn aligned_grid_measures_volume() {
        let lo = [-1.0, -1.0, -1.0];
        let hi = [1.0, 2.0, 1.0];
        let cells = aligned_cells(&lo, &hi, &[0.3, -0.2, 1.0], 0.5, 6, 6, Radial::Plain);
        let v = integrate(&cells, |_| 1.0);
        assert!((v - 12.0).abs() < 1e-10, "{v}");
        let m = integrate(&cells, |y| y[0] * y[0] + y[1]);
        let exact = (2.0 / 3.0) * 3.0 * 2.0 + 2.0 * (0.5 * (4.0 - 1.0)) * 2.0;
        assert!((m - exact).abs() < 1e-10, "{m} vs {exact}");
    }

    #[test]
    fn duffy_cancels_point_singularity() {
        // 1/|y| over [-1,1]^2 is 8 ln(1 + sqrt 2); after the Duffy map only a smooth facet integrand remains
        let cells = aligned_cells(&[-1.0, -1.0], &[1.0, 1.0], &[0.0, 0.0], 1.0, 8, 8, Radial::Plain);
        let v = integrate(&cells, |y| 1.0 / (y[0] * y[0] + y[1] * y[1]).sqrt());
        let exact = 8.0 * (1.0 + 2f64.sqrt()).ln();
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn excluded_disc_is_removed() {
        // area of [-1,1]^2 minus the disc of radius 0.25
        let cells = aligned_cells(&[-1.0, -1.0], &[1.0, 1.0], &[0.0, 0.0], 0.5, 12, 12, Radial::Excluded { eps: 0.25 });
        let v = integrate(&cells, |_| 1.0);
        let exact = 4.0 - std::f64::consts::PI * 0.0625;
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn graded_panels_resolve_near_singularity() {
        // int over [-1,1]^2 of h/(|y|^2+h^2)^{3/2}, the flat-plate potential of a point at height h
        let h = 1e-3;
        let cells = aligned_cells(&[-1.0, -1.0], &[1.0, 1.0], &[0.0, 0.0], 0.5, 10, 10, Radial::Graded { h });
        let v = integrate(&cells, |y| h / (y[0] * y[0] + y[1] * y[1] + h * h).powf(1.5));
        // solid angle of the square seen from height h: 4 atan(1/(h sqrt(2 + h^2)))
        let exact = 4.0 * (1.0 / (h * (2.0 + h * h).sqrt())).atan();
        assert!((v - exact).abs() < 1e-9, "{v} vs {exact}");
    }

    #[test]
    fn breaks_cover_unit_interval() {
        let b = radial_breaks(Radial::Graded { h: 0.01 }, 1.0);
        assert_eq!(b[0], 0.0);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.windows(2).all(|w| w[1] > w[0]));
        assert!(radial_breaks(Radial::Excluded { eps: 2.0 }, 1.0).is_empty());
    }
}
