//! Direction rules on unit spheres `S^k` in `R^{k+1}`.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::gauss;

/// Weighted direction set; weights sum to the sphere area.
pub(crate) type Directions = Vec<(Vec<f64>, f64)>;

/// Tensor rule on `S^k`, recursing on `S^{k-1}` through the polar angle
/// `psi`. The polar rule is exact for polynomials of degree `2q - 1` in
/// `cos psi`: Gauss-Legendre in `cos psi` on `S^2`, Gauss-Chebyshev of the
/// second kind on `S^3`. `S^1` uses `2q` equispaced angles.
pub(crate) fn sphere_tensor(k: usize, q: usize) -> Directions {
    if k == 0 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    if k == 1 {
        let n = 2 * q;
        let w = 2.0 * PI / n as f64;
        return (0..n)
            .map(|i| {
                let phi = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                (vec![phi.cos(), phi.sin()], w)
            })
            .collect();
    }
    let polar: Vec<(f64, f64)> = match k {
        2 => gauss::rule(q).mapped(-1.0, 1.0).collect(),
        3 => (1..=q)
            .map(|i| {
                let psi = PI * i as f64 / (q + 1) as f64;
                (psi.cos(), PI / (q + 1) as f64 * psi.sin().powi(2))
            })
            .collect(),
        _ => gauss::rule(q).mapped(0.0, PI).map(|(psi, w)| (psi.cos(), w * psi.sin().powi(k as i32 - 1))).collect(),
    };
    let inner = sphere_tensor(k - 1, q);
    let mut out = Vec::with_capacity(polar.len() * inner.len());
    for (c, wc) in polar {
        let s = (1.0 - c * c).max(0.0).sqrt();
        for (p, wp) in &inner {
            let mut v = Vec::with_capacity(k + 1);
            v.push(c);
            v.extend(p.iter().map(|x| s * x));
            out.push((v, wc * wp));
        }
    }
    out
}

/// Uniform random direction in `R^dim` from normalized Gaussians.
pub(crate) fn random_direction<R: Rng>(rng: &mut R, dim: usize, out: &mut [f64]) {
    loop {
        let mut n2 = 0.0;
        for o in out.iter_mut().take(dim) {
            let g: f64 = rng.sample(StandardNormal);
            *o = g;
            n2 += g * g;
        }
        if n2 > 1e-24 {
            let inv = 1.0 / n2.sqrt();
            out.iter_mut().take(dim).for_each(|o| *o *= inv);
            return;
        }
    }
}

/// Orthonormal basis of the complement of the unit vector `pole`.
pub(crate) fn complement_frame(pole: &[f64]) -> Vec<Vec<f64>> {
    let d = pole.len();
    let skip = (0..d).max_by(|&a, &b| pole[a].abs().total_cmp(&pole[b].abs())).unwrap_or(0);
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for e in (0..d).filter(|&e| e != skip) {
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        for basis in std::iter::once(pole).chain(frame.iter().map(|f| f.as_slice())) {
            let dot: f64 = v.iter().zip(basis).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(basis).for_each(|(a, b)| *a -= dot * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= n);
        frame.push(v);
    }
    frame
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::sphere_area;

    #[test]
    fn tensor_areas() {
        for k in 0..4 {
            let dirs = sphere_tensor(k, 10);
            let total: f64 = dirs.iter().map(|(_, w)| w).sum();
            assert!((total - sphere_area(k + 1)).abs() < 1e-12, "k = {k}");
            assert!(dirs.iter().all(|(v, _)| (v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn tensor_second_moment() {
        // int_{S^3} y_2^2 = sigma_4 / 4
        let dirs = sphere_tensor(3, 8);
        let m: f64 = dirs.iter().map(|(v, w)| w * v[2] * v[2]).sum();
        assert!((m - sphere_area(4) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn frame_is_orthonormal() {
        let pole = [0.6, 0.0, -0.8, 0.0];
        let f = complement_frame(&pole);
        assert_eq!(f.len(), 3);
        for (i, a) in f.iter().enumerate() {
            let dp: f64 = a.iter().zip(&pole).map(|(x, y)| x * y).sum();
            assert!(dp.abs() < 1e-15);
            for (j, b) in f.iter().enumerate() {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }
}
