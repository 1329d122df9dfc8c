use std::sync::Arc;

use proptest::prelude::*;

use alterna::algebra::{build_algebra, Algebra, AlgebraKind, Element};
use alterna::fd::FdOptions;
use alterna::functions::{
    catalog, dirac, dirac_fd, laplacian, laplacian_by_factorization, CatalogSpec, EvalFn, FieldFunction, Smoothness,
};
use alterna::hypercomplex::PRESETS;
use alterna::quadrature::{integrate_boundary, integrate_volume, DomainSpec, QuadratureConfig, Target};
use alterna::{KernelContext, Subspace};

fn algebras() -> Vec<Arc<Algebra>> {
    [
        AlgebraKind::Complex,
        AlgebraKind::Quaternions,
        AlgebraKind::Octonions,
        AlgebraKind::Clifford(2),
        AlgebraKind::Clifford(3),
    ]
    .iter()
    .map(|k| build_algebra(k).unwrap())
    .collect()
}

fn coeffs(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, max_dim)
}

fn el(alg: &Algebra, c: &[f64]) -> Element {
    Element::from_slice(&c[..alg.dim()])
}

/// Dyadic coefficients keep products exact in floating point.
fn dyadic(max_dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-8i32..=8).prop_map(|k| k as f64 / 8.0), max_dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn involution_reverses_products(a in 0usize..5, x in coeffs(8), y in coeffs(8)) {
        let alg = &algebras()[a];
        let (x, y) = (el(alg, &x), el(alg, &y));
        let lhs = alg.conj(&alg.mul(&x, &y));
        let rhs = alg.mul(&alg.conj(&y), &alg.conj(&x));
        prop_assert!((&lhs - &rhs).max_abs() < 1e-14);
        prop_assert!((&alg.conj(&alg.conj(&x)) - &x).max_abs() == 0.0);
    }

    #[test]
    fn alternating_law(a in 0usize..5, x in coeffs(8), y in coeffs(8)) {
        let alg = &algebras()[a];
        let (x, y) = (el(alg, &x), el(alg, &y));
        let scale = 1.0 + x.norm() * x.norm() * y.norm() + x.norm() * y.norm() * y.norm();
        prop_assert!(alg.associator(&x, &x, &y).norm() < 1e-12 * scale);
        prop_assert!(alg.associator(&x, &y, &y).norm() < 1e-12 * scale);
        prop_assert!(alg.associator(&x, &y, &x).norm() < 1e-12 * scale);
    }

    #[test]
    fn real_scalars_associate_exactly(a in 0usize..5, r in -16i32..16, x in dyadic(8), y in dyadic(8)) {
        let alg = &algebras()[a];
        let r = alg.scalar(r as f64);
        let assoc = alg.associator(&r, &el(alg, &x), &el(alg, &y));
        prop_assert_eq!(assoc.max_abs(), 0.0);
    }

    #[test]
    fn quadratic_norm_on_subspace(p in 0usize..PRESETS.len(), c in coeffs(8)) {
        let sub = Subspace::preset(PRESETS[p]).unwrap();
        let x = sub.embed_block(&c[..sub.block_len()]);
        let alg = sub.algebra();
        let expected = alg.scalar(x.norm_sq());
        prop_assert!((&alg.qnorm(&x) - &expected).max_abs() < 1e-12);
    }

    #[test]
    fn embed_is_linear_and_isometric(p in 0usize..PRESETS.len(), u in coeffs(8), w in coeffs(8), s in -2.0f64..2.0) {
        let sub = Subspace::preset(PRESETS[p]).unwrap();
        let b = sub.block_len();
        let (u, w) = (&u[..b], &w[..b]);
        let comb: Vec<f64> = u.iter().zip(w).map(|(a, c)| s * a + c).collect();
        let mut rhs = sub.embed_block(w);
        rhs.axpy(s, &sub.embed_block(u));
        prop_assert!((&sub.embed_block(&comb) - &rhs).max_abs() < 1e-14);
        let nu = u.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assert!((sub.embed_block(u).norm() - nu).abs() < 1e-14);
    }

    #[test]
    fn kernel_values_lie_in_the_subspace(p in 0usize..PRESETS.len(), n in 1usize..3, c in coeffs(16)) {
        let sub = Arc::new(Subspace::preset(PRESETS[p]).unwrap());
        let ctx = KernelContext::new(sub.clone(), n).unwrap();
        let x = &c[..ctx.dim()];
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 0.01);
        let mp = sub.point(n, x.to_vec()).unwrap();
        for j in 1..=n {
            let k = ctx.bm_component(j, &mp).unwrap();
            prop_assert!(sub.off_subspace_norm(&k) < 1e-14 * (1.0 + k.norm()));
        }
        let e = ctx.cauchy_on_block(&x[..sub.block_len()]);
        if let Ok(e) = e {
            prop_assert!(sub.off_subspace_norm(&e) < 1e-14 * (1.0 + e.norm()));
        }
    }

    #[test]
    fn kernel_homogeneity(p in 0usize..PRESETS.len(), c in coeffs(16), t in 0.2f64..5.0) {
        let sub = Arc::new(Subspace::preset(PRESETS[p]).unwrap());
        let ctx = KernelContext::new(sub.clone(), 2).unwrap();
        let x = &c[..ctx.dim()];
        prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 0.01);
        let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
        let d = ctx.dim() as i32;
        for j0 in 0..2 {
            let (k, kt) = (ctx.k_raw(j0, x).norm(), ctx.k_raw(j0, &tx).norm());
            prop_assert!((kt - t.powi(1 - d) * k).abs() <= 1e-12 * kt.max(t.powi(1 - d) * k));
        }
    }

    #[test]
    fn closed_form_divergence_vanishes(p in 0usize..PRESETS.len(), n in 1usize..4, c in coeffs(24)) {
        let sub = Arc::new(Subspace::preset(PRESETS[p]).unwrap());
        let ctx = KernelContext::new(sub.clone(), n).unwrap();
        let x = &c[..ctx.dim()];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        prop_assume!(r2 > 0.01);
        let div = ctx.bm_divergence(&sub.point(n, x.to_vec()).unwrap()).unwrap();
        let scale = sub.block_len() as f64 / ctx.sigma_d() * r2.powf(-0.5 * ctx.dim() as f64);
        prop_assert!(div.total.abs() < 1e-13 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fd_matches_analytic_dbar(k in 0usize..5, c in coeffs(4)) {
        let sub = Arc::new(Subspace::preset("H-full").unwrap());
        let specs = ["fueter:1,2", "coordinate:1,3", "poly_x0_sq:1", "bump:0.1,0,0,0;1.5;1,2,0,-1", "cauchy_pullback:1;2,0.5,0,0"];
        let f = catalog(&sub, 1, &specs[k].parse().unwrap()).unwrap();
        prop_assert!(f.has_analytic_dbar());
        let x: Vec<f64> = c.iter().map(|v| 0.5 * v).collect();
        let exact = dirac(&sub, &f, 1, &x, &FdOptions::default()).unwrap().value;
        let fd = dirac_fd(&sub, &f, 1, &x, &FdOptions::with_step(1e-3)).unwrap().value;
        prop_assert!((&exact - &fd).norm() <= 1e-7, "{} at {:?}", specs[k], x);
    }

    #[test]
    fn monogenic_times_constant_in_associative_algebras(c in coeffs(4), a in coeffs(4)) {
        let sub = Arc::new(Subspace::preset("H-full").unwrap());
        let f = catalog(&sub, 1, &CatalogSpec::Fueter { j: 1, s: 2 }).unwrap();
        let alg = sub.algebra().clone();
        let a = Element::from_slice(&a);
        let g = f.clone();
        let eval: EvalFn = Arc::new(move |y: &[f64]| alg.mul(&g.eval(y), &a));
        let fa = FieldFunction::new("f a", 4, Smoothness::CInfinity, eval);
        let r = dirac_fd(&sub, &fa, 1, &c, &FdOptions::default()).unwrap().value;
        prop_assert!(r.norm() < 1e-8);
    }

    #[test]
    fn laplacian_factorizes(c in coeffs(4)) {
        let sub = Arc::new(Subspace::preset("H-full").unwrap());
        let f = catalog(&sub, 1, &"bump:0.1,0,0,0;2;1,2,0,-1".parse().unwrap()).unwrap();
        let x: Vec<f64> = c.iter().map(|v| 0.4 * v).collect();
        let direct = laplacian(&sub, &f, 1, &x, None).unwrap();
        let nested = laplacian_by_factorization(&sub, &f, 1, &x, 1e-3).unwrap();
        prop_assert!((&direct - &nested).norm() < 1e-4 * (1.0 + direct.norm()));
    }

    #[test]
    fn volume_integral_is_additive(cut in -0.9f64..0.9, axis in 0usize..4) {
        let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
        let f = catalog(&sub, 2, &CatalogSpec::PolyX0Sq { j: 1 }).unwrap();
        let cfg = QuadratureConfig::gauss(6, 6);
        let whole = DomainSpec::cube(4, 1.0);
        let (lo, hi) = (vec![-1.0; 4], vec![1.0; 4]);
        let (mut hi1, mut lo2) = (hi.clone(), lo.clone());
        hi1[axis] = cut;
        lo2[axis] = cut;
        let i = |d: &DomainSpec| integrate_volume(d, &cfg, None, 4, |y| f.eval(y)).unwrap().value;
        let mut split = i(&DomainSpec::Box { lo, hi: hi1 });
        split += &i(&DomainSpec::Box { lo: lo2, hi });
        prop_assert!((&i(&whole) - &split).norm() < 1e-12);
    }

    #[test]
    fn integrals_are_linear(s in -3.0f64..3.0, a in coeffs(4)) {
        let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
        let alg = sub.algebra().clone();
        let f = catalog(&sub, 2, &CatalogSpec::Fueter { j: 1, s: 1 }).unwrap();
        let g = catalog(&sub, 2, &CatalogSpec::PolyX0Sq { j: 2 }).unwrap();
        let a = Element::from_slice(&a);
        let dom = DomainSpec::cube(4, 1.0);
        let cfg = QuadratureConfig::gauss(6, 6);
        let comb = |y: &[f64]| {
            let mut v = alg.mul(&a, &f.eval(y));
            v.axpy(s, &g.eval(y));
            v
        };
        let vol = |h: &(dyn Fn(&[f64]) -> Element + Sync)| integrate_volume(&dom, &cfg, None, 4, h).unwrap().value;
        let mut rhs = alg.mul(&a, &vol(&|y| f.eval(y)));
        rhs.axpy(s, &vol(&|y| g.eval(y)));
        prop_assert!((&vol(&comb) - &rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
        let bnd = |h: &(dyn Fn(&[f64]) -> Element + Sync)| {
            integrate_boundary(&dom, &cfg, Target::Regular, 4, |node| h(&node.point)).unwrap().value
        };
        let mut rhs = alg.mul(&a, &bnd(&|y| f.eval(y)));
        rhs.axpy(s, &bnd(&|y| g.eval(y)));
        prop_assert!((&bnd(&comb) - &rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn catalog_specs_roundtrip(j in 1usize..3, s in 0usize..2, a in coeffs(4)) {
        for spec in [
            CatalogSpec::Fueter { j, s: s + 1 },
            CatalogSpec::Coordinate { j, s },
            CatalogSpec::Constant(a.clone()),
            CatalogSpec::CauchyPullback { j, a: a[..2].to_vec() },
        ] {
            let text = spec.to_string();
            prop_assert_eq!(text.parse::<CatalogSpec>().unwrap(), spec);
        }
    }
}

#[test]
fn anticommuting_units_in_every_preset() {
    for name in PRESETS {
        let sub = Subspace::preset(name).unwrap();
        let alg = sub.algebra();
        for s in 1..sub.block_len() {
            for t in 1..sub.block_len() {
                let mut sym = alg.mul(sub.v(s), sub.v(t));
                sym += &alg.mul(sub.v(t), sub.v(s));
                let expected = alg.scalar(if s == t { -2.0 } else { 0.0 });
                assert!((&sym - &expected).max_abs() < 1e-10, "{name}: v{s}, v{t}");
            }
        }
    }
}

#[test]
fn gauss_boundary_rule_converges_fast() {
    let sub = Arc::new(Subspace::preset("H-CJ").unwrap());
    let ctx = KernelContext::new(sub.clone(), 2).unwrap();
    let f = catalog(&sub, 2, &CatalogSpec::Fueter { j: 2, s: 1 }).unwrap();
    let dom = DomainSpec::cube(4, 1.0);
    let x = sub.point(2, vec![0.2, -0.1, 0.3, 0.15]).unwrap();
    let err = |q| {
        (&alterna::formulas::bm_integral(&ctx, &dom, &QuadratureConfig::gauss(q, 4), &f, &x).unwrap().value
            - &f.eval(x.coords()))
            .norm()
    };
    let (e8, e16) = (err(8), err(16));
    assert!(e16 / e8 < 1e-2, "{e8:e} -> {e16:e}");
}
