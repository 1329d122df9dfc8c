//! Splitting boundary and volume rules into pieces, and reducing them.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::cells::{aligned_cells, radial_breaks, split_cells, Cell, Radial};
use super::domain::{BoundaryNode, DomainSpec, QuadratureConfig, Rule, ON_BOUNDARY_TOL};
use super::gauss;
use super::sphere::{complement_frame, random_direction, sphere_tensor, Directions};
use super::Estimate;
use crate::algebra::Element;
use crate::error::{Error, Result};
use crate::kernels::sphere_area;

/// Monte Carlo samples per piece; each piece owns one ChaCha stream.
const MC_CHUNK: usize = 4096;
/// Directions per piece for deterministic sphere rules.
const DIR_CHUNK: usize = 256;
/// Radial Gauss order used with Monte Carlo directions.
const MC_RADIAL_Q: usize = 12;

/// Where the integrand is singular.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    /// Smooth integrand.
    Regular,
    /// Singular at a point off the boundary.
    Point(&'a [f64]),
    /// Singular at a boundary point; the ball `B(x, eps)` is excluded.
    Pv { x: &'a [f64], eps: f64 },
}

struct Partial {
    sum: Element,
    sumsq: Element,
}

/// Per-piece accumulator; with `mc` set, contributions sharing a sample id
/// form one sample of the variance estimate.
struct Acc {
    sum: Element,
    sumsq: Element,
    cur: Element,
    cur_id: Option<usize>,
    mc: bool,
}

impl Acc {
    fn new(dim: usize, mc: bool) -> Acc {
        Acc { sum: Element::zeros(dim), sumsq: Element::zeros(dim), cur: Element::zeros(dim), cur_id: None, mc }
    }

    fn add(&mut self, id: usize, w: f64, v: &Element, point: &[f64]) -> Result<()> {
        if !v.is_finite() || !w.is_finite() {
            return Err(Error::NonFiniteIntegrand { point: point.to_vec() });
        }
        if self.mc {
            if self.cur_id != Some(id) {
                self.flush();
                self.cur_id = Some(id);
            }
            self.cur.axpy(w, v);
        } else {
            self.sum.axpy(w, v);
        }
        Ok(())
    }

    fn flush(&mut self) {
        if self.cur_id.is_some() {
            for k in 0..self.sum.dim() {
                let c = self.cur[k];
                self.sum[k] += c;
                self.sumsq[k] += c * c;
                self.cur[k] = 0.0;
            }
        }
    }

    fn finish(mut self) -> Partial {
        self.flush();
        Partial { sum: self.sum, sumsq: self.sumsq }
    }
}

fn reduce<P, F>(pieces: &[P], dim: usize, mc_samples: Option<usize>, run: F) -> Result<Estimate>
where
    P: Sync,
    F: Fn(&P, &mut Acc) -> Result<()> + Sync,
{
    let mc = mc_samples.is_some();
    let parts: Vec<Result<Partial>> = pieces
        .par_iter()
        .map(|p| {
            let mut acc = Acc::new(dim, mc);
            run(p, &mut acc)?;
            Ok(acc.finish())
        })
        .collect();
    let mut sum = Element::zeros(dim);
    let mut sumsq = Element::zeros(dim);
    for part in parts {
        let part = part?;
        sum += &part.sum;
        sumsq += &part.sumsq;
    }
    let std_error = mc_samples.map(|n| {
        let nf = n as f64;
        let mut se = Element::zeros(dim);
        for k in 0..dim {
            let var = (nf * sumsq[k] - sum[k] * sum[k]) / (nf - 1.0).max(1.0);
            se[k] = var.max(0.0).sqrt();
        }
        se
    });
    Ok(Estimate { value: sum, std_error })
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn without(v: &[f64], axis: usize) -> Vec<f64> {
    v.iter().enumerate().filter(|&(k, _)| k != axis).map(|(_, &c)| c).collect()
}

fn box_bounds(dom: &DomainSpec) -> Option<(&[f64], &[f64])> {
    match dom {
        DomainSpec::Box { lo, hi } => Some((lo, hi)),
        DomainSpec::Ball { .. } => None,
    }
}

enum BPiece {
    Face {
        axis: usize,
        value: f64,
        sign: f64,
        cell: Cell,
    },
    Sphere {
        center: Arc<Vec<f64>>,
        radius: f64,
        dirs: Arc<Directions>,
        start: usize,
        end: usize,
    },
    Polar {
        center: Arc<Vec<f64>>,
        radius: f64,
        pole: Arc<Vec<f64>>,
        frame: Arc<Vec<Vec<f64>>>,
        a: f64,
        b: f64,
        q: usize,
        u: Arc<Directions>,
    },
    SphereMc {
        center: Arc<Vec<f64>>,
        radius: f64,
        start: usize,
        count: usize,
        total: usize,
        seed: u64,
    },
    BoxMc {
        lo: Arc<Vec<f64>>,
        hi: Arc<Vec<f64>>,
        start: usize,
        count: usize,
        total: usize,
        seed: u64,
    },
}

impl BPiece {
    fn for_each_node(&self, f: &mut dyn FnMut(usize, &BoundaryNode) -> Result<()>) -> Result<()> {
        match self {
            BPiece::Face { axis, value, sign, cell } => {
                let d = cell_dim(cell) + 1;
                let mut node = BoundaryNode { point: vec![0.0; d], normal: vec![0.0; d], weight: 0.0 };
                node.normal[*axis] = *sign;
                cell.for_each(&mut |local, w| {
                    node.point[..*axis].copy_from_slice(&local[..*axis]);
                    node.point[*axis] = *value;
                    node.point[*axis + 1..].copy_from_slice(&local[*axis..]);
                    node.weight = w;
                    f(0, &node)
                })
            }
            BPiece::Sphere { center, radius, dirs, start, end } => {
                let d = center.len();
                let scale = radius.powi(d as i32 - 1);
                let mut node = BoundaryNode { point: vec![0.0; d], normal: vec![0.0; d], weight: 0.0 };
                for (dir, w) in &dirs[*start..*end] {
                    for k in 0..d {
                        node.point[k] = center[k] + radius * dir[k];
                        node.normal[k] = dir[k];
                    }
                    node.weight = w * scale;
                    f(0, &node)?;
                }
                Ok(())
            }
            BPiece::Polar { center, radius, pole, frame, a, b, q, u } => {
                let d = center.len();
                let scale = radius.powi(d as i32 - 1);
                let mut node = BoundaryNode { point: vec![0.0; d], normal: vec![0.0; d], weight: 0.0 };
                for (theta, wt) in gauss::rule(*q).mapped(*a, *b) {
                    let (c, s) = (theta.cos(), theta.sin());
                    let jac = scale * s.powi(d as i32 - 2) * wt;
                    for (dir, wu) in u.iter() {
                        for k in 0..d {
                            let tang: f64 = dir.iter().zip(frame.iter()).map(|(ui, e)| ui * e[k]).sum();
                            node.normal[k] = c * pole[k] + s * tang;
                            node.point[k] = center[k] + radius * node.normal[k];
                        }
                        node.weight = jac * wu;
                        f(0, &node)?;
                    }
                }
                Ok(())
            }
            BPiece::SphereMc { center, radius, start, count, total, seed } => {
                let d = center.len();
                let w = sphere_area(d) * radius.powi(d as i32 - 1) / *total as f64;
                let mut rng = chunk_rng(*seed, (*start / MC_CHUNK) as u64);
                let mut node = BoundaryNode { point: vec![0.0; d], normal: vec![0.0; d], weight: w };
                for i in 0..*count {
                    random_direction(&mut rng, d, &mut node.normal);
                    for k in 0..d {
                        node.point[k] = center[k] + radius * node.normal[k];
                    }
                    f(start + i, &node)?;
                }
                Ok(())
            }
            BPiece::BoxMc { lo, hi, start, count, total, seed } => {
                let d = lo.len();
                let sides: Vec<f64> = lo.iter().zip(hi.iter()).map(|(a, b)| b - a).collect();
                let vol: f64 = sides.iter().product();
                let areas: Vec<f64> = sides.iter().map(|s| vol / s).collect();
                let area: f64 = 2.0 * areas.iter().sum::<f64>();
                let mut rng = chunk_rng(*seed, (*start / MC_CHUNK) as u64);
                let mut node = BoundaryNode { point: vec![0.0; d], normal: vec![0.0; d], weight: area / *total as f64 };
                for i in 0..*count {
                    let mut pick = rng.random::<f64>() * area;
                    let mut face = 2 * d - 1;
                    for k in 0..2 * d {
                        pick -= areas[k / 2];
                        if pick < 0.0 {
                            face = k;
                            break;
                        }
                    }
                    let (axis, high) = (face / 2, face % 2 == 1);
                    for k in 0..d {
                        node.point[k] = lo[k] + sides[k] * rng.random::<f64>();
                        node.normal[k] = 0.0;
                    }
                    node.point[axis] = if high { hi[axis] } else { lo[axis] };
                    node.normal[axis] = if high { 1.0 } else { -1.0 };
                    f(start + i, &node)?;
                }
                Ok(())
            }
        }
    }
}

fn cell_dim(cell: &Cell) -> usize {
    match cell {
        Cell::Tensor { lo, .. } => lo.len(),
        Cell::Pyramid { apex, .. } => apex.len(),
    }
}

fn mc_chunks(total: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..total.div_ceil(MC_CHUNK)).map(move |c| (c * MC_CHUNK, MC_CHUNK.min(total - c * MC_CHUNK)))
}

fn plan_box_boundary(
    lo: &[f64],
    hi: &[f64],
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    target: Target<'_>,
) -> Result<Vec<BPiece>> {
    let q = match cfg.boundary {
        Rule::Gauss { q } => q,
        Rule::MonteCarlo { samples } => {
            if let Target::Pv { .. } = target {
                return Err(Error::Unsupported("principal value with Monte Carlo boundary rule".into()));
            }
            let (lo, hi) = (Arc::new(lo.to_vec()), Arc::new(hi.to_vec()));
            return Ok(mc_chunks(samples)
                .map(|(start, count)| BPiece::BoxMc {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    start,
                    count,
                    total: samples,
                    seed: cfg.seed,
                })
                .collect());
        }
    };
    let d = lo.len();
    let w = cfg.spacing_for(dom);
    let tol = ON_BOUNDARY_TOL * dom.scale();
    let (min_side, max_side) = (dom.min_side(), dom.scale());
    let mut pieces = Vec::new();
    for axis in 0..d {
        for (value, sign) in [(lo[axis], -1.0), (hi[axis], 1.0)] {
            let (flo, fhi) = (without(lo, axis), without(hi, axis));
            let cells = match target {
                Target::Regular => split_cells(&flo, &fhi, 1, q),
                Target::Point(x) | Target::Pv { x, .. } => {
                    let plane = (x[axis] - value).abs();
                    let p = without(x, axis);
                    let pc: Vec<f64> = p.iter().zip(flo.iter().zip(&fhi)).map(|(c, (a, b))| c.clamp(*a, *b)).collect();
                    let tang2: f64 = p.iter().zip(&pc).map(|(a, b)| (a - b) * (a - b)).sum();
                    let dist = (plane * plane + tang2).sqrt();
                    let on_face = dist <= tol;
                    match target {
                        Target::Pv { eps, .. } if on_face => {
                            if eps >= w {
                                return Err(Error::InvalidConfig(format!(
                                    "pv epsilon {eps} must be below the grid spacing {w}"
                                )));
                            }
                            aligned_cells(&flo, &fhi, &pc, w, q, q, Radial::Excluded { eps })
                        }
                        Target::Pv { eps, .. } if dist <= eps => {
                            return Err(Error::InvalidConfig(format!(
                                "pv epsilon {eps} reaches a face not containing the point (distance {dist:.3e})"
                            )));
                        }
                        _ if on_face => return Err(Error::Singularity(x.to_vec())),
                        _ if dist < 0.25 * min_side => {
                            aligned_cells(&flo, &fhi, &pc, w, q, q, Radial::Graded { h: dist })
                        }
                        _ => split_cells(&flo, &fhi, if dist >= 0.5 * max_side { 1 } else { 2 }, q),
                    }
                }
            };
            pieces.extend(cells.into_iter().map(|cell| BPiece::Face { axis, value, sign, cell }));
        }
    }
    Ok(pieces)
}

fn polar_pieces(center: &[f64], radius: f64, pole: Vec<f64>, breaks: &[f64], q: usize) -> Vec<BPiece> {
    let d = center.len();
    let frame = Arc::new(complement_frame(&pole));
    let u = Arc::new(sphere_tensor(d - 2, q));
    let (center, pole) = (Arc::new(center.to_vec()), Arc::new(pole));
    breaks
        .windows(2)
        .map(|p| BPiece::Polar {
            center: center.clone(),
            radius,
            pole: pole.clone(),
            frame: frame.clone(),
            a: PI * p[0],
            b: PI * p[1],
            q,
            u: u.clone(),
        })
        .collect()
}

fn plan_ball_boundary(
    center: &[f64],
    radius: f64,
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    target: Target<'_>,
) -> Result<Vec<BPiece>> {
    let d = center.len();
    let q = match cfg.boundary {
        Rule::Gauss { q } => q,
        Rule::MonteCarlo { samples } => {
            if let Target::Pv { .. } = target {
                return Err(Error::Unsupported("principal value with Monte Carlo boundary rule".into()));
            }
            let c = Arc::new(center.to_vec());
            return Ok(mc_chunks(samples)
                .map(|(start, count)| BPiece::SphereMc {
                    center: c.clone(),
                    radius,
                    start,
                    count,
                    total: samples,
                    seed: cfg.seed,
                })
                .collect());
        }
    };
    if d > 4 {
        return Err(Error::Unsupported(format!("tensor sphere rule in dimension {d}; use monte_carlo")));
    }
    let regular = |q: usize| -> Vec<BPiece> {
        let dirs = Arc::new(sphere_tensor(d - 1, q));
        let c = Arc::new(center.to_vec());
        (0..dirs.len())
            .step_by(DIR_CHUNK)
            .map(|s| BPiece::Sphere {
                center: c.clone(),
                radius,
                dirs: dirs.clone(),
                start: s,
                end: (s + DIR_CHUNK).min(dirs.len()),
            })
            .collect()
    };
    let tol = ON_BOUNDARY_TOL * dom.scale();
    match target {
        Target::Regular => Ok(regular(q)),
        Target::Point(x) | Target::Pv { x, .. } => {
            let rel: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
            let r = rel.iter().map(|c| c * c).sum::<f64>().sqrt();
            let h = (radius - r).abs();
            if r == 0.0 || (h >= 0.25 * radius && !matches!(target, Target::Pv { .. })) {
                return Ok(regular(q));
            }
            let pole: Vec<f64> = rel.iter().map(|c| c / r).collect();
            let breaks = match target {
                Target::Pv { eps, .. } => {
                    if h > tol {
                        return Err(Error::NotOnBoundary(x.to_vec()));
                    }
                    if eps >= 2.0 * radius {
                        return Ok(Vec::new());
                    }
                    let theta_lo = 2.0 * (eps / (2.0 * radius)).asin();
                    radial_breaks(Radial::Excluded { eps: theta_lo }, PI)
                }
                _ => {
                    if h <= tol {
                        return Err(Error::Singularity(x.to_vec()));
                    }
                    radial_breaks(Radial::Graded { h: h / radius }, PI)
                }
            };
            Ok(polar_pieces(center, radius, pole, &breaks, q))
        }
    }
}

fn plan_boundary(dom: &DomainSpec, cfg: &QuadratureConfig, target: Target<'_>) -> Result<Vec<BPiece>> {
    dom.validate()?;
    cfg.validate()?;
    match target {
        Target::Point(x) | Target::Pv { x, .. } => dom.check_dim(x)?,
        Target::Regular => {}
    }
    if let Target::Pv { x, eps } = target {
        dom.check_on_boundary(x)?;
        if !(eps > 0.0) {
            return Err(Error::InvalidConfig("pv epsilon must be positive".into()));
        }
    }
    match dom {
        DomainSpec::Box { lo, hi } => plan_box_boundary(lo, hi, dom, cfg, target),
        DomainSpec::Ball { center, radius } => plan_ball_boundary(center, *radius, dom, cfg, target),
    }
}

/// `int_Gamma g dS`, componentwise, with the rule chosen for the target.
pub fn integrate_boundary<G>(
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    target: Target<'_>,
    alg_dim: usize,
    g: G,
) -> Result<Estimate>
where
    G: Fn(&BoundaryNode) -> Element + Sync,
{
    let pieces = plan_boundary(dom, cfg, target)?;
    let mc = match cfg.boundary {
        Rule::MonteCarlo { samples } => Some(samples),
        Rule::Gauss { .. } => None,
    };
    reduce(&pieces, alg_dim, mc, |p, acc| {
        p.for_each_node(&mut |id, node| acc.add(id, node.weight, &g(node), &node.point))
    })
}

/// The regular boundary rule as a node stream, generated piece by piece.
pub fn boundary_nodes(dom: &DomainSpec, cfg: &QuadratureConfig) -> Result<impl Iterator<Item = BoundaryNode>> {
    let pieces = plan_boundary(dom, cfg, Target::Regular)?;
    Ok(pieces.into_iter().flat_map(|p| {
        let mut nodes = Vec::new();
        p.for_each_node(&mut |_, n| {
            nodes.push(n.clone());
            Ok(())
        })
        .expect("collecting nodes cannot fail");
        nodes
    }))
}

enum VPiece {
    Cell(Cell),
    Polar {
        apex: Arc<Vec<f64>>,
        center: Arc<Vec<f64>>,
        radius: f64,
        dirs: Arc<Directions>,
        start: usize,
        end: usize,
        q: usize,
    },
    PolarMc {
        apex: Arc<Vec<f64>>,
        center: Arc<Vec<f64>>,
        radius: f64,
        start: usize,
        count: usize,
        total: usize,
        seed: u64,
    },
    BoxMc {
        lo: Arc<Vec<f64>>,
        hi: Arc<Vec<f64>>,
        start: usize,
        count: usize,
        total: usize,
        seed: u64,
    },
}

/// Distance from `apex` to the sphere along the unit direction `dir`.
fn ray_to_sphere(apex: &[f64], center: &[f64], radius: f64, dir: &[f64]) -> f64 {
    let mut b = 0.0;
    let mut c = -radius * radius;
    for k in 0..apex.len() {
        let rel = apex[k] - center[k];
        b += dir[k] * rel;
        c += rel * rel;
    }
    -b + (b * b - c).max(0.0).sqrt()
}

/// Receives `(piece id, node, weight)`.
type NodeSink<'a> = dyn FnMut(usize, &[f64], f64) -> Result<()> + 'a;

#[allow(clippy::too_many_arguments)]
fn radial_ray(
    apex: &[f64],
    dir: &[f64],
    rho: f64,
    wdir: f64,
    q: usize,
    y: &mut [f64],
    id: usize,
    f: &mut NodeSink<'_>,
) -> Result<()> {
    let d = apex.len();
    for (r, wr) in gauss::rule(q).mapped(0.0, rho) {
        for k in 0..d {
            y[k] = apex[k] + r * dir[k];
        }
        f(id, y, wdir * wr * r.powi(d as i32 - 1))?;
    }
    Ok(())
}

impl VPiece {
    fn for_each(&self, f: &mut NodeSink<'_>) -> Result<()> {
        match self {
            VPiece::Cell(cell) => cell.for_each(&mut |y, w| f(0, y, w)),
            VPiece::Polar { apex, center, radius, dirs, start, end, q } => {
                let mut y = vec![0.0; apex.len()];
                for (i, (dir, wd)) in dirs[*start..*end].iter().enumerate() {
                    let rho = ray_to_sphere(apex, center, *radius, dir);
                    radial_ray(apex, dir, rho, *wd, *q, &mut y, start + i, f)?;
                }
                Ok(())
            }
            VPiece::PolarMc { apex, center, radius, start, count, total, seed } => {
                let d = apex.len();
                let wd = sphere_area(d) / *total as f64;
                let mut rng = chunk_rng(*seed, (*start / MC_CHUNK) as u64);
                let mut dir = vec![0.0; d];
                let mut y = vec![0.0; d];
                for i in 0..*count {
                    random_direction(&mut rng, d, &mut dir);
                    let rho = ray_to_sphere(apex, center, *radius, &dir);
                    radial_ray(apex, &dir, rho, wd, MC_RADIAL_Q, &mut y, start + i, f)?;
                }
                Ok(())
            }
            VPiece::BoxMc { lo, hi, start, count, total, seed } => {
                let d = lo.len();
                let vol: f64 = lo.iter().zip(hi.iter()).map(|(a, b)| b - a).product();
                let w = vol / *total as f64;
                let mut rng = chunk_rng(*seed, (*start / MC_CHUNK) as u64);
                let mut y = vec![0.0; d];
                for i in 0..*count {
                    for k in 0..d {
                        y[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
                    }
                    f(start + i, &y, w)?;
                }
                Ok(())
            }
        }
    }
}

fn plan_volume(dom: &DomainSpec, cfg: &QuadratureConfig, singular: Option<&[f64]>) -> Result<Vec<VPiece>> {
    dom.validate()?;
    cfg.validate()?;
    if let Some(x) = singular {
        dom.check_dim(x)?;
    }
    let inside = singular.filter(|x| dom.signed_distance(x) >= 0.0);
    match dom {
        DomainSpec::Box { .. } => {
            let (lo, hi) = box_bounds(dom).expect("box");
            match cfg.volume {
                Rule::Gauss { q } => {
                    let cells = match (inside, singular) {
                        (Some(x), _) => aligned_cells(lo, hi, x, cfg.spacing_for(dom), q, q, Radial::Plain),
                        // an explicit spacing also fixes the cell size away from the apex
                        (None, _) if cfg.spacing.is_some() => {
                            let w = cfg.spacing_for(dom);
                            split_cells(lo, hi, (dom.scale() / w - 1e-9).ceil().max(1.0) as usize, q)
                        }
                        (None, Some(x)) => {
                            let dist = -dom.signed_distance(x);
                            split_cells(lo, hi, if dist < 0.5 * dom.scale() { 2 } else { 1 }, q)
                        }
                        (None, None) => split_cells(lo, hi, 1, q),
                    };
                    Ok(cells.into_iter().map(VPiece::Cell).collect())
                }
                Rule::MonteCarlo { samples } => {
                    if inside.is_some() {
                        return Err(Error::Unsupported("singular volume integrand with Monte Carlo box rule".into()));
                    }
                    let (lo, hi) = (Arc::new(lo.to_vec()), Arc::new(hi.to_vec()));
                    Ok(mc_chunks(samples)
                        .map(|(start, count)| VPiece::BoxMc {
                            lo: lo.clone(),
                            hi: hi.clone(),
                            start,
                            count,
                            total: samples,
                            seed: cfg.seed,
                        })
                        .collect())
                }
            }
        }
        DomainSpec::Ball { center, radius } => {
            let d = center.len();
            let apex = Arc::new(inside.map_or_else(|| center.clone(), |x| x.to_vec()));
            let c = Arc::new(center.clone());
            match cfg.volume {
                Rule::Gauss { q } => {
                    if d > 4 {
                        return Err(Error::Unsupported(format!("tensor ball rule in dimension {d}; use monte_carlo")));
                    }
                    let dirs = Arc::new(sphere_tensor(d - 1, q));
                    Ok((0..dirs.len())
                        .step_by(DIR_CHUNK)
                        .map(|s| VPiece::Polar {
                            apex: apex.clone(),
                            center: c.clone(),
                            radius: *radius,
                            dirs: dirs.clone(),
                            start: s,
                            end: (s + DIR_CHUNK).min(dirs.len()),
                            q,
                        })
                        .collect())
                }
                Rule::MonteCarlo { samples } => Ok(mc_chunks(samples)
                    .map(|(start, count)| VPiece::PolarMc {
                        apex: apex.clone(),
                        center: c.clone(),
                        radius: *radius,
                        start,
                        count,
                        total: samples,
                        seed: cfg.seed,
                    })
                    .collect()),
            }
        }
    }
}

/// `int_Omega g dV`; `singular` marks a point where `g` has an integrable
/// singularity of order at most `D - 1`.
pub fn integrate_volume<G>(
    dom: &DomainSpec,
    cfg: &QuadratureConfig,
    singular: Option<&[f64]>,
    alg_dim: usize,
    g: G,
) -> Result<Estimate>
where
    G: Fn(&[f64]) -> Element + Sync,
{
    let pieces = plan_volume(dom, cfg, singular)?;
    let mc = match cfg.volume {
        Rule::MonteCarlo { samples } => Some(samples),
        Rule::Gauss { .. } => None,
    };
    reduce(&pieces, alg_dim, mc, |p, acc| p.for_each(&mut |id, y, w| acc.add(id, w, &g(y), y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: &BoundaryNode) -> Element {
        Element::scalar(1, 1.0)
    }

    #[test]
    fn box_boundary_area() {
        let dom = DomainSpec::cube(4, 1.0);
        let cfg = QuadratureConfig::gauss(4, 4);
        let e = integrate_boundary(&dom, &cfg, Target::Regular, 1, one).unwrap();
        assert!((e.value[0] - 64.0).abs() < 1e-12);
        let near = [0.9, 0.1, 0.0, 0.0];
        let e = integrate_boundary(&dom, &cfg, Target::Point(&near), 1, one).unwrap();
        assert!((e.value[0] - 64.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_area_rules() {
        let dom = DomainSpec::ball(vec![0.5, 0.0, 0.0, 0.0], 1.0);
        let cfg = QuadratureConfig::gauss(8, 8);
        let e = integrate_boundary(&dom, &cfg, Target::Regular, 1, one).unwrap();
        assert!((e.value[0] - 2.0 * PI * PI).abs() < 1e-9, "{}", e.value[0]);
        let near = [1.45, 0.0, 0.0, 0.0];
        let e = integrate_boundary(&dom, &cfg, Target::Point(&near), 1, one).unwrap();
        assert!((e.value[0] - 2.0 * PI * PI).abs() < 1e-9, "{}", e.value[0]);
        let mut mc = cfg.clone();
        mc.boundary = Rule::MonteCarlo { samples: 5000 };
        let e = integrate_boundary(&dom, &mc, Target::Regular, 1, one).unwrap();
        assert!((e.value[0] - 2.0 * PI * PI).abs() < 1e-9, "{}", e.value[0]);
        assert!(e.max_std_error() < 1e-9);
    }

    #[test]
    fn ball_volume_with_singular_apex() {
        let dom = DomainSpec::ball(vec![0.0; 3], 1.0);
        let cfg = QuadratureConfig::gauss(8, 10);
        let x = [0.3, -0.2, 0.1];
        let e = integrate_volume(&dom, &cfg, Some(&x), 1, |_| Element::scalar(1, 1.0)).unwrap();
        assert!((e.value[0] - 4.0 * PI / 3.0).abs() < 1e-7, "{}", e.value[0]);
    }

    #[test]
    fn non_finite_integrand_names_node() {
        let dom = DomainSpec::cube(2, 1.0);
        let cfg = QuadratureConfig::gauss(4, 4);
        let err = integrate_boundary(&dom, &cfg, Target::Regular, 1, |_| Element::scalar(1, f64::NAN)).unwrap_err();
        assert!(matches!(err, Error::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn pv_epsilon_must_fit_grid() {
        let dom = DomainSpec::cube(4, 1.0);
        let cfg = QuadratureConfig::gauss(10, 4);
        let x = [1.0, 0.0, 0.0, 0.0];
        assert!(integrate_boundary(&dom, &cfg, Target::Pv { x: &x, eps: 0.6 }, 1, one).is_err());
        let e = integrate_boundary(&dom, &cfg, Target::Pv { x: &x, eps: 0.1 }, 1, one).unwrap();
        let exact = 64.0 - PI * 0.001 * 4.0 / 3.0;
        assert!((e.value[0] - exact).abs() < 1e-9, "{}", e.value[0]);
    }
}
