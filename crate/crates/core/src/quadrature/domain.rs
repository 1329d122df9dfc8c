//! Integration domains and quadrature configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::BoundingBox;
use crate::kernels::{ball_volume, sphere_area};

/// Relative tolerance for "point lies on the boundary" tests.
pub const ON_BOUNDARY_TOL: f64 = 1e-12;

/// A point of the boundary with its unit outward normal and surface weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub point: Vec<f64>,
    pub normal: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl DomainSpec {
    pub fn cube(dim: usize, half: f64) -> DomainSpec {
        DomainSpec::Box { lo: vec![-half; dim], hi: vec![half; dim] }
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> DomainSpec {
        DomainSpec::Ball { center, radius }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DomainSpec::Box { lo, hi } => {
                BoundingBox::new(lo.clone(), hi.clone())?;
            }
            DomainSpec::Ball { center, radius } => {
                if center.is_empty() || !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidConfig("ball needs a center and radius > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            DomainSpec::Box { lo, .. } => lo.len(),
            DomainSpec::Ball { center, .. } => center.len(),
        }
    }

    /// Length scale used to turn absolute tolerances into relative ones.
    pub fn scale(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).fold(0.0, f64::max),
            DomainSpec::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn min_side(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min),
            DomainSpec::Ball { radius, .. } => 2.0 * radius,
        }
    }

    pub fn boundary_area(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => {
                let sides: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| b - a).collect();
                let vol: f64 = sides.iter().product();
                sides.iter().map(|s| 2.0 * vol / s).sum()
            }
            DomainSpec::Ball { center, radius } => sphere_area(center.len()) * radius.powi(center.len() as i32 - 1),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| b - a).product(),
            DomainSpec::Ball { center, radius } => ball_volume(center.len()) * radius.powi(center.len() as i32),
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            DomainSpec::Box { lo, hi } => {
                let inside = lo.iter().zip(hi).zip(x).all(|((a, b), c)| a <= c && c <= b);
                if inside {
                    lo.iter().zip(hi).zip(x).map(|((a, b), c)| (c - a).min(b - c)).fold(f64::INFINITY, f64::min)
                } else {
                    let d2: f64 = lo
                        .iter()
                        .zip(hi)
                        .zip(x)
                        .map(|((a, b), c)| {
                            let e = (a - c).max(0.0).max(c - b);
                            e * e
                        })
                        .sum();
                    -d2.sqrt()
                }
            }
            DomainSpec::Ball { center, radius } => {
                let r: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt();
                radius - r
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.signed_distance(x) > 0.0
    }

    pub fn on_boundary(&self, x: &[f64]) -> bool {
        self.signed_distance(x).abs() <= ON_BOUNDARY_TOL * self.scale()
    }

    pub fn check_interior(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        if self.signed_distance(x) <= ON_BOUNDARY_TOL * self.scale() {
            return Err(Error::NotInterior(x.to_vec()));
        }
        Ok(())
    }

    pub fn check_on_boundary(&self, x: &[f64]) -> Result<()> {
        self.check_dim(x)?;
        if !self.on_boundary(x) {
            return Err(Error::NotOnBoundary(x.to_vec()));
        }
        Ok(())
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: x.len() });
        }
        Ok(())
    }

    /// Indices and signs (`-1` at `lo`, `+1` at `hi`) of the box constraints
    /// active at `x`.
    pub fn active_constraints(&self, x: &[f64]) -> Vec<(usize, f64)> {
        match self {
            DomainSpec::Box { lo, hi } => {
                let tol = ON_BOUNDARY_TOL * self.scale();
                let mut out = Vec::new();
                for k in 0..lo.len() {
                    if (x[k] - lo[k]).abs() <= tol {
                        out.push((k, -1.0));
                    } else if (x[k] - hi[k]).abs() <= tol {
                        out.push((k, 1.0));
                    }
                }
                out
            }
            DomainSpec::Ball { .. } => Vec::new(),
        }
    }

    /// Unit outward normal at a boundary point where it is unique.
    pub fn outward_normal(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_on_boundary(x)?;
        match self {
            DomainSpec::Box { .. } => {
                let active = self.active_constraints(x);
                if active.len() != 1 {
                    return Err(Error::Unsupported(format!(
                        "normal at a box point with {} active constraints",
                        active.len()
                    )));
                }
                let mut nu = vec![0.0; x.len()];
                nu[active[0].0] = active[0].1;
                Ok(nu)
            }
            DomainSpec::Ball { center, radius } => Ok(x.iter().zip(center).map(|(a, c)| (a - c) / radius).collect()),
        }
    }
}

/// One quadrature rule family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    Gauss {
        q: usize,
    },
    #[serde(alias = "mc")]
    MonteCarlo {
        samples: usize,
    },
}

impl Rule {
    /// `q` or the sample count, for reporting.
    pub fn size(&self) -> usize {
        match *self {
            Rule::Gauss { q } => q,
            Rule::MonteCarlo { samples } => samples,
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(self, Rule::MonteCarlo { .. })
    }

    fn validate(&self, which: &str) -> Result<()> {
        match *self {
            Rule::Gauss { q } if q < 2 => Err(Error::InvalidConfig(format!("{which}: gauss order must be >= 2"))),
            Rule::MonteCarlo { samples } if samples < 1000 => {
                Err(Error::InvalidConfig(format!("{which}: monte carlo needs >= 1000 samples")))
            }
            _ => Ok(()),
        }
    }

    /// A coarser rule of the same family, used for error estimates.
    pub fn coarser(&self) -> Rule {
        match *self {
            Rule::Gauss { q } => Rule::Gauss { q: (2 * q).div_ceil(3).max(2) },
            Rule::MonteCarlo { samples } => Rule::MonteCarlo { samples: (samples / 2).max(1000) },
        }
    }
}

fn default_epsilons() -> Vec<f64> {
    vec![0.4, 0.2, 0.1, 0.05]
}

fn default_seed() -> u64 {
    42
}

fn default_boundary() -> Rule {
    Rule::Gauss { q: 16 }
}

fn default_volume() -> Rule {
    Rule::Gauss { q: 12 }
}

/// Quadrature parameters shared by every integral operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    #[serde(default = "default_boundary")]
    pub boundary: Rule,
    #[serde(default = "default_volume")]
    pub volume: Rule,
    #[serde(default = "default_epsilons")]
    pub pv_epsilons: Vec<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Cell width of the grid aligned with a singular point; defaults to a
    /// quarter of the smallest box side.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            boundary: default_boundary(),
            volume: default_volume(),
            pv_epsilons: default_epsilons(),
            seed: default_seed(),
            spacing: None,
        }
    }
}

impl QuadratureConfig {
    pub fn gauss(q_boundary: usize, q_volume: usize) -> Self {
        QuadratureConfig {
            boundary: Rule::Gauss { q: q_boundary },
            volume: Rule::Gauss { q: q_volume },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.boundary.validate("boundary")?;
        self.volume.validate("volume")?;
        if self.pv_epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidConfig("pv_epsilons must be positive".into()));
        }
        if self.pv_epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig("pv_epsilons must be strictly decreasing".into()));
        }
        if let Some(w) = self.spacing {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidConfig("spacing must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn spacing_for(&self, dom: &DomainSpec) -> f64 {
        self.spacing.unwrap_or(0.25 * dom.min_side())
    }

    pub fn with_spacing(mut self, w: f64) -> Self {
        self.spacing = Some(w);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_json_shape() {
        let text = r#"{"boundary":{"rule":"gauss","q":16},"volume":{"rule":"gauss","q":12},"pv_epsilons":[0.4,0.2,0.1,0.05],"seed":42}"#;
        let cfg: QuadratureConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg, QuadratureConfig::default());
        assert_eq!(serde_json::to_string(&cfg).unwrap(), text);
        let mc: Rule = serde_json::from_str(r#"{"rule":"mc","samples":5000}"#).unwrap();
        assert_eq!(mc, Rule::MonteCarlo { samples: 5000 });
    }

    #[test]
    fn config_validation() {
        let mut cfg = QuadratureConfig { pv_epsilons: vec![0.1, 0.2], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.pv_epsilons = vec![0.2, 0.1];
        cfg.boundary = Rule::Gauss { q: 1 };
        assert!(cfg.validate().is_err());
        cfg.boundary = Rule::MonteCarlo { samples: 10 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn box_geometry() {
        let d = DomainSpec::cube(4, 1.0);
        assert_eq!(d.boundary_area(), 64.0);
        assert_eq!(d.volume(), 16.0);
        assert!(d.contains(&[0.0; 4]));
        let corner = [1.0; 4];
        assert!(d.on_boundary(&corner));
        assert_eq!(d.active_constraints(&corner).len(), 4);
        assert_eq!(d.outward_normal(&[1.0, 0.0, 0.2, 0.0]).unwrap(), vec![1.0, 0.0, 0.0, 0.0]);
        assert!((d.signed_distance(&[2.0, 2.0, 0.0, 0.0]) + 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ball_geometry() {
        let b = DomainSpec::ball(vec![0.0; 4], 1.0);
        assert!((b.boundary_area() - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-13);
        assert!(b.on_boundary(&[0.0, 1.0, 0.0, 0.0]));
        assert!(b.check_interior(&[0.0, 1.0, 0.0, 0.0]).is_err());
    }
}
