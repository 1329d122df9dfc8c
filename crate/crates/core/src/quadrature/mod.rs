//! Boundary and volume quadrature over boxes and balls for algebra-valued
//! integrands.
//!
//! Every rule is split into independent pieces. Pieces are evaluated in
//! parallel and their partial sums are added in piece order, so results do
//! not depend on the thread count.

mod cells;
pub mod domain;
pub mod gauss;
mod plan;
pub(crate) mod sphere;

pub use domain::{BoundaryNode, DomainSpec, QuadratureConfig, Rule};
pub use plan::{boundary_nodes, integrate_boundary, integrate_volume, Target};

use serde::{Deserialize, Serialize};

use crate::algebra::Element;

/// An integral value with its Monte Carlo standard error, when sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: Element,
    pub std_error: Option<Element>,
}

impl Estimate {
    pub fn exact(value: Element) -> Estimate {
        Estimate { value, std_error: None }
    }

    /// Largest componentwise standard error, zero for deterministic rules.
    pub fn max_std_error(&self) -> f64 {
        self.std_error.as_ref().map_or(0.0, |e| e.max_abs())
    }

    pub fn combine(&self, other: &Estimate, sign: f64) -> Estimate {
        let mut value = self.value.clone();
        value.axpy(sign, &other.value);
        let std_error = match (&self.std_error, &other.std_error) {
            (None, None) => None,
            (a, b) => {
                let dim = value.dim();
                let za = Element::zeros(dim);
                let (a, b) = (a.as_ref().unwrap_or(&za), b.as_ref().unwrap_or(&za));
                let mut out = Element::zeros(dim);
                for k in 0..dim {
                    out[k] = a[k].hypot(b[k]);
                }
                Some(out)
            }
        };
        Estimate { value, std_error }
    }
}
