//! Function theory over alternative *-algebras: slice decompositions of
//! `R^{n(m+1)}`, Dirac operators, Bochner-Martinelli and Teodorescu kernels,
//! integral representations, and a verification harness checking them
//! numerically.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod fd;
pub mod formulas;
pub mod functions;
pub mod hypercomplex;
pub mod kernels;
pub mod quadrature;
pub mod verify;

pub use algebra::{build_algebra, Algebra, AlgebraKind, Element};
pub use error::{Error, Result};
pub use functions::{CatalogSpec, FieldFunction};
pub use hypercomplex::{MultiPoint, Subspace};
pub use kernels::KernelContext;
pub use quadrature::{DomainSpec, Estimate, QuadratureConfig, Rule};
