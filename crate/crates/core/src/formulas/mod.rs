//! Integral operators and the constructions built on them.

pub mod bm;
pub mod extrapolate;
pub mod hartogs;
pub mod inhomogeneous;
pub mod teodorescu;

pub use bm::{
    bm_integral, bm_singular_pv, cauchy_pompeiu, plemelj_limits, solid_angle, Approach, Extrapolation, JumpResult,
    PVConfig, PvResult, SolidAngle, SolidAngleMethod,
};
pub use hartogs::{hartogs_extend, Cutoff, HartogsExtension};
pub use inhomogeneous::{
    check_compatibility, dbar_data, solution_function, solve_inhomogeneous, CompatibilityOptions, CompatibilityReport,
    InhomogeneousConfig,
};
pub use teodorescu::{teodorescu, teodorescu_dbar_residual, teodorescu_function, DBAR_CHECK_STEP};
