//! Optimal group size for joint-liability microlending.
//!
//! A borrower group of size `x` defaults unless every member repays, and each
//! member defaults with probability `1 / f(x)`. The crate certifies, for a
//! given family `f`, whether the group no-default probability has a unique
//! interior maximizer, locates it three independent ways, and cross-checks the
//! result by brute force and Monte-Carlo simulation.
//!
//! Numerics are generic over [`Scalar`] (`f32` or `f64`); the `*F64` aliases
//! below are what most callers want.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod families;
pub mod optimizer;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod simulation;
pub mod verifier;

pub use error::{Error, Result};
pub use families::{builtin_families, family_info, make_family, FamilyInfo, FamilySpec};
pub use optimizer::{
    maximize, narrow_interval, optimize_family, sweep, NarrowedInterval, Optimum, SweepRecord,
};
pub use scalar::Scalar;
pub use simulation::{
    analytic_group_prob, brute_force_integer_argmax, simulate_group, SimulationEstimate,
};
pub use verifier::{appendix_b_checks, verify_conditions, Branch, ScanConfig, TheoremCertificate};

pub type FamilyF64 = FamilySpec<f64>;
pub type FamilyF32 = FamilySpec<f32>;
pub type CertificateF64 = TheoremCertificate<f64>;
pub type CertificateF32 = TheoremCertificate<f32>;
pub type OptimumF64 = Optimum<f64>;
pub type OptimumF32 = Optimum<f32>;
pub type SweepRecordF64 = SweepRecord<f64>;
pub type ScanConfigF64 = ScanConfig<f64>;
