//! Polyconvexity of double-well matrix energies f(X) = |X − X₁|²|X − X₂|².
//!
//! - [`certify`](certify::certify) decides polyconvexity from the singular
//!   values of X₁ − X₂ and returns either the parameters (a, Q, B) or a
//!   rank-one direction along which convexity fails.
//! - [`Decomposition`] splits a certified energy into a convex part and a
//!   quadratic null Lagrangian.
//! - [`minimize_dirichlet`] solves the Dirichlet problem on a P1 triangulation
//!   of a 2D domain by minimizing the convex part only.

pub mod certify;
pub mod decompose;
pub mod energy;
pub mod error;
pub mod fd;
pub mod fem;
pub mod identities;
pub mod linalg;
pub mod minimize;
pub mod rng;

pub use certify::{
    certify, find_violation, sample_rank_one, Certificate, CertifyOptions, RankOneReport, Witness,
};
pub use decompose::Decomposition;
pub use energy::{g2_frame, p3_nonpoly, p3_shifted, DoubleWell, RankOneDirection};
pub use error::{Error, Result};
pub use fem::{null_lagrangian_gap, Mesh2, VectorField};
pub use linalg::{random_rotation, svd, Matrix, SvdResult};
pub use minimize::{
    energy_report, minimize_dirichlet, minimize_dirichlet_from, uniqueness_probe, EnergyReport, HistoryEntry,
    ProbeReport, SolveOptions, SolveResult,
};
