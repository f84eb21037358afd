//! Exact nonequilibrium steady states of boundary-driven quantum spin chains.
//!
//! The steady state of an XXZ or SU(N) chain with maximal boundary driving is
//! `ρ = S S†` where `S` is a matrix product operator built from a Lax operator
//! in a truncated lowest-weight representation. The crate builds these
//! objects, evaluates observables through vertex operators on the doubled
//! auxiliary space, and checks every identity against a brute-force
//! Liouvillian oracle.

pub mod error;
pub mod lax;
pub mod liouvillian;
pub mod mpo;
pub mod observables;
pub mod qalgebra;
pub mod sparse;
pub mod verify;

pub type C64 = num_complex::Complex64;

pub use error::{Error, Result};
pub use lax::{h_density, HamiltonianDensity, LaxOp, Model};
pub use liouvillian::{DrivingSpec, FixedPoint, RateMatrix, ResidualReport};
pub use mpo::{DenseOperator, GlnWeights, MpoFactor, Side};
pub use observables::VertexOp;
pub use qalgebra::{AuxRep, GlnRep, QParams};
pub use sparse::SparseMat;
pub use verify::CheckReport;
