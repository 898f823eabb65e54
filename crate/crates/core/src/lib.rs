//! Bulk-surface Cahn-Hilliard simulator with dynamic boundary conditions.
//!
//! The order parameter lives on the unit square and, independently, on its
//! boundary curve; both parts are coupled through the trace and share a single
//! conserved mean. The crate provides:
//!
//! * [`monotone`]: scalar maximal monotone graphs, resolvents, Yosida
//!   approximations and Moreau-Yosida envelopes,
//! * [`domain`]: P1 bulk and boundary-chain assembly on the unit square,
//! * [`spaces`]: the discrete product Hilbert structure (means, projection,
//!   duality map and its inverse, Poincare constant),
//! * [`scheme`]: the regularized backward-Euler time stepper,
//! * [`verify`]: monitors and experiment suites,
//! * [`cli`]: configuration parsing and subcommand drivers.

pub mod cli;
pub mod domain;
pub mod error;
pub mod forcing;
pub mod linalg;
pub mod monotone;
pub mod output;
pub mod rng;
pub mod scheme;
pub mod spaces;
pub mod verify;

pub use domain::DiscreteDomain;
pub use error::{Error, Result};
pub use monotone::{GraphKind, GraphPair, GraphSpec, Perturbation};
pub use scheme::{SchemeConfig, SchemeState, Splitting};
pub use spaces::{FieldPair, Functional};
