//! Optimal unitary-estimation fidelity on the Young lattice.
//!
//! The optimal fidelity of estimating an unknown `U ∈ SU(d)` from `n` queries is
//! the largest eigenvalue of a sparse matrix `M_est` indexed by Young diagrams
//! with `n` boxes and at most `d` rows. Writing `F = 1 − h_{n,d}/n²`, this crate
//! computes `h_{n,d}` exactly for desk-scale `n` and pins its limit through
//!
//! - a discrete Dirichlet Laplacian on the lattice ([`dirichlet_graph`]) that
//!   bounds `h_{n,d}` from below,
//! - P1 finite elements on the lattice triangulation ([`fem_simplex`]) that tie
//!   the discrete problem to the continuous Dirichlet eigenvalue of a simplex,
//! - Kahn's polynomial test function ([`kahn_bound`]), evaluated in exact
//!   rational arithmetic, which bounds `h(d)` from above for every `d`.
//!
//! [`asymptotics`] sweeps `n`, extrapolates, and tabulates the known bounds on `h(d)`.

// `!(x > t)` rejects NaN along with small values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod dirichlet_graph;
pub mod error;
pub mod estimation;
pub mod fem_simplex;
pub mod kahn_bound;
pub mod spectral;
pub mod verify;
pub mod young_lattice;

pub use error::{Error, Result};
