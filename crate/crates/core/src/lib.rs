//! Neural SDEs whose solutions stay inside a compact polyhedron.
//!
//! The central construction blends unconstrained dynamics `f` with a
//! boundary-safe fallback `c` through a weight `w(z)` that vanishes on the
//! boundary of `K`:
//!
//! ```text
//! h(t, z) = w(z) f_h(t, z) + (1 − w(z)) c_h(z)
//! g(t, z) = w(z) f_g(t, z)
//! ```
//!
//! Modules are layered: [`geometry`] and [`weights`] describe `K`, [`nets`]
//! provides the base MLPs, [`dynamics`] assembles SDE coefficients,
//! [`solvers`] integrates them and [`analysis`] checks the results.

mod error;

pub mod analysis;
pub mod dual;
pub mod dynamics;
pub mod field;
pub mod geometry;
pub mod nets;
pub mod rng;
pub mod solvers;
pub mod weights;

pub use dual::{Dual, Real};
pub use error::{Error, Result};
