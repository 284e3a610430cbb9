//! Exact non-Markovian dynamics of one and two V-type three-level atoms in
//! Lorentzian reservoirs, with the relative-purity quantum speed limit time
//! and the BLP non-Markovianity measure.
//!
//! * [`qmat`]: small dense complex matrices, Hermitian eigenvalues, partial
//!   transpose, trace norm.
//! * [`vchannel`]: decay amplitudes, Kraus operators, one- and two-atom
//!   evolution with analytic time derivatives.
//! * [`states`]: Werner and Horodecki two-qutrit states, negativity, region
//!   classification.
//! * [`metrics`]: fidelity, `X(τ)`, `τ_QSL`, trace distance, BLP measure.
//! * [`sweep`]: parameter grids, CSV and SVG output.
//! * [`cli`]: the command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod metrics;
pub mod qmat;
pub mod states;
pub mod sweep;
pub mod tol;
pub mod vchannel;

pub use error::{Error, Result};
