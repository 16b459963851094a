//! Simulation of a cold-atom EIT quantum memory operated as a tunable,
//! possibly non-Hermitian, beam splitter between single photons and single
//! magnons, together with an exact few-particle Fock-space oracle and the
//! closed-form correlation formulas it checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod fock;
pub mod grid;
pub mod mbloch;
pub mod medium;
pub mod pulse;
pub mod splitter;
pub mod stats;
pub mod timeline;

pub use error::{Error, Result};
pub use field::{norm_decomposition, FieldState, NormBudget};
pub use grid::{make_grid, Grid};
pub use medium::MediumParams;
pub use num_complex::Complex64;
pub use pulse::{PulseEnvelope, PulseShape};
pub use timeline::{ControlTimeline, Stage};
