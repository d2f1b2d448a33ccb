//! Coupled normalized Ricci flow and mean curvature flow for rotationally
//! symmetric data on `S^{n+1}`.
//!
//! The ambient metric is `b(x)^2 dx^2 + phi(x)^2 g_{S^n}` on `x in [0, 1]`;
//! the hypersurface is the orbit of a profile curve in the quotient
//! `(x, alpha)` with metric `b^2 dx^2 + phi^2 d alpha^2`.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the tensor formulas
#![allow(clippy::needless_range_loop)]

pub mod driver;
pub mod error;
pub mod hypersurface;
pub mod par;
pub mod ricci;
pub mod spectral;
pub mod verify;
pub mod warped;

pub use error::{Error, Result, Subsystem};
