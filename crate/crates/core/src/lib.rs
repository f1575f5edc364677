//! Dynamics of the two-parameter quadratic map
//!
//! ```text
//! Φ(x, y) = (1 − x[λ(1 − x) + y], μ y (x − y))
//! ```
//!
//! which models the input/output iteration of a cross-coupled NOR latch.
//! The crate covers the map itself and its derived forms ([`map`]), fixed
//! points and the Neimark–Sacker threshold ([`equilibria`]), invariant
//! curves, rotation numbers and the curve-doubling scan ([`curve`]), and
//! chaos diagnostics ([`chaos`]).
//!
//! The crate is `no_std` and only needs `alloc`. All arithmetic is `f64`
//! with `libm` transcendental functions, so results are reproducible
//! bit-for-bit across targets.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod chaos;
pub mod curve;
pub mod equilibria;
mod error;
pub mod geometry;
pub mod map;
pub mod poly;

pub use error::Error;
pub use map::{Params, Point, PolarPoint};

pub type Result<T, E = Error> = core::result::Result<T, E>;

pub(crate) const TAU: f64 = core::f64::consts::TAU;

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta - TAU * libm::floor(theta / TAU);
    if r >= TAU || r < 0.0 {
        0.0
    } else {
        r
    }
}
