use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameters must be positive and finite (lambda = {lambda}, mu = {mu})")]
    InvalidParams { lambda: f64, mu: f64 },

    #[error("point is not fixed (residual {residual:e})")]
    NotFixed { residual: f64 },

    #[error("no interior fixed point for these parameters")]
    NoInteriorFixedPoint,

    #[error("linearization has a real spectrum (a = {a}, b = {b})")]
    RealSpectrum { a: f64, b: f64 },

    #[error("mu = {mu} is not above the Hopf threshold {mu_h}")]
    Subcritical { mu: f64, mu_h: f64 },

    #[error("orbit escaped at iterate {step}")]
    Escaped { step: usize },

    #[error("orbit collapsed onto the center at iterate {step}")]
    Collapsed { step: usize },

    #[error("no invariant curve found: {reason} (after {iterations} sweeps)")]
    NoCurve {
        reason: &'static str,
        iterations: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
