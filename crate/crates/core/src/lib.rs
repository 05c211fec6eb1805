//! Privacy amplification by post-processing.
//!
//! Accountants and exact oracles for three families of post-processing
//! bounds:
//!
//! * [`mixing`]: uniform-mixing coefficients of finite Markov kernels
//!   (Dobrushin, (γ,ε)-Dobrushin, Doeblin, ultra-mixing) and the `(ε, δ)`
//!   amplification each one yields.
//! * [`iteration`]: coupling bounds for noisy Lipschitz maps, the iterated
//!   W∞ path bound and a per-index Rényi accountant for noisy projected SGD
//!   on strongly convex losses.
//! * [`diffusion`]: Brownian and Ornstein-Uhlenbeck mechanisms, their
//!   Rényi curves and the mean-squared-error comparison against a matched
//!   Gaussian mechanism.
//!
//! [`verify`] certifies all of the above against exact divergences on
//! random finite instances, quadrature and Monte-Carlo.

// `!(x >= 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod cli;
pub mod diffusion;
pub mod distributions;
pub mod divergences;
pub mod error;
mod flow;
pub mod iteration;
pub mod mixing;
pub mod quadrature;
pub mod verify;

pub use distributions::{
    Coupling, DiscreteDist, GaussianDist, Lap2Dist, LaplaceDist, NoiseFamily, SupportPoint,
};
pub use divergences::{DpGuarantee, RdpPoint};
pub use error::{Error, Result};
