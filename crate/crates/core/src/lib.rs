//! Exact exponents of soft covering for discrete memoryless channels.
//!
//! The crate computes, for an input law `P` on a finite alphabet, a channel
//! `W` and a rate `R`, the exponential decay rate of the expected total
//! variation between the output law induced by a random codebook and the
//! target output law. Alongside the exponent solvers it ships information
//! measures, method-of-types tools, the auxiliary inequalities the exponents
//! rest on, and a desk-scale Monte Carlo simulator.
//!
//! All internal arithmetic is in nats. [`LogBase`] converts at the edges.
//!
//! ```
//! use softcover::{exponents, Channel64, Distribution64, LogBase};
//!
//! let p = Distribution64::binary(0.4).unwrap();
//! let w = Channel64::bsc(0.05).unwrap();
//! let rate = LogBase::Bits.to_nats(0.85);
//! let alpha = exponents::alpha_dual(&p, &w, rate).unwrap();
//! assert!((alpha.value_in(LogBase::Bits) - 0.0204285).abs() < 1e-6);
//! ```

// Negated float comparisons are deliberate: NaN must fail every validity check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod exponents;
pub mod measures;
pub mod optim;
pub mod scalar;
pub mod simulator;
pub mod typespace;

pub use error::{Error, Result};
pub use exponents::{Certificate, Diagnostics, ExponentKind, ExponentResult, Selection};
pub use measures::{Channel, Distribution, JointDistribution, LogBase};
pub use scalar::Real;

pub type Distribution64 = Distribution<f64>;
pub type Channel64 = Channel<f64>;
pub type JointDistribution64 = JointDistribution<f64>;
pub type ExponentResult64 = ExponentResult<f64>;

pub type Distribution32 = Distribution<f32>;
pub type Channel32 = Channel<f32>;
pub type JointDistribution32 = JointDistribution<f32>;
pub type ExponentResult32 = ExponentResult<f32>;
