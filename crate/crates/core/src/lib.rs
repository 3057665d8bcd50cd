//! Exact finite de Finetti approximations for exchangeable laws on finite
//! alphabets.
//!
//! An exchangeable law on `A^n` is stored as one probability per type
//! class ([`exch`]). From it, [`definetti`] builds a finite mixing measure
//! of single-letter laws from conditional distributions, forms the mixture
//! of i.i.d. laws on `A^k`, and certifies the relative entropy between the
//! `k`-marginal and the mixture against explicit mutual-information and
//! entropy bounds. [`optimizer`] reweights mixtures by I-projection and
//! probes how tight the bounds are.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the aliases at the crate root fix `f64`, which is what
//! the documented tolerances refer to.
//!
//! Only finite alphabets are supported.

pub mod cli;
pub mod definetti;
pub mod error;
pub mod exch;
pub mod generators;
pub mod info;
pub mod io;
pub mod optimizer;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Law = exch::ExchangeableLaw<f64>;
pub type Law32 = exch::ExchangeableLaw<f32>;
pub type Joint = exch::GenericJoint<f64>;
pub type Letter = exch::LetterDist<f64>;
pub type Block = exch::BlockJoint<f64>;
pub type Measure = definetti::MixingMeasure<f64>;
pub type Cert = definetti::Certificate<f64>;
