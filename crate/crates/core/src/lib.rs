//! Mean-reverting models of the broker call-money rate and what they imply
//! for margin-loan pricing.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.
//! Every transcendental function goes through [`libm`], so results are
//! bit-identical whether or not `std` is linked.
//!
//! Unit conventions:
//!
//! * [`series`], [`descriptive`], [`autoregress`] and [`ou`] work in percent
//!   per annum (0-100 scale) with time measured in months.
//! * [`margin`] and [`arbitrage`] work on the unit interval. [`margin`]
//!   rejects percent-scale inputs at its boundary.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod arbitrage;
pub mod autoregress;
pub mod descriptive;
mod error;
pub mod margin;
pub mod normal;
mod ols;
pub mod ou;
pub mod rng;
pub mod series;

pub use error::{Error, Result};
