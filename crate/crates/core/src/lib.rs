//! Numerics for the almost Mathieu operator `h(β) = u + u* + β(v + v*)` on the
//! rotation algebra at rational frequencies.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. Everything here is pure computation; file formats, the command line
//! and the parallel batch driver live in the `harper-tool` crate.
#![cfg_attr(not(feature = "std"), no_std)]
// NaN must fail range checks, so `!(x > y)` is intended throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algebra;
pub mod butterfly;
pub mod coefficients;
pub mod error;
pub mod lyapunov;
pub mod numbertheory;
pub mod quad;
pub mod rational;
pub mod spectrum;

pub use error::{Error, Result};
pub use rational::RationalFrequency;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
