//! Exact local computations behind anticyclotomic p-adic L-functions.
//!
//! Toric local integrals and their continuations in `X = q^{-s}`, local
//! L-factors and exceptional zeros, principal series and Steinberg cocycles on
//! `P^1(F)`, finite-level Iwasawa algebras and Tate-lattice L-invariants.
#![no_std]

extern crate alloc;

pub mod coeff;
pub mod discrete_series;
pub mod error;
pub mod gl2;
pub mod integrals;
pub mod interpolation;
pub mod iwasawa;
pub mod padic;
pub mod poly;
pub mod rational_forms;
pub mod steinberg;
pub mod torus;

pub use coeff::CoefficientValue;
pub use error::{Error, Result};
pub use padic::{PAdicRational, PrimeLocalField};
pub use rational_forms::{LocalRationalFunction, SValue};

/// Exact rationals.
pub type Q = num_rational::BigRational;
