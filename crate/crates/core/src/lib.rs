//! Numerical core for theta-function summation identities.
//!
//! The crate evaluates the genus-1 building blocks (q-Pochhammer symbols, the
//! short theta function `θ(a;p)`, Jacobi `θ₁`), elliptic hypergeometric series,
//! Riemann theta functions with characteristics, concrete Jacobians (the torus
//! and real genus-2 hyperelliptic curves), and the telescoping theta sums built
//! on top of Fay's identity.
//!
//! Everything here is a pure function of its inputs. The crate is `no_std`
//! (with `alloc`) when built without the default `std` feature; enable `libm`
//! in that configuration to supply the floating-point routines.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(not(any(feature = "std", feature = "libm")))]
compile_error!("theta-summa-core needs either the `std` or the `libm` feature for float math");

pub mod ehs;
pub mod error;
pub mod jacobian;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod residual;
pub mod riemann;
pub mod summation;

pub use num_complex::Complex64;

pub use error::{Error, Result};
