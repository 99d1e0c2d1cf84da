//! Algebraic blinding and a desk-scale cryptographic trilinear map.
//!
//! The crate is `no_std` with `alloc`. Every randomized operation takes an
//! explicit RNG so instances are reproducible from a seed.
//!
//! Module map:
//! - [`field`]: arithmetic in `K = F_{q^d}`, Frobenius powers, descent coordinates.
//! - [`linalg`]: dense matrices over `K`.
//! - [`poly`]: sparse multivariate polynomials, straight-line circuits, the ideal
//!   of ambivalence and descent reduction.
//! - [`blinding`]: local quadratic isomorphisms, the blinding space `W` and `rho`.
//! - [`curve`]: short Weierstrass curves, torsion, parameter search, transports.
//! - [`pairing`]: Miller functions, the Weil pairing, blinded Miller loops.
//! - [`publisher`]: publication of semi-local sums, products and maps.
//! - [`trimap`]: generator matrices, encodings and the trilinear evaluation.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod blinding;
pub mod curve;
pub mod field;
pub mod linalg;
pub mod pairing;
pub mod poly;
pub mod publisher;
pub mod trimap;

mod error;
pub use error::{Error, Result};

/// Default number of re-randomized attempts for exceptional public evaluations.
pub const DEFAULT_RETRY_BUDGET: usize = 16;
