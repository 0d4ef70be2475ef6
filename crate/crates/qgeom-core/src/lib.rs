//! Geometry of quantum states at desk scale: joint numerical ranges, additive
//! uncertainty bounds, spectral-gap witnesses, entanglement-constrained
//! optimization and group-covariant state interconversion.
//!
//! The crate is `no_std` and only needs an allocator.
#![no_std]

extern crate alloc;

pub mod entangle;
pub mod error;
pub mod gapwitness;
pub mod hull;
pub mod interconvert;
pub mod lanczos;
pub mod linalg;
pub mod nnls;
pub mod numrange;
pub mod rng;
pub mod su2;
pub mod uncertainty;
pub mod wigner;

pub use error::{Error, Result};
