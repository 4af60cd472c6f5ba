//! Minimum-weight frame design under eigenvalue and harmonic-response
//! constraints, with certified global lower bounds from a moment relaxation
//! hierarchy.
//!
//! The crate is `no_std` and needs only an allocator. File formats, reports
//! and the command-line front end live in the `dynframe` crate.
#![no_std]
// NaN-rejecting checks are written as `!(x > 0.0)`; dense kernels index in loops.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod analysis;
pub mod benchmarks;
pub mod certify;
pub mod constraints;
pub mod error;
pub mod fem;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod relaxation;
pub mod sdp;

pub use error::{Error, Result};
