#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod error;
pub mod instances;
pub mod linalg;
pub mod model;
pub mod multilinear;
pub mod retraction;
pub mod rng;
pub mod solver;
