//! Concrete problem builders.

pub mod enumerate;
pub mod matrix;
pub mod tensor;
pub mod two_sided;
pub mod nlep;
pub mod stiefel;
pub mod grassmann;
pub mod graph;
