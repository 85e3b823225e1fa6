//! Numerical geometry of Riemannian almost product manifolds and their
//! P-connection.
//!
//! The pipeline runs per sample point of a coordinate chart:
//!
//! 1. [`expr`] parses the component functions of `g` and `P` and evaluates
//!    them as second-order jets.
//! 2. [`manifold`] checks the almost product axioms and assembles a
//!    [`manifold::PointFrame`].
//! 3. [`geometry`] builds the Levi-Civita data: Christoffel symbols,
//!    curvature, Ricci traces, the structure tensor `F`, `∇F`, the Nijenhuis
//!    tensor and `‖∇P‖`.
//! 4. [`pconnection`] builds the P-connection `∇' = ∇ - ½(∇P)P`, its torsion
//!    and curvature, the tensors `K` and `H`, class tests and scalar relations.
//! 5. [`harness`] turns all of it into a residual report and drives the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod expr;
pub mod fuzzing;
pub mod geometry;
pub mod harness;
pub mod manifold;
pub mod pconnection;
pub mod tensor;

/// `r / (1 + scale)`: scale-free residual used by every check.
pub fn normalized(residual: f64, scale: f64) -> f64 {
    residual / (1.0 + scale.abs())
}
