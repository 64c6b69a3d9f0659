//! Exact rational linear algebra and integer lattice algorithms.

pub mod lattice;
pub mod matrix;
pub mod normal_form;
pub mod rational;

pub use lattice::{
    box_points, centered_box, cokernel, lattice_member, solve_affine_lattice, AffineLatticeSolution,
    CokernelStructure, InvariantFactor, Lattice,
};
pub use matrix::{IntMatrix, LinearSolution, Matrix, RatMatrix};
pub use normal_form::{hnf, snf, Hnf, Snf};
pub use rational::{Int, IntVec, RatVec, Rational};
