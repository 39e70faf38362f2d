//! Exact rational linear algebra plus symmetric eigenvalues.

mod eigen;
mod exact;
mod matrix;

pub use eigen::{sym_eigenvalues, sym_eigenvalues_f64, DEFAULT_TOL};
pub use exact::{
    column, g_inverse, g_inverse_with, inverse, moore_penrose, pivots, projector, projector_decompose, projector_with,
    quadratic_form, rank, PivotRule, Projector,
};
pub use matrix::{rat, ratio, IntMatrix, Matrix, RationalMatrix};
