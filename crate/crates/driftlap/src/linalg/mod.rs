//! Sparse and dense linear algebra kernels used by the operator, spectral,
//! and heat-flow layers.

pub mod cg;
pub mod csr;
pub mod dense;
pub mod subspace;
pub mod vec_ops;

pub use cg::{solve_cg, CgOutcome};
pub use csr::CsrMatrix;
pub use dense::{dense_smallest_generalized, DenseEigh, GeneralizedPairs};
pub use subspace::iterative_smallest_generalized;
