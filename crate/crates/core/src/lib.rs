//! Markov bases for log-linear models and exact conditional goodness-of-fit
//! tests built on them.
//!
//! The pipeline: build a design matrix ([`model`]), compute a Markov basis of
//! its toric ideal ([`basis`]), walk or enumerate the fiber of the observed
//! table ([`fiber`]) and compare the chi-square statistic of the observed
//! table with its conditional distribution ([`gof`]).
//!
//! ```
//! use mbasis::{independence_design, toric_markov_basis};
//!
//! let spec = independence_design(3, 3).unwrap();
//! let basis = toric_markov_basis(spec.design()).unwrap();
//! assert_eq!(basis.len(), 9);
//! assert_eq!(basis.max_degree(), 2);
//! ```

pub mod basis;
pub mod error;
pub mod fiber;
pub mod formats;
pub mod gof;
pub mod intlin;
pub mod model;
pub mod scalar;

pub use basis::{
    distance_reducing_check, independence_basis, toric_markov_basis, toric_markov_basis_with, verify_connects,
    MarkovBasis, Move, ToricOptions,
};
pub use error::{Error, Result};
pub use fiber::{enumerate_fiber, walk, ProposalKind, Target, WalkConfig, WalkSample};
pub use gof::{chi_square, exact_pvalue_enumerated, exact_pvalue_mc, fit_mle, FitResult, McOptions, TestResult};
pub use intlin::{hermite_normal_form, lattice_kernel_basis, Matrix};
pub use model::{generic_design, graph_to_table, independence_design, p1_design, Graph, ModelSpec, Reciprocity, Table};
pub use scalar::{FieldScalar, IntScalar, Real};

/// Machine-integer matrix used by the model and basis code.
pub type IntMatrix = Matrix<i64>;
/// Arbitrary-precision matrix for inputs that overflow `i64`.
pub type BigIntMatrix = Matrix<num_bigint::BigInt>;
pub type Fit = FitResult<f64>;
pub type Fit32 = FitResult<f32>;
pub type GofTest = TestResult<f64>;
