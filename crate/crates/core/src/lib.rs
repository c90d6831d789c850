//! Classical information over binary pure-state quantum channels under block coding.
//!
//! The crate covers the whole chain from letter states to the superadditive gain:
//!
//! - [`linalg`]: dense real-symmetric linear algebra (Jacobi eigensolver, PSD square root,
//!   Hadamard matrices, LU and Cholesky helpers).
//! - [`ensembles`]: letter ensembles, binary block codes, explicit tensor embeddings and
//!   Gram matrices.
//! - [`detection`]: square-root measurement, minimum-error optimality certificates,
//!   pairwise Bayes-cost reduction and product measurements.
//! - [`information`]: mutual information, first-order capacity, Holevo quantity,
//!   threshold-point values and the per-letter gain.
//! - [`fastcode`]: closed-form recursions for the `[[n, n-1, 2]]` and simplex families that
//!   never build a `2^n`-dimensional object.
//! - [`synth`]: decoder synthesis (basis extension, adapting unitary, Givens schedule).
//! - [`cli`]: the figure-reproduction command line harness.
//!
//! ```
//! use qchannel::{fastcode, information};
//!
//! let kappa = 0.9;
//! let per_letter = fastcode::nn12_mutual_information(9, kappa).unwrap() / 9.0;
//! assert!(per_letter > information::c1_binary(kappa));
//! ```

pub mod cli;
pub mod detection;
pub mod ensembles;
pub mod error;
pub mod fastcode;
pub mod information;
pub mod linalg;
pub mod synth;

pub use error::{Error, Result};
