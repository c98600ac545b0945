//! Group-symmetric robust covariance estimation.
//!
//! This crate implements Tyler's distribution-free M-estimator of a shape
//! (scatter) matrix for complex elliptical data, together with its
//! group-symmetric variant (STyler) for covariances that are invariant under
//! conjugation by a finite unitary matrix group. It provides:
//!
//! - [`matgroup`]: finite unitary matrix groups, closure from generators,
//!   and the built-in symmetry classes (circulant, block-circulant,
//!   permutation, perHermitian, proper quaternion, equicorrelation).
//! - [`structure`]: the commutant block-diagonalization (basis, component
//!   multiplicities and block sizes, sparsity and degrees-of-freedom
//!   factors), the Reynolds averaging projection, rank laws, and geodesics
//!   on the positive definite cone.
//! - [`sampling`]: seeded samplers for the complex angular elliptical (CAE)
//!   law and heavier-tailed elliptical textures, plus random group-invariant
//!   ground-truth shape matrices.
//! - [`estimation`]: the Tyler and STyler fixed-point iterations with
//!   convergence diagnostics and the associated objective functions.
//! - [`analysis`]: error metrics, the high-probability error-bound
//!   evaluator, and a deterministic Monte Carlo experiment harness.
//! - [`io`]: JSON wire formats for matrices, groups, structures, sample
//!   sets, and estimator reports.
//!
//! All numerics are generic over the underlying real scalar (see
//! [`scalar::Scalar`]); the aliases below fix `f64` as the default
//! precision.
//!
//! ```
//! use symcov::estimation::{styler_estimate, EstimatorConfig};
//! use symcov::matgroup::builtin_group;
//! use symcov::sampling::{random_invariant_shape, sample_cae};
//! use symcov::structure::builtin_structure;
//! use symcov::GroupKind;
//!
//! # fn main() -> symcov::Result<()> {
//! // An 8-dimensional circulant symmetry needs only two samples.
//! let kind = GroupKind::Circulant;
//! let group = builtin_group::<f64>(kind, 8)?;
//! let structure = builtin_structure::<f64>(kind, 8)?;
//! assert_eq!(structure.min_samples(), 2);
//!
//! let truth = random_invariant_shape(&structure, 10.0, 7)?;
//! let samples = sample_cae(&truth, 2, 42)?;
//! let report = styler_estimate(&samples, &group, &structure, &EstimatorConfig::default())?;
//! assert!(report.converged());
//! # Ok(())
//! # }
//! ```

pub mod analysis;
pub mod error;
pub mod estimation;
pub mod io;
pub mod linalg;
pub mod matgroup;
pub mod sampling;
pub mod scalar;
pub mod structure;

pub use error::{Error, Result};
pub use matgroup::GroupKind;
pub use scalar::{Scalar, Tolerances};

/// Default real scalar.
pub type Real = f64;
/// Complex number over the default scalar.
pub type Cpx = num_complex::Complex<f64>;
/// Dense complex matrix over the default scalar.
pub type Mat = linalg::CMat<f64>;
/// Unitary matrix over the default scalar.
pub type Unitary = matgroup::UnitaryMatrix<f64>;
/// Finite unitary matrix group over the default scalar.
pub type Group = matgroup::GroupSpec<f64>;
/// Commutant structure over the default scalar.
pub type Structure = structure::StructureInfo<f64>;
/// Shape matrix over the default scalar.
pub type Shape = sampling::ShapeMatrix<f64>;
/// Sample set over the default scalar.
pub type Samples = sampling::SampleSet<f64>;

/// Single-precision aliases for callers that trade accuracy for footprint.
pub type Mat32 = linalg::CMat<f32>;
pub type Group32 = matgroup::GroupSpec<f32>;
