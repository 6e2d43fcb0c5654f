//! Kolmogorov n-widths of matrix-image ellipsoids and best rank-n
//! approximations in the spectral norm.
//!
//! For a square matrix `A`, the image of the unit ball
//! `{A x : |x| <= 1}` is an ellipsoid whose n-width equals the singular
//! value `sigma_{n+1}`. Every orthonormal basis of an optimal n-dimensional
//! subspace yields a best rank-n approximation to `A`, so certifying
//! optimal subspaces gives a whole family of best approximants beyond the
//! truncated SVD.
//!
//! Module map:
//!
//! * [`linalg`] dense substrate: SVD, symmetric eigenvalues, Gram-Schmidt,
//!   complements and the shared [`TolerancePolicy`].
//! * [`criteria`] distance, n-width and the optimality certificates
//!   (direct distance, PSD, signed minors, complement, Karlovitz).
//! * [`lowrank`] constructors of best rank-n approximants and the rank-1
//!   admissible region.
//! * [`tp`] strict total positivity, sign changes and Melkman-Micchelli
//!   optimal spaces.
//! * [`sequence`] the iterated subspace sequence and its convergence bound.
//! * [`samples`] seeded generators of test matrices.

pub mod criteria;
pub mod error;
pub mod linalg;
pub mod lowrank;
pub mod samples;
pub mod sequence;
pub mod tolerance;
pub mod tp;

pub use criteria::{CriterionMatrix, Method, MinorEvidence, MinorOptions, OptimalityVerdict};
pub use error::{Error, Result};
pub use linalg::{Matrix, Orthonormalized, Subspace, SvdFactorization};
pub use lowrank::{Rank1Region, RankNApproximant, ScalingRange, Source};
pub use sequence::{ConvergenceReport, SequenceStep};
pub use tolerance::TolerancePolicy;
pub use tp::{MelkmanSpace, SignChangePattern, Side, TpMode, TpWitness};
