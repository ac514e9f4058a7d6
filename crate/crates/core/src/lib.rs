//! Ledoit-Wolf linear shrinkage of covariance matrices when the mean is
//! unknown.
//!
//! The crate provides four translation-invariant shrinkage estimators
//! ([`shrinkage`]), the population quantities and oracle matrices they are
//! benchmarked against ([`oracle`]), reproducible Gaussian and Student-t
//! samplers ([`sampling`]) and a Monte-Carlo harness for loss studies
//! ([`experiments`]).
//!
//! ```
//! use lwshrink::{estimate, sample_gaussian, PopulationModel, SymmetricMatrix, Variant};
//!
//! let model = PopulationModel::gaussian(SymmetricMatrix::identity(10)).unwrap();
//! let x = sample_gaussian(&model, 8, 42).unwrap();
//! let shrunk = estimate(&x, Variant::U).unwrap();
//! assert!((0.0..=1.0).contains(&shrunk.shrinkage_intensity));
//! ```

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod shrinkage;

pub use error::{Error, Result};
pub use linalg::{demean, frob_norm_sq, inner, sample_covariance, ObservationMatrix, SymmetricMatrix};
pub use oracle::{
    expected_sample_loss, gaussian_beta2, loss, optimal_sigma_starstar, oracle_sigma_star, population_mu_alpha2,
    student_beta2, OptimalProjection, OracleScalars,
};
pub use sampling::{
    random_wishart_sigma, sample, sample_gaussian, sample_mixed_student, sample_student, Distribution, PopulationModel,
};
pub use shrinkage::{coefficient_set, estimate, CoefficientSet, ShrinkageResult, ShrinkageScalars, Variant};
