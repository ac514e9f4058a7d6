//! Normalized Frobenius geometry, demeaning and the empirical covariance.
//!
//! All matrices are dense `f64`. The norm is normalized by the dimension so
//! that `‖I_p‖ = 1` for every `p`:
//!
//! ```text
//! ⟨A, B⟩ = tr(A Bᵀ) / p        ‖A‖² = ⟨A, A⟩
//! ```
//!
//! Observations are stored with dimensions as rows and samples as columns
//! (`p × n`).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Absolute asymmetry accepted by [`SymmetricMatrix::new`] before it
/// symmetrizes the input.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Relative tolerance on the smallest eigenvalue for positive semidefiniteness:
/// `λ_min ≥ -PSD_TOLERANCE · λ_max`.
pub const PSD_TOLERANCE: f64 = 1e-8;

/// A `p × n` block of `n` samples in dimension `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    data: DMatrix<f64>,
}

impl ObservationMatrix {
    /// Wraps a `p × n` matrix (columns are samples). Requires `p ≥ 1`,
    /// `n ≥ 2` and finite entries.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.ncols() < 2 {
            return Err(Error::InsufficientSamples {
                required: 2,
                actual: data.ncols(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { data })
    }

    /// Builds the matrix from samples given as rows (`n × p`, the usual
    /// statistics layout), transposing into the `p × n` orientation.
    pub fn from_sample_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: bad.len(),
            });
        }
        Self::new(DMatrix::from_fn(p, n, |i, k| rows[k][i]))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    /// Returns `X + v·1ᵀ`: every sample shifted by `shift`.
    pub fn shifted(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: shift.len(),
            });
        }
        let mut data = self.data.clone();
        for (i, mut row) in data.row_iter_mut().enumerate() {
            row.add_scalar_mut(shift[i]);
        }
        Self::new(data)
    }
}

/// Dense symmetric `p × p` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    data: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Accepts a square finite matrix whose asymmetry is within
    /// [`SYMMETRY_TOLERANCE`] and stores `(A + Aᵀ)/2`.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        if data.nrows() == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let max_asymmetry = (&data - data.transpose()).amax();
        if max_asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::NotSymmetric { max_asymmetry });
        }
        Ok(Self::symmetrized(data))
    }

    /// Symmetrizes a matrix that is symmetric up to rounding by construction
    /// (Gram products, sums of symmetric matrices).
    pub(crate) fn symmetrized(data: DMatrix<f64>) -> Self {
        let data = (&data + data.transpose()) * 0.5;
        Self { data }
    }

    pub fn identity(p: usize) -> Self {
        Self {
            data: DMatrix::identity(p, p),
        }
    }

    pub fn zeros(p: usize) -> Self {
        Self {
            data: DMatrix::zeros(p, p),
        }
    }

    pub fn scaled_identity(p: usize, scale: f64) -> Self {
        Self {
            data: DMatrix::identity(p, p) * scale,
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let p = diag.len();
        Self {
            data: DMatrix::from_fn(p, p, |i, j| if i == j { diag[i] } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            data: &self.data * factor,
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self::symmetrized(&self.data * a + &other.data * b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(1.0, other, -1.0)
    }

    /// `self · selfᵀ`, which is also symmetric.
    pub fn gram(&self) -> Self {
        Self::symmetrized(&self.data * self.data.transpose())
    }

    /// `Q · self · Qᵀ`.
    pub fn conjugate(&self, q: &DMatrix<f64>) -> Result<Self> {
        if q.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: q.ncols(),
            });
        }
        Ok(Self::symmetrized(q * &self.data * q.transpose()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut values: Vec<f64> = self.data.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Positive semidefinite within `λ_min ≥ -tol · max(λ_max, 0)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let values = self.eigenvalues();
        let min = values[0];
        let max = values[values.len() - 1];
        min >= -tol * max.max(0.0)
    }

    /// Symmetric square root `Γ Λ^{1/2} Γᵀ`. Fails if the smallest eigenvalue
    /// is below `-PSD_TOLERANCE · λ_max`; slightly negative eigenvalues are
    /// clamped to zero.
    pub fn psd_sqrt(&self) -> Result<DMatrix<f64>> {
        let eigen = SymmetricEigen::new(self.data.clone());
        let max = eigen.eigenvalues.max();
        let min = eigen.eigenvalues.min();
        if min < -PSD_TOLERANCE * max.max(0.0) {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue: min });
        }
        let roots = eigen.eigenvalues.map(|v| v.max(0.0).sqrt());
        let vectors = &eigen.eigenvectors;
        Ok(vectors * DMatrix::from_diagonal(&roots) * vectors.transpose())
    }
}

fn check_same_dim(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    Ok(())
}

/// `‖A‖² = tr(AAᵀ)/p`.
pub fn frob_norm_sq(a: &SymmetricMatrix) -> f64 {
    a.data.norm_squared() / a.dim() as f64
}

/// `⟨A, B⟩ = tr(ABᵀ)/p`.
pub fn inner(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(a.data.dot(&b.data) / a.dim() as f64)
}

/// Removes the arithmetic mean of every row (dimension).
pub fn demean(x: &ObservationMatrix) -> ObservationMatrix {
    let n = x.n_samples() as f64;
    let mut data = x.data.clone();
    for mut row in data.row_iter_mut() {
        let mean = row.sum() / n;
        row.add_scalar_mut(-mean);
    }
    ObservationMatrix { data }
}

/// `S = X̃ X̃ᵀ / (n - 1)` with `X̃` the demeaned observations.
pub fn sample_covariance(x: &ObservationMatrix) -> SymmetricMatrix {
    covariance_of_demeaned(&demean(x))
}

/// Sample covariance of observations that are already demeaned.
pub(crate) fn covariance_of_demeaned(xt: &ObservationMatrix) -> SymmetricMatrix {
    let scale = 1.0 / (xt.n_samples() as f64 - 1.0);
    SymmetricMatrix::symmetrized(xt.data() * xt.data().transpose() * scale)
}
