//! Population scalars and the oracle matrices the estimators are measured
//! against.
//!
//! For a true covariance `Σ` and `n` samples:
//!
//! ```text
//! μ  = ⟨Σ, I⟩            α² = ‖Σ − μI‖²
//! β² = E‖S − Σ‖²         δ² = E‖S − μI‖² = α² + β²
//! ```
//!
//! `Σ*` is the best combination `ρ₁I + ρ₂S` with deterministic coefficients
//! (expected loss `α²β²/δ²`); `Σ**` is the per-sample projection of `Σ` onto
//! `span{I, S}`, the floor no linear shrinkage can beat.

use crate::error::{Error, Result};
use crate::linalg::{frob_norm_sq, inner, SymmetricMatrix};
use crate::sampling::{sample, PopulationModel};
use crate::shrinkage::{scalar_d2, scalar_m};

/// Relative agreement required between the two closed forms of the
/// Student-t `β²`.
const STUDENT_FORMS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleScalars {
    pub mu: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub delta2: f64,
    /// `V[‖y‖²/p]` for one decorrelated sample; known in closed form only
    /// for Gaussian populations.
    pub theta2: Option<f64>,
}

impl OracleScalars {
    fn from_parts(mu: f64, alpha2: f64, beta2: f64, theta2: Option<f64>) -> Self {
        Self {
            mu,
            alpha2,
            beta2,
            delta2: alpha2 + beta2,
            theta2,
        }
    }

    /// Attaches an externally estimated `θ²` (e.g. from
    /// [`theta2_monte_carlo`]).
    pub fn with_theta2(self, theta2: f64) -> Self {
        Self {
            theta2: Some(theta2),
            ..self
        }
    }

    /// Expected loss of [`oracle_sigma_star`]: `α²β²/δ²`.
    pub fn optimal_expected_loss(&self) -> f64 {
        if self.delta2 == 0.0 {
            0.0
        } else {
            self.alpha2 * self.beta2 / self.delta2
        }
    }
}

/// Per-sample projection of `Σ` onto `span{I, S}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalProjection {
    /// `⟨S, Σ⟩ − mμ = ⟨Σ − μI, S − mI⟩`.
    pub alpha_tilde2: f64,
    pub sigma_starstar: SymmetricMatrix,
}

/// `μ = tr(Σ)/p` and `α² = ‖Σ − μI‖²`.
pub fn population_mu_alpha2(sigma: &SymmetricMatrix) -> (f64, f64) {
    let mu = scalar_m(sigma);
    (mu, scalar_d2(sigma, mu))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: n });
    }
    Ok(())
}

/// Closed-form scalars for Gaussian samples:
/// `β² = ((p+1)μ² + α²)/(n−1)` and `θ² = (2/p)‖Σ‖²`.
///
/// The `θ²` form follows from the decorrelated coordinates being independent
/// normals with variances `λᵢ`: `V[Σᵢ yᵢ²/p] = (1/p²) Σᵢ 2λᵢ²`.
pub fn gaussian_beta2(sigma: &SymmetricMatrix, n: usize) -> Result<OracleScalars> {
    check_n(n)?;
    let p = sigma.dim() as f64;
    let nf = n as f64;
    let (mu, alpha2) = population_mu_alpha2(sigma);
    let beta2 = ((p + 1.0) * mu * mu + alpha2) / (nf - 1.0);
    let theta2 = 2.0 / p * frob_norm_sq(sigma);
    Ok(OracleScalars::from_parts(mu, alpha2, beta2, Some(theta2)))
}

/// Student-t `β²` written as
/// `(1/n)(ν/(ν−4) + 1/(n−1))(α² + (p+1)μ²) − 2pμ²/(n(ν−4))`.
pub fn student_beta2_compact(mu: f64, alpha2: f64, p: usize, n: usize, nu: f64) -> f64 {
    let p = p as f64;
    let n = n as f64;
    (nu / (nu - 4.0) + 1.0 / (n - 1.0)) * (alpha2 + (p + 1.0) * mu * mu) / n - 2.0 * p * mu * mu / (n * (nu - 4.0))
}

/// Student-t `β²` written as
/// `((ν−2)/((ν−4)n) + 1/(n(n−1)))pμ² + (1/n)(ν/(ν−4) + 1/(n−1))(α² + μ²)`,
/// the form obtained by summing `V[yᵢyⱼ]` under the χ² mixture.
pub fn student_beta2_expanded(mu: f64, alpha2: f64, p: usize, n: usize, nu: f64) -> f64 {
    let p = p as f64;
    let n = n as f64;
    ((nu - 2.0) / ((nu - 4.0) * n) + 1.0 / (n * (n - 1.0))) * p * mu * mu
        + (nu / (nu - 4.0) + 1.0 / (n - 1.0)) * (alpha2 + mu * mu) / n
}

/// Closed-form scalars for multivariate t samples with covariance `Σ`.
///
/// Both algebraic forms are evaluated and must agree; `θ²` is left absent.
pub fn student_beta2(sigma: &SymmetricMatrix, n: usize, nu: f64) -> Result<OracleScalars> {
    if nu.is_nan() || nu <= 4.0 {
        return Err(Error::InvalidDegreesOfFreedom {
            nu,
            reason: "infinite fourth moment regime (nu <= 4)",
        });
    }
    check_n(n)?;
    let p = sigma.dim();
    let (mu, alpha2) = population_mu_alpha2(sigma);
    let compact = student_beta2_compact(mu, alpha2, p, n, nu);
    let expanded = student_beta2_expanded(mu, alpha2, p, n, nu);
    let scale = compact.abs().max(expanded.abs());
    if (compact - expanded).abs() > STUDENT_FORMS_TOLERANCE * scale {
        return Err(Error::Inconsistent(format!(
            "student beta2 forms disagree: {compact} vs {expanded}"
        )));
    }
    Ok(OracleScalars::from_parts(mu, alpha2, compact, None))
}

/// `Σ* = (β²/δ²)μI + (α²/δ²)S`.
pub fn oracle_sigma_star(scalars: &OracleScalars, s: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    if scalars.delta2 == 0.0 {
        return Err(Error::DegenerateOracle);
    }
    let target = SymmetricMatrix::scaled_identity(s.dim(), scalars.beta2 / scalars.delta2 * scalars.mu);
    target.combine(1.0, s, scalars.alpha2 / scalars.delta2)
}

/// `Σ** = μI + (α̃₂/d²)(S − mI)` with `α̃₂ = ⟨S, Σ⟩ − mμ`; `μI` when
/// `S` is a multiple of the identity.
pub fn optimal_sigma_starstar(sigma: &SymmetricMatrix, s: &SymmetricMatrix) -> Result<OptimalProjection> {
    let p = s.dim();
    let mu = scalar_m(sigma);
    let m = scalar_m(s);
    let d2 = scalar_d2(s, m);
    let alpha_tilde2 = inner(s, sigma)? - m * mu;
    let sigma_starstar = if d2 == 0.0 {
        SymmetricMatrix::scaled_identity(p, mu)
    } else {
        let weight = alpha_tilde2 / d2;
        SymmetricMatrix::scaled_identity(p, mu - weight * m).combine(1.0, s, weight)?
    };
    Ok(OptimalProjection {
        alpha_tilde2,
        sigma_starstar,
    })
}

/// Single-sample loss `‖A − Σ‖²`.
pub fn loss(a: &SymmetricMatrix, sigma: &SymmetricMatrix) -> Result<f64> {
    Ok(frob_norm_sq(&a.sub(sigma)?))
}

/// Large-dimension approximation `(p/n)(μ² + θ²)` of `E‖S − Σ‖²`.
pub fn expected_sample_loss(scalars: &OracleScalars, p: usize, n: usize) -> Result<f64> {
    let theta2 = scalars.theta2.ok_or(Error::MissingTheta2)?;
    Ok(p as f64 / n as f64 * (scalars.mu * scalars.mu + theta2))
}

/// Monte-Carlo estimate of `θ² = V[‖x − mean‖²/p]` from `draws` samples.
///
/// `‖x − mean‖²` equals `‖y‖²` for the decorrelated coordinates, so no
/// eigendecomposition is needed.
pub fn theta2_monte_carlo(model: &PopulationModel, draws: usize, seed: u64) -> Result<f64> {
    let x = sample(model, draws, seed)?;
    let p = model.dim() as f64;
    let mean = model.mean();
    let values: Vec<f64> = x
        .data()
        .column_iter()
        .map(|col| col.iter().zip(mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>() / p)
        .collect();
    let avg = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - avg) * (v - avg)).sum::<f64>() / (values.len() as f64 - 1.0);
    Ok(var)
}
