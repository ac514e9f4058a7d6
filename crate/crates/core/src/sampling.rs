//! Reproducible population samplers.
//!
//! Every sampler is a pure function of `(model, n, seed)`: the seed is fed
//! to a ChaCha8 generator, so the same inputs give bit-identical matrices on
//! the same build. Monte-Carlo loops derive one seed per iteration with
//! [`derive_seed`], which keeps parallel runs independent of scheduling.
//!
//! Multivariate Student-t samples use the χ² mixture
//!
//! ```text
//! x = mean + √((ν−2)/U) · Σ^{1/2} z,   U ~ χ²_ν,  z ~ N(0, I)
//! ```
//!
//! i.e. a t_ν law with scale matrix `((ν−2)/ν)·Σ` and covariance exactly `Σ`.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution as _, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{frob_norm_sq, ObservationMatrix, SymmetricMatrix};

/// Population law of the samples, all with covariance `Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Gaussian,
    /// Multivariate t with `nu` degrees of freedom, rescaled to covariance `Σ`.
    Student {
        nu: f64,
    },
    /// Independent t blocks: the first `⌈p/2⌉` whitened coordinates use
    /// `nu_first`, the rest `nu_second`.
    MixedStudent {
        nu_first: f64,
        nu_second: f64,
    },
}

impl Distribution {
    /// Short label used in reports, e.g. `gaussian`, `student_nu10`,
    /// `mixed_student_nu15_nu8.5`.
    pub fn label(&self) -> String {
        match self {
            Distribution::Gaussian => "gaussian".to_string(),
            Distribution::Student { nu } => format!("student_nu{nu}"),
            Distribution::MixedStudent { nu_first, nu_second } => {
                format!("mixed_student_nu{nu_first}_nu{nu_second}")
            }
        }
    }

    /// Whether a closed-form `β²` exists (Gaussian or single-ν Student).
    pub fn has_analytic_oracle(&self) -> bool {
        !matches!(self, Distribution::MixedStudent { .. })
    }

    /// Whether the eighth moments are finite (Gaussian, or every ν > 8).
    pub fn has_finite_eighth_moment(&self) -> bool {
        match *self {
            Distribution::Gaussian => true,
            Distribution::Student { nu } => nu > 8.0,
            Distribution::MixedStudent { nu_first, nu_second } => nu_first > 8.0 && nu_second > 8.0,
        }
    }

    /// Rejects `ν ≤ 2` and non-finite degrees of freedom.
    pub fn validate(&self) -> Result<()> {
        let check = |nu: f64| {
            if nu.is_nan() || nu <= 2.0 {
                Err(Error::InvalidDegreesOfFreedom {
                    nu,
                    reason: "covariance is infinite for nu <= 2",
                })
            } else {
                Ok(())
            }
        };
        match *self {
            Distribution::Gaussian => Ok(()),
            Distribution::Student { nu } => check(nu),
            Distribution::MixedStudent { nu_first, nu_second } => check(nu_first).and(check(nu_second)),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// True covariance, law and mean of the sampled population.
#[derive(Debug, Clone)]
pub struct PopulationModel {
    sigma: SymmetricMatrix,
    distribution: Distribution,
    mean: Vec<f64>,
    root: DMatrix<f64>,
}

impl PopulationModel {
    /// Validates `Σ` (positive semidefinite) and the degrees of freedom
    /// (`ν > 2`), and caches the symmetric square root of `Σ`.
    pub fn new(sigma: SymmetricMatrix, distribution: Distribution) -> Result<Self> {
        distribution.validate()?;
        if matches!(distribution, Distribution::MixedStudent { .. }) && sigma.dim() < 2 {
            return Err(Error::InvalidConfig("mixed Student-t needs p >= 2".into()));
        }
        let root = sigma.psd_sqrt()?;
        let mean = vec![0.0; sigma.dim()];
        Ok(Self {
            sigma,
            distribution,
            mean,
            root,
        })
    }

    pub fn gaussian(sigma: SymmetricMatrix) -> Result<Self> {
        Self::new(sigma, Distribution::Gaussian)
    }

    pub fn student(sigma: SymmetricMatrix, nu: f64) -> Result<Self> {
        Self::new(sigma, Distribution::Student { nu })
    }

    pub fn mixed_student(sigma: SymmetricMatrix, nu_first: f64, nu_second: f64) -> Result<Self> {
        Self::new(sigma, Distribution::MixedStudent { nu_first, nu_second })
    }

    /// Replaces the (default zero) population mean.
    pub fn with_mean(mut self, mean: Vec<f64>) -> Result<Self> {
        if mean.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: mean.len(),
            });
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.mean = mean;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn sigma(&self) -> &SymmetricMatrix {
        &self.sigma
    }

    pub fn distribution(&self) -> Distribution {
        self.distribution
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Finite eighth moments, the regime covered by the convergence theory.
    /// Student-t with `4 < ν ≤ 8` is still sampled but flagged here.
    pub fn assumption_compliant(&self) -> bool {
        self.distribution.has_finite_eighth_moment()
    }
}

/// Generator for one seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of indices (cell coordinates, iteration
/// number, stream tag) into an independent child seed.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &part| splitmix64(acc ^ splitmix64(part)))
}

/// `p × n` iid standard normals, filled sample by sample.
fn standard_normals<R: Rng>(rng: &mut R, p: usize, n: usize) -> DMatrix<f64> {
    let values: Vec<f64> = (0..p * n).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_vec(p, n, values)
}

fn chi_squared_draws<R: Rng>(rng: &mut R, nu: f64, n: usize) -> Vec<f64> {
    let law = ChiSquared::new(nu).expect("degrees of freedom validated at model construction");
    (0..n).map(|_| law.sample(rng)).collect()
}

fn finish(model: &PopulationModel, white: DMatrix<f64>) -> Result<ObservationMatrix> {
    let mut data = &model.root * white;
    for (i, mut row) in data.row_iter_mut().enumerate() {
        row.add_scalar_mut(model.mean[i]);
    }
    ObservationMatrix::new(data)
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InsufficientSamples { required: 2, actual: n });
    }
    Ok(())
}

/// `n` iid columns from `N(mean, Σ)`.
pub fn sample_gaussian(model: &PopulationModel, n: usize, seed: u64) -> Result<ObservationMatrix> {
    if model.distribution != Distribution::Gaussian {
        return Err(Error::Unsupported(format!(
            "sample_gaussian called with a {} population",
            model.distribution
        )));
    }
    check_samples(n)?;
    let mut rng = rng_from_seed(seed);
    let z = standard_normals(&mut rng, model.dim(), n);
    finish(model, z)
}

/// `n` iid columns from the multivariate t with covariance `Σ`.
pub fn sample_student(model: &PopulationModel, n: usize, seed: u64) -> Result<ObservationMatrix> {
    let Distribution::Student { nu } = model.distribution else {
        return Err(Error::Unsupported(format!(
            "sample_student called with a {} population",
            model.distribution
        )));
    };
    check_samples(n)?;
    let mut rng = rng_from_seed(seed);
    let mut z = standard_normals(&mut rng, model.dim(), n);
    let u = chi_squared_draws(&mut rng, nu, n);
    for (mut col, uk) in z.column_iter_mut().zip(u) {
        col *= ((nu - 2.0) / uk).sqrt();
    }
    finish(model, z)
}

/// `n` iid columns whose whitened coordinates are two independent t blocks:
/// the first `⌈p/2⌉` with `nu_first` degrees of freedom and the rest with
/// `nu_second`, each block with identity covariance. The result has
/// covariance `Σ`; when `Σ` is block diagonal the two coordinate blocks of
/// the output are independent.
pub fn sample_mixed_student(
    sigma: &SymmetricMatrix,
    nu_first: f64,
    nu_second: f64,
    n: usize,
    seed: u64,
) -> Result<ObservationMatrix> {
    let model = PopulationModel::mixed_student(sigma.clone(), nu_first, nu_second)?;
    sample(&model, n, seed)
}

fn sample_mixed_model(
    model: &PopulationModel,
    nu_first: f64,
    nu_second: f64,
    n: usize,
    seed: u64,
) -> Result<ObservationMatrix> {
    check_samples(n)?;
    let p = model.dim();
    let split = p.div_ceil(2);
    let mut rng = rng_from_seed(seed);
    let mut z = standard_normals(&mut rng, p, n);
    let u_first = chi_squared_draws(&mut rng, nu_first, n);
    let u_second = chi_squared_draws(&mut rng, nu_second, n);
    for (k, mut col) in z.column_iter_mut().enumerate() {
        let first = ((nu_first - 2.0) / u_first[k]).sqrt();
        let second = ((nu_second - 2.0) / u_second[k]).sqrt();
        for (i, v) in col.iter_mut().enumerate() {
            *v *= if i < split { first } else { second };
        }
    }
    finish(model, z)
}

/// Draws `n` samples from whichever law `model` carries.
pub fn sample(model: &PopulationModel, n: usize, seed: u64) -> Result<ObservationMatrix> {
    match model.distribution {
        Distribution::Gaussian => sample_gaussian(model, n, seed),
        Distribution::Student { .. } => sample_student(model, n, seed),
        Distribution::MixedStudent { nu_first, nu_second } => sample_mixed_model(model, nu_first, nu_second, n, seed),
    }
}

/// Wishart(I_p, p) draw `W = GGᵀ` normalized to `W / √‖WWᵀ‖`, so that
/// `‖ΣΣᵀ‖ = 1`.
pub fn random_wishart_sigma(p: usize, seed: u64) -> Result<SymmetricMatrix> {
    if p == 0 {
        return Err(Error::EmptyDimension);
    }
    let mut rng = rng_from_seed(seed);
    let g = standard_normals(&mut rng, p, p);
    let w = SymmetricMatrix::symmetrized(&g * g.transpose());
    let norm = frob_norm_sq(&w.gram()).sqrt();
    Ok(w.scale(1.0 / norm.sqrt()))
}

/// `(1/p) Σᵢ E[yᵢ⁸]` for the decorrelated coordinates `y = Γᵀx`.
///
/// Gaussian: `105·‖ΣΣᵀ‖²`. Student-t: with `y = √(ν/U)·z`,
/// `z ~ N(0, ((ν−2)/ν)λ)` and `E[U⁻⁴] = 1/((ν−2)(ν−4)(ν−6)(ν−8))`,
///
/// ```text
/// E[y⁸] = ν⁴ · E[U⁻⁴] · 105 · ((ν−2)/ν)⁴ λ⁴ = 105 (ν−2)³ / ((ν−4)(ν−6)(ν−8)) · λ⁴
/// ```
pub fn eighth_moment_constant(model: &PopulationModel) -> Result<f64> {
    let spectrum = frob_norm_sq(&model.sigma.gram());
    match model.distribution {
        Distribution::Gaussian => Ok(105.0 * spectrum),
        Distribution::Student { nu } => {
            if nu <= 8.0 {
                return Err(Error::InvalidDegreesOfFreedom {
                    nu,
                    reason: "eighth moment is infinite for nu <= 8",
                });
            }
            Ok(105.0 * (nu - 2.0).powi(3) / ((nu - 4.0) * (nu - 6.0) * (nu - 8.0)) * spectrum)
        }
        Distribution::MixedStudent { .. } => Err(Error::Unsupported(
            "eighth moment constant for mixed Student-t populations".into(),
        )),
    }
}
