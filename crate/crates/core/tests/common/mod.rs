#![allow(dead_code)]

use lwshrink::sampling::rng_from_seed;
use lwshrink::{random_wishart_sigma, sample, ObservationMatrix, PopulationModel, SymmetricMatrix};
use nalgebra::DMatrix;
use num_rational::Ratio;
use rand::Rng;

pub type Q = Ratio<i128>;

/// Exact rational counterpart of `CoefficientSet`.
#[derive(Debug, Clone, Copy)]
pub struct ExactCoefficients {
    pub gamma_n: Q,
    pub lambda_n: Q,
    pub c0: Q,
    pub c1: Q,
    pub c2: Q,
    pub q0: Q,
    pub q1: Q,
    pub q2: Q,
    pub c0f: Q,
    pub c1f: Q,
    pub c2f: Q,
}

pub fn exact_coefficients(p: i128, n: i128) -> ExactCoefficients {
    let one = Q::from_integer(1);
    let q = |a: i128, b: i128| Q::new(a, b);
    let gamma_n = q(n * (n - 1), n * n - 3 * n + 3);
    let lambda_n = q(n * n * (n - 2), (n - 1) * (n * n - 3 * n + 3));
    let c1 = lambda_n / (gamma_n * Q::from_integer(n * n));
    let c0 = one / gamma_n - q(1, n) - c1;
    let c2 = Q::from_integer(p + 1) * c1;
    let q0 = q(n - 2, p * (n - 1));
    let q1 = q(1, p * (n - 1));
    let q2 = q(p - 1, p * (n - 1));
    let den = one - q1 - q2;
    let delta = c1 - c2;
    ExactCoefficients {
        gamma_n,
        lambda_n,
        c0,
        c1,
        c2,
        q0,
        q1,
        q2,
        c0f: c0 + delta * q0 / den,
        c1f: c1 + delta * q1 / den,
        c2f: c2 - delta * q2 / den,
    }
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Uniform entries in `[-scale, scale]`.
pub fn random_observations(p: usize, n: usize, scale: f64, seed: u64) -> ObservationMatrix {
    let mut rng = rng_from_seed(seed);
    ObservationMatrix::new(DMatrix::from_fn(p, n, |_, _| rng.random_range(-scale..scale))).unwrap()
}

pub fn random_vector(len: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    (0..len).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn random_orthogonal(p: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng_from_seed(seed);
    let g = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
    g.qr().q()
}

pub fn wishart_model(p: usize, seed: u64) -> PopulationModel {
    PopulationModel::gaussian(random_wishart_sigma(p, seed).unwrap()).unwrap()
}

pub fn identity_model(p: usize) -> PopulationModel {
    PopulationModel::gaussian(SymmetricMatrix::identity(p)).unwrap()
}

/// Sample mean and standard error.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

/// Applies `f` to `reps` independent draws of `n` samples from `model`.
pub fn replicate<T>(
    model: &PopulationModel,
    n: usize,
    reps: usize,
    seed: u64,
    f: impl Fn(&ObservationMatrix) -> T,
) -> Vec<T> {
    (0..reps)
        .map(|r| f(&sample(model, n, lwshrink::sampling::derive_seed(seed, &[r as u64])).unwrap()))
        .collect()
}
