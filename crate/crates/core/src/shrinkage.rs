//! Translation-invariant linear shrinkage toward a scaled identity.
//!
//! Every variant shrinks the sample covariance `S` toward `m_v·I`:
//!
//! ```text
//! S* = (b²/d²)·m_v·I + (a²/d²)·S
//! ```
//!
//! where `m = tr(S)/p`, `d² = ‖S − m·I‖²` and the variants differ in how the
//! dispersion `b²` of `S` around `Σ` is estimated:
//!
//! * [`Variant::U`]: the unbiased estimate `(b̄² − c₁ᶠd² − c₂ᶠm²)/c₀ᶠ`, which
//!   corrects for the bias introduced by estimating the mean.
//! * [`Variant::R`]: `(1/(n−1)²) Σₖ ‖x̃ₖx̃ₖᵀ − S‖²`, i.e. the known-mean
//!   formula with `n` replaced by `n − 1`.
//! * [`Variant::M`]: `b̄² = (1/n²) Σₖ ‖(n/(n−1))x̃ₖx̃ₖᵀ − S‖²`.
//! * [`Variant::S`]: variant `M` rescaled by `(n−1)/n`.
//!
//! All four estimators are invariant to adding a constant vector to every
//! sample.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{covariance_of_demeaned, demean, ObservationMatrix, SymmetricMatrix};

/// Deterministic `(p, n)`-dependent constants of the unbiased `b²` estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub p: usize,
    pub n: usize,
    pub gamma_n: f64,
    pub lambda_n: f64,
    /// `E[b̄²] = c0·β² + c1·δ² + c2·μ²`.
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// `V[m] = q0·β² + q1·δ² − q2·μ²`.
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    /// `b² = (b̄² − c1f·d² − c2f·m²)/c0f` is unbiased for `β²`.
    pub c0f: f64,
    pub c1f: f64,
    pub c2f: f64,
}

/// Computes the coefficient ledger for dimension `p` and `n` samples.
///
/// Requires `n ≥ 4`; below that the unbiased construction is not defined.
pub fn coefficient_set(p: usize, n: usize) -> Result<CoefficientSet> {
    if n < Variant::U.min_samples() {
        return Err(Error::InsufficientSamples {
            required: Variant::U.min_samples(),
            actual: n,
        });
    }
    if p == 0 {
        return Err(Error::EmptyDimension);
    }
    let pf = p as f64;
    let nf = n as f64;
    let quad = nf * nf - 3.0 * nf + 3.0;

    let gamma_n = nf * (nf - 1.0) / quad;
    let lambda_n = nf * nf * (nf - 2.0) / ((nf - 1.0) * quad);
    let c1 = lambda_n / (gamma_n * nf * nf);
    let c0 = 1.0 / gamma_n - 1.0 / nf - c1;
    let c2 = (pf + 1.0) * c1;

    let q0 = (nf - 2.0) / (pf * (nf - 1.0));
    let q1 = 1.0 / (pf * (nf - 1.0));
    let q2 = (pf - 1.0) / (pf * (nf - 1.0));

    let denom = 1.0 - q1 - q2;
    let c0f = c0 + (c1 - c2) * q0 / denom;
    let c1f = c1 + (c1 - c2) * q1 / denom;
    let c2f = c2 - (c1 - c2) * q2 / denom;

    Ok(CoefficientSet {
        p,
        n,
        gamma_n,
        lambda_n,
        c0,
        c1,
        c2,
        q0,
        q1,
        q2,
        c0f,
        c1f,
        c2f,
    })
}

/// The four translation-invariant estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Unbiased dispersion estimate.
    U,
    /// Known-mean formula with `n → n − 1`.
    R,
    /// Plain `b̄²`.
    M,
    /// `M` rescaled by `(n−1)/n`.
    S,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::U, Variant::R, Variant::M, Variant::S];

    /// Smallest sample count for which the variant is defined.
    pub fn min_samples(self) -> usize {
        match self {
            Variant::U => 4,
            Variant::R | Variant::M | Variant::S => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::U => "u",
            Variant::R => "r",
            Variant::M => "m",
            Variant::S => "s",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u" => Ok(Variant::U),
            "r" => Ok(Variant::R),
            "m" => Ok(Variant::M),
            "s" => Ok(Variant::S),
            other => Err(Error::InvalidConfig(format!(
                "unknown variant '{other}' (expected u, r, m or s)"
            ))),
        }
    }
}

/// Data-driven scalars behind one shrinkage estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShrinkageScalars {
    pub variant: Variant,
    /// `tr(S)/p`.
    pub m: f64,
    /// Scalar multiplying the identity target; equals `m` except for
    /// variant `S`, where it is `((n−1)/n)·m`.
    pub m_target: f64,
    /// `‖S − m·I‖²`.
    pub d2: f64,
    /// `b̄²` for variants `U`, `M`, `S`; the `(n−1)²`-normalized sum for `R`.
    pub bbar2: f64,
    /// Dispersion estimate before clamping to `[0, d²]`. May be negative.
    pub b2_raw: f64,
    pub b2: f64,
    pub a2: f64,
}

/// A shrunk covariance estimate with the scalars that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkageResult {
    pub scalars: ShrinkageScalars,
    pub estimate: SymmetricMatrix,
    /// `b²/d²`, the weight on the identity target; 1 when `d² = 0`.
    pub shrinkage_intensity: f64,
}

/// `m = ⟨S, I⟩ = tr(S)/p`.
pub fn scalar_m(s: &SymmetricMatrix) -> f64 {
    s.trace() / s.dim() as f64
}

/// `d² = ‖S − m·I‖²`, which equals `‖S‖² − m²`.
pub fn scalar_d2(s: &SymmetricMatrix, m: f64) -> f64 {
    let data = s.data();
    let p = s.dim();
    let mut acc = 0.0;
    for j in 0..p {
        for i in 0..p {
            let v = if i == j { data[(i, j)] - m } else { data[(i, j)] };
            acc += v * v;
        }
    }
    (acc / p as f64).max(0.0)
}

/// `(1/p) Σₖ ‖scale·x̃ₖx̃ₖᵀ − S‖²_F` (unnormalized by the sample factor).
fn column_dispersion(xt: &ObservationMatrix, s: &SymmetricMatrix, scale: f64) -> f64 {
    let x = xt.data();
    let sd = s.data();
    let p = xt.dim();
    let mut total = 0.0;
    for col in x.column_iter() {
        let mut acc = 0.0;
        for j in 0..p {
            let xj = scale * col[j];
            let s_col = sd.column(j);
            for i in 0..p {
                let v = xj * col[i] - s_col[i];
                acc += v * v;
            }
        }
        total += acc;
    }
    total / p as f64
}

/// `b̄² = (1/n²) Σₖ ‖(n/(n−1))x̃ₖx̃ₖᵀ − S‖²`, with `x̃ₖ` the columns of the
/// demeaned data and `S` its sample covariance.
pub fn scalar_bbar2(xt: &ObservationMatrix, s: &SymmetricMatrix) -> f64 {
    let n = xt.n_samples() as f64;
    column_dispersion(xt, s, n / (n - 1.0)) / (n * n)
}

/// `b̄_r² = (1/(n−1)²) Σₖ ‖x̃ₖx̃ₖᵀ − S‖²`.
pub fn scalar_bbar2_r(xt: &ObservationMatrix, s: &SymmetricMatrix) -> f64 {
    let n = xt.n_samples() as f64;
    column_dispersion(xt, s, 1.0) / ((n - 1.0) * (n - 1.0))
}

/// Unbiased dispersion estimate and its clamp to `[0, d²]`.
///
/// Returns `(b2_raw, b2)`.
pub fn scalar_b2_variant_u(bbar2: f64, d2: f64, m: f64, coeffs: &CoefficientSet) -> (f64, f64) {
    let raw = (bbar2 - coeffs.c1f * d2 - coeffs.c2f * m * m) / coeffs.c0f;
    (raw, clamp_dispersion(raw, d2))
}

/// `min((b²)₊, d²)`.
fn clamp_dispersion(b2: f64, d2: f64) -> f64 {
    b2.max(0.0).min(d2)
}

/// Assembles `(b²/d²)·m_target·I + (a²/d²)·S`, or `m_target·I` when `d² = 0`.
fn assemble(s: &SymmetricMatrix, scalars: &ShrinkageScalars) -> (SymmetricMatrix, f64) {
    let p = s.dim();
    if scalars.d2 == 0.0 {
        return (SymmetricMatrix::scaled_identity(p, scalars.m_target), 1.0);
    }
    let intensity = scalars.b2 / scalars.d2;
    let target = intensity * scalars.m_target;
    let mut data = s.data() * (scalars.a2 / scalars.d2);
    for i in 0..p {
        data[(i, i)] += target;
    }
    (SymmetricMatrix::symmetrized(data), intensity)
}

/// Shrinks the sample covariance of `x` with the requested variant.
pub fn estimate(x: &ObservationMatrix, variant: Variant) -> Result<ShrinkageResult> {
    let n = x.n_samples();
    if n < variant.min_samples() {
        return Err(Error::InsufficientSamples {
            required: variant.min_samples(),
            actual: n,
        });
    }
    let xt = demean(x);
    let s = covariance_of_demeaned(&xt);
    let m = scalar_m(&s);
    let d2 = scalar_d2(&s, m);

    match variant {
        Variant::U => {
            let coeffs = coefficient_set(x.dim(), n)?;
            let bbar2 = scalar_bbar2(&xt, &s);
            let (b2_raw, b2) = scalar_b2_variant_u(bbar2, d2, m, &coeffs);
            Ok(finish(&s, variant, m, m, d2, bbar2, b2_raw, b2, d2 - b2))
        }
        Variant::R => {
            let bbar2 = scalar_bbar2_r(&xt, &s);
            let b2 = clamp_dispersion(bbar2, d2);
            Ok(finish(&s, variant, m, m, d2, bbar2, bbar2, b2, d2 - b2))
        }
        Variant::M => {
            let bbar2 = scalar_bbar2(&xt, &s);
            let b2 = clamp_dispersion(bbar2, d2);
            Ok(finish(&s, variant, m, m, d2, bbar2, bbar2, b2, d2 - b2))
        }
        Variant::S => {
            let bbar2 = scalar_bbar2(&xt, &s);
            let b2 = clamp_dispersion(bbar2, d2);
            let natural = finish(&s, Variant::M, m, m, d2, bbar2, bbar2, b2, d2 - b2);
            let ratio = (n as f64 - 1.0) / n as f64;
            Ok(ShrinkageResult {
                scalars: ShrinkageScalars {
                    variant,
                    m_target: ratio * m,
                    a2: ratio * (d2 - b2),
                    ..natural.scalars
                },
                estimate: natural.estimate.scale(ratio),
                shrinkage_intensity: natural.shrinkage_intensity,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    s: &SymmetricMatrix,
    variant: Variant,
    m: f64,
    m_target: f64,
    d2: f64,
    bbar2: f64,
    b2_raw: f64,
    b2: f64,
    a2: f64,
) -> ShrinkageResult {
    let scalars = ShrinkageScalars {
        variant,
        m,
        m_target,
        d2,
        bbar2,
        b2_raw,
        b2,
        a2,
    };
    let (estimate, shrinkage_intensity) = assemble(s, &scalars);
    ShrinkageResult {
        scalars,
        estimate,
        shrinkage_intensity,
    }
}
