//! Monte-Carlo loss studies: the `(p, n)` grid and the fixed-concentration
//! convergence runs.
//!
//! Every iteration draws its own seeds from `(base_seed, p, n, iteration)`,
//! so a table depends only on the configuration and never on the number of
//! worker threads or the order in which cells are visited.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{sample_covariance, SymmetricMatrix};
use crate::oracle::{gaussian_beta2, loss, optimal_sigma_starstar, oracle_sigma_star, student_beta2, OracleScalars};
use crate::sampling::{derive_seed, random_wishart_sigma, sample, Distribution, PopulationModel};
use crate::shrinkage::{estimate, Variant};

const STREAM_SIGMA: u64 = 0;
const STREAM_DATA: u64 = 1;

/// Header of the loss table.
pub const LOSS_CSV_HEADER: [&str; 10] = [
    "estimator",
    "p",
    "n",
    "c",
    "distribution",
    "sigma_mode",
    "n_mc",
    "mean_loss",
    "std_err",
    "mean_time_s",
];

/// Header of the pairwise log-difference table.
pub const DIFF_CSV_HEADER: [&str; 11] = [
    "p",
    "n",
    "c",
    "estimator_a",
    "estimator_b",
    "mean_loss_a",
    "mean_loss_b",
    "mean_diff",
    "std_err_diff",
    "log10_diff_raw",
    "log10_diff_relative",
];

/// An estimator benchmarked by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    /// Sample covariance.
    Ec,
    Lw(Variant),
    /// `Σ*` with analytic scalars.
    LwEx,
    /// `Σ**`, the per-sample in-span optimum.
    LwOp,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 7] = [
        EstimatorId::Ec,
        EstimatorId::Lw(Variant::U),
        EstimatorId::Lw(Variant::R),
        EstimatorId::Lw(Variant::M),
        EstimatorId::Lw(Variant::S),
        EstimatorId::LwEx,
        EstimatorId::LwOp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EstimatorId::Ec => "EC",
            EstimatorId::Lw(Variant::U) => "LW_u",
            EstimatorId::Lw(Variant::R) => "LW_r",
            EstimatorId::Lw(Variant::M) => "LW_m",
            EstimatorId::Lw(Variant::S) => "LW_s",
            EstimatorId::LwEx => "LW_ex",
            EstimatorId::LwOp => "LW_op",
        }
    }

    fn min_samples(self) -> usize {
        match self {
            EstimatorId::Lw(v) => v.min_samples(),
            _ => 2,
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .into_iter()
            .find(|e| e.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown estimator '{s}'")))
    }
}

/// How the population covariance is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    Identity,
    /// A fresh normalized Wishart draw at every iteration.
    Wishart,
}

impl SigmaMode {
    pub fn label(self) -> &'static str {
        match self {
            SigmaMode::Identity => "identity",
            SigmaMode::Wishart => "wishart",
        }
    }
}

impl fmt::Display for SigmaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SigmaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" => Ok(SigmaMode::Identity),
            "wishart" => Ok(SigmaMode::Wishart),
            other => Err(Error::InvalidConfig(format!("unknown sigma mode '{other}'"))),
        }
    }
}

/// Which cells are visited.
#[derive(Debug, Clone, PartialEq)]
pub enum Mode {
    /// Every `(p, n)` in `ps × ns`.
    Grid { ps: Vec<usize>, ns: Vec<usize> },
    /// For each `c`, every `n` with `p = round(c·n)`.
    Convergence { cs: Vec<f64>, ns: Vec<usize> },
}

/// One `(p, n)` point of a study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub p: usize,
    pub n: usize,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub distribution: Distribution,
    pub sigma_mode: SigmaMode,
    pub n_mc: usize,
    pub estimators: Vec<EstimatorId>,
    pub base_seed: u64,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Record wall-times. When off, `mean_time_s` is NaN and tables are
    /// bit-reproducible.
    pub timing: bool,
}

/// `5, 7, …, 99`.
pub fn full_grid_axis() -> Vec<usize> {
    (5..100).step_by(2).collect()
}

/// `5, 15, …, 45`.
pub fn desk_grid_axis() -> Vec<usize> {
    (5..=45).step_by(10).collect()
}

impl ExperimentConfig {
    pub const FULL_CONCENTRATIONS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
    pub const FULL_N_MC: usize = 10_000;
    pub const DESK_N_MC: usize = 200;

    fn with_mode(mode: Mode, distribution: Distribution, sigma_mode: SigmaMode, n_mc: usize) -> Self {
        let estimators = EstimatorId::ALL
            .into_iter()
            .filter(|e| *e != EstimatorId::LwEx || distribution.has_analytic_oracle())
            .collect();
        Self {
            mode,
            distribution,
            sigma_mode,
            n_mc,
            estimators,
            base_seed: 0,
            threads: None,
            timing: false,
        }
    }

    /// Full-size grid study (long running).
    pub fn full_grid(distribution: Distribution, sigma_mode: SigmaMode) -> Self {
        let axis = full_grid_axis();
        Self::with_mode(
            Mode::Grid {
                ps: axis.clone(),
                ns: axis,
            },
            distribution,
            sigma_mode,
            Self::FULL_N_MC,
        )
    }

    /// Reduced grid suitable for CI.
    pub fn desk_grid(distribution: Distribution, sigma_mode: SigmaMode) -> Self {
        let axis = desk_grid_axis();
        Self::with_mode(
            Mode::Grid {
                ps: axis.clone(),
                ns: axis,
            },
            distribution,
            sigma_mode,
            Self::DESK_N_MC,
        )
    }

    /// Full-size convergence study over the given sample counts.
    pub fn full_convergence(distribution: Distribution, sigma_mode: SigmaMode, ns: Vec<usize>) -> Self {
        let mode = Mode::Convergence {
            cs: Self::FULL_CONCENTRATIONS.to_vec(),
            ns,
        };
        Self::with_mode(mode, distribution, sigma_mode, Self::FULL_N_MC)
    }

    /// Reduced convergence study.
    pub fn desk_convergence(distribution: Distribution, sigma_mode: SigmaMode, cs: Vec<f64>, ns: Vec<usize>) -> Self {
        Self::with_mode(Mode::Convergence { cs, ns }, distribution, sigma_mode, Self::DESK_N_MC)
    }

    pub fn cells(&self) -> Result<Vec<Cell>> {
        match &self.mode {
            Mode::Grid { ps, ns } => Ok(ps
                .iter()
                .flat_map(|&p| {
                    ns.iter().map(move |&n| Cell {
                        p,
                        n,
                        c: p as f64 / n as f64,
                    })
                })
                .collect()),
            Mode::Convergence { cs, ns } => {
                let mut cells = Vec::with_capacity(cs.len() * ns.len());
                for &c in cs {
                    if !(c.is_finite() && c > 0.0) {
                        return Err(Error::InvalidConfig(format!("concentration must be positive, got {c}")));
                    }
                    for &n in ns {
                        let p = (c * n as f64).round();
                        if p < 1.0 {
                            return Err(Error::InvalidConfig(format!("round({c}·{n}) is below 1")));
                        }
                        cells.push(Cell { p: p as usize, n, c });
                    }
                }
                Ok(cells)
            }
        }
    }

    /// Checks everything that can be rejected before any sampling.
    pub fn validate(&self) -> Result<()> {
        self.distribution.validate()?;
        if self.n_mc < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_mc must be at least 2 for a standard error, got {}",
                self.n_mc
            )));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimators requested".into()));
        }
        for (i, e) in self.estimators.iter().enumerate() {
            if self.estimators[..i].contains(e) {
                return Err(Error::InvalidConfig(format!("estimator {e} listed twice")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        if self.estimators.contains(&EstimatorId::LwEx) {
            match self.distribution {
                Distribution::MixedStudent { .. } => {
                    return Err(Error::InvalidConfig(
                        "LW_ex needs an analytic beta2, which mixed Student-t populations do not have".into(),
                    ))
                }
                Distribution::Student { nu } if nu <= 4.0 => {
                    return Err(Error::InvalidDegreesOfFreedom {
                        nu,
                        reason: "LW_ex needs a finite fourth moment (nu > 4)",
                    })
                }
                _ => {}
            }
        }
        let cells = self.cells()?;
        if cells.is_empty() {
            return Err(Error::InvalidConfig("no cells to run".into()));
        }
        let required = self.estimators.iter().map(|e| e.min_samples()).max().unwrap_or(2);
        for cell in &cells {
            if cell.p == 0 {
                return Err(Error::InvalidConfig("dimension p must be positive".into()));
            }
            if cell.n < required {
                return Err(Error::InsufficientSamples {
                    required,
                    actual: cell.n,
                });
            }
            if matches!(self.distribution, Distribution::MixedStudent { .. }) && cell.p < 2 {
                return Err(Error::InvalidConfig("mixed Student-t needs p >= 2".into()));
            }
        }
        Ok(())
    }
}

/// Losses, timings and shrinkage intensities of one iteration, aligned with
/// the requested estimator list.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub losses: Vec<f64>,
    /// Wall-times in seconds, `None` when timing is off.
    pub times: Vec<Option<f64>>,
    /// `Some` for the four Ledoit-Wolf variants.
    pub intensities: Vec<Option<f64>>,
    /// `α²β²/δ²` of this iteration's `Σ`, when analytic scalars apply.
    pub expected_ex_loss: Option<f64>,
}

/// Aggregated result for one estimator in one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub estimator: EstimatorId,
    pub p: usize,
    pub n: usize,
    pub c: f64,
    pub distribution: String,
    pub sigma_mode: SigmaMode,
    pub n_mc: usize,
    pub mean_loss: f64,
    pub std_err: f64,
    /// `None` when timing is off; written as NaN.
    pub mean_time_s: Option<f64>,
}

/// Mean and standard error of the per-iteration difference `loss_a − loss_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedDiff {
    pub a: EstimatorId,
    pub b: EstimatorId,
    pub mean: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub records: Vec<LossRecord>,
    /// Every unordered estimator pair, in request order.
    pub paired: Vec<PairedDiff>,
    /// `(min, max)` of the recorded intensities per estimator.
    pub intensity_range: Vec<Option<(f64, f64)>>,
    /// Mean over iterations of the analytic `Σ*` loss.
    pub expected_ex_loss: Option<f64>,
}

impl CellSummary {
    pub fn record(&self, estimator: EstimatorId) -> Option<&LossRecord> {
        self.records.iter().find(|r| r.estimator == estimator)
    }

    /// Paired statistics of `loss_a − loss_b`, whichever order was stored.
    pub fn paired_diff(&self, a: EstimatorId, b: EstimatorId) -> Option<PairedDiff> {
        self.paired.iter().find_map(|d| {
            if d.a == a && d.b == b {
                Some(*d)
            } else if d.a == b && d.b == a {
                Some(PairedDiff {
                    a,
                    b,
                    mean: -d.mean,
                    std_err: d.std_err,
                })
            } else {
                None
            }
        })
    }
}

/// Mean wall-time over iterations.
pub fn timing_capture(times: &[f64]) -> f64 {
    if times.is_empty() {
        return f64::NAN;
    }
    times.iter().sum::<f64>() / times.len() as f64
}

fn mean_and_std_err(values: &[f64]) -> (f64, f64) {
    let len = values.len() as f64;
    let mean = values.iter().sum::<f64>() / len;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1.0);
    (mean, (var / len).sqrt())
}

fn analytic_scalars(sigma: &SymmetricMatrix, n: usize, distribution: Distribution) -> Result<OracleScalars> {
    match distribution {
        Distribution::Gaussian => gaussian_beta2(sigma, n),
        Distribution::Student { nu } => student_beta2(sigma, n, nu),
        Distribution::MixedStudent { .. } => Err(Error::Unsupported(
            "no analytic oracle for mixed Student-t populations".into(),
        )),
    }
}

fn timed<T>(timing: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    if timing {
        let start = Instant::now();
        let value = f()?;
        Ok((value, Some(start.elapsed().as_secs_f64())))
    } else {
        Ok((f()?, None))
    }
}

/// Population shared by every iteration of a cell, when it does not change.
struct FixedPopulation {
    model: PopulationModel,
    scalars: Option<OracleScalars>,
}

fn fixed_population(
    cell: Cell,
    distribution: Distribution,
    sigma_mode: SigmaMode,
    needs_scalars: bool,
) -> Result<Option<FixedPopulation>> {
    if sigma_mode != SigmaMode::Identity {
        return Ok(None);
    }
    let sigma = SymmetricMatrix::identity(cell.p);
    let scalars = if needs_scalars {
        Some(analytic_scalars(&sigma, cell.n, distribution)?)
    } else {
        None
    };
    Ok(Some(FixedPopulation {
        model: PopulationModel::new(sigma, distribution)?,
        scalars,
    }))
}

/// Runs one iteration: draws `Σ` (for Wishart mode) and `X`, then scores each
/// estimator by `‖Σ̂ − Σ‖²`. Each estimator is timed from `X` to its estimate.
pub fn run_iteration(
    cell: Cell,
    distribution: Distribution,
    sigma_mode: SigmaMode,
    estimators: &[EstimatorId],
    seed: u64,
    timing: bool,
) -> Result<IterationOutcome> {
    let needs_scalars = estimators.contains(&EstimatorId::LwEx);
    let fixed = fixed_population(cell, distribution, sigma_mode, needs_scalars)?;
    iteration_with(cell, distribution, estimators, seed, timing, fixed.as_ref())
}

fn iteration_with(
    cell: Cell,
    distribution: Distribution,
    estimators: &[EstimatorId],
    seed: u64,
    timing: bool,
    fixed: Option<&FixedPopulation>,
) -> Result<IterationOutcome> {
    let needs_scalars = estimators.contains(&EstimatorId::LwEx);
    let drawn;
    let (model, scalars) = match fixed {
        Some(f) => (&f.model, f.scalars),
        None => {
            let sigma = random_wishart_sigma(cell.p, derive_seed(seed, &[STREAM_SIGMA]))?;
            let scalars = if needs_scalars {
                Some(analytic_scalars(&sigma, cell.n, distribution)?)
            } else {
                None
            };
            drawn = PopulationModel::new(sigma, distribution)?;
            (&drawn, scalars)
        }
    };
    let sigma = model.sigma();
    let x = sample(model, cell.n, derive_seed(seed, &[STREAM_DATA]))?;

    let k = estimators.len();
    let mut outcome = IterationOutcome {
        losses: Vec::with_capacity(k),
        times: Vec::with_capacity(k),
        intensities: Vec::with_capacity(k),
        expected_ex_loss: scalars.map(|s| s.optimal_expected_loss()),
    };
    for &estimator in estimators {
        let (estimate_matrix, intensity, elapsed) = match estimator {
            EstimatorId::Ec => {
                let (s, t) = timed(timing, || Ok(sample_covariance(&x)))?;
                (s, None, t)
            }
            EstimatorId::Lw(variant) => {
                let (r, t) = timed(timing, || estimate(&x, variant))?;
                (r.estimate, Some(r.shrinkage_intensity), t)
            }
            EstimatorId::LwEx => {
                let scalars = scalars.ok_or_else(|| Error::Unsupported("LW_ex without analytic scalars".into()))?;
                let (m, t) = timed(timing, || oracle_sigma_star(&scalars, &sample_covariance(&x)))?;
                (m, None, t)
            }
            EstimatorId::LwOp => {
                let (m, t) = timed(timing, || {
                    Ok(optimal_sigma_starstar(sigma, &sample_covariance(&x))?.sigma_starstar)
                })?;
                (m, None, t)
            }
        };
        outcome.losses.push(loss(&estimate_matrix, sigma)?);
        outcome.times.push(elapsed);
        outcome.intensities.push(intensity);
    }
    Ok(outcome)
}

fn iteration_seed(base: u64, cell: Cell, iteration: usize) -> u64 {
    derive_seed(base, &[cell.p as u64, cell.n as u64, iteration as u64])
}

fn summarize(config: &ExperimentConfig, cell: Cell, outcomes: &[IterationOutcome]) -> CellSummary {
    let estimators = &config.estimators;
    let column = |j: usize| outcomes.iter().map(|o| o.losses[j]).collect::<Vec<_>>();
    let columns: Vec<Vec<f64>> = (0..estimators.len()).map(column).collect();
    let label = config.distribution.label();

    let records = estimators
        .iter()
        .zip(&columns)
        .enumerate()
        .map(|(j, (&estimator, losses))| {
            let (mean_loss, std_err) = mean_and_std_err(losses);
            let times: Option<Vec<f64>> = outcomes.iter().map(|o| o.times[j]).collect();
            LossRecord {
                estimator,
                p: cell.p,
                n: cell.n,
                c: cell.c,
                distribution: label.clone(),
                sigma_mode: config.sigma_mode,
                n_mc: outcomes.len(),
                mean_loss,
                std_err,
                mean_time_s: times.map(|t| timing_capture(&t)),
            }
        })
        .collect();

    let mut paired = Vec::new();
    for i in 0..estimators.len() {
        for j in i + 1..estimators.len() {
            let diffs: Vec<f64> = columns[i].iter().zip(&columns[j]).map(|(a, b)| a - b).collect();
            let (mean, std_err) = mean_and_std_err(&diffs);
            paired.push(PairedDiff {
                a: estimators[i],
                b: estimators[j],
                mean,
                std_err,
            });
        }
    }

    let intensity_range = (0..estimators.len())
        .map(|j| {
            outcomes
                .iter()
                .filter_map(|o| o.intensities[j])
                .fold(None, |acc, v| match acc {
                    None => Some((v, v)),
                    Some((lo, hi)) => Some((f64::min(lo, v), f64::max(hi, v))),
                })
        })
        .collect();

    let expected: Vec<f64> = outcomes.iter().filter_map(|o| o.expected_ex_loss).collect();
    let expected_ex_loss = (!expected.is_empty()).then(|| expected.iter().sum::<f64>() / expected.len() as f64);

    CellSummary {
        cell,
        records,
        paired,
        intensity_range,
        expected_ex_loss,
    }
}

/// Runs all `n_mc` iterations of one cell in parallel and reduces them in
/// iteration order.
pub fn run_cell(config: &ExperimentConfig, cell: Cell) -> Result<CellSummary> {
    let wrap = |source: Error| Error::CellFailed {
        p: cell.p,
        n: cell.n,
        source: Box::new(source),
    };
    let needs_scalars = config.estimators.contains(&EstimatorId::LwEx);
    let fixed = fixed_population(cell, config.distribution, config.sigma_mode, needs_scalars).map_err(wrap)?;
    let outcomes = (0..config.n_mc)
        .into_par_iter()
        .map(|i| {
            iteration_with(
                cell,
                config.distribution,
                &config.estimators,
                iteration_seed(config.base_seed, cell, i),
                config.timing,
                fixed.as_ref(),
            )
        })
        .collect::<Result<Vec<_>>>()
        .map_err(wrap)?;
    Ok(summarize(config, cell, &outcomes))
}

fn run_all(config: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    config.validate()?;
    let cells = config.cells()?;
    let go = || {
        cells
            .iter()
            .map(|&cell| run_cell(config, cell))
            .collect::<Result<Vec<_>>>()
    };
    match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {threads} worker threads: {e}")))?
            .install(go),
        None => go(),
    }
}

/// Grid study; one summary per `(p, n)` cell, `p`-major.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    if !matches!(config.mode, Mode::Grid { .. }) {
        return Err(Error::InvalidConfig("run_grid needs grid mode".into()));
    }
    run_all(config)
}

/// Convergence study; one summary per `(c, n)`, `c`-major.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    if !matches!(config.mode, Mode::Convergence { .. }) {
        return Err(Error::InvalidConfig("run_convergence needs convergence mode".into()));
    }
    run_all(config)
}

/// Runs whichever study the mode selects.
pub fn run(config: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    run_all(config)
}

/// Formats a float with 17 significant digits.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn csv_error(e: impl fmt::Display) -> Error {
    Error::Inconsistent(format!("csv output failed: {e}"))
}

/// Writes the loss table.
pub fn write_loss_csv<W: Write>(summaries: &[CellSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOSS_CSV_HEADER).map_err(csv_error)?;
    for record in summaries.iter().flat_map(|s| &s.records) {
        w.write_record([
            record.estimator.label().to_string(),
            record.p.to_string(),
            record.n.to_string(),
            format_float(record.c),
            record.distribution.clone(),
            record.sigma_mode.label().to_string(),
            record.n_mc.to_string(),
            format_float(record.mean_loss),
            format_float(record.std_err),
            format_float(record.mean_time_s.unwrap_or(f64::NAN)),
        ])
        .map_err(csv_error)?;
    }
    w.flush().map_err(csv_error)
}

/// `log₁₀(a) − log₁₀(b)`; NaN when either side is not positive.
pub fn log10_difference(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.log10() - b.log10()
    } else {
        f64::NAN
    }
}

/// Writes the pairwise comparison table. The relative column subtracts the
/// cell's `LW_op` mean loss from both sides first, and is NaN when `LW_op`
/// was not run or a side is not positive after subtraction.
pub fn write_diff_csv<W: Write>(summaries: &[CellSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DIFF_CSV_HEADER).map_err(csv_error)?;
    for summary in summaries {
        let floor = summary.record(EstimatorId::LwOp).map(|r| r.mean_loss);
        for d in &summary.paired {
            let (Some(ra), Some(rb)) = (summary.record(d.a), summary.record(d.b)) else {
                continue;
            };
            let relative = match floor {
                Some(f) => log10_difference(ra.mean_loss - f, rb.mean_loss - f),
                None => f64::NAN,
            };
            w.write_record([
                summary.cell.p.to_string(),
                summary.cell.n.to_string(),
                format_float(summary.cell.c),
                d.a.label().to_string(),
                d.b.label().to_string(),
                format_float(ra.mean_loss),
                format_float(rb.mean_loss),
                format_float(d.mean),
                format_float(d.std_err),
                format_float(log10_difference(ra.mean_loss, rb.mean_loss)),
                format_float(relative),
            ])
            .map_err(csv_error)?;
        }
    }
    w.flush().map_err(csv_error)
}
