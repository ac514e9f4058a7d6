//! The subcommands, each a thin layer over one library call. Every command
//! returns the text destined for standard output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use lwshrink::experiments::{
    format_float, run_convergence, run_grid, write_diff_csv, write_loss_csv, CellSummary, Mode,
};
use lwshrink::linalg::PSD_TOLERANCE;
use lwshrink::{
    estimate, gaussian_beta2, student_beta2, Error, ObservationMatrix, OracleScalars, SymmetricMatrix, Variant,
};
use nalgebra::DMatrix;
use serde_json::json;

use crate::config::{parse_config, render_config, RunConfig, StudyKind};
use crate::{CliError, CliResult};

pub const ARTIFACT: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

/// Reads a headerless numeric CSV into rows. Errors name the 1-based line
/// and column of the offending cell.
pub fn read_numeric_csv(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::input(format!(
                    "{}: row {line}, column {}: '{cell}' is not a finite number",
                    path.display(),
                    j + 1
                ))),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::input(format!(
                    "{}: row {line} has {} columns, expected {}",
                    path.display(),
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok(rows)
}

/// Formats a matrix as CSV with 17 significant digits per entry.
pub fn matrix_csv(m: &DMatrix<f64>) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| format_float(*v)))
            .map_err(|e| CliError::input(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::input(e.to_string()))
}

/// `estimate`: samples as rows in, shrunk covariance out.
pub fn cmd_estimate(input: &Path, variant: Variant, out: &Path) -> CliResult<String> {
    let rows = read_numeric_csv(input)?;
    if rows.len() < variant.min_samples() {
        return Err(Error::InsufficientSamples {
            required: variant.min_samples(),
            actual: rows.len(),
        }
        .into());
    }
    let x = ObservationMatrix::from_sample_rows(&rows)?;
    let result = estimate(&x, variant)?;
    write_file(out, &matrix_csv(result.estimate.data())?)?;
    let s = result.scalars;
    let mut text = String::new();
    let _ = writeln!(text, "variant={}", variant.label());
    let _ = writeln!(text, "p={}", x.dim());
    let _ = writeln!(text, "n={}", x.n_samples());
    let _ = writeln!(text, "m={}", s.m);
    let _ = writeln!(text, "d2={}", s.d2);
    let _ = writeln!(text, "bbar2={}", s.bbar2);
    let _ = writeln!(text, "b2_raw={}", s.b2_raw);
    let _ = writeln!(text, "b2={}", s.b2);
    let _ = writeln!(text, "a2={}", s.a2);
    let _ = writeln!(text, "intensity={}", result.shrinkage_intensity);
    Ok(text)
}

/// Population law for `oracle`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleLaw {
    Gaussian,
    Student(f64),
}

/// Population covariance for `oracle`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSource {
    Identity(usize),
    File(PathBuf),
}

fn load_sigma(source: &SigmaSource) -> CliResult<SymmetricMatrix> {
    match source {
        SigmaSource::Identity(p) => {
            if *p == 0 {
                return Err(CliError::input("dimension p must be positive"));
            }
            Ok(SymmetricMatrix::identity(*p))
        }
        SigmaSource::File(path) => {
            let rows = read_numeric_csv(path)?;
            let p = rows.len();
            if rows[0].len() != p {
                return Err(CliError::input(format!(
                    "{}: covariance must be square, got {p}x{}",
                    path.display(),
                    rows[0].len()
                )));
            }
            let sigma = SymmetricMatrix::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))?;
            if !sigma.is_psd(PSD_TOLERANCE) {
                return Err(Error::NotPositiveSemidefinite {
                    min_eigenvalue: sigma.eigenvalues()[0],
                }
                .into());
            }
            Ok(sigma)
        }
    }
}

/// Library call behind `oracle`.
pub fn oracle_scalars(law: OracleLaw, sigma: &SigmaSource, n: usize) -> CliResult<OracleScalars> {
    if let OracleLaw::Student(nu) = law {
        if nu.is_nan() || nu <= 4.0 {
            return Err(Error::InvalidDegreesOfFreedom {
                nu,
                reason: "infinite fourth moment regime (nu <= 4)",
            }
            .into());
        }
    }
    let sigma = load_sigma(sigma)?;
    Ok(match law {
        OracleLaw::Gaussian => gaussian_beta2(&sigma, n)?,
        OracleLaw::Student(nu) => student_beta2(&sigma, n, nu)?,
    })
}

/// `oracle`: prints `μ, α², β², δ²` and `θ²` when known.
pub fn cmd_oracle(law: OracleLaw, sigma: &SigmaSource, n: usize) -> CliResult<String> {
    let s = oracle_scalars(law, sigma, n)?;
    let mut text = format!(
        "mu={}\nalpha2={}\nbeta2={}\ndelta2={}\n",
        s.mu, s.alpha2, s.beta2, s.delta2
    );
    if let Some(theta2) = s.theta2 {
        let _ = writeln!(text, "theta2={theta2}");
    }
    Ok(text)
}

/// Command-line overrides for `grid` and `convergence`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyOverrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Loads a configuration file, or the configuration embedded in a run
/// manifest.
pub fn load_run_config(path: &Path) -> CliResult<RunConfig> {
    let text = read_text(path)?;
    if text.trim_start().starts_with('{') {
        let manifest: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::input(format!("{}: malformed manifest: {e}", path.display())))?;
        let embedded = manifest
            .get("config_text")
            .and_then(|v| v.as_str())
            .ok_or_else(|| CliError::input(format!("{}: manifest has no config_text", path.display())))?;
        return parse_config(embedded);
    }
    parse_config(&text)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn default_output(config_path: &Path, kind: StudyKind) -> PathBuf {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PathBuf::from(format!("{stem}_{}.csv", kind.label()))
}

fn describe(config: &RunConfig) -> serde_json::Value {
    let e = &config.experiment;
    let mode = match &e.mode {
        Mode::Grid { ps, ns } => json!({"kind": "grid", "p": ps, "n": ns}),
        Mode::Convergence { cs, ns } => json!({"kind": "convergence", "c": cs, "n": ns}),
    };
    json!({
        "mode": mode,
        "distribution": e.distribution.label(),
        "sigma_mode": e.sigma_mode.label(),
        "n_mc": e.n_mc,
        "estimators": e.estimators.iter().map(|x| x.label()).collect::<Vec<_>>(),
        "seed": e.base_seed,
        "threads": e.threads,
        "timing": e.timing,
    })
}

/// Paths written by a study run.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutputs {
    pub losses: PathBuf,
    pub differences: Option<PathBuf>,
    pub manifest: PathBuf,
}

/// `grid` / `convergence`: runs the study, writes the loss CSV (plus the
/// pairwise difference CSV for grids) and a manifest that reproduces it.
pub fn cmd_study(kind: StudyKind, config_path: &Path, overrides: &StudyOverrides) -> CliResult<StudyOutputs> {
    let mut config = load_run_config(config_path)?;
    if config.kind() != kind {
        return Err(CliError::input(format!(
            "{} describes a {} study; use the '{}' command",
            config_path.display(),
            config.kind().label(),
            config.kind().label()
        )));
    }
    if let Some(seed) = overrides.seed {
        config.experiment.base_seed = seed;
    }
    if let Some(threads) = overrides.threads {
        config.experiment.threads = Some(threads);
    }
    let losses = overrides
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| default_output(config_path, kind));
    config.output = Some(losses.clone());
    config.experiment.validate()?;

    let started_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
    let summaries: Vec<CellSummary> = match kind {
        StudyKind::Grid => run_grid(&config.experiment)?,
        StudyKind::Convergence => run_convergence(&config.experiment)?,
    };
    let finished_at = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);

    let mut table = Vec::new();
    write_loss_csv(&summaries, &mut table)?;
    write_file(&losses, &table)?;
    let differences = match kind {
        StudyKind::Grid => {
            let path = sibling(&losses, "_diff.csv");
            let mut diff = Vec::new();
            write_diff_csv(&summaries, &mut diff)?;
            write_file(&path, &diff)?;
            Some(path)
        }
        StudyKind::Convergence => None,
    };
    let manifest = sibling(&losses, ".manifest.json");
    let body = json!({
        "artifact": ARTIFACT,
        "command": kind.label(),
        "started_at": started_at,
        "finished_at": finished_at,
        "config": describe(&config),
        "config_text": render_config(&config),
        "outputs": {
            "losses": losses.display().to_string(),
            "differences": differences.as_ref().map(|p| p.display().to_string()),
            "manifest": manifest.display().to_string(),
        },
    });
    let text = serde_json::to_string_pretty(&body).map_err(|e| CliError::input(e.to_string()))?;
    write_file(&manifest, text.as_bytes())?;
    Ok(StudyOutputs {
        losses,
        differences,
        manifest,
    })
}
