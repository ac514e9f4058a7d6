//! Experiment configuration files.
//!
//! Flat `key = value` lines grouped under `[section]` headers; lines starting
//! with `#` or `;` are comments. Integer lists accept either `5, 15, 25` or
//! the range form `start:stop:step` (stop inclusive when reached).
//!
//! ```text
//! [experiment]
//! mode = convergence
//! n_mc = 50
//! seed = 1
//!
//! [distribution]
//! kind = gaussian
//!
//! [sigma]
//! mode = identity
//!
//! [convergence]
//! c = 1
//! n = 20, 40
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use ini::Ini;
use lwshrink::experiments::{ExperimentConfig, Mode, SigmaMode};
use lwshrink::Distribution;

use crate::{CliError, CliResult};

/// Which study a configuration describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    Grid,
    Convergence,
}

impl StudyKind {
    pub fn label(self) -> &'static str {
        match self {
            StudyKind::Grid => "grid",
            StudyKind::Convergence => "convergence",
        }
    }
}

/// A parsed configuration file: the experiment plus where to write it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn kind(&self) -> StudyKind {
        match self.experiment.mode {
            Mode::Grid { .. } => StudyKind::Grid,
            Mode::Convergence { .. } => StudyKind::Convergence,
        }
    }
}

const ALLOWED: &[(&str, &[&str])] = &[
    (
        "experiment",
        &["mode", "n_mc", "seed", "estimators", "threads", "timing", "output"],
    ),
    ("distribution", &["kind", "nu", "nu_first", "nu_second"]),
    ("sigma", &["mode"]),
    ("grid", &["p", "n"]),
    ("convergence", &["c", "n"]),
];

struct Sections<'a> {
    ini: &'a Ini,
    used: BTreeSet<(String, String)>,
}

impl<'a> Sections<'a> {
    fn optional(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let value = self.ini.section(Some(section)).and_then(|s| s.get(key))?;
        self.used.insert((section.to_string(), key.to_string()));
        Some(value.trim())
    }

    fn required(&mut self, section: &str, key: &str) -> CliResult<&'a str> {
        self.optional(section, key)
            .ok_or_else(|| CliError::input(format!("missing required key '{key}' in section [{section}]")))
    }
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> CliResult<T> {
    value.parse().map_err(|_| {
        CliError::input(format!(
            "invalid value '{value}' for key '{key}' in section [{section}]"
        ))
    })
}

fn parse_bool(section: &str, key: &str, value: &str) -> CliResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::input(format!(
            "invalid boolean '{value}' for key '{key}' in section [{section}]"
        ))),
    }
}

fn parse_usize_list(section: &str, key: &str, value: &str) -> CliResult<Vec<usize>> {
    let parts: Vec<&str> = value.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        let start: usize = parse_value(section, key, parts[0])?;
        let stop: usize = parse_value(section, key, parts[1])?;
        let step: usize = parse_value(section, key, parts[2])?;
        if step == 0 || stop < start {
            return Err(CliError::input(format!(
                "empty range '{value}' for key '{key}' in section [{section}]"
            )));
        }
        return Ok((start..=stop).step_by(step).collect());
    }
    split_list(value).map(|v| parse_value(section, key, v)).collect()
}

fn parse_f64_list(section: &str, key: &str, value: &str) -> CliResult<Vec<f64>> {
    split_list(value).map(|v| parse_value(section, key, v)).collect()
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn check_keys(ini: &Ini) -> CliResult<()> {
    for (section, props) in ini.iter() {
        let Some(name) = section else {
            if let Some((key, _)) = props.iter().next() {
                return Err(CliError::input(format!("unknown key '{key}' outside any section")));
            }
            continue;
        };
        let Some((_, keys)) = ALLOWED.iter().find(|(s, _)| *s == name) else {
            return Err(CliError::input(format!("unknown section [{name}]")));
        };
        let mut seen = BTreeSet::new();
        for (key, _) in props.iter() {
            if !keys.contains(&key) {
                return Err(CliError::input(format!("unknown key '{key}' in section [{name}]")));
            }
            if !seen.insert(key) {
                return Err(CliError::input(format!("duplicate key '{key}' in section [{name}]")));
            }
        }
    }
    Ok(())
}

fn parse_distribution(sections: &mut Sections<'_>) -> CliResult<Distribution> {
    let kind = sections.required("distribution", "kind")?;
    let mut nu = |key: &str| -> CliResult<f64> {
        let v = sections.required("distribution", key)?;
        parse_value("distribution", key, v)
    };
    match kind.to_ascii_lowercase().as_str() {
        "gaussian" => Ok(Distribution::Gaussian),
        "student" => Ok(Distribution::Student { nu: nu("nu")? }),
        "mixed_student" => Ok(Distribution::MixedStudent {
            nu_first: nu("nu_first")?,
            nu_second: nu("nu_second")?,
        }),
        other => Err(CliError::input(format!(
            "unknown distribution kind '{other}' (expected gaussian, student or mixed_student)"
        ))),
    }
}

/// Parses configuration text; every key must be known and every required
/// key present.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let ini = Ini::load_from_str(text).map_err(|e| CliError::input(format!("malformed config: {e}")))?;
    check_keys(&ini)?;
    let mut s = Sections {
        ini: &ini,
        used: BTreeSet::new(),
    };

    let mode_name = s.required("experiment", "mode")?.to_ascii_lowercase();
    let n_mc = parse_value("experiment", "n_mc", s.required("experiment", "n_mc")?)?;
    let base_seed = parse_value("experiment", "seed", s.required("experiment", "seed")?)?;
    let distribution = parse_distribution(&mut s)?;
    let sigma_mode: SigmaMode = s.required("sigma", "mode")?.parse()?;

    let mode = match mode_name.as_str() {
        "grid" => Mode::Grid {
            ps: parse_usize_list("grid", "p", s.required("grid", "p")?)?,
            ns: parse_usize_list("grid", "n", s.required("grid", "n")?)?,
        },
        "convergence" => Mode::Convergence {
            cs: parse_f64_list("convergence", "c", s.required("convergence", "c")?)?,
            ns: parse_usize_list("convergence", "n", s.required("convergence", "n")?)?,
        },
        other => {
            return Err(CliError::input(format!(
                "unknown mode '{other}' (expected grid or convergence)"
            )))
        }
    };
    let unused_section = if mode_name == "grid" { "convergence" } else { "grid" };
    if ini.section(Some(unused_section)).is_some() {
        return Err(CliError::input(format!(
            "section [{unused_section}] is not used in {mode_name} mode"
        )));
    }

    let mut experiment = match mode {
        Mode::Grid { .. } => ExperimentConfig::desk_grid(distribution, sigma_mode),
        Mode::Convergence { .. } => ExperimentConfig::desk_convergence(distribution, sigma_mode, vec![], vec![]),
    };
    experiment.mode = mode;
    experiment.n_mc = n_mc;
    experiment.base_seed = base_seed;
    if let Some(list) = s.optional("experiment", "estimators") {
        experiment.estimators = split_list(list).map(str::parse).collect::<lwshrink::Result<_>>()?;
    }
    if let Some(t) = s.optional("experiment", "threads") {
        experiment.threads = Some(parse_value("experiment", "threads", t)?);
    }
    if let Some(t) = s.optional("experiment", "timing") {
        experiment.timing = parse_bool("experiment", "timing", t)?;
    }
    let output = s.optional("experiment", "output").map(PathBuf::from);

    for (section, props) in ini.iter() {
        let name = section.unwrap_or_default();
        for (key, _) in props.iter() {
            if !s.used.contains(&(name.to_string(), key.to_string())) {
                return Err(CliError::input(format!(
                    "key '{key}' in section [{name}] does not apply to this configuration"
                )));
            }
        }
    }

    Ok(RunConfig { experiment, output })
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// Canonical text of a configuration; parsing it yields the same value.
pub fn render_config(config: &RunConfig) -> String {
    let e = &config.experiment;
    let mut out = String::new();
    let kind = config.kind();
    let _ = writeln!(out, "[experiment]");
    let _ = writeln!(out, "mode = {}", kind.label());
    let _ = writeln!(out, "n_mc = {}", e.n_mc);
    let _ = writeln!(out, "seed = {}", e.base_seed);
    let _ = writeln!(out, "estimators = {}", join(&e.estimators));
    if let Some(t) = e.threads {
        let _ = writeln!(out, "threads = {t}");
    }
    let _ = writeln!(out, "timing = {}", e.timing);
    if let Some(path) = &config.output {
        let _ = writeln!(out, "output = {}", path.display());
    }
    let _ = writeln!(out, "\n[distribution]");
    match e.distribution {
        Distribution::Gaussian => {
            let _ = writeln!(out, "kind = gaussian");
        }
        Distribution::Student { nu } => {
            let _ = writeln!(out, "kind = student\nnu = {nu}");
        }
        Distribution::MixedStudent { nu_first, nu_second } => {
            let _ = writeln!(
                out,
                "kind = mixed_student\nnu_first = {nu_first}\nnu_second = {nu_second}"
            );
        }
    }
    let _ = writeln!(out, "\n[sigma]\nmode = {}", e.sigma_mode);
    match &e.mode {
        Mode::Grid { ps, ns } => {
            let _ = writeln!(out, "\n[grid]\np = {}\nn = {}", join(ps), join(ns));
        }
        Mode::Convergence { cs, ns } => {
            let _ = writeln!(out, "\n[convergence]\nc = {}\nn = {}", join(cs), join(ns));
        }
    }
    out
}
