//! Experiment configuration: a single TOML file with nested sections.
//! Unknown keys are rejected outright, and every experiment validates the
//! fields it needs before anything runs.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;

/// The canned experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Lyapunov,
    FourthMoment,
    SpectrumDecay,
    Direction,
    Correlator,
    Greens,
    Moments,
    PhaseSweep,
    Diagnostics,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Lyapunov => "lyapunov",
            ExperimentKind::FourthMoment => "fourth-moment",
            ExperimentKind::SpectrumDecay => "spectrum-decay",
            ExperimentKind::Direction => "direction",
            ExperimentKind::Correlator => "correlator",
            ExperimentKind::Greens => "greens",
            ExperimentKind::Moments => "moments",
            ExperimentKind::PhaseSweep => "phase-sweep",
            ExperimentKind::Diagnostics => "diagnostics",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Full experiment configuration. The `experiment` field may be omitted in
/// the file when the kind comes from the CLI subcommand; when both are given
/// they must agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    /// Master seed; realization `i` draws from a stream derived from it.
    pub seed: u64,
    /// Output CSV path.
    pub out: PathBuf,
    /// Worker threads; 0 means one per core.
    #[serde(default)]
    pub threads: usize,
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ModelSection {
    pub alpha: f64,
    pub lambda: f64,
    /// `uniform` (default) or `bernoulli`.
    #[serde(default = "default_distribution")]
    pub distribution: String,
}

fn default_distribution() -> String {
    "uniform".to_string()
}

/// Energy grid: either an explicit list or an inclusive stepped range.
/// `alphas`/`lambdas` extend the sweep dimensions for phase-sweep runs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunSection {
    /// Transfer-chain length for trajectory experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<usize>,
    /// Box size `L` (sites `0..=L`) for spectral experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_size: Option<usize>,
    pub realizations: usize,
    /// Moment order `p` for transport runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_order: Option<f64>,
    /// Fractional order `s` for Green's-function runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fractional_order: Option<f64>,
    /// Energy window `[lo, hi]` for spectral filters and correlators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    /// Distance grid for correlator and Green's-function decay.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub distances: Vec<usize>,
    /// Time grid for transport moments.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    /// Base site for correlators and evolutions.
    #[serde(default)]
    pub base_site: usize,
    /// Tolerance on `k` for the resonance flag.
    #[serde(default = "default_resonance_tol")]
    pub resonance_tol: f64,
    /// Band-edge guard on `|E|`.
    #[serde(default = "default_band_guard")]
    pub band_guard: f64,
}

fn default_resonance_tol() -> f64 {
    anderson1d::model::RESONANCE_TOL
}

fn default_band_guard() -> f64 {
    anderson1d::model::BAND_GUARD
}

/// A configuration problem: maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Load a file, then apply `key=value` overrides by dotted path before
    /// deserializing, so typos in override keys fail like unknown file keys.
    pub fn load(path: &std::path::Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn from_toml_with_overrides(
        text: &str,
        overrides: &[String],
    ) -> Result<Self, ConfigError> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let rendered = toml::to_string(&table).map_err(|e| ConfigError(e.to_string()))?;
        Self::from_toml_str(&rendered)
    }

    /// Resolve the energy grid from the list or the stepped range.
    pub fn energies(&self) -> Result<Vec<f64>, ConfigError> {
        let g = &self.grid;
        match (
            !g.energies.is_empty(),
            g.e_min.is_some() || g.e_max.is_some() || g.e_step.is_some(),
        ) {
            (true, true) => Err(ConfigError(
                "grid: give either `energies` or the e-min/e-max/e-step range, not both".into(),
            )),
            (true, false) => Ok(g.energies.clone()),
            (false, true) => {
                let (lo, hi, step) = match (g.e_min, g.e_max, g.e_step) {
                    (Some(lo), Some(hi), Some(step)) if step > 0.0 && hi >= lo => (lo, hi, step),
                    _ => {
                        return Err(ConfigError(
                            "grid: e-min/e-max/e-step must all be set with e-step > 0 and e-max >= e-min"
                                .into(),
                        ));
                    }
                };
                let count = ((hi - lo) / step).round() as usize + 1;
                Ok((0..count).map(|i| lo + step * i as f64).collect())
            }
            (false, false) => Err(ConfigError("grid: no energies given".into())),
        }
    }

    /// Shared checks that every run performs before touching any numerics.
    pub fn validate(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        if let Some(declared) = self.experiment
            && declared != kind
        {
            return Err(ConfigError(format!(
                "config declares experiment `{declared}` but the `{kind}` subcommand was invoked"
            )));
        }
        if self.run.realizations == 0 {
            return Err(ConfigError("run.realizations must be at least 1".into()));
        }
        if !(self.model.alpha > 0.0) {
            return Err(ConfigError(format!(
                "model.alpha must be positive, got {}",
                self.model.alpha
            )));
        }
        anderson1d::DisorderSpec::from_name(&self.model.distribution)
            .map_err(|e| ConfigError(e.to_string()))?;
        if let Some([lo, hi]) = self.run.interval
            && lo >= hi
        {
            return Err(ConfigError(format!(
                "run.interval must satisfy lo < hi, got [{lo}, {hi}]"
            )));
        }

        use ExperimentKind::*;
        match kind {
            Lyapunov | Diagnostics => {
                self.need_chain(kind)?;
                self.need_energies(kind)?;
            }
            FourthMoment => {
                self.need_chain(kind)?;
                self.need_energies(kind)?;
                if self.model.alpha <= 0.5 {
                    return Err(ConfigError(format!(
                        "{kind}: model.alpha must exceed 1/2, got {}",
                        self.model.alpha
                    )));
                }
            }
            Direction => {
                self.need_chain(kind)?;
                self.need_energies(kind)?;
            }
            SpectrumDecay => {
                self.need_box(kind)?;
                if self.run.interval.is_none() {
                    return Err(ConfigError(format!("{kind}: run.interval is required")));
                }
                if !(self.model.alpha <= 0.5) {
                    return Err(ConfigError(format!(
                        "{kind}: decay fits apply to alpha <= 1/2, got {}",
                        self.model.alpha
                    )));
                }
            }
            Correlator => {
                self.need_box(kind)?;
                if self.run.interval.is_none() {
                    return Err(ConfigError(format!("{kind}: run.interval is required")));
                }
                if self.run.realizations < 30 {
                    return Err(ConfigError(format!(
                        "{kind}: needs at least 30 realizations, got {}",
                        self.run.realizations
                    )));
                }
            }
            Greens => {
                self.need_box(kind)?;
                self.need_energies(kind)?;
                let s = self.run.fractional_order.unwrap_or(0.2);
                if !(0.0 < s && s < 1.0) {
                    return Err(ConfigError(format!(
                        "{kind}: run.fractional-order must lie in (0,1), got {s}"
                    )));
                }
            }
            Moments => {
                self.need_box(kind)?;
                if self.run.interval.is_none() {
                    return Err(ConfigError(format!("{kind}: run.interval is required")));
                }
            }
            PhaseSweep => {
                self.need_chain(kind)?;
                self.need_energies(kind)?;
            }
        }
        Ok(())
    }

    fn need_chain(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        match self.run.chain_length {
            Some(n) if n >= 1000 => Ok(()),
            Some(n) => Err(ConfigError(format!(
                "{kind}: run.chain-length must be at least 1000, got {n}"
            ))),
            None => Err(ConfigError(format!("{kind}: run.chain-length is required"))),
        }
    }

    fn need_box(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        match self.run.box_size {
            Some(l) if (2..=5000).contains(&l) => Ok(()),
            Some(l) => Err(ConfigError(format!(
                "{kind}: run.box-size must lie in 2..=5000, got {l}"
            ))),
            None => Err(ConfigError(format!("{kind}: run.box-size is required"))),
        }
    }

    fn need_energies(&self, kind: ExperimentKind) -> Result<(), ConfigError> {
        let es = self.energies().map_err(|e| ConfigError(format!("{kind}: {}", e.0)))?;
        if es.is_empty() {
            return Err(ConfigError(format!("{kind}: energy grid is empty")));
        }
        Ok(())
    }

    pub fn model_params(&self) -> Result<anderson1d::ModelParams, ConfigError> {
        let spec = anderson1d::DisorderSpec::from_name(&self.model.distribution)
            .map_err(|e| ConfigError(e.to_string()))?;
        anderson1d::ModelParams::new(self.model.alpha, self.model.lambda, spec)
            .map_err(|e| ConfigError(e.to_string()))
    }
}

/// Apply one `--override key.path=value` to the raw TOML table.
fn apply_override(table: &mut toml::Table, ov: &str) -> Result<(), ConfigError> {
    let (path, raw_value) = ov
        .split_once('=')
        .ok_or_else(|| ConfigError(format!("override `{ov}` must look like key.path=value")))?;
    let value: toml::Value = match format!("v = {raw_value}").parse::<toml::Table>() {
        Ok(t) => t["v"].clone(),
        // not a TOML literal: treat as a bare string
        Err(_) => toml::Value::String(raw_value.to_string()),
    };
    let segments: Vec<&str> = path.split('.').collect();
    let mut cur = table;
    for seg in &segments[..segments.len() - 1] {
        cur = cur
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| ConfigError(format!("override path `{path}` crosses a non-table")))?;
    }
    cur.insert(segments[segments.len() - 1].to_string(), value);
    Ok(())
}
