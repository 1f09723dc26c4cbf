//! Run configuration: one JSON document holding the system parameters and
//! the sweep fields, with command-line overrides applied key by key.

use std::fs;
use std::path::{Path, PathBuf};

use mcftn_core::link::Constellation;
use mcftn_core::{Metric, Scheme, SweepSpec, SystemConfig};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::CliError;

/// Keys consumed by the sweep rather than by `SystemConfig`.
const SWEEP_KEYS: [&str; 7] = [
    "snr_db",
    "realizations",
    "schemes",
    "frames",
    "constellation",
    "compression",
    "out_dir",
];

pub const DEFAULT_SNR_DB: [f64; 5] = [0.0, 5.0, 10.0, 15.0, 20.0];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub schemes: Option<Vec<Scheme>>,
    pub frames: usize,
    pub constellation: Constellation,
    /// `(alpha, beta)` pairs swept one after another. Empty means the pair in `system`.
    pub compression: Vec<(f64, f64)>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Reads `path` and applies `overrides` as top-level key replacements.
    pub fn load(path: &Path, overrides: Map<String, Value>) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
        let Value::Object(mut doc) = value else {
            return Err(CliError::Config(format!("config {} must be a JSON object", path.display())));
        };
        if overrides.contains_key("alpha") || overrides.contains_key("beta") {
            doc.remove("compression");
        }
        doc.extend(overrides);
        Self::from_document(doc).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_document(mut doc: Map<String, Value>) -> Result<Self, CliError> {
        let mut sweep = Map::new();
        for key in SWEEP_KEYS {
            if let Some(v) = doc.remove(key) {
                sweep.insert(key.to_string(), v);
            }
        }
        let system: SystemConfig = serde_json::from_value(Value::Object(doc))
            .map_err(|e| CliError::Config(format!("system parameters: {e}")))?;
        let defaults = SweepSpec::new(system.clone(), Vec::new(), Vec::new(), Metric::Capacity);
        let compression: Vec<[f64; 2]> = field(&sweep, "compression")?.unwrap_or_default();
        Ok(RunConfig {
            snr_db: field(&sweep, "snr_db")?.unwrap_or_else(|| DEFAULT_SNR_DB.to_vec()),
            realizations: field(&sweep, "realizations")?.unwrap_or(defaults.realizations),
            schemes: field(&sweep, "schemes")?,
            frames: field(&sweep, "frames")?.unwrap_or(defaults.frames),
            constellation: field(&sweep, "constellation")?.unwrap_or(defaults.constellation),
            compression: compression.into_iter().map(|[a, b]| (a, b)).collect(),
            out_dir: field(&sweep, "out_dir")?,
            system,
        })
    }

    /// One validated sweep per compression pair.
    pub fn sweeps(&self, metric: Metric) -> Result<Vec<SweepSpec>, CliError> {
        let pairs = if self.compression.is_empty() {
            vec![(self.system.alpha, self.system.beta)]
        } else {
            self.compression.clone()
        };
        let schemes = self.schemes.clone().unwrap_or_else(|| default_schemes(&self.system, metric));
        pairs
            .into_iter()
            .map(|(alpha, beta)| {
                let base = SystemConfig {
                    alpha,
                    beta,
                    ..self.system.clone()
                };
                let mut spec = SweepSpec::new(base, self.snr_db.clone(), schemes.clone(), metric);
                spec.realizations = self.realizations;
                spec.frames = self.frames;
                spec.constellation = self.constellation;
                spec.validate().map_err(CliError::from)?;
                Ok(spec)
            })
            .collect()
    }
}

pub fn default_schemes(system: &SystemConfig, metric: Metric) -> Vec<Scheme> {
    match (system.n_t == 1 && system.n_r == 1, metric) {
        (true, Metric::Capacity) => vec![Scheme::SisoPa, Scheme::SisoNopa],
        (true, Metric::Ber) => vec![Scheme::SisoPa],
        (false, _) => vec![Scheme::Sic, Scheme::WfRelaxed],
    }
}

fn field<T: DeserializeOwned>(sweep: &Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    sweep
        .get(key)
        .map(|v| serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("field `{key}`: {e}"))))
        .transpose()
}
