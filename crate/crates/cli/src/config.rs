//! TOML experiment configuration.
//!
//! Every section and field is optional; missing values fall back to the
//! reference scenario (30 m links, -30 dB reference loss, path-loss exponent
//! 4, -80 dBm noise, 10 W peak power, K = 5 similarity curve).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use scsec_core::{ChannelConfig, DualConfig, ScaConfig, SchemeKind, SemanticParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Peak power `P̂` in watts.
    pub peak: f64,
    /// Average power budgets `P̄` to sweep, in watts.
    pub averages: Vec<f64>,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { peak: 10.0, averages: vec![0.1, 0.5, 1.0, 5.0, 10.0] }
    }
}

/// Replacement similarity-curve constants for one symbols-per-word count.
/// Unset fields keep the base curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemanticOverride {
    pub k: u32,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelConfig,
    /// Base semantic encoder; its `k` is the reference K for the scheme comparison.
    pub semantic: SemanticParams,
    /// Extra K values for the semantic schemes. Without an override, only the
    /// `rho / K` prefactor changes and the similarity curve is shared.
    pub k_values: Vec<u32>,
    pub semantic_overrides: Vec<SemanticOverride>,
    pub budget: BudgetConfig,
    pub schemes: Vec<SchemeKind>,
    /// Number of fading states drawn per seed.
    pub n_states: usize,
    pub solver: DualConfig,
    pub sca: ScaConfig,
    pub output_dir: PathBuf,
    /// Record per-cell wall-clock times. Off by default so that repeated runs
    /// produce identical files.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelConfig::default(),
            semantic: SemanticParams::default(),
            k_values: vec![3, 5, 8],
            semantic_overrides: Vec::new(),
            budget: BudgetConfig::default(),
            schemes: SchemeKind::ALL.to_vec(),
            n_states: 1000,
            solver: DualConfig::default(),
            sca: ScaConfig::default(),
            output_dir: PathBuf::from("results"),
            timing: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        let cfg: Self =
            toml::from_str(text).map_err(|source| ConfigError::Parse { path: origin.to_path_buf(), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.channel.validate().map_err(|e| invalid("channel", e.to_string()))?;
        self.semantic.validate().map_err(|e| invalid("semantic", e.to_string()))?;
        self.solver.validate().map_err(|e| invalid("solver", e.to_string()))?;
        self.sca.validate().map_err(|e| invalid("sca", e.to_string()))?;
        let peak = self.budget.peak;
        if !(peak.is_finite() && peak > 0.0) {
            return Err(invalid("budget.peak", format!("must be positive, got {peak}")));
        }
        if self.budget.averages.is_empty() {
            return Err(invalid("budget.averages", "at least one average power is required"));
        }
        for (i, &p) in self.budget.averages.iter().enumerate() {
            if !(p > 0.0 && p <= peak) {
                return Err(invalid(
                    format!("budget.averages[{i}]"),
                    format!("{p} W must satisfy 0 < P <= budget.peak = {peak} W"),
                ));
            }
        }
        if self.n_states == 0 {
            return Err(invalid("n_states", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "at least one scheme is required"));
        }
        if let Some(i) = self.k_values.iter().position(|&k| k == 0) {
            return Err(invalid(format!("k_values[{i}]"), "K must be at least 1"));
        }
        let mut seen = BTreeSet::new();
        for (i, o) in self.semantic_overrides.iter().enumerate() {
            if !seen.insert(o.k) {
                return Err(invalid(format!("semantic_overrides[{i}].k"), format!("duplicate K = {}", o.k)));
            }
            self.semantic_for(o.k)
                .validate()
                .map_err(|e| invalid(format!("semantic_overrides[{i}]"), e.to_string()))?;
        }
        Ok(())
    }

    /// Reference K used for the scheme comparison and the bit baselines.
    pub fn base_k(&self) -> u32 {
        self.semantic.k
    }

    /// Sorted K values for the semantic schemes, always including the base K.
    pub fn semantic_ks(&self) -> Vec<u32> {
        let mut ks: BTreeSet<u32> = self.k_values.iter().copied().collect();
        ks.insert(self.base_k());
        ks.into_iter().collect()
    }

    /// Semantic parameters for `k`, with any override applied.
    pub fn semantic_for(&self, k: u32) -> SemanticParams {
        let mut sp = self.semantic.with_k(k);
        if let Some(o) = self.semantic_overrides.iter().find(|o| o.k == k) {
            sp.a1 = o.a1.unwrap_or(sp.a1);
            sp.a2 = o.a2.unwrap_or(sp.a2);
            sp.c1 = o.c1.unwrap_or(sp.c1);
            sp.c2 = o.c2.unwrap_or(sp.c2);
        }
        sp
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    ExperimentConfig::from_toml(&text, path)
}

/// Parses a comma-separated scheme list such as `sc_sca,bit_an`.
pub fn parse_schemes(list: &str) -> Result<Vec<SchemeKind>, ConfigError> {
    let mut out = Vec::new();
    for tag in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let kind: SchemeKind = tag.parse().map_err(|e: scsec_core::Error| invalid("schemes", e.to_string()))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(invalid("schemes", "at least one scheme is required"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::from_toml(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_config_is_reference_scenario() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.budget.peak, 10.0);
        assert_eq!(cfg.channel.d_l, 30.0);
        assert_eq!(cfg.channel.pl0_db, -30.0);
        assert_eq!(cfg.channel.alpha, 4.0);
        assert_eq!(cfg.channel.noise_l_dbm, -80.0);
        assert_eq!(cfg.semantic, SemanticParams::default());
        assert_eq!(cfg.schemes.len(), 4);
    }

    #[test]
    fn average_above_peak_rejected() {
        let err = parse("[budget]\npeak = 10.0\naverages = [1.0, 20.0]\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("budget.averages[1]"), "{msg}");
    }

    #[test]
    fn unknown_scheme_named() {
        let err = parse("schemes = [\"sc_sca\", \"bit_magic\"]\n").unwrap_err();
        assert!(err.to_string().contains("bit_magic"), "{err}");
        let err = parse_schemes("sc_sca,bit_magic").unwrap_err();
        assert!(err.to_string().contains("bit_magic"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse("[channel]\nd_x = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("d_x"), "{err}");
    }

    #[test]
    fn other_invariants() {
        assert!(parse("n_states = 0\n").unwrap_err().to_string().contains("n_states"));
        assert!(parse("schemes = []\n").unwrap_err().to_string().contains("schemes"));
        assert!(parse("k_values = [0]\n").unwrap_err().to_string().contains("k_values[0]"));
        assert!(parse("[semantic]\na1 = 0.99\n").unwrap_err().to_string().contains("semantic"));
    }

    #[test]
    fn k_sweep_and_overrides() {
        let cfg = parse(
            "k_values = [8, 3]\n[[semantic_overrides]]\nk = 8\na2 = 0.95\n[semantic]\nk = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.semantic_ks(), vec![3, 4, 8]);
        let sp8 = cfg.semantic_for(8);
        assert_eq!((sp8.k, sp8.a2, sp8.a1), (8, 0.95, 0.37));
        assert_eq!(cfg.semantic_for(3).a2, 0.98);
        assert!(parse("[[semantic_overrides]]\nk = 3\na1 = 0.99\n").is_err());
    }

    #[test]
    fn scheme_list_parsing() {
        assert_eq!(parse_schemes("bit_an, sc_sca,bit_an").unwrap(), vec![SchemeKind::BitAn, SchemeKind::ScSca]);
        assert!(parse_schemes(" , ").is_err());
    }
}
