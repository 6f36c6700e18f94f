use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::liouvillian::build_superoperator;
use crate::models::{
    coupled_spin1_pair, spin1_chain, spin_half_pair, CoupledSpin1Params, Spin1ChainParams, SpinHalfPairParams,
};
use crate::operators::{SpinSpec, Superoperator};
use crate::phasespace::{ThresholdMode, DEFAULT_GRID};
use crate::syncstats::{SamplingWeight, DEFAULT_BINS, DEFAULT_RESAMPLES};

/// A named model and its parameters, tagged by `preset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum ModelConfig {
    Spin1Chain(Spin1ChainParams),
    SpinHalfPair(SpinHalfPairParams),
    /// Base oscillators plus their weak coupling.
    CoupledSpin1Pair(CoupledSpin1Params),
}

impl ModelConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ModelConfig::Spin1Chain(_) => "spin1_chain",
            ModelConfig::SpinHalfPair(_) => "spin_half_pair",
            ModelConfig::CoupledSpin1Pair(_) => "coupled_spin1_pair",
        }
    }

    /// Parse `preset` plus `key = value` overrides, values in TOML syntax.
    pub fn from_overrides(preset: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut text = format!("preset = {preset:?}\n");
        for (k, v) in overrides {
            text.push_str(&format!("{k} = {v}\n"));
        }
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Preset> {
        let (model, extra) = match self {
            ModelConfig::Spin1Chain(p) => (spin1_chain(p)?, None),
            ModelConfig::SpinHalfPair(p) => (spin_half_pair(p)?.model, None),
            ModelConfig::CoupledSpin1Pair(p) => {
                let pair = coupled_spin1_pair(p)?;
                (pair.base, Some(pair.perturbation))
            }
        };
        let mut generator = build_superoperator(&model)?;
        if let Some(extra) = extra {
            generator = &generator + &build_superoperator(&extra)?;
        }
        Ok(Preset { name: self.name(), spec: model.spec().clone(), generator })
    }
}

/// A built model: lattice and generator.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub spec: SpinSpec,
    pub generator: Superoperator,
}

fn default_samples() -> usize {
    200
}
fn default_threshold() -> f64 {
    0.95
}
fn default_chi_samples() -> usize {
    1000
}
fn default_grid() -> usize {
    DEFAULT_GRID
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_resamples() -> usize {
    DEFAULT_RESAMPLES
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub eta_values: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples_per_eta: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub threshold_mode: ThresholdMode,
    #[serde(default)]
    pub sampling: SamplingWeight,
    #[serde(default = "default_chi_samples")]
    pub chi_samples_per_record: usize,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_resamples")]
    pub bootstrap_resamples: usize,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

/// Parsed sweep configuration:
///
/// ```toml
/// [model]
/// preset = "spin1_chain"
/// n = 3
///
/// [sweep]
/// eta_values = [1e-4, 10.0]
/// samples_per_eta = 200
/// master_seed = 1
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelConfig,
    pub sweep: SweepSection,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        let bad = |msg: String| Err(Error::Config(msg));
        if s.eta_values.is_empty() {
            return bad("eta_values is empty".into());
        }
        if let Some(e) = s.eta_values.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return bad(format!("eta must be finite and nonnegative, got {e}"));
        }
        let mut sorted = s.eta_values.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("eta_values contains duplicates".into());
        }
        if s.samples_per_eta == 0 {
            return bad("samples_per_eta must be at least 1".into());
        }
        if !(s.threshold > 0.0 && s.threshold <= 1.0) {
            return bad(format!("threshold must lie in (0, 1], got {}", s.threshold));
        }
        if s.chi_samples_per_record == 0 || s.grid < 4 || s.histogram_bins == 0 {
            return bad("chi_samples_per_record, grid (≥ 4) and histogram_bins must be positive".into());
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).unwrap_or_default();
        let digest = Sha256::digest(&json);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = SweepConfig::from_toml(
            "[model]\npreset = \"spin1_chain\"\nn = 3\n[sweep]\neta_values = [1e-4, 10.0]\n",
        )
        .unwrap();
        assert_eq!(cfg.sweep.samples_per_eta, 200);
        assert_eq!(cfg.sweep.threshold, 0.95);
        assert!(matches!(cfg.model, ModelConfig::Spin1Chain(p) if p.n == 3 && p.gamma == 2.0));
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "[model]\npreset = \"spin_half_pair\"\n[sweep]\n";
        assert!(SweepConfig::from_toml(&format!("{base}eta_values = []\n")).is_err());
        assert!(SweepConfig::from_toml(&format!("{base}eta_values = [-1.0]\n")).is_err());
        assert!(SweepConfig::from_toml(&format!("{base}eta_values = [1.0]\nthreshold = 0.0\n")).is_err());
        assert!(SweepConfig::from_toml(&format!("{base}eta_values = [1.0]\nbogus = 1\n")).is_err());
        assert!(SweepConfig::from_toml("[model]\npreset = \"nope\"\n[sweep]\neta_values = [1.0]\n").is_err());
        assert!(SweepConfig::from_toml("[model]\npreset = \"spin1_chain\"\nq = 2\n[sweep]\neta_values = [1.0]\n").is_err());
    }

    #[test]
    fn overrides() {
        let m = ModelConfig::from_overrides("spin1_chain", &[("n".into(), "2".into())]).unwrap();
        assert_eq!(m.build().unwrap().spec.dim(), 9);
    }
}
