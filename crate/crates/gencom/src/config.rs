//! Experiment configuration (TOML).
//!
//! ```toml
//! [experiment]
//! name = "coverage"
//! images = ["builtin:hills", "data/photo.pgm"]
//! snr_db = [-6.0, -3.0, 0.0]
//! trials = 20
//! seed = 1
//! output = "results/coverage.csv"
//!
//! [[scheme]]
//! id = "gencom_b8"
//! kind = "gencom"
//! block_size = 8
//! code = "uncoded"
//!
//! [[scheme]]
//! id = "baseline"
//! kind = "baseline"
//! quality = 75
//! ldpc_n = 1024
//! ```
//!
//! Unknown keys are rejected. Every field except the scheme `id` and `kind`
//! has a default.

use std::path::{Path, PathBuf};

use gencom_core::fec::{CodeSpec, InterleaverSpec};
use gencom_core::harq::{HarqKind, HarqPolicy};
use gencom_core::imaging::{DctConfig, LpfConfig, Reconstruction};
use gencom_core::phy::{ChannelModel, PowerProfile};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: Experiment,
    #[serde(default, rename = "scheme")]
    pub schemes: Vec<Scheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiment {
    pub name: String,
    /// File paths (PGM/PPM) or `builtin:<name>`.
    pub images: Vec<String>,
    /// Es/N0 points in dB.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub channel: ChannelModel,
    /// Per-trial CSV; the summary goes next to it with a `.summary.csv` suffix.
    pub output: PathBuf,
    /// Optional directory for per-round HARQ traces (JSON lines).
    pub trace_dir: Option<PathBuf>,
    /// Fill `wall_ms`. Off by default so output stays byte-identical.
    pub timing: bool,
    /// Fall back to the inpaint decoder when the sidecar is unavailable.
    pub sidecar_fallback: bool,
    pub sidecar_timeout_ms: u64,
    pub sidecar_max_in_flight: usize,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            name: "experiment".into(),
            images: crate::testimages::NAMES.iter().map(|n| format!("builtin:{n}")).collect(),
            snr_db: vec![-6.0, -4.0, -2.0, 0.0, 2.0, 4.0],
            trials: 20,
            seed: 1,
            channel: ChannelModel::Awgn,
            output: PathBuf::from("results/trials.csv"),
            trace_dir: None,
            timing: false,
            sidecar_fallback: true,
            sidecar_timeout_ms: 30_000,
            sidecar_max_in_flight: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Scheme {
    Gencom(GencomScheme),
    Baseline(BaselineScheme),
}

impl Scheme {
    pub fn id(&self) -> &str {
        match self {
            Scheme::Gencom(s) => &s.id,
            Scheme::Baseline(s) => &s.id,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scheme::Gencom(_) => "gencom",
            Scheme::Baseline(_) => "baseline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerSetting {
    Named(PowerName),
    Weights(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerName {
    /// MSB-weighted default profile.
    Importance,
    Uniform,
}

impl PowerSetting {
    pub fn profile(&self) -> Result<Option<PowerProfile>, gencom_core::Error> {
        match self {
            PowerSetting::Named(PowerName::Uniform) => Ok(None),
            PowerSetting::Named(PowerName::Importance) => Ok(Some(PowerProfile::default())),
            PowerSetting::Weights(w) => PowerProfile::new(w.clone()).map(Some),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderId {
    Inpaint,
    Upsample,
    External,
}

impl DecoderId {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderId::Inpaint => "inpaint",
            DecoderId::Upsample => "upsample",
            DecoderId::External => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GencomScheme {
    pub id: String,
    #[serde(default = "default_block_size")]
    pub block_size: usize,
    #[serde(default = "default_reconstruction")]
    pub reconstruction: Reconstruction,
    #[serde(default = "default_code")]
    pub code: CodeSpec,
    #[serde(default = "default_interleaver")]
    pub interleaver: InterleaverSpec,
    #[serde(default = "default_power")]
    pub power: PowerSetting,
    #[serde(default = "single_shot")]
    pub harq: HarqPolicy,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderId,
    /// Id of a baseline scheme whose channel-bit budget is filled with
    /// repetition (`k = floor(budget / payload)`), per image.
    #[serde(default)]
    pub match_bandwidth: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineScheme {
    pub id: String,
    #[serde(default = "default_quality")]
    pub quality: u8,
    #[serde(default = "default_ldpc_n")]
    pub ldpc_n: usize,
    /// CRC-triggered HARQ rounds; 1 is single-shot.
    #[serde(default = "one")]
    pub max_rounds: usize,
}

fn default_block_size() -> usize {
    8
}
fn default_reconstruction() -> Reconstruction {
    Reconstruction::Bilinear
}
fn default_code() -> CodeSpec {
    CodeSpec::Uncoded
}
fn default_interleaver() -> InterleaverSpec {
    InterleaverSpec::None
}
fn default_power() -> PowerSetting {
    PowerSetting::Named(PowerName::Importance)
}
fn single_shot() -> HarqPolicy {
    HarqPolicy {
        max_rounds: 1,
        ..HarqPolicy::default()
    }
}
fn default_decoder() -> DecoderId {
    DecoderId::Inpaint
}
fn default_quality() -> u8 {
    75
}
fn default_ldpc_n() -> usize {
    1024
}
fn one() -> usize {
    1
}

impl GencomScheme {
    pub fn lpf(&self) -> Result<LpfConfig, gencom_core::Error> {
        LpfConfig::new(self.block_size, self.reconstruction)
    }
}

impl BaselineScheme {
    pub fn dct(&self) -> Result<DctConfig, gencom_core::Error> {
        DctConfig::new(self.quality)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let e = &self.experiment;
        if e.images.is_empty() {
            return Err(invalid("experiment.images", "at least one image is required"));
        }
        if e.snr_db.is_empty() {
            return Err(invalid("experiment.snr_db", "at least one SNR point is required"));
        }
        if let Some(i) = e.snr_db.iter().position(|s| !s.is_finite()) {
            return Err(invalid(format!("experiment.snr_db[{i}]"), "must be finite"));
        }
        if e.trials == 0 {
            return Err(invalid("experiment.trials", "must be at least 1"));
        }
        if e.sidecar_max_in_flight == 0 {
            return Err(invalid("experiment.sidecar_max_in_flight", "must be at least 1"));
        }
        if let ChannelModel::RayleighBlock { block_len: 0 } = e.channel {
            return Err(invalid("experiment.channel.rayleigh_block.block_len", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("scheme", "at least one [[scheme]] is required"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, scheme) in self.schemes.iter().enumerate() {
            let at = |f: &str| format!("scheme[{i}].{f}");
            if scheme.id().is_empty() || !scheme.id().chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
                return Err(invalid(at("id"), "must be non-empty and use [A-Za-z0-9_.-]"));
            }
            if !seen.insert(scheme.id()) {
                return Err(invalid(at("id"), format!("duplicate scheme id {:?}", scheme.id())));
            }
            match scheme {
                Scheme::Gencom(g) => {
                    g.lpf().map_err(|err| invalid(at("block_size"), err.to_string()))?;
                    g.code.validate().map_err(|err| invalid(at("code"), err.to_string()))?;
                    g.power.profile().map_err(|err| invalid(at("power"), err.to_string()))?;
                    g.harq.validate().map_err(|err| invalid(at("harq"), err.to_string()))?;
                    if let Some(target) = &g.match_bandwidth {
                        let ok = self
                            .schemes
                            .iter()
                            .any(|s| matches!(s, Scheme::Baseline(b) if &b.id == target));
                        if !ok {
                            return Err(invalid(
                                at("match_bandwidth"),
                                format!("no baseline scheme with id {target:?}"),
                            ));
                        }
                        if !matches!(g.code, CodeSpec::Uncoded | CodeSpec::Repetition { .. }) {
                            return Err(invalid(at("code"), "match_bandwidth needs an uncoded or repetition code"));
                        }
                        if g.harq.kind == HarqKind::CrcBased {
                            return Err(invalid(at("harq.kind"), "match_bandwidth is single-payload only"));
                        }
                    }
                    if let InterleaverSpec::Block { rows, cols } = g.interleaver {
                        if rows == 0 || cols == 0 {
                            return Err(invalid(at("interleaver"), "block rows and cols must be positive"));
                        }
                    }
                }
                Scheme::Baseline(b) => {
                    b.dct().map_err(|err| invalid(at("quality"), err.to_string()))?;
                    CodeSpec::Ldpc { n: b.ldpc_n }
                        .validate()
                        .map_err(|err| invalid(at("ldpc_n"), err.to_string()))?;
                    if b.max_rounds == 0 {
                        return Err(invalid(at("max_rounds"), "must be at least 1"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn summary_path(&self) -> PathBuf {
        summary_path_for(&self.experiment.output)
    }
}

pub fn summary_path_for(output: &Path) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("trials");
    output.with_file_name(format!("{stem}.summary.csv"))
}

/// Parses `a:b:step` into the inclusive list `a, a+step, …, ≤ b`.
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || invalid("--snr", format!("expected a:b:step, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let (a, b, step) = (nums[0], nums[1], nums[2]);
    if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(invalid("--snr", "need finite a ≤ b and step > 0"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| {
        let v = a + step * i as f64;
        // Trim representation noise such as 0.30000000000000004.
        (v * 1e9).round() / 1e9
    }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[experiment]
name = "t"
images = ["builtin:hills"]
snr_db = [-2.0, 0.0]
trials = 3
seed = 9

[[scheme]]
id = "g"
kind = "gencom"
block_size = 4
code = "repetition:3"
power = [4.0, 1.0]
decoder = "upsample"
harq = { kind = "semantic_aware", max_rounds = 3, tau = 0.1 }

[[scheme]]
id = "b"
kind = "baseline"
"#;

    #[test]
    fn parses_and_defaults() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.schemes.len(), 2);
        let Scheme::Gencom(g) = &cfg.schemes[0] else { panic!() };
        assert_eq!(g.code, CodeSpec::Repetition { k: 3 });
        assert_eq!(g.harq.max_rounds, 3);
        assert_eq!(g.harq.ladder.len(), 2);
        assert_eq!(g.reconstruction, Reconstruction::Bilinear);
        let Scheme::Baseline(b) = &cfg.schemes[1] else { panic!() };
        assert_eq!((b.quality, b.ldpc_n, b.max_rounds), (75, 1024, 1));
        assert!(!cfg.experiment.timing);
    }

    #[test]
    fn round_trips_losslessly() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_fail() {
        let text = SAMPLE.replace("trials = 3", "trials = 3\ntrails = 4");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Parse(_))));
        let text = SAMPLE.replace("block_size = 4", "block_size = 4\nblock = 2");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn invalid_fields_are_named() {
        let text = SAMPLE.replace("block_size = 4", "block_size = 0");
        match ExperimentConfig::from_toml(&text) {
            Err(ConfigError::Invalid { field, .. }) => assert_eq!(field, "scheme[0].block_size"),
            other => panic!("{other:?}"),
        }
        let text = SAMPLE.replace("trials = 3", "trials = 0");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Invalid { field, .. }) if field == "experiment.trials"));
        let text = SAMPLE.replace("id = \"b\"", "id = \"g\"");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Invalid { field, .. }) if field == "scheme[1].id"));
        let text = SAMPLE.replace("decoder = \"upsample\"", "decoder = \"upsample\"\nmatch_bandwidth = \"nope\"");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(ConfigError::Invalid { field, .. }) if field == "scheme[0].match_bandwidth"));
        let text = SAMPLE.replace("code = \"repetition:3\"", "code = \"ldpc:13\"");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn snr_ranges() {
        assert_eq!(parse_snr_range("-6:0:1").unwrap(), vec![-6.0, -5.0, -4.0, -3.0, -2.0, -1.0, 0.0]);
        assert_eq!(parse_snr_range("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_snr_range("0:0.9:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert!(parse_snr_range("0:1").is_err());
        assert!(parse_snr_range("1:0:1").is_err());
        assert!(parse_snr_range("0:1:0").is_err());
    }

    #[test]
    fn summary_path() {
        assert_eq!(summary_path_for(Path::new("out/x.csv")), PathBuf::from("out/x.summary.csv"));
    }
}
