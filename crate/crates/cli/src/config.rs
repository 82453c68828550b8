//! Run configuration: the TOML-serializable mirror of the CLI flags, with
//! file values overridden by anything given on the command line. Unknown
//! keys are rejected.

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TrustArg {
    Trusted,
    Untrusted,
}

impl From<TrustArg> for mmqkd_core::Trust {
    fn from(t: TrustArg) -> Self {
        match t {
            TrustArg::Trusted => mmqkd_core::Trust::Trusted,
            TrustArg::Untrusted => mmqkd_core::Trust::Untrusted,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum AttackArg {
    Individual,
    Collective,
}

impl From<AttackArg> for mmqkd_core::Attack {
    fn from(a: AttackArg) -> Self {
        match a {
            AttackArg::Individual => mmqkd_core::Attack::Individual,
            AttackArg::Collective => mmqkd_core::Attack::Collective,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AxisArg {
    Distance,
    Transmittance,
    ExcessNoise,
    Variance,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub modes: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    pub alice_weights: Option<Vec<f64>>,
    pub bob_weights: Option<Vec<f64>>,
    pub weights_squared: bool,
    pub transmittance: Option<f64>,
    pub distance_km: Option<f64>,
    pub excess_noise: Option<f64>,
    pub attack: Option<AttackArg>,
    pub trust: Option<TrustArg>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub out: Option<String>,
    pub json: bool,
    pub clamp: bool,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub axis: Option<AxisArg>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub mode: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ContourConfig {
    pub eps_list: Option<Vec<f64>>,
    pub v2_from: Option<f64>,
    pub v2_to: Option<f64>,
    pub v2_steps: Option<usize>,
    pub v1_max: Option<f64>,
    pub k_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Table1Config {
    /// Groupings like `"0|1,2"`: groups separated by `|`, mode indices by
    /// `,`. Defaults to full knowledge, merge-all-but-first, and ignorant.
    pub groupings: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CompareKnowledgeConfig {
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub steps: Option<usize>,
    pub groupings: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub mean: Option<f64>,
    pub spread: Option<f64>,
    pub spread_is_std: bool,
    pub n_modes: Option<usize>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
}

/// Complete serialized run: scenario plus per-command sections plus output
/// options. A config emitted by `--dump-config` re-ingests to an identical
/// run.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
    pub contour: Option<ContourConfig>,
    pub table1: Option<Table1Config>,
    pub compare_knowledge: Option<CompareKnowledgeConfig>,
    pub montecarlo: Option<MonteCarloConfig>,
}

impl RunConfig {
    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {path}: {e}")))?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("config {path}: {e}")))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self)
            .map_err(|e| CliError::Numerical(format!("config serialization: {e}")))
    }
}

fn merge_opt<T: Clone>(base: &mut Option<T>, over: &Option<T>) {
    if over.is_some() {
        *base = over.clone();
    }
}

impl ScenarioConfig {
    pub fn merge_flags(&mut self, flags: &ScenarioConfig) {
        merge_opt(&mut self.modes, &flags.modes);
        merge_opt(&mut self.weights, &flags.weights);
        merge_opt(&mut self.alice_weights, &flags.alice_weights);
        merge_opt(&mut self.bob_weights, &flags.bob_weights);
        if flags.weights_squared {
            self.weights_squared = true;
        }
        merge_opt(&mut self.transmittance, &flags.transmittance);
        merge_opt(&mut self.distance_km, &flags.distance_km);
        merge_opt(&mut self.excess_noise, &flags.excess_noise);
        merge_opt(&mut self.attack, &flags.attack);
        merge_opt(&mut self.trust, &flags.trust);
        merge_opt(&mut self.beta, &flags.beta);
    }

    /// Effective transmittance, with flags validated: exactly one of
    /// transmittance and distance may be given.
    pub fn effective_transmittance(&self) -> Result<f64, CliError> {
        match (self.transmittance, self.distance_km) {
            (Some(_), Some(_)) => Err(CliError::Validation(
                "give either transmittance (--T) or --distance-km, not both".into(),
            )),
            (Some(t), None) => Ok(t),
            (None, Some(d)) => Ok(mmqkd_core::transmittance_from_distance_km(d)),
            (None, None) => Err(CliError::Validation(
                "missing channel: give --T or --distance-km (or a config file)".into(),
            )),
        }
    }

    fn weight_list(
        &self,
        given: &Option<Vec<f64>>,
        n: usize,
    ) -> Result<mmqkd_core::DetectionWeights, CliError> {
        let build = |vals: &[f64]| {
            if self.weights_squared {
                mmqkd_core::DetectionWeights::from_squared(vals)
            } else {
                mmqkd_core::DetectionWeights::from_gains(vals)
            }
        };
        match given {
            Some(vals) => build(vals).map_err(|e| CliError::Validation(e.to_string())),
            None => Ok(mmqkd_core::DetectionWeights::balanced(n)),
        }
    }

    /// Builds the core scenario; all validation errors map to exit code 2.
    pub fn build(&self) -> Result<mmqkd_core::Scenario, CliError> {
        let modes = self
            .modes
            .clone()
            .ok_or_else(|| CliError::Validation("missing --modes (per-mode variances)".into()))?;
        let n = modes.len();
        let source =
            mmqkd_core::SourceSpec::new(modes).map_err(|e| CliError::Validation(e.to_string()))?;
        let shared = self.weight_list(&self.weights, n)?;
        let alice = match &self.alice_weights {
            Some(_) => self.weight_list(&self.alice_weights, n)?,
            None => shared.clone(),
        };
        let bob = match &self.bob_weights {
            Some(_) => self.weight_list(&self.bob_weights, n)?,
            None => shared,
        };
        let t = self.effective_transmittance()?;
        let channel = mmqkd_core::ChannelSpec::new(t, self.excess_noise.unwrap_or(0.0))
            .map_err(|e| CliError::Validation(e.to_string()))?;
        mmqkd_core::Scenario::new(
            source,
            alice,
            bob,
            channel,
            self.trust.unwrap_or(TrustArg::Untrusted).into(),
            self.attack.unwrap_or(AttackArg::Collective).into(),
            self.beta.unwrap_or(1.0),
        )
        .map_err(|e| CliError::Validation(e.to_string()))
    }
}

/// Parses a grouping string like `"0|1,2"` into index groups.
pub fn parse_grouping(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    text.split('|')
        .map(|group| {
            group
                .split(',')
                .map(|idx| {
                    idx.trim()
                        .parse::<usize>()
                        .map_err(|e| CliError::Validation(format!("grouping '{text}': {e}")))
                })
                .collect()
        })
        .collect()
}
