//! Run configuration: a sectioned TOML file, overridable from the command
//! line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qhj_impulse::ensemble::{ErrorPolicy, MicrostateSource, SamplerParams};
use qhj_impulse::{ImpulseSpec, Microstate, WellModel};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub well: WellSection,
    pub microstate: MicrostateSection,
    pub impulse: ImpulseSection,
    pub ensemble: EnsembleSection,
    pub output: OutputSection,
    pub trajectory: TrajectorySection,
    pub perturb: PerturbSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WellSection {
    pub hbar: f64,
    pub mass: f64,
    pub q: f64,
}

impl Default for WellSection {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            q: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrostateSection {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for MicrostateSection {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, c: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpulseSection {
    pub force: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub time_weight: f64,
}

impl Default for ImpulseSection {
    fn default() -> Self {
        Self {
            force: 1.0,
            epsilon: 0.1,
            gamma: 0.0,
            time_weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicyName {
    #[default]
    Abort,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub n: u64,
    pub seed: u64,
    /// Size of a random microstate set; 0 uses `[microstate]`.
    pub random_microstates: usize,
    pub microstate_seed: u64,
    pub a_min: f64,
    pub a_max: f64,
    pub rho: f64,
    pub error_policy: ErrorPolicyName,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        let s = SamplerParams::default();
        Self {
            n: 100_000,
            seed: 42,
            random_microstates: 0,
            microstate_seed: 7,
            a_min: s.a_min,
            a_max: s.a_max,
            rho: s.rho,
            error_policy: ErrorPolicyName::Abort,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Per-sample ensemble CSV.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub tau0: f64,
    pub n_points: usize,
    pub n_cycles: f64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            tau0: 0.0,
            n_points: 201,
            n_cycles: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbSection {
    pub tau0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Band widths for `ensemble --sweep`; empty runs a single ensemble.
    pub epsilons: Vec<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn well_model(&self) -> Result<WellModel, CliError> {
        Ok(WellModel::new(self.well.hbar, self.well.mass, self.well.q)?)
    }

    pub fn microstate(&self) -> Result<Microstate, CliError> {
        let m = &self.microstate;
        Ok(Microstate::new(m.a, m.b, m.c)?)
    }

    pub fn impulse_spec(&self, well: &WellModel) -> Result<ImpulseSpec, CliError> {
        let i = &self.impulse;
        Ok(ImpulseSpec::new(i.force, i.epsilon, i.gamma, i.time_weight, well)?)
    }

    pub fn sampler(&self) -> SamplerParams {
        SamplerParams {
            a_min: self.ensemble.a_min,
            a_max: self.ensemble.a_max,
            rho: self.ensemble.rho,
        }
    }

    pub fn microstate_source(&self) -> Result<MicrostateSource, CliError> {
        if self.ensemble.random_microstates > 0 {
            let sampler = self.sampler();
            sampler.validate()?;
            Ok(MicrostateSource::RandomSet {
                seed: self.ensemble.microstate_seed,
                count: self.ensemble.random_microstates,
                sampler,
            })
        } else {
            Ok(MicrostateSource::Fixed(self.microstate()?))
        }
    }

    pub fn error_policy(&self) -> ErrorPolicy {
        match self.ensemble.error_policy {
            ErrorPolicyName::Abort => ErrorPolicy::Abort,
            ErrorPolicyName::Skip => ErrorPolicy::Skip,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        let text = c.to_toml();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::parse("[microstate]\na = 2.0\nb = 3.0\nc = 1.0\n").unwrap();
        assert_eq!(c.microstate.a, 2.0);
        assert_eq!(c.impulse, ImpulseSection::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            RunConfig::parse("[well]\nwidth = 2.0\n"),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn invalid_microstate_is_a_validation_error() {
        let c = RunConfig::parse("[microstate]\na = 1.0\nb = 1.0\nc = 2.0\n").unwrap();
        let e = c.microstate().unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
