//! The TOML settings file shared by all subcommands.
//!
//! ```toml
//! seed = 7
//!
//! [sampling]
//! stop_prob = 0.05
//!
//! [verify]
//! epsilon = 0.0005
//! gamma = 0.0005
//! timeout_secs = 600
//!
//! [faulty_flow]
//! enabled = true
//! threshold = 20
//!
//! [bench]
//! count = 30
//! ```

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::generate::BenchConfig;
use super::BenchError;
use crate::faultyflow::FlowConfig;
use crate::lstar::{DEFAULT_MAX_QUERIES, DEFAULT_MAX_STATES};
use crate::sampling::{WordDistribution, DEFAULT_MAX_LEN, DEFAULT_STOP_PROB};
use crate::verify::{
    Budgets, EqSchedule, SmcBound, VerifyError, VerifyParams, DEFAULT_MAX_ROUNDS, DEFAULT_TIMEOUT,
};

pub const DEFAULT_EPSILON: f64 = 5e-4;
pub const DEFAULT_GAMMA: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSettings {
    pub stop_prob: f64,
    pub max_len: usize,
}

impl Default for SamplingSettings {
    fn default() -> Self {
        Self {
            stop_prob: DEFAULT_STOP_PROB,
            max_len: DEFAULT_MAX_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub epsilon: f64,
    pub gamma: f64,
    pub smc_bound: SmcBound,
    pub eq_schedule: EqSchedule,
    pub max_queries: u64,
    pub max_rounds: u64,
    pub timeout_secs: f64,
    pub max_states: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            gamma: DEFAULT_GAMMA,
            smc_bound: SmcBound::default(),
            eq_schedule: EqSchedule::default(),
            max_queries: DEFAULT_MAX_QUERIES,
            max_rounds: DEFAULT_MAX_ROUNDS,
            timeout_secs: DEFAULT_TIMEOUT.as_secs_f64(),
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultyFlowSettings {
    pub enabled: bool,
    pub pump_max: u64,
    pub threshold: u64,
    pub max_loop_len: usize,
    pub max_loops: usize,
    pub exhaustive: bool,
}

impl Default for FaultyFlowSettings {
    fn default() -> Self {
        let f = FlowConfig::default();
        Self {
            enabled: false,
            pump_max: f.pump_max,
            threshold: f.threshold,
            max_loop_len: f.max_loop_len,
            max_loops: f.max_loops,
            exhaustive: f.exhaustive,
        }
    }
}

impl FaultyFlowSettings {
    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            pump_max: self.pump_max,
            threshold: self.threshold,
            max_loop_len: self.max_loop_len,
            max_loops: self.max_loops,
            exhaustive: self.exhaustive,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    pub sampling: SamplingSettings,
    pub verify: VerifySettings,
    pub faulty_flow: FaultyFlowSettings,
    pub bench: BenchConfig,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        toml::from_str(text).map_err(|e| BenchError::Invalid(format!("config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Verification parameters for a uniform distribution over `letters`.
    pub fn verify_params(&self, letters: usize, seed: u64) -> Result<VerifyParams, VerifyError> {
        let v = &self.verify;
        let distribution = WordDistribution::uniform(letters, self.sampling.stop_prob)
            .and_then(|d| d.with_max_len(self.sampling.max_len))
            .map_err(|e| VerifyError::Parameter(e.to_string()))?;
        let wall_clock = Duration::try_from_secs_f64(v.timeout_secs)
            .map_err(|e| VerifyError::Parameter(format!("timeout_secs: {e}")))?;
        Ok(VerifyParams {
            epsilon: v.epsilon,
            gamma: v.gamma,
            distribution,
            seed,
            smc_bound: v.smc_bound,
            eq_schedule: v.eq_schedule,
            budgets: Budgets {
                max_queries: v.max_queries,
                max_rounds: v.max_rounds,
                wall_clock,
                max_states: v.max_states,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        assert_eq!(Settings::parse("").unwrap(), Settings::default());
    }

    #[test]
    fn documented_example_parses() {
        let s = Settings::parse(
            "seed = 7\n[sampling]\nstop_prob = 0.1\n[verify]\nepsilon = 0.01\n\
             smc_bound = \"hoeffding\"\neq_schedule = \"fixed\"\ntimeout_secs = 2.5\n\
             [faulty_flow]\nenabled = true\nthreshold = 3\n\
             [bench]\ncount = 2\nspec_mode = \"all-rejecting\"\n[bench.fault]\nloop_max = 3\n",
        )
        .unwrap();
        assert_eq!(s.seed, Some(7));
        assert_eq!(s.bench.count, 2);
        assert_eq!(s.bench.fault.unwrap().loop_max, 3);
        assert!(s.faulty_flow.enabled);
        let p = s.verify_params(3, 1).unwrap();
        assert_eq!(p.epsilon, 0.01);
        assert_eq!(p.gamma, DEFAULT_GAMMA);
        assert_eq!(p.smc_bound, SmcBound::Hoeffding);
        assert_eq!(p.budgets.wall_clock, Duration::from_millis(2500));
        assert_eq!(p.distribution.stop_prob(), 0.1);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Settings::parse("[verify]\nepsilom = 0.1\n").is_err());
    }
}
