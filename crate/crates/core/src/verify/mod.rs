//! Checking `L(oracle) ⊆ L(spec)` for a black-box oracle.
//!
//! Three procedures share one result type:
//!
//! * [`smc_check`] samples words and looks for a spec violation directly;
//! * [`aamc`] first extracts an automaton with PAC-style L*, then model
//!   checks the extracted automaton once;
//! * [`pdv`] interleaves the two: every L* hypothesis is model checked
//!   against the spec, candidate violations are confirmed on the oracle or
//!   fed back as refinements, and only hypotheses inside the spec are
//!   compared with the oracle by sampling.
//!
//! A returned counterexample is always re-checked on the oracle and the spec
//! immediately before it is handed out.

mod learned;
mod smc;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{AutomataError, Dfa, Word};
use crate::lstar::{Budget, LstarError, DEFAULT_MAX_QUERIES, DEFAULT_MAX_STATES};
use crate::oracle::{LanguageOracle, OracleError};
use crate::sampling::{WordDistribution, WordSampler, DEFAULT_STOP_PROB};

pub use learned::{aamc, pdv};
pub use smc::{sampled_equivalence, smc_check, smc_inclusion, smc_sample_count};

pub const DEFAULT_MAX_ROUNDS: u64 = 200;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(600);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("oracle, specification and distribution disagree on the alphabet")]
    AlphabetMismatch,
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Smc,
    Aamc,
    Pdv,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Smc => "SMC",
            Algorithm::Aamc => "AAMC",
            Algorithm::Pdv => "PDV",
        }
    }
}

/// Which sample-count formula the pure sampling check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmcBound {
    /// `⌈ln(2/ε) / (2γ²)⌉`
    #[default]
    Paper,
    /// `⌈ln(2/γ) / (2ε²)⌉`
    Hoeffding,
}

/// Sample counts for the sampled checks inside AAMC and PDV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqSchedule {
    /// Grows with the number of completed rounds, see
    /// [`pac_sample_count`](crate::lstar::pac_sample_count).
    #[default]
    Pac,
    /// The fixed [`smc_sample_count`] every round.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub max_queries: u64,
    pub max_rounds: u64,
    #[serde(with = "secs")]
    pub wall_clock: Duration,
    pub max_states: usize,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_queries: DEFAULT_MAX_QUERIES,
            max_rounds: DEFAULT_MAX_ROUNDS,
            wall_clock: DEFAULT_TIMEOUT,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

impl Budgets {
    fn learner(&self) -> Budget {
        Budget {
            max_queries: self.max_queries,
            max_states: self.max_states,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub epsilon: f64,
    pub gamma: f64,
    pub distribution: WordDistribution,
    pub seed: u64,
    pub smc_bound: SmcBound,
    pub eq_schedule: EqSchedule,
    pub budgets: Budgets,
}

impl VerifyParams {
    /// Uniform letters with the default termination probability.
    pub fn new(letters: usize, epsilon: f64, gamma: f64, seed: u64) -> Result<Self, VerifyError> {
        let distribution = WordDistribution::uniform(letters, DEFAULT_STOP_PROB)
            .map_err(|e| VerifyError::Parameter(e.to_string()))?;
        Ok(Self {
            epsilon,
            gamma,
            distribution,
            seed,
            smc_bound: SmcBound::default(),
            eq_schedule: EqSchedule::default(),
            budgets: Budgets::default(),
        })
    }

    fn validate(&self, oracle: &dyn LanguageOracle, spec: &Dfa) -> Result<(), VerifyError> {
        for (name, v) in [("epsilon", self.epsilon), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(VerifyError::Parameter(format!("{name} = {v} not in (0, 1)")));
            }
        }
        if oracle.alphabet() != spec.alphabet()
            || self.distribution.letters() != spec.alphabet().len()
        {
            return Err(VerifyError::AlphabetMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExhaustionReason {
    MembershipQueries,
    Rounds,
    WallClock,
    HypothesisSize,
    /// The extracted automaton violated the spec only on a word the oracle
    /// rejects.
    SpuriousCounterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    CounterexampleFound { word: Word, confirmed: bool },
    PropertySatisfied { epsilon: f64, gamma: f64 },
    BudgetExhausted { reason: ExhaustionReason },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub wall_time_secs: f64,
    pub membership_queries: u64,
    pub eq_rounds: u64,
    pub refinements: u64,
    pub hypothesis_sizes: Vec<usize>,
    pub sampled_words: u64,
    pub truncated_words: u64,
    pub spurious_counterexamples: u64,
    pub counterexample_length: Option<usize>,
}

impl RunStats {
    pub fn final_hypothesis_size(&self) -> Option<usize> {
        self.hypothesis_sizes.last().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub stats: RunStats,
    /// Last hypothesis of AAMC/PDV.
    pub hypothesis: Option<Dfa>,
}

impl Verdict {
    pub fn counterexample(&self) -> Option<&Word> {
        match &self.outcome {
            Outcome::CounterexampleFound { word, .. } => Some(word),
            _ => None,
        }
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self.outcome, Outcome::PropertySatisfied { .. })
    }

    /// Outcome and statistics with the wall time zeroed, for comparing runs.
    pub fn deterministic_view(&self) -> (Outcome, RunStats) {
        let mut stats = self.stats.clone();
        stats.wall_time_secs = 0.0;
        (self.outcome.clone(), stats)
    }
}

/// Runs one of the three algorithms.
pub fn run(
    algorithm: Algorithm,
    oracle: &dyn LanguageOracle,
    spec: &Dfa,
    params: &VerifyParams,
) -> Result<Verdict, VerifyError> {
    match algorithm {
        Algorithm::Smc => smc_check(oracle, spec, params),
        Algorithm::Aamc => aamc(oracle, spec, params),
        Algorithm::Pdv => pdv(oracle, spec, params),
    }
}

/// Bookkeeping shared by the three algorithms.
struct Run<'a> {
    oracle: &'a dyn LanguageOracle,
    started: Instant,
    deadline: Duration,
    baseline: u64,
    sampler: WordSampler,
    stats: RunStats,
}

enum Interrupt {
    Exhausted(ExhaustionReason),
    Failed(VerifyError),
}

impl From<VerifyError> for Interrupt {
    fn from(e: VerifyError) -> Self {
        Interrupt::Failed(e)
    }
}

impl From<OracleError> for Interrupt {
    fn from(e: OracleError) -> Self {
        Interrupt::Failed(e.into())
    }
}

impl From<AutomataError> for Interrupt {
    fn from(e: AutomataError) -> Self {
        Interrupt::Failed(e.into())
    }
}

impl From<LstarError> for Interrupt {
    fn from(e: LstarError) -> Self {
        match e {
            LstarError::QueryBudget(_) => Interrupt::Exhausted(ExhaustionReason::MembershipQueries),
            LstarError::StateBudget(_) => Interrupt::Exhausted(ExhaustionReason::HypothesisSize),
            LstarError::Oracle(e) => Interrupt::Failed(e.into()),
            other => Interrupt::Failed(VerifyError::Internal(other.to_string())),
        }
    }
}

impl<'a> Run<'a> {
    fn start(oracle: &'a dyn LanguageOracle, params: &VerifyParams) -> Self {
        Self {
            oracle,
            started: Instant::now(),
            deadline: params.budgets.wall_clock,
            baseline: oracle.queries(),
            sampler: WordSampler::new(params.distribution.clone(), params.seed),
            stats: RunStats::default(),
        }
    }

    fn check_clock(&self) -> Result<(), Interrupt> {
        if self.started.elapsed() >= self.deadline {
            Err(Interrupt::Exhausted(ExhaustionReason::WallClock))
        } else {
            Ok(())
        }
    }

    /// Re-checks a counterexample and closes the run with it.
    fn confirmed(
        mut self,
        spec: &Dfa,
        word: Word,
        hypothesis: Option<Dfa>,
    ) -> Result<Verdict, VerifyError> {
        let accepted = self.oracle.membership(&word)?;
        let in_spec = spec.accepts(&word)?;
        if !accepted || in_spec {
            return Err(VerifyError::Internal(format!(
                "counterexample {word:?} failed re-check (oracle {accepted}, spec {in_spec})"
            )));
        }
        self.stats.counterexample_length = Some(word.len());
        Ok(self.finish(
            Outcome::CounterexampleFound {
                word,
                confirmed: true,
            },
            hypothesis,
        ))
    }

    fn finish(mut self, outcome: Outcome, hypothesis: Option<Dfa>) -> Verdict {
        self.stats.membership_queries = self.oracle.queries() - self.baseline;
        self.stats.sampled_words = self.sampler.sampled();
        self.stats.truncated_words = self.sampler.truncated();
        self.stats.wall_time_secs = self.started.elapsed().as_secs_f64();
        Verdict {
            outcome,
            stats: self.stats,
            hypothesis,
        }
    }

    fn interrupted(self, interrupt: Interrupt, hypothesis: Option<Dfa>) -> Result<Verdict, VerifyError> {
        match interrupt {
            Interrupt::Exhausted(reason) => {
                Ok(self.finish(Outcome::BudgetExhausted { reason }, hypothesis))
            }
            Interrupt::Failed(e) => Err(e),
        }
    }
}
