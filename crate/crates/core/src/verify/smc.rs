use crate::automata::{Dfa, Inclusion, Word};
use crate::oracle::LanguageOracle;
use crate::sampling::WordSampler;

use super::{Interrupt, Outcome, Run, SmcBound, Verdict, VerifyError, VerifyParams};

const CLOCK_STRIDE: u64 = 4096;

/// Number of samples drawn by [`smc_check`].
pub fn smc_sample_count(epsilon: f64, gamma: f64, bound: SmcBound) -> Result<u64, VerifyError> {
    for (name, v) in [("epsilon", epsilon), ("gamma", gamma)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(VerifyError::Parameter(format!("{name} = {v} not in (0, 1)")));
        }
    }
    let n = match bound {
        SmcBound::Paper => (2.0 / epsilon).ln() / (2.0 * gamma * gamma),
        SmcBound::Hoeffding => (2.0 / gamma).ln() / (2.0 * epsilon * epsilon),
    };
    Ok(n.ceil() as u64)
}

/// Draws up to `n` words and returns the first one satisfying `hit`.
pub(super) fn search(
    run: &mut Run<'_>,
    n: u64,
    mut hit: impl FnMut(&Word) -> Result<bool, Interrupt>,
) -> Result<Option<Word>, Interrupt> {
    for i in 0..n {
        if i % CLOCK_STRIDE == 0 {
            run.check_clock()?;
        }
        let w = run.sampler.sample_word();
        if hit(&w)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Sampled check of `L(oracle) ⊆ L(hyp)`: the first of `n` words accepted
/// by the oracle and rejected by `hyp`.
pub fn smc_inclusion(
    oracle: &dyn LanguageOracle,
    hyp: &Dfa,
    sampler: &mut WordSampler,
    n: u64,
) -> Result<Inclusion, VerifyError> {
    for _ in 0..n {
        let w = sampler.sample_word();
        if oracle.membership(&w)? && !hyp.accepts(&w)? {
            return Ok(Inclusion::Counterexample(w));
        }
    }
    Ok(Inclusion::Holds)
}

/// The first of `n` sampled words on which `oracle` and `hyp` disagree.
pub fn sampled_equivalence(
    oracle: &dyn LanguageOracle,
    hyp: &Dfa,
    sampler: &mut WordSampler,
    n: u64,
) -> Result<Option<Word>, VerifyError> {
    for _ in 0..n {
        let w = sampler.sample_word();
        if oracle.membership(&w)? != hyp.accepts(&w)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Statistical model checking: sample words, query each, and report the
/// first one the oracle accepts outside the spec.
///
/// Only the wall-clock budget applies; the sample count is the algorithm's
/// own bound.
pub fn smc_check(
    oracle: &dyn LanguageOracle,
    spec: &Dfa,
    params: &VerifyParams,
) -> Result<Verdict, VerifyError> {
    params.validate(oracle, spec)?;
    let n = smc_sample_count(params.epsilon, params.gamma, params.smc_bound)?;
    let mut run = Run::start(oracle, params);
    let found = search(&mut run, n, |w| {
        Ok(oracle.membership(w)? && !spec.accepts(w)?)
    });
    match found {
        Ok(Some(w)) => run.confirmed(spec, w, None),
        Ok(None) => Ok(run.finish(
            Outcome::PropertySatisfied {
                epsilon: params.epsilon,
                gamma: params.gamma,
            },
            None,
        )),
        Err(i) => run.interrupted(i, None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{Alphabet, Dfa};
    use crate::oracle::DfaOracle;
    use crate::sampling::WordDistribution;
    use crate::verify::{ExhaustionReason, Outcome};
    use std::time::Duration;

    #[test]
    fn sample_counts() {
        assert_eq!(smc_sample_count(5e-4, 5e-4, SmcBound::Paper).unwrap(), 16_588_100);
        assert_eq!(smc_sample_count(0.05, 0.05, SmcBound::Paper).unwrap(), 738);
        // (ln 2 − ln 0.01) / (2 · 0.1²) = 264.9…
        assert_eq!(smc_sample_count(0.1, 0.01, SmcBound::Hoeffding).unwrap(), 265);
        // same inputs, the other formula: ln(20) / (2 · 0.01²) = 14978.6…
        assert_eq!(smc_sample_count(0.1, 0.01, SmcBound::Paper).unwrap(), 14979);
        assert!(smc_sample_count(0.0, 0.1, SmcBound::Paper).is_err());
        assert!(smc_sample_count(0.1, 1.0, SmcBound::Paper).is_err());
    }

    fn contains_b() -> Dfa {
        crate::automata::tests::contains(1)
    }

    #[test]
    fn finds_frequent_violation() {
        // oracle accepts everything, spec forbids words with a 'b'
        let sigma = Alphabet::latin(2).unwrap();
        let oracle = DfaOracle::new(Dfa::constant(sigma.clone(), true));
        let spec = contains_b().complement();
        let params = VerifyParams::new(2, 0.01, 0.01, 7).unwrap();
        let v = smc_check(&oracle, &spec, &params).unwrap();
        let w = v.counterexample().expect("violation");
        assert!(w.contains(&1));
        // every sample is one query, plus the re-check
        assert_eq!(v.stats.membership_queries, v.stats.sampled_words + 1);
        assert_eq!(v.stats.counterexample_length, Some(w.len()));
    }

    #[test]
    fn satisfied_uses_full_sample() {
        let sigma = Alphabet::latin(2).unwrap();
        let oracle = DfaOracle::new(contains_b());
        let spec = Dfa::constant(sigma, true);
        let params = VerifyParams::new(2, 0.05, 0.05, 1).unwrap();
        let v = smc_check(&oracle, &spec, &params).unwrap();
        assert!(v.is_satisfied());
        assert_eq!(v.stats.sampled_words, 738);
        assert_eq!(v.stats.membership_queries, 738);
    }

    #[test]
    fn deterministic_per_seed() {
        let sigma = Alphabet::latin(2).unwrap();
        let oracle = DfaOracle::new(Dfa::constant(sigma, true));
        let spec = contains_b().complement();
        let params = VerifyParams::new(2, 0.01, 0.01, 99).unwrap();
        let a = smc_check(&oracle, &spec, &params).unwrap();
        let b = smc_check(&oracle, &spec, &params).unwrap();
        assert_eq!(a.deterministic_view(), b.deterministic_view());
    }

    #[test]
    fn zero_clock_exhausts() {
        let sigma = Alphabet::latin(2).unwrap();
        let oracle = DfaOracle::new(Dfa::constant(sigma.clone(), true));
        let spec = Dfa::constant(sigma, true);
        let mut params = VerifyParams::new(2, 0.01, 0.01, 0).unwrap();
        params.budgets.wall_clock = Duration::ZERO;
        let v = smc_check(&oracle, &spec, &params).unwrap();
        assert_eq!(
            v.outcome,
            Outcome::BudgetExhausted {
                reason: ExhaustionReason::WallClock
            }
        );
    }

    #[test]
    fn alphabet_mismatch_rejected() {
        let oracle = DfaOracle::new(Dfa::constant(Alphabet::latin(2).unwrap(), true));
        let spec = Dfa::constant(Alphabet::latin(3).unwrap(), true);
        let params = VerifyParams::new(3, 0.1, 0.1, 0).unwrap();
        assert_eq!(smc_check(&oracle, &spec, &params), Err(VerifyError::AlphabetMismatch));
    }

    #[test]
    fn inclusion_and_equivalence_helpers() {
        let sigma = Alphabet::latin(2).unwrap();
        let oracle = DfaOracle::new(Dfa::constant(sigma.clone(), true));
        let hyp = contains_b();
        let dist = WordDistribution::uniform(2, 0.2).unwrap();
        let mut s = WordSampler::new(dist.clone(), 3);
        match smc_inclusion(&oracle, &hyp, &mut s, 1000).unwrap() {
            Inclusion::Counterexample(w) => assert!(!w.contains(&1)),
            Inclusion::Holds => panic!("ε and a* are outside the hypothesis"),
        }
        let mut s = WordSampler::new(dist, 3);
        let w = sampled_equivalence(&oracle, &oracle.dfa().clone(), &mut s, 1000).unwrap();
        assert_eq!(w, None);
    }
}
