use crate::automata::{Dfa, Inclusion, Word};
use crate::lstar::{pac_sample_count, Learner, LstarError};
use crate::oracle::LanguageOracle;

use super::smc::{search, smc_sample_count};
use super::{
    EqSchedule, ExhaustionReason, Interrupt, Outcome, Run, Verdict, VerifyError, VerifyParams,
};

type DynLearner<'o> = Learner<'o, dyn LanguageOracle + 'o>;

fn eq_samples(params: &VerifyParams, completed: u64) -> Result<u64, VerifyError> {
    match params.eq_schedule {
        EqSchedule::Pac => pac_sample_count(params.epsilon, params.gamma, completed).map_err(|e| match e {
            LstarError::Parameter(m) => VerifyError::Parameter(m),
            other => VerifyError::Internal(other.to_string()),
        }),
        EqSchedule::Fixed => smc_sample_count(params.epsilon, params.gamma, params.smc_bound),
    }
}

/// Builds the next hypothesis, enforcing the round and clock budgets.
fn next_hypothesis(
    run: &mut Run<'_>,
    learner: &mut DynLearner<'_>,
    params: &VerifyParams,
    last: &mut Option<Dfa>,
) -> Result<Dfa, Interrupt> {
    run.check_clock()?;
    if run.stats.hypothesis_sizes.len() as u64 >= params.budgets.max_rounds {
        return Err(Interrupt::Exhausted(ExhaustionReason::Rounds));
    }
    let h = learner.hypothesis()?.dfa;
    run.stats.hypothesis_sizes.push(h.states());
    *last = Some(h.clone());
    Ok(h)
}

fn refine(run: &mut Run<'_>, learner: &mut DynLearner<'_>, w: &Word) -> Result<(), Interrupt> {
    learner.refine(w)?;
    run.stats.refinements += 1;
    Ok(())
}

/// PAC L* with sampled equivalence queries, run to completion.
fn extract(
    run: &mut Run<'_>,
    learner: &mut DynLearner<'_>,
    params: &VerifyParams,
    last: &mut Option<Dfa>,
) -> Result<Dfa, Interrupt> {
    loop {
        let h = next_hypothesis(run, learner, params, last)?;
        let n = eq_samples(params, run.stats.eq_rounds)?;
        run.stats.eq_rounds += 1;
        let disagreement = search(run, n, |w| Ok(learner.membership(w)? != h.accepts(w)?))?;
        match disagreement {
            None => return Ok(h),
            Some(w) => refine(run, learner, &w)?,
        }
    }
}

/// Automaton abstraction and model checking: extract a DFA from the oracle
/// with PAC L*, then check the extracted DFA against `spec` once.
///
/// A witness the oracle rejects is spurious; the run then ends with
/// [`ExhaustionReason::SpuriousCounterexample`].
pub fn aamc(
    oracle: &dyn LanguageOracle,
    spec: &Dfa,
    params: &VerifyParams,
) -> Result<Verdict, VerifyError> {
    params.validate(oracle, spec)?;
    let mut run = Run::start(oracle, params);
    let mut learner: DynLearner<'_> = Learner::new(oracle, params.budgets.learner());
    let mut last = None;
    let extracted = match extract(&mut run, &mut learner, params, &mut last) {
        Ok(h) => h,
        Err(i) => return run.interrupted(i, last),
    };
    match extracted.check_inclusion(spec)? {
        Inclusion::Holds => Ok(run.finish(
            Outcome::PropertySatisfied {
                epsilon: params.epsilon,
                gamma: params.gamma,
            },
            Some(extracted),
        )),
        Inclusion::Counterexample(w) => match learner.membership(&w) {
            Ok(true) => run.confirmed(spec, w, Some(extracted)),
            Ok(false) => {
                run.stats.spurious_counterexamples += 1;
                Ok(run.finish(
                    Outcome::BudgetExhausted {
                        reason: ExhaustionReason::SpuriousCounterexample,
                    },
                    Some(extracted),
                ))
            }
            Err(e) => run.interrupted(e.into(), Some(extracted)),
        },
    }
}

enum PdvEnd {
    Counterexample(Word),
    Satisfied,
}

fn pdv_loop(
    run: &mut Run<'_>,
    learner: &mut DynLearner<'_>,
    spec: &Dfa,
    params: &VerifyParams,
    last: &mut Option<Dfa>,
) -> Result<PdvEnd, Interrupt> {
    loop {
        let h = next_hypothesis(run, learner, params, last)?;
        match h.check_inclusion(spec)? {
            Inclusion::Counterexample(w) => {
                if learner.membership(&w)? {
                    return Ok(PdvEnd::Counterexample(w));
                }
                run.stats.spurious_counterexamples += 1;
                refine(run, learner, &w)?;
            }
            Inclusion::Holds => {
                let n = eq_samples(params, run.stats.eq_rounds)?;
                run.stats.eq_rounds += 1;
                let found = search(run, n, |w| Ok(learner.membership(w)? && !h.accepts(w)?))?;
                match found {
                    None => return Ok(PdvEnd::Satisfied),
                    Some(w) => refine(run, learner, &w)?,
                }
            }
        }
    }
}

/// Property-directed verification: L* whose equivalence queries are
/// replaced by model checking each hypothesis against `spec` and, once a
/// hypothesis lies inside the spec, a sampled check that the oracle lies
/// inside the hypothesis.
pub fn pdv(
    oracle: &dyn LanguageOracle,
    spec: &Dfa,
    params: &VerifyParams,
) -> Result<Verdict, VerifyError> {
    params.validate(oracle, spec)?;
    let mut run = Run::start(oracle, params);
    let mut learner: DynLearner<'_> = Learner::new(oracle, params.budgets.learner());
    let mut last = None;
    match pdv_loop(&mut run, &mut learner, spec, params, &mut last) {
        Ok(PdvEnd::Counterexample(w)) => run.confirmed(spec, w, last),
        Ok(PdvEnd::Satisfied) => Ok(run.finish(
            Outcome::PropertySatisfied {
                epsilon: params.epsilon,
                gamma: params.gamma,
            },
            last,
        )),
        Err(i) => run.interrupted(i, last),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::tests::loop_example;
    use crate::automata::{derive_specs, random_dfa, Alphabet, SpecMode};
    use crate::oracle::{DfaOracle, FaultInjectedOracle};

    fn params(k: usize, seed: u64) -> VerifyParams {
        VerifyParams::new(k, 0.01, 0.01, seed).unwrap()
    }

    #[test]
    fn pdv_satisfied_on_derived_specs() {
        let sigma = Alphabet::latin(3).unwrap();
        for seed in 0..20 {
            let d = random_dfa(10, &sigma, seed);
            let minimal = d.minimize().states();
            let oracle = DfaOracle::new(d.clone());
            for spec in derive_specs(&d, 2, seed, SpecMode::RandomSubsets) {
                let v = pdv(&oracle, &spec, &params(3, seed)).unwrap();
                assert!(v.is_satisfied(), "seed {seed}: {:?}", v.outcome);
                let sizes = &v.stats.hypothesis_sizes;
                assert!(sizes.windows(2).all(|p| p[0] <= p[1]));
                assert!(*sizes.last().unwrap() <= minimal);
            }
        }
    }

    #[test]
    fn pdv_universal_spec_never_fails_inclusion() {
        let sigma = Alphabet::latin(2).unwrap();
        let d = random_dfa(8, &sigma, 5);
        let oracle = DfaOracle::new(d.clone());
        let spec = Dfa::constant(sigma, true);
        let v = pdv(&oracle, &spec, &params(2, 1)).unwrap();
        assert!(v.is_satisfied());
        assert_eq!(v.stats.spurious_counterexamples, 0);
        // each refinement came from a sampled round
        assert_eq!(v.stats.eq_rounds, v.stats.refinements + 1);
    }

    #[test]
    fn pdv_finds_loop_fault() {
        let sigma = Alphabet::latin(5).unwrap();
        let fault = Dfa::from_loop_pattern(sigma.clone(), &[], &[0, 1, 2, 4], &[4]).unwrap();
        let base = Dfa::constant(sigma.clone(), false);
        let spec = fault.complement();
        let oracle = FaultInjectedOracle::new(base, fault).unwrap();
        for seed in 0..5 {
            let v = pdv(&oracle, &spec, &params(5, seed)).unwrap();
            let w = v.counterexample().expect("fault must be found");
            assert!(w.len() <= 6, "{w:?}");
            assert!(oracle.membership(w).unwrap() && !spec.accepts(w).unwrap());
        }
    }

    #[test]
    fn aamc_satisfied_and_confirmed() {
        let sigma = Alphabet::latin(3).unwrap();
        for seed in 10..20 {
            let d = random_dfa(8, &sigma, seed);
            let oracle = DfaOracle::new(d.clone());
            for spec in derive_specs(&d, 1, seed, SpecMode::RandomSubsets) {
                let v = aamc(&oracle, &spec, &params(3, seed)).unwrap();
                assert!(v.is_satisfied(), "{:?}", v.outcome);
            }
        }

        // oracle accepts everything, spec is the complement of the loop example
        let example = loop_example();
        let oracle = DfaOracle::new(Dfa::constant(example.alphabet().clone(), true));
        let spec = example.complement();
        let v = aamc(&oracle, &spec, &params(5, 2)).unwrap();
        let w = v.counterexample().unwrap();
        assert!(example.accepts(w).unwrap());
        assert_eq!(v.hypothesis.as_ref().unwrap().states(), 1);
    }

    #[test]
    fn aamc_reports_spurious() {
        // every word but a^200; the sampler practically never reaches that
        // length, so the extraction is the universal language and its only
        // spec violation is a word the oracle rejects
        let target = Dfa::from_fn(
            Alphabet::latin(1).unwrap(),
            0,
            (0..=201).map(|q| q != 200).collect(),
            |q, _| (q + 1).min(201),
        )
        .unwrap();
        let oracle = DfaOracle::new(target.clone());
        let v = aamc(&oracle, &target, &params(1, 4)).unwrap();
        assert_eq!(
            v.outcome,
            Outcome::BudgetExhausted {
                reason: ExhaustionReason::SpuriousCounterexample
            }
        );
        assert_eq!(v.stats.spurious_counterexamples, 1);
        assert_eq!(v.stats.final_hypothesis_size(), Some(1));

        // the same instance under PDV refines on the spurious witness
        let v = pdv(&oracle, &target, &params(1, 4)).unwrap();
        assert!(v.is_satisfied());
        assert!(v.stats.spurious_counterexamples >= 1);
    }

    #[test]
    fn budgets_exhaust() {
        let sigma = Alphabet::latin(3).unwrap();
        let d = random_dfa(20, &sigma, 3);
        let oracle = DfaOracle::new(d.clone());
        let spec = Dfa::constant(sigma, true);
        let mut p = params(3, 0);
        p.budgets.max_queries = 5;
        let v = pdv(&oracle, &spec, &p).unwrap();
        assert_eq!(
            v.outcome,
            Outcome::BudgetExhausted {
                reason: ExhaustionReason::MembershipQueries
            }
        );
        let mut p = params(3, 0);
        p.budgets.max_rounds = 1;
        let v = aamc(&oracle, &spec, &p).unwrap();
        assert!(matches!(
            v.outcome,
            Outcome::BudgetExhausted { reason: ExhaustionReason::Rounds }
                | Outcome::PropertySatisfied { .. }
        ));
        assert!(v.stats.hypothesis_sizes.len() <= 1);
    }

    #[test]
    fn all_algorithms_deterministic() {
        let sigma = Alphabet::latin(3).unwrap();
        let base = random_dfa(8, &sigma, 21);
        let fault = Dfa::from_loop_pattern(sigma.clone(), &[2], &[0, 1], &[2]).unwrap();
        let spec = derive_specs(&base, 1, 3, SpecMode::RandomSubsets).remove(0);
        let oracle = FaultInjectedOracle::new(base, fault).unwrap();
        for alg in [super::super::Algorithm::Smc, super::super::Algorithm::Aamc, super::super::Algorithm::Pdv] {
            let a = super::super::run(alg, &oracle, &spec, &params(3, 8)).unwrap();
            let b = super::super::run(alg, &oracle, &spec, &params(3, 8)).unwrap();
            assert_eq!(a.deterministic_view(), b.deterministic_view(), "{alg:?}");
            assert_eq!(a.hypothesis, b.hypothesis);
            if let Some(w) = a.counterexample() {
                assert!(oracle.membership(w).unwrap() && !spec.accepts(w).unwrap());
            }
        }
    }

    #[test]
    fn pdv_never_exceeds_round_budget() {
        let sigma = Alphabet::latin(2).unwrap();
        let d = random_dfa(15, &sigma, 9);
        let oracle = DfaOracle::new(d);
        let spec = Dfa::constant(sigma, true);
        let mut p = params(2, 0);
        p.budgets.max_rounds = 2;
        let v = pdv(&oracle, &spec, &p).unwrap();
        assert!(v.stats.hypothesis_sizes.len() <= 2);
    }
}
