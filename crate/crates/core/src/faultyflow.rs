//! Generalizing one counterexample into a family `w1 · ℓⁿ · w2`.
//!
//! Given a confirmed counterexample `w` of an oracle against a spec and the
//! hypothesis it was found with, every split `w = w1 · w2` and every loop `ℓ`
//! of the spec × hypothesis product at the state reached by `w1` is pumped
//! for `n = 1..=pump_max`. A pair whose pumped words are counterexamples more
//! than `threshold` times is reported as a faulty flow.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{AutomataError, Dfa, Product, StateId, Word};
use crate::oracle::{LanguageOracle, OracleError};

pub const DEFAULT_PUMP_MAX: u64 = 100;
pub const DEFAULT_THRESHOLD: u64 = 20;
pub const DEFAULT_MAX_LOOP_LEN: usize = 12;
pub const DEFAULT_MAX_LOOPS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FaultyFlowError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Automata(#[from] AutomataError),
    #[error("{0:?} is not a counterexample (oracle {1}, spec {2})")]
    NotCounterexample(Word, bool, bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    pub pump_max: u64,
    pub threshold: u64,
    pub max_loop_len: usize,
    /// Loops tried per product state.
    pub max_loops: usize,
    /// Collect every flow above threshold instead of stopping at the first.
    pub exhaustive: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            pump_max: DEFAULT_PUMP_MAX,
            threshold: DEFAULT_THRESHOLD,
            max_loop_len: DEFAULT_MAX_LOOP_LEN,
            max_loops: DEFAULT_MAX_LOOPS,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    pub prefix: Word,
    #[serde(rename = "loop")]
    pub loop_word: Word,
    pub suffix: Word,
    /// Pump counts `n` for which `prefix · loopⁿ · suffix` is a counterexample.
    pub hits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowVerdict {
    FaultyFlowFound,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultyFlowReport {
    pub counterexample: Word,
    pub verdict: FlowVerdict,
    /// The reported flow, or the candidate with the most hits.
    pub best: Option<Flow>,
    /// Every flow above threshold, in exhaustive mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flows: Vec<Flow>,
    pub candidates_tested: u64,
    pub pump_max: u64,
    pub threshold: u64,
}

/// Loops through `at`: closed walks that leave `at` and return to it only
/// at their last step, ordered by length and then lexicographically.
///
/// Intermediate states may repeat. At most `max_loops` words are returned.
pub fn find_loops(dfa: &Dfa, at: StateId, max_len: usize, max_loops: usize) -> Vec<Word> {
    let k = dfa.alphabet().len();
    let dist = distance_to(dfa, at);
    let mut out = Vec::new();
    for len in 1..=max_len {
        let mut path = Vec::with_capacity(len);
        walk(dfa, at, at, len, &dist, &mut path, &mut out, max_loops, k);
        if out.len() >= max_loops {
            break;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn walk(
    dfa: &Dfa,
    at: StateId,
    q: StateId,
    len: usize,
    dist: &[usize],
    path: &mut Vec<usize>,
    out: &mut Vec<Word>,
    max_loops: usize,
    k: usize,
) {
    let remaining = len - path.len();
    for a in 0..k {
        if out.len() >= max_loops {
            return;
        }
        let next = dfa.step(q, a);
        if remaining == 1 {
            if next == at {
                path.push(a);
                out.push(Word::from(path.as_slice()));
                path.pop();
            }
            continue;
        }
        // returning early would end the loop before `len` letters
        if next == at || dist[next] > remaining - 1 {
            continue;
        }
        path.push(a);
        walk(dfa, at, next, len, dist, path, out, max_loops, k);
        path.pop();
    }
}

/// Shortest distance from every state to `target`; `usize::MAX` if unreachable.
fn distance_to(dfa: &Dfa, target: StateId) -> Vec<usize> {
    let n = dfa.states();
    let k = dfa.alphabet().len();
    let mut preds = vec![Vec::new(); n];
    for q in 0..n {
        for a in 0..k {
            preds[dfa.step(q, a)].push(q);
        }
    }
    let mut dist = vec![usize::MAX; n];
    dist[target] = 0;
    let mut queue = VecDeque::from([target]);
    while let Some(q) = queue.pop_front() {
        for &p in &preds[q] {
            if dist[p] == usize::MAX {
                dist[p] = dist[q] + 1;
                queue.push_back(p);
            }
        }
    }
    dist
}

fn pump_hits(
    oracle: &dyn LanguageOracle,
    spec: &Dfa,
    prefix: &[usize],
    loop_word: &[usize],
    suffix: &[usize],
    pump_max: u64,
) -> Result<u64, FaultyFlowError> {
    let mut hits = 0;
    for n in 1..=pump_max {
        let w = Word::pumped(prefix, loop_word, n as usize, suffix);
        if !spec.accepts(&w)? && oracle.membership(&w)? {
            hits += 1;
        }
    }
    Ok(hits)
}

/// Searches for a faulty flow around the counterexample `w`.
pub fn detect(
    oracle: &dyn LanguageOracle,
    spec: &Dfa,
    hyp: &Dfa,
    w: &Word,
    cfg: &FlowConfig,
) -> Result<FaultyFlowReport, FaultyFlowError> {
    let accepted = oracle.membership(w)?;
    let in_spec = spec.accepts(w)?;
    if !accepted || in_spec {
        return Err(FaultyFlowError::NotCounterexample(w.clone(), accepted, in_spec));
    }
    let product = Product::build(spec, hyp, |s, h| !s && h)?;
    let mut report = FaultyFlowReport {
        counterexample: w.clone(),
        verdict: FlowVerdict::None,
        best: None,
        flows: Vec::new(),
        candidates_tested: 0,
        pump_max: cfg.pump_max,
        threshold: cfg.threshold,
    };
    let mut loops_at: Vec<Option<Vec<Word>>> = vec![None; product.dfa.states()];
    let mut state = product.dfa.initial();
    for split in 0..=w.len() {
        if split > 0 {
            state = product.dfa.step(state, w[split - 1]);
        }
        let loops = loops_at[state].get_or_insert_with(|| {
            find_loops(&product.dfa, state, cfg.max_loop_len, cfg.max_loops)
        });
        let (prefix, suffix) = w.split_at(split);
        for l in loops.iter() {
            report.candidates_tested += 1;
            let hits = pump_hits(oracle, spec, prefix, l, suffix, cfg.pump_max)?;
            let flow = Flow {
                prefix: Word::from(prefix),
                loop_word: l.clone(),
                suffix: Word::from(suffix),
                hits,
            };
            if report.best.as_ref().is_none_or(|b| hits > b.hits) {
                report.best = Some(flow.clone());
            }
            if hits > cfg.threshold {
                if report.verdict == FlowVerdict::None {
                    report.verdict = FlowVerdict::FaultyFlowFound;
                    report.best = Some(flow.clone());
                }
                if !cfg.exhaustive {
                    return Ok(report);
                }
                report.flows.push(flow);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::tests::loop_example;
    use crate::automata::{random_dfa, Alphabet};
    use crate::oracle::FaultInjectedOracle;
    use proptest::prelude::*;

    fn w(letters: &[usize]) -> Word {
        Word::from(letters)
    }

    #[test]
    fn self_loop_is_found() {
        // contains(a): state 1 loops on both letters
        let d = crate::automata::tests::contains(0);
        let q = d.reach(&[0]).unwrap();
        let loops = find_loops(&d, q, 3, 100);
        assert_eq!(loops[0], w(&[0]));
        assert_eq!(loops[1], w(&[1]));
    }

    #[test]
    fn example_loop_at_initial_state() {
        let d = loop_example();
        let loops = find_loops(&d, 0, 4, 1000);
        assert!(loops.contains(&w(&[0, 1, 2, 4])));
        // ordered by length, then lexicographically
        for pair in loops.windows(2) {
            assert!((pair[0].len(), &pair[0][..]) < (pair[1].len(), &pair[1][..]));
        }
    }

    #[test]
    fn transient_state_has_no_loops() {
        // a chain 0 → 1 → 2 with 2 absorbing: 0 and 1 are on no cycle
        let d = Dfa::from_fn(Alphabet::latin(2).unwrap(), 0, vec![false; 3], |q, _| (q + 1).min(2)).unwrap();
        assert!(find_loops(&d, 0, 12, 100).is_empty());
        assert!(find_loops(&d, 1, 12, 100).is_empty());
        assert_eq!(find_loops(&d, 2, 1, 100), vec![w(&[0]), w(&[1])]);
    }

    #[test]
    fn loop_cap_respected() {
        // every letter toggles between two states
        let d = Dfa::from_fn(Alphabet::latin(3).unwrap(), 0, vec![true, false], |q, _| 1 - q).unwrap();
        let loops = find_loops(&d, 0, 12, 5);
        assert_eq!(loops, vec![w(&[0, 0]), w(&[0, 1]), w(&[0, 2]), w(&[1, 0]), w(&[1, 1])]);
    }

    fn loop_fault_instance() -> (FaultInjectedOracle, Dfa) {
        let sigma = Alphabet::latin(5).unwrap();
        let fault = Dfa::from_loop_pattern(sigma.clone(), &[], &[0, 1, 2, 4], &[4]).unwrap();
        let spec = fault.complement();
        let oracle = FaultInjectedOracle::new(Dfa::constant(sigma, false), fault).unwrap();
        (oracle, spec)
    }

    #[test]
    fn pumps_example_loop() {
        let (oracle, spec) = loop_fault_instance();
        let r = detect(&oracle, &spec, &loop_example(), &w(&[0, 1, 2, 4, 4]), &FlowConfig::default()).unwrap();
        assert_eq!(r.verdict, FlowVerdict::FaultyFlowFound);
        let best = r.best.unwrap();
        assert_eq!(best.prefix, Word::empty());
        assert_eq!(best.loop_word, w(&[0, 1, 2, 4]));
        assert_eq!(best.suffix, w(&[0, 1, 2, 4, 4]));
        assert_eq!(best.hits, 100);
    }

    #[test]
    fn isolated_fault_is_not_a_flow() {
        let sigma = Alphabet::latin(5).unwrap();
        let cex = w(&[0, 1, 2, 4, 4]);
        // fault = {abcee}: a chain of states with a sink at 6
        let fault = Dfa::from_fn(sigma.clone(), 0, (0..7).map(|q| q == 5).collect(), |q, a| {
            if q < 5 && cex[q] == a { q + 1 } else { 6 }
        })
        .unwrap();
        // the spec forbids all of (abce)⁺e, so pumping stays outside the spec
        // while leaving the fault set
        let (_, spec) = loop_fault_instance();
        let oracle = FaultInjectedOracle::new(Dfa::constant(sigma.clone(), false), fault).unwrap();
        let r = detect(&oracle, &spec, &loop_example(), &cex, &FlowConfig::default()).unwrap();
        assert_eq!(r.verdict, FlowVerdict::None);
        assert_eq!(r.best.map(|b| b.hits), Some(0));
        assert!(r.candidates_tested > 0);
    }

    #[test]
    fn zero_threshold_takes_first_hit() {
        let (oracle, spec) = loop_fault_instance();
        let cfg = FlowConfig {
            threshold: 0,
            pump_max: 1,
            ..FlowConfig::default()
        };
        let r = detect(&oracle, &spec, &loop_example(), &w(&[0, 1, 2, 4, 4]), &cfg).unwrap();
        assert_eq!(r.verdict, FlowVerdict::FaultyFlowFound);
        assert_eq!(r.best.unwrap().hits, 1);
    }

    #[test]
    fn rejects_non_counterexample() {
        let (oracle, spec) = loop_fault_instance();
        assert!(matches!(
            detect(&oracle, &spec, &loop_example(), &w(&[0]), &FlowConfig::default()),
            Err(FaultyFlowError::NotCounterexample(..))
        ));
    }

    #[test]
    fn exhaustive_lists_all_flows() {
        let (oracle, spec) = loop_fault_instance();
        let cfg = FlowConfig {
            exhaustive: true,
            ..FlowConfig::default()
        };
        let cex = w(&[0, 1, 2, 4, 4]);
        let r = detect(&oracle, &spec, &loop_example(), &cex, &cfg).unwrap();
        assert!(r.flows.len() >= 2);
        assert_eq!(r.best.as_ref(), r.flows.first());
        for f in &r.flows {
            assert!(f.hits > cfg.threshold);
            assert_eq!(f.prefix.concat(&f.suffix), cex);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn loops_return_to_start(seed in 0u64..10_000, len in 1usize..6) {
            let d = random_dfa(8, &Alphabet::latin(3).unwrap(), seed);
            for q in 0..d.states() {
                for l in find_loops(&d, q, len, 50) {
                    prop_assert!(!l.is_empty() && l.len() <= len);
                    let mut s = q;
                    for (i, &a) in l.iter().enumerate() {
                        s = d.step(s, a);
                        prop_assert_eq!(s == q, i + 1 == l.len());
                    }
                }
            }
        }

        #[test]
        fn flows_are_consistent(seed in 0u64..10_000) {
            let sigma = Alphabet::latin(2).unwrap();
            let base = random_dfa(6, &sigma, seed);
            let fault = random_dfa(4, &sigma, seed ^ 0x5555);
            let spec = base.clone();
            let oracle = FaultInjectedOracle::new(base.clone(), fault).unwrap();
            let hyp = oracle.to_dfa();
            let Some(cex) = hyp.product(&spec, |h, s| h && !s).unwrap().shortest_accepted() else {
                return Ok(());
            };
            let cfg = FlowConfig { pump_max: 10, threshold: 5, exhaustive: true, ..FlowConfig::default() };
            let a = detect(&oracle, &spec, &hyp, &cex, &cfg).unwrap();
            let b = detect(&oracle, &spec, &hyp, &cex, &cfg).unwrap();
            prop_assert_eq!(&a, &b);
            let product = Product::build(&spec, &hyp, |s, h| !s && h).unwrap();
            for f in &a.flows {
                prop_assert_eq!(f.prefix.concat(&f.suffix), cex.clone());
                let q = product.dfa.reach(&f.prefix).unwrap();
                prop_assert_eq!(product.dfa.run_from(q, &f.loop_word).unwrap(), q);
                let recount = (1..=cfg.pump_max as usize)
                    .map(|n| Word::pumped(&f.prefix, &f.loop_word, n, &f.suffix))
                    .filter(|p| oracle.membership(p).unwrap() && !spec.accepts(p).unwrap())
                    .count();
                prop_assert_eq!(recount as u64, f.hits);
            }
        }
    }
}
