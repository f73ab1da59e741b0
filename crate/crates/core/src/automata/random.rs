use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Alphabet, Dfa, StateId};

const SPEC_RESAMPLES: usize = 20;

/// Random automaton: state count uniform in `[1, n_max]`, uniform
/// transitions, each state accepting with probability 1/2, then trimmed.
/// `n_max` of 0 is treated as 1.
pub fn random_dfa(n_max: usize, alphabet: &Alphabet, seed: u64) -> Dfa {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=n_max.max(1));
    let k = alphabet.len();
    let transitions: Vec<StateId> = (0..n * k).map(|_| rng.gen_range(0..n)).collect();
    let accepting: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    Dfa::new(alphabet.clone(), 0, accepting, transitions)
        .expect("generated table is well-formed")
        .trim()
}

/// How the extra accepting sets of derived specifications are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecMode {
    /// Each extra set is a random nonempty subset of the rejecting states.
    #[default]
    RandomSubsets,
    /// The extra set is all rejecting states (a single, universal spec).
    AllRejecting,
}

/// Specification automata sharing the transitions of `dfa` with enlarged
/// accepting sets, so `L(dfa) ⊆ L(spec)` holds for each of them.
///
/// Returns at most `count` (clamped to `1..=5`) specs with pairwise distinct
/// extra sets, and none when every state is already accepting.
pub fn derive_specs(dfa: &Dfa, count: usize, seed: u64, mode: SpecMode) -> Vec<Dfa> {
    let rejecting: Vec<StateId> = (0..dfa.states()).filter(|&q| !dfa.is_accepting(q)).collect();
    if rejecting.is_empty() {
        return Vec::new();
    }
    let with_extra = |extra: &BTreeSet<StateId>| {
        let mut accepting = dfa.accepting.clone();
        for &q in extra {
            accepting[q] = true;
        }
        Dfa {
            accepting,
            ..dfa.clone()
        }
    };
    if mode == SpecMode::AllRejecting {
        return vec![with_extra(&rejecting.iter().copied().collect())];
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<BTreeSet<StateId>> = Vec::new();
    for _ in 0..count.clamp(1, 5) {
        for _ in 0..SPEC_RESAMPLES {
            let size = rng.gen_range(1..=rejecting.len());
            let subset: BTreeSet<StateId> =
                rejecting.choose_multiple(&mut rng, size).copied().collect();
            if !chosen.contains(&subset) {
                chosen.push(subset);
                break;
            }
        }
    }
    chosen.iter().map(with_extra).collect()
}
