//! Deterministic finite automata over small finite alphabets.
//!
//! A [`Dfa`] is stored as a dense, row-major transition table. States are
//! `0..n` and letters are indices into the automaton's [`Alphabet`].
//! Everything here is immutable after construction.

mod format;
mod minimize;
mod random;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use random::{derive_specs, random_dfa, SpecMode};

pub type StateId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomataError {
    #[error("alphabet must contain at least one letter")]
    EmptyAlphabet,
    #[error("duplicate letter `{0}` in alphabet")]
    DuplicateLetter(String),
    #[error("letter index {index} is outside an alphabet of size {size}")]
    LetterOutOfRange { index: usize, size: usize },
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("alphabets differ: [{0}] vs [{1}]")]
    AlphabetMismatch(String, String),
    #[error("automaton must have at least one state")]
    NoStates,
    #[error("state {state} is out of range for {states} states")]
    StateOutOfRange { state: StateId, states: usize },
    #[error("transition table has {got} entries, expected {expected}")]
    TableSize { got: usize, expected: usize },
    #[error("invalid pattern: {0}")]
    Pattern(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Ordered set of distinct letters. The position of a letter is its index.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(letters: I) -> Result<Self, AutomataError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(AutomataError::EmptyAlphabet);
        }
        for (i, l) in letters.iter().enumerate() {
            if letters[..i].contains(l) {
                return Err(AutomataError::DuplicateLetter(l.clone()));
            }
        }
        Ok(Self { letters })
    }

    /// The first `size` lowercase latin letters (`a`, `b`, ...), falling back
    /// to `l<i>` names past `z`.
    pub fn latin(size: usize) -> Result<Self, AutomataError> {
        Self::new((0..size).map(|i| {
            if i < 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("l{i}")
            }
        }))
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn letter(&self, index: usize) -> Option<&str> {
        self.letters.get(index).map(String::as_str)
    }

    pub fn index_of(&self, letter: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == letter)
    }

    /// Parses a word. Whitespace-separated letters are always accepted; a
    /// string without whitespace is read character by character when every
    /// letter of the alphabet is a single character.
    pub fn parse_word(&self, text: &str) -> Result<Word, AutomataError> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(Word::empty());
        }
        let lookup = |s: &str| {
            self.index_of(s)
                .ok_or_else(|| AutomataError::UnknownLetter(s.to_string()))
        };
        let single_chars = self.letters.iter().all(|l| l.chars().count() == 1);
        if text.contains(char::is_whitespace) || !single_chars {
            text.split_whitespace().map(lookup).collect()
        } else {
            text.chars().map(|c| lookup(&c.to_string())).collect()
        }
    }

    /// Renders a word as space-separated letters.
    pub fn render(&self, word: &Word) -> String {
        word.iter()
            .map(|&i| self.letter(i).unwrap_or("?"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Letters of a word as strings, for JSON records.
    pub fn spell(&self, word: &Word) -> Vec<String> {
        word.iter()
            .map(|&i| self.letter(i).unwrap_or("?").to_string())
            .collect()
    }

    pub fn check(&self, word: &Word) -> Result<(), AutomataError> {
        match word.iter().find(|&&i| i >= self.len()) {
            Some(&index) => Err(AutomataError::LetterOutOfRange {
                index,
                size: self.len(),
            }),
            None => Ok(()),
        }
    }

    fn ensure_same(&self, other: &Alphabet) -> Result<(), AutomataError> {
        if self == other {
            Ok(())
        } else {
            Err(AutomataError::AlphabetMismatch(
                self.letters.join(" "),
                other.letters.join(" "),
            ))
        }
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.letters).finish()
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = AutomataError;

    fn try_from(value: Vec<String>) -> Result<Self, Self::Error> {
        Alphabet::new(value)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(value: Alphabet) -> Self {
        value.letters
    }
}

/// A finite word as a sequence of letter indices. The empty word is ε.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Self(letters)
    }

    pub fn push(&mut self, letter: usize) {
        self.0.push(letter);
    }

    pub fn concat(&self, other: &[usize]) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(other);
        Word(letters)
    }

    pub fn with(&self, letter: usize) -> Word {
        self.concat(&[letter])
    }

    /// `prefix · loop^n · suffix`.
    pub fn pumped(prefix: &[usize], repeated: &[usize], n: usize, suffix: &[usize]) -> Word {
        let mut letters = Vec::with_capacity(prefix.len() + repeated.len() * n + suffix.len());
        letters.extend_from_slice(prefix);
        for _ in 0..n {
            letters.extend_from_slice(repeated);
        }
        letters.extend_from_slice(suffix);
        Word(letters)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl Deref for Word {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Word {
    fn from(value: Vec<usize>) -> Self {
        Word(value)
    }
}

impl From<&[usize]> for Word {
    fn from(value: &[usize]) -> Self {
        Word(value.to_vec())
    }
}

impl FromIterator<usize> for Word {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{:?}", self.0)
        }
    }
}

/// Result of a language-inclusion check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inclusion {
    Holds,
    Counterexample(Word),
}

impl Inclusion {
    pub fn holds(&self) -> bool {
        matches!(self, Inclusion::Holds)
    }
}

/// A complete deterministic finite automaton.
#[derive(Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: StateId,
    accepting: Vec<bool>,
    // row-major: transitions[state * |Σ| + letter]
    transitions: Vec<StateId>,
}

impl Dfa {
    /// Builds a DFA from a row-major transition table of `states * |Σ|`
    /// entries.
    pub fn new(
        alphabet: Alphabet,
        initial: StateId,
        accepting: Vec<bool>,
        transitions: Vec<StateId>,
    ) -> Result<Self, AutomataError> {
        let states = accepting.len();
        if states == 0 {
            return Err(AutomataError::NoStates);
        }
        if initial >= states {
            return Err(AutomataError::StateOutOfRange {
                state: initial,
                states,
            });
        }
        let expected = states * alphabet.len();
        if transitions.len() != expected {
            return Err(AutomataError::TableSize {
                got: transitions.len(),
                expected,
            });
        }
        if let Some(&state) = transitions.iter().find(|&&t| t >= states) {
            return Err(AutomataError::StateOutOfRange { state, states });
        }
        Ok(Self {
            alphabet,
            initial,
            accepting,
            transitions,
        })
    }

    /// Builds a DFA from `accepting` and a per-state transition function.
    pub fn from_fn(
        alphabet: Alphabet,
        initial: StateId,
        accepting: Vec<bool>,
        delta: impl Fn(StateId, usize) -> StateId,
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        let transitions = (0..accepting.len())
            .flat_map(|q| (0..k).map(move |a| (q, a)))
            .map(|(q, a)| delta(q, a))
            .collect();
        Self::new(alphabet, initial, accepting, transitions)
    }

    /// One-state automaton accepting Σ* (`accept = true`) or ∅.
    pub fn constant(alphabet: Alphabet, accept: bool) -> Self {
        let k = alphabet.len();
        Self {
            alphabet,
            initial: 0,
            accepting: vec![accept],
            transitions: vec![0; k],
        }
    }

    /// Automaton for the language `prefix · loop* · suffix`.
    ///
    /// The loop must be nonempty and, when the suffix is nonempty, the two
    /// must start with different letters so the construction stays
    /// deterministic.
    pub fn from_loop_pattern(
        alphabet: Alphabet,
        prefix: &[usize],
        repeated: &[usize],
        suffix: &[usize],
    ) -> Result<Self, AutomataError> {
        let k = alphabet.len();
        for word in [prefix, repeated, suffix] {
            alphabet.check(&Word::from(word))?;
        }
        if repeated.is_empty() {
            return Err(AutomataError::Pattern("loop must be nonempty".into()));
        }
        if suffix.first() == repeated.first() {
            return Err(AutomataError::Pattern(
                "loop and suffix must start with different letters".into(),
            ));
        }
        // states: prefix positions, loop positions (hub = loop position 0),
        // suffix positions, final, sink
        let hub = prefix.len();
        let suffix_start = hub + repeated.len();
        let final_state = suffix_start + suffix.len();
        let sink = final_state + 1;
        let states = sink + 1;
        let mut transitions = vec![sink; states * k];
        for (i, &a) in prefix.iter().enumerate() {
            transitions[i * k + a] = i + 1;
        }
        for (i, &a) in repeated.iter().enumerate() {
            let from = hub + i;
            let to = if i + 1 == repeated.len() { hub } else { hub + i + 1 };
            transitions[from * k + a] = to;
        }
        for (i, &a) in suffix.iter().enumerate() {
            let from = if i == 0 { hub } else { suffix_start + i };
            let to = if i + 1 == suffix.len() {
                final_state
            } else {
                suffix_start + i + 1
            };
            transitions[from * k + a] = to;
        }
        let mut accepting = vec![false; states];
        accepting[if suffix.is_empty() { hub } else { final_state }] = true;
        Self::new(alphabet, 0, accepting, transitions)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting[state]
    }

    pub fn accepting(&self) -> &[bool] {
        &self.accepting
    }

    pub fn accepting_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.accepting
            .iter()
            .enumerate()
            .filter_map(|(q, &acc)| acc.then_some(q))
    }

    /// δ(state, letter). Panics on out-of-range arguments.
    #[inline]
    pub fn step(&self, state: StateId, letter: usize) -> StateId {
        self.transitions[state * self.alphabet.len() + letter]
    }

    /// δ̂(state, word).
    pub fn run_from(&self, state: StateId, word: &[usize]) -> Result<StateId, AutomataError> {
        let k = self.alphabet.len();
        word.iter().try_fold(state, |q, &a| {
            if a < k {
                Ok(self.step(q, a))
            } else {
                Err(AutomataError::LetterOutOfRange { index: a, size: k })
            }
        })
    }

    /// δ̂(q0, word).
    pub fn reach(&self, word: &[usize]) -> Result<StateId, AutomataError> {
        self.run_from(self.initial, word)
    }

    pub fn accepts(&self, word: &[usize]) -> Result<bool, AutomataError> {
        Ok(self.accepting[self.reach(word)?])
    }

    pub fn complement(&self) -> Dfa {
        Dfa {
            accepting: self.accepting.iter().map(|a| !a).collect(),
            ..self.clone()
        }
    }

    /// Reachable product automaton whose acceptance is `combine` applied to
    /// the acceptance bits of the two components.
    pub fn product(
        &self,
        other: &Dfa,
        combine: impl Fn(bool, bool) -> bool,
    ) -> Result<Dfa, AutomataError> {
        Ok(Product::build(self, other, combine)?.dfa)
    }

    /// Reachable states in breadth-first order from the initial state.
    pub fn reachable(&self) -> Vec<StateId> {
        let mut seen = vec![false; self.states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for a in 0..self.alphabet.len() {
                let r = self.step(q, a);
                if !seen[r] {
                    seen[r] = true;
                    order.push(r);
                }
            }
        }
        order
    }

    /// Drops unreachable states and renumbers the rest in breadth-first
    /// order, visiting letters in alphabet order.
    pub fn trim(&self) -> Dfa {
        let order = self.reachable();
        let mut index = vec![usize::MAX; self.states()];
        for (new, &old) in order.iter().enumerate() {
            index[old] = new;
        }
        let k = self.alphabet.len();
        let mut transitions = Vec::with_capacity(order.len() * k);
        for &q in &order {
            transitions.extend((0..k).map(|a| index[self.step(q, a)]));
        }
        Dfa {
            alphabet: self.alphabet.clone(),
            initial: 0,
            accepting: order.iter().map(|&q| self.accepting[q]).collect(),
            transitions,
        }
    }

    /// A shortest accepted word, the lexicographically smallest among those
    /// of minimal length; `None` for the empty language.
    pub fn shortest_accepted(&self) -> Option<Word> {
        // BFS discovers states in (length, lexicographic) order of their
        // first access word, so the first accepting state dequeued carries
        // the canonical witness.
        let k = self.alphabet.len();
        let mut parent: Vec<Option<(StateId, usize)>> = vec![None; self.states()];
        let mut seen = vec![false; self.states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(q) = queue.pop_front() {
            if self.accepting[q] {
                let mut letters = Vec::new();
                let mut cur = q;
                while let Some((prev, a)) = parent[cur] {
                    letters.push(a);
                    cur = prev;
                }
                letters.reverse();
                return Some(Word(letters));
            }
            for a in 0..k {
                let r = self.step(q, a);
                if !seen[r] {
                    seen[r] = true;
                    parent[r] = Some((q, a));
                    queue.push_back(r);
                }
            }
        }
        None
    }

    /// Checks L(self) ⊆ L(other); on failure returns the canonical shortest
    /// word of L(self) \ L(other).
    pub fn check_inclusion(&self, other: &Dfa) -> Result<Inclusion, AutomataError> {
        let difference = self.product(other, |a, b| a && !b)?;
        Ok(match difference.shortest_accepted() {
            Some(w) => Inclusion::Counterexample(w),
            None => Inclusion::Holds,
        })
    }

    /// Language equality, both inclusions.
    pub fn equivalent(&self, other: &Dfa) -> Result<bool, AutomataError> {
        Ok(self.check_inclusion(other)?.holds() && other.check_inclusion(self)?.holds())
    }

    pub fn is_empty_language(&self) -> bool {
        self.shortest_accepted().is_none()
    }
}

impl fmt::Debug for Dfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// Product automaton that remembers which pair of component states each
/// product state stands for.
#[derive(Debug, Clone)]
pub struct Product {
    pub dfa: Dfa,
    pub pairs: Vec<(StateId, StateId)>,
}

impl Product {
    pub fn build(
        left: &Dfa,
        right: &Dfa,
        combine: impl Fn(bool, bool) -> bool,
    ) -> Result<Product, AutomataError> {
        left.alphabet.ensure_same(&right.alphabet)?;
        let k = left.alphabet.len();
        let start = (left.initial, right.initial);
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::from([(start, 0)]);
        let mut pairs = vec![start];
        let mut transitions = Vec::new();
        let mut head = 0;
        while head < pairs.len() {
            let (p, q) = pairs[head];
            head += 1;
            for a in 0..k {
                let next = (left.step(p, a), right.step(q, a));
                let id = *index.entry(next).or_insert_with(|| {
                    pairs.push(next);
                    pairs.len() - 1
                });
                transitions.push(id);
            }
        }
        let accepting = pairs
            .iter()
            .map(|&(p, q)| combine(left.accepting[p], right.accepting[q]))
            .collect();
        let dfa = Dfa::new(left.alphabet.clone(), 0, accepting, transitions)?;
        Ok(Product { dfa, pairs })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn ab() -> Alphabet {
        Alphabet::latin(2).unwrap()
    }

    /// Parity of length over {a}; `odd` selects which parity is accepted.
    pub(crate) fn parity(odd: bool) -> Dfa {
        Dfa::new(Alphabet::latin(1).unwrap(), 0, vec![!odd, odd], vec![1, 0]).unwrap()
    }

    /// Words over {a,b} containing `letter`.
    pub(crate) fn contains(letter: usize) -> Dfa {
        Dfa::from_fn(ab(), 0, vec![false, true], |q, a| {
            if q == 1 || a == letter {
                1
            } else {
                0
            }
        })
        .unwrap()
    }

    /// The five-state automaton with the (a,b,c,e) loop at state 0.
    pub(crate) fn loop_example() -> Dfa {
        let sigma = Alphabet::latin(5).unwrap();
        // letters: a b c d e
        let table = [
            [3, 4, 3, 4, 1],
            [0, 4, 4, 4, 4],
            [3, 2, 2, 2, 0],
            [4, 2, 4, 4, 4],
            [3, 4, 3, 4, 4],
        ];
        Dfa::from_fn(sigma, 0, vec![false, true, false, false, false], |q, a| {
            table[q][a]
        })
        .unwrap()
    }

    fn all_words(k: usize, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..max_len {
            frontier = frontier
                .iter()
                .flat_map(|w| (0..k).map(move |a| w.with(a)))
                .collect();
            out.extend(frontier.iter().cloned());
        }
        out
    }

    fn simulate(dfa: &Dfa, word: &[usize]) -> bool {
        let mut q = dfa.initial();
        for &a in word {
            q = dfa.step(q, a);
        }
        dfa.is_accepting(q)
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empty() {
        assert_eq!(
            Alphabet::new(["a", "b", "a"]),
            Err(AutomataError::DuplicateLetter("a".into()))
        );
        assert_eq!(
            Alphabet::new(Vec::<String>::new()),
            Err(AutomataError::EmptyAlphabet)
        );
    }

    #[test]
    fn parse_word_compact_and_spaced() {
        let sigma = Alphabet::latin(5).unwrap();
        assert_eq!(sigma.parse_word("abce").unwrap(), Word::new(vec![0, 1, 2, 4]));
        assert_eq!(sigma.parse_word("a b c e").unwrap(), Word::new(vec![0, 1, 2, 4]));
        assert_eq!(sigma.parse_word("").unwrap(), Word::empty());
        assert!(sigma.parse_word("abz").is_err());
    }

    #[test]
    fn reach_on_loop_example() {
        let dfa = loop_example();
        let sigma = dfa.alphabet().clone();
        assert_eq!(dfa.reach(&sigma.parse_word("abce").unwrap()).unwrap(), 0);
        assert_eq!(dfa.reach(&sigma.parse_word("abcee").unwrap()).unwrap(), 1);
        assert_eq!(dfa.reach(&[]).unwrap(), dfa.initial());
    }

    #[test]
    fn reach_rejects_foreign_letters() {
        let dfa = parity(false);
        assert_eq!(
            dfa.reach(&[0, 3]),
            Err(AutomataError::LetterOutOfRange { index: 3, size: 1 })
        );
        assert!(dfa.accepts(&[1]).is_err());
    }

    #[test]
    fn accepts_constant_languages() {
        let all = Dfa::constant(ab(), true);
        let none = Dfa::constant(ab(), false);
        for w in all_words(2, 4) {
            assert!(all.accepts(&w).unwrap());
            assert!(!none.accepts(&w).unwrap());
        }
    }

    #[test]
    fn parity_rejects_aa() {
        assert!(!parity(true).accepts(&[0, 0]).unwrap());
        assert!(parity(true).accepts(&[0]).unwrap());
    }

    #[test]
    fn complement_is_involution_and_inverts() {
        let odd = parity(true);
        let even = odd.complement();
        assert_eq!(even.complement(), odd);
        for n in 0..=6 {
            let w = Word::new(vec![0; n]);
            assert_eq!(even.accepts(&w).unwrap(), n % 2 == 0);
        }
        let none = Dfa::constant(ab(), true).complement();
        assert!(none.is_empty_language());
    }

    #[test]
    fn product_and_not() {
        let p = contains(0).product(&contains(1), |x, y| x && !y).unwrap();
        assert!(p.accepts(&[0]).unwrap());
        assert!(!p.accepts(&[0, 1]).unwrap());
        for w in all_words(2, 4) {
            let expected = w.contains(&0) && !w.contains(&1);
            assert_eq!(p.accepts(&w).unwrap(), expected, "{w:?}");
        }
        assert!(p.states() <= 4);
    }

    #[test]
    fn product_with_universal_is_neutral() {
        let d = contains(1);
        let p = d.product(&Dfa::constant(ab(), true), |x, y| x && y).unwrap();
        assert!(p.equivalent(&d).unwrap());
    }

    #[test]
    fn product_alphabet_mismatch() {
        let err = parity(true).product(&contains(0), |x, y| x && y).unwrap_err();
        assert!(matches!(err, AutomataError::AlphabetMismatch(..)));
    }

    #[test]
    fn shortest_accepted_cases() {
        let mut d = parity(true);
        assert_eq!(d.shortest_accepted(), Some(Word::new(vec![0])));
        d = parity(false);
        assert_eq!(d.shortest_accepted(), Some(Word::empty()));
        assert_eq!(Dfa::constant(ab(), false).shortest_accepted(), None);
        // lexicographic tie-break: words of length 2 ending in b
        let ends_b = Dfa::from_fn(ab(), 0, vec![false, false, true], |q, a| match (q, a) {
            (0, _) => 1,
            (1, 1) | (2, 1) => 2,
            _ => 1,
        })
        .unwrap();
        assert_eq!(ends_b.shortest_accepted(), Some(Word::new(vec![0, 1])));
    }

    #[test]
    fn inclusion_cases() {
        let d = contains(0);
        assert_eq!(d.check_inclusion(&d).unwrap(), Inclusion::Holds);
        let universal = Dfa::constant(Alphabet::latin(1).unwrap(), true);
        assert_eq!(
            universal.check_inclusion(&parity(false)).unwrap(),
            Inclusion::Counterexample(Word::new(vec![0]))
        );
    }

    #[test]
    fn loop_pattern_language() {
        let sigma = Alphabet::latin(5).unwrap();
        let abce = sigma.parse_word("abce").unwrap();
        let e = sigma.parse_word("e").unwrap();
        let d = Dfa::from_loop_pattern(sigma.clone(), &[], &abce, &e).unwrap();
        for w in all_words(5, 6) {
            let expected = w.len() % 4 == 1
                && w.last() == Some(&4)
                && w[..w.len() - 1].chunks(4).all(|c| c == &abce[..]);
            assert_eq!(simulate(&d, &w), expected, "{w:?}");
        }
        assert!(Dfa::from_loop_pattern(sigma.clone(), &[], &abce, &abce).is_err());
        assert!(Dfa::from_loop_pattern(sigma, &[0], &[], &[1]).is_err());
    }

    #[test]
    fn loop_pattern_without_suffix() {
        let sigma = ab();
        let d = Dfa::from_loop_pattern(sigma, &[1], &[0, 1], &[]).unwrap();
        assert!(d.accepts(&[1]).unwrap());
        assert!(d.accepts(&[1, 0, 1, 0, 1]).unwrap());
        assert!(!d.accepts(&[1, 0]).unwrap());
    }

    #[test]
    fn trim_drops_unreachable() {
        let d = Dfa::new(ab(), 0, vec![true, false, true], vec![0, 0, 1, 2, 2, 2]).unwrap();
        let t = d.trim();
        assert_eq!(t.states(), 1);
        assert!(t.equivalent(&d).unwrap());
    }

    #[test]
    fn new_validates_table() {
        assert_eq!(
            Dfa::new(ab(), 0, vec![true], vec![0]),
            Err(AutomataError::TableSize {
                got: 1,
                expected: 2
            })
        );
        assert!(matches!(
            Dfa::new(ab(), 2, vec![true], vec![0, 0]),
            Err(AutomataError::StateOutOfRange { .. })
        ));
        assert!(matches!(
            Dfa::new(ab(), 0, vec![true], vec![0, 5]),
            Err(AutomataError::StateOutOfRange { .. })
        ));
    }
}
