//! Angluin's L* over a membership oracle.
//!
//! The learner owns an observation table and a cache of every answered
//! membership query; equivalence queries are supplied by the caller, which
//! is what lets the verification algorithms substitute model checking and
//! sampling for a real teacher.
//!
//! Counterexamples are processed by adding all their prefixes to the
//! prefix set.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::automata::{Alphabet, Dfa, Word};
use crate::oracle::{LanguageOracle, OracleError};

pub const DEFAULT_MAX_QUERIES: u64 = 10_000_000;
pub const DEFAULT_MAX_STATES: usize = 5_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LstarError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("membership query budget of {0} exhausted")]
    QueryBudget(u64),
    #[error("hypothesis exceeds {0} states")]
    StateBudget(usize),
    #[error("word {0:?} does not distinguish the hypothesis from the oracle")]
    NotDistinguishing(Word),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Counted on the oracle from the moment the learner is created.
    pub max_queries: u64,
    pub max_states: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_queries: DEFAULT_MAX_QUERIES,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Prefix-closed rows `S`, suffix-closed columns `E`, and their entries.
#[derive(Debug, Clone)]
pub struct ObservationTable {
    letters: usize,
    prefixes: Vec<Word>,
    prefix_set: HashSet<Word>,
    suffixes: Vec<Word>,
    // rows for every word of S ∪ S·Σ, one entry per suffix filled so far
    rows: HashMap<Word, Vec<bool>>,
}

impl ObservationTable {
    pub fn new(letters: usize) -> Self {
        let mut table = Self {
            letters,
            prefixes: Vec::new(),
            prefix_set: HashSet::new(),
            suffixes: vec![Word::empty()],
            rows: HashMap::new(),
        };
        table.add_prefix(Word::empty());
        table
    }

    pub fn prefixes(&self) -> &[Word] {
        &self.prefixes
    }

    pub fn suffixes(&self) -> &[Word] {
        &self.suffixes
    }

    /// Entry for `prefix · suffixes[column]`, if filled.
    pub fn entry(&self, prefix: &Word, column: usize) -> Option<bool> {
        self.rows.get(prefix).and_then(|r| r.get(column).copied())
    }

    fn add_prefix(&mut self, s: Word) -> bool {
        if !self.prefix_set.insert(s.clone()) {
            return false;
        }
        for a in 0..self.letters {
            self.rows.entry(s.with(a)).or_default();
        }
        self.rows.entry(s.clone()).or_default();
        self.prefixes.push(s);
        true
    }

    fn is_filled(&self) -> bool {
        self.rows.values().all(|r| r.len() == self.suffixes.len())
    }

    fn row(&self, word: &Word) -> &[bool] {
        &self.rows[word]
    }

    /// Distinct rows of `S`, each mapped to the first prefix carrying it.
    fn distinct_rows(&self) -> HashMap<&[bool], usize> {
        let mut states: HashMap<&[bool], usize> = HashMap::new();
        for s in &self.prefixes {
            let next = states.len();
            states.entry(self.row(s)).or_insert(next);
        }
        states
    }

    pub fn state_count(&self) -> usize {
        self.distinct_rows().len()
    }

    /// Rows of `S·Σ` missing from `S`, one representative per distinct row.
    fn unclosed(&self) -> Vec<Word> {
        let known: HashSet<&[bool]> = self.prefixes.iter().map(|s| self.row(s)).collect();
        let mut missing: HashSet<&[bool]> = HashSet::new();
        let mut out = Vec::new();
        for s in &self.prefixes {
            for a in 0..self.letters {
                let sa = s.with(a);
                let row = self.row(&sa);
                if !known.contains(row) && missing.insert(row) {
                    out.push(sa);
                }
            }
        }
        out
    }

    /// A suffix `a·e` separating two equal rows of `S`, if any.
    fn inconsistency(&self) -> Option<Word> {
        let mut by_row: HashMap<&[bool], &Word> = HashMap::new();
        for s in &self.prefixes {
            let Some(&first) = by_row.get(self.row(s)) else {
                by_row.insert(self.row(s), s);
                continue;
            };
            for a in 0..self.letters {
                let (r1, r2) = (self.row(&first.with(a)), self.row(&s.with(a)));
                if let Some(j) = (0..r1.len()).find(|&j| r1[j] != r2[j]) {
                    let mut suffix = Word::new(vec![a]);
                    suffix = suffix.concat(&self.suffixes[j]);
                    return Some(suffix);
                }
            }
        }
        None
    }

    /// Builds the hypothesis of a closed, consistent, filled table.
    ///
    /// Panics if the table is not closed or not filled; callers go through
    /// [`Learner::hypothesis`], which establishes both.
    pub fn build_hypothesis(&self, alphabet: &Alphabet) -> Dfa {
        assert!(self.is_filled(), "observation table has unfilled cells");
        let states = self.distinct_rows();
        let mut reps: Vec<&Word> = vec![&self.prefixes[0]; states.len()];
        for s in self.prefixes.iter().rev() {
            reps[states[self.row(s)]] = s;
        }
        let k = self.letters;
        let mut transitions = Vec::with_capacity(reps.len() * k);
        for s in &reps {
            for a in 0..k {
                let target = states
                    .get(self.row(&s.with(a)))
                    .expect("observation table is not closed");
                transitions.push(*target);
            }
        }
        let accepting = reps.iter().map(|s| self.row(s)[0]).collect();
        Dfa::new(alphabet.clone(), states[self.row(&Word::empty())], accepting, transitions)
            .expect("hypothesis is well-formed")
    }
}

/// The current hypothesis and how many refinements produced it.
#[derive(Debug, Clone)]
pub struct Hypothesis {
    pub dfa: Dfa,
    pub generation: usize,
}

/// L* learner bound to one oracle.
pub struct Learner<'o, O: LanguageOracle + ?Sized> {
    oracle: &'o O,
    table: ObservationTable,
    answers: HashMap<Word, bool>,
    budget: Budget,
    baseline: u64,
    generation: usize,
    current: Option<Dfa>,
}

impl<'o, O: LanguageOracle + ?Sized> Learner<'o, O> {
    pub fn new(oracle: &'o O, budget: Budget) -> Self {
        Self {
            oracle,
            table: ObservationTable::new(oracle.alphabet().len()),
            answers: HashMap::new(),
            budget,
            baseline: oracle.queries(),
            generation: 0,
            current: None,
        }
    }

    pub fn table(&self) -> &ObservationTable {
        &self.table
    }

    pub fn oracle(&self) -> &'o O {
        self.oracle
    }

    /// Queries issued on the oracle since this learner was created,
    /// including those made by the caller.
    pub fn queries_used(&self) -> u64 {
        self.oracle.queries() - self.baseline
    }

    pub fn check_budget(&self) -> Result<(), LstarError> {
        if self.queries_used() >= self.budget.max_queries {
            Err(LstarError::QueryBudget(self.budget.max_queries))
        } else {
            Ok(())
        }
    }

    /// Cached membership query.
    pub fn membership(&mut self, word: &Word) -> Result<bool, LstarError> {
        if let Some(&answer) = self.answers.get(word) {
            return Ok(answer);
        }
        self.check_budget()?;
        let answer = self.oracle.membership(word)?;
        self.answers.insert(word.clone(), answer);
        Ok(answer)
    }

    fn fill(&mut self) -> Result<(), LstarError> {
        let width = self.table.suffixes.len();
        let pending: Vec<Word> = self
            .table
            .rows
            .iter()
            .filter(|(_, r)| r.len() < width)
            .map(|(w, _)| w.clone())
            .collect();
        for word in pending {
            let filled = self.table.rows[&word].len();
            let mut extra = Vec::with_capacity(width - filled);
            for j in filled..width {
                let query = word.concat(&self.table.suffixes[j]);
                extra.push(self.membership(&query)?);
            }
            self.table
                .rows
                .get_mut(&word)
                .expect("row exists")
                .extend(extra);
        }
        Ok(())
    }

    /// Fills the table and extends it until it is closed and consistent.
    pub fn close_and_make_consistent(&mut self) -> Result<(), LstarError> {
        loop {
            self.fill()?;
            let unclosed = self.table.unclosed();
            if !unclosed.is_empty() {
                for s in unclosed {
                    self.table.add_prefix(s);
                }
                if self.table.state_count() > self.budget.max_states {
                    return Err(LstarError::StateBudget(self.budget.max_states));
                }
                continue;
            }
            match self.table.inconsistency() {
                Some(suffix) => self.table.suffixes.push(suffix),
                None => return Ok(()),
            }
        }
    }

    /// Closes the table and returns the hypothesis it induces.
    pub fn hypothesis(&mut self) -> Result<Hypothesis, LstarError> {
        self.close_and_make_consistent()?;
        let dfa = self.table.build_hypothesis(self.oracle.alphabet());
        if dfa.states() > self.budget.max_states {
            return Err(LstarError::StateBudget(self.budget.max_states));
        }
        self.current = Some(dfa.clone());
        Ok(Hypothesis {
            dfa,
            generation: self.generation,
        })
    }

    /// Feeds back a word on which the last hypothesis and the oracle
    /// disagree, then re-closes the table.
    pub fn refine(&mut self, counterexample: &Word) -> Result<(), LstarError> {
        let hyp = match &self.current {
            Some(h) => h.clone(),
            None => self.hypothesis()?.dfa,
        };
        let predicted = hyp
            .accepts(counterexample)
            .map_err(OracleError::from)?;
        if predicted == self.membership(counterexample)? {
            return Err(LstarError::NotDistinguishing(counterexample.clone()));
        }
        for i in 0..=counterexample.len() {
            self.table.add_prefix(Word::from(&counterexample[..i]));
        }
        self.generation += 1;
        self.current = None;
        self.close_and_make_consistent()
    }

    /// Runs L* with `equivalence` as the teacher: it returns `None` to
    /// accept the hypothesis or a distinguishing word.
    pub fn learn(
        &mut self,
        mut equivalence: impl FnMut(&Dfa) -> Result<Option<Word>, LstarError>,
    ) -> Result<Dfa, LstarError> {
        loop {
            let hyp = self.hypothesis()?;
            match equivalence(&hyp.dfa)? {
                None => return Ok(hyp.dfa),
                Some(w) => self.refine(&w)?,
            }
        }
    }
}

/// Samples for the `n`-th PAC equivalence query:
/// `⌈(1/ε)(ln(1/γ) + ln(2)·(n+1))⌉`.
pub fn pac_sample_count(epsilon: f64, gamma: f64, completed: u64) -> Result<u64, LstarError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(LstarError::Parameter(format!("epsilon {epsilon} not in (0, 1)")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(LstarError::Parameter(format!("gamma {gamma} not in (0, 1]")));
    }
    let n = (1.0 / epsilon) * ((1.0 / gamma).ln() + std::f64::consts::LN_2 * (completed + 1) as f64);
    Ok(n.ceil() as u64)
}
