//! Black-box membership oracles: the systems under verification.

mod rnn;

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::automata::{Alphabet, AutomataError, Dfa, Word};

pub use rnn::{CellKind, Layer, ModelError, Readout, RnnModel, RnnOracle, RnnState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Alphabet(#[from] AutomataError),
    #[error("non-finite value in {0}")]
    Numeric(String),
}

/// A language `L ⊆ Σ*` accessible only through membership queries.
///
/// Answers are deterministic and every call to [`membership`] adds exactly
/// one to [`queries`], also when called from several threads.
///
/// [`membership`]: LanguageOracle::membership
/// [`queries`]: LanguageOracle::queries
pub trait LanguageOracle: Send + Sync {
    fn alphabet(&self) -> &Alphabet;

    fn membership(&self, word: &Word) -> Result<bool, OracleError>;

    fn queries(&self) -> u64;
}

impl<T: LanguageOracle + ?Sized> LanguageOracle for &T {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }

    fn membership(&self, word: &Word) -> Result<bool, OracleError> {
        (**self).membership(word)
    }

    fn queries(&self) -> u64 {
        (**self).queries()
    }
}

impl<T: LanguageOracle + ?Sized> LanguageOracle for Box<T> {
    fn alphabet(&self) -> &Alphabet {
        (**self).alphabet()
    }

    fn membership(&self, word: &Word) -> Result<bool, OracleError> {
        (**self).membership(word)
    }

    fn queries(&self) -> u64 {
        (**self).queries()
    }
}

#[derive(Debug, Default)]
pub struct QueryCounter(AtomicU64);

impl QueryCounter {
    pub fn tick(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Exact oracle for a regular language.
#[derive(Debug)]
pub struct DfaOracle {
    dfa: Dfa,
    counter: QueryCounter,
}

impl DfaOracle {
    pub fn new(dfa: Dfa) -> Self {
        Self {
            dfa,
            counter: QueryCounter::default(),
        }
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }
}

impl LanguageOracle for DfaOracle {
    fn alphabet(&self) -> &Alphabet {
        self.dfa.alphabet()
    }

    fn membership(&self, word: &Word) -> Result<bool, OracleError> {
        self.counter.tick();
        Ok(self.dfa.accepts(word)?)
    }

    fn queries(&self) -> u64 {
        self.counter.get()
    }
}

/// Answers `L(base) ⊕ L(fault)`: the base language with the fault words
/// flipped.
#[derive(Debug)]
pub struct FaultInjectedOracle {
    base: Dfa,
    fault: Dfa,
    counter: QueryCounter,
}

impl FaultInjectedOracle {
    pub fn new(base: Dfa, fault: Dfa) -> Result<Self, OracleError> {
        if base.alphabet() != fault.alphabet() {
            return Err(AutomataError::AlphabetMismatch(
                base.alphabet().letters().join(" "),
                fault.alphabet().letters().join(" "),
            )
            .into());
        }
        Ok(Self {
            base,
            fault,
            counter: QueryCounter::default(),
        })
    }

    pub fn base(&self) -> &Dfa {
        &self.base
    }

    pub fn fault(&self) -> &Dfa {
        &self.fault
    }

    /// The oracle's language as an automaton.
    pub fn to_dfa(&self) -> Dfa {
        self.base
            .product(&self.fault, |a, b| a != b)
            .expect("alphabets checked at construction")
    }
}

impl LanguageOracle for FaultInjectedOracle {
    fn alphabet(&self) -> &Alphabet {
        self.base.alphabet()
    }

    fn membership(&self, word: &Word) -> Result<bool, OracleError> {
        self.counter.tick();
        Ok(self.base.accepts(word)? != self.fault.accepts(word)?)
    }

    fn queries(&self) -> u64 {
        self.counter.get()
    }
}
