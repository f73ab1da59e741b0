//! Labeled example files: one `label<TAB>token token …` line per example.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BenchError;
use crate::automata::{Alphabet, Dfa, Word};
use crate::sampling::WordDistribution;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub label: bool,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub examples: Vec<Example>,
}

impl Dataset {
    /// Words drawn from `dist`, labeled by `dfa`.
    pub fn sample(dfa: &Dfa, dist: &WordDistribution, size: usize, seed: u64) -> Result<Self, BenchError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let letters = rand::distributions::WeightedIndex::new(dist.letter_probs())
            .map_err(|e| BenchError::Invalid(e.to_string()))?;
        let alphabet = dfa.alphabet();
        let mut examples = Vec::with_capacity(size);
        for _ in 0..size {
            let (word, _) = dist.sample(&letters, &mut rng);
            examples.push(Example {
                label: dfa.accepts(&word)?,
                tokens: alphabet.spell(&word),
            });
        }
        Ok(Self { examples })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for e in &self.examples {
            let _ = writeln!(out, "{}\t{}", u8::from(e.label), e.tokens.join(" "));
        }
        out
    }

    pub fn parse_tsv(text: &str) -> Result<Self, BenchError> {
        let mut examples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: &str| BenchError::Parse {
                line: i + 1,
                message: message.to_string(),
            };
            let (label, rest) = line.split_once('\t').ok_or_else(|| err("missing tab"))?;
            let label = match label {
                "1" => true,
                "0" => false,
                _ => return Err(err("label must be 0 or 1")),
            };
            examples.push(Example {
                label,
                tokens: rest.split_whitespace().map(str::to_string).collect(),
            });
        }
        Ok(Self { examples })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BenchError> {
        std::fs::write(path, self.to_tsv())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::parse_tsv(&std::fs::read_to_string(path)?)
    }

    /// Tokens as words over `alphabet`.
    pub fn words(&self, alphabet: &Alphabet) -> Result<Vec<(Word, bool)>, BenchError> {
        self.examples
            .iter()
            .map(|e| {
                let word = e
                    .tokens
                    .iter()
                    .map(|t| {
                        alphabet
                            .index_of(t)
                            .ok_or_else(|| BenchError::Invalid(format!("unknown letter `{t}`")))
                    })
                    .collect::<Result<Word, _>>()?;
                Ok((word, e.label))
            })
            .collect()
    }
}
