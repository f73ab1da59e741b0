//! Random words: a letter distribution plus geometric termination.
//!
//! For `w = a1 … an`, `P(w) = p(a1) · … · p(an) · (1 − λ)^n · λ`, so the
//! expected length is `1/λ − 1`.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::{Dfa, Word};

pub const DEFAULT_STOP_PROB: f64 = 0.05;
pub const DEFAULT_MAX_LEN: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("letter distribution must be nonempty")]
    NoLetters,
    #[error("letter probability {0} is negative or not finite")]
    BadLetterProb(f64),
    #[error("letter probabilities sum to {0}, expected 1")]
    BadSum(f64),
    #[error("termination probability {0} must lie in (0, 1]")]
    BadStopProb(f64),
    #[error("maximum length must be positive")]
    BadMaxLen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordDistribution {
    letter_probs: Vec<f64>,
    stop_prob: f64,
    max_len: usize,
}

impl WordDistribution {
    pub fn new(letter_probs: Vec<f64>, stop_prob: f64, max_len: usize) -> Result<Self, SamplingError> {
        if letter_probs.is_empty() {
            return Err(SamplingError::NoLetters);
        }
        if let Some(&p) = letter_probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(SamplingError::BadLetterProb(p));
        }
        let sum: f64 = letter_probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(SamplingError::BadSum(sum));
        }
        if !(stop_prob > 0.0 && stop_prob <= 1.0) {
            return Err(SamplingError::BadStopProb(stop_prob));
        }
        if max_len == 0 {
            return Err(SamplingError::BadMaxLen);
        }
        Ok(Self {
            letter_probs,
            stop_prob,
            max_len,
        })
    }

    pub fn uniform(letters: usize, stop_prob: f64) -> Result<Self, SamplingError> {
        if letters == 0 {
            return Err(SamplingError::NoLetters);
        }
        Self::new(vec![1.0 / letters as f64; letters], stop_prob, DEFAULT_MAX_LEN)
    }

    pub fn with_max_len(mut self, max_len: usize) -> Result<Self, SamplingError> {
        if max_len == 0 {
            return Err(SamplingError::BadMaxLen);
        }
        self.max_len = max_len;
        Ok(self)
    }

    pub fn letter_probs(&self) -> &[f64] {
        &self.letter_probs
    }

    pub fn stop_prob(&self) -> f64 {
        self.stop_prob
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn letters(&self) -> usize {
        self.letter_probs.len()
    }

    pub fn expected_length(&self) -> f64 {
        1.0 / self.stop_prob - 1.0
    }

    /// `P(w)`; letters outside the distribution get probability 0.
    pub fn word_probability(&self, word: &[usize]) -> f64 {
        let letters: f64 = word
            .iter()
            .map(|&a| self.letter_probs.get(a).copied().unwrap_or(0.0))
            .product();
        letters * (1.0 - self.stop_prob).powi(word.len() as i32) * self.stop_prob
    }

    /// Probability that a sampled word lies in `L(dfa)`, ignoring the
    /// length cap. Letters beyond the distribution's range carry no mass.
    pub fn language_mass(&self, dfa: &Dfa) -> f64 {
        let go = 1.0 - self.stop_prob;
        let k = dfa.alphabet().len().min(self.letters());
        let mut x: Vec<f64> = vec![0.0; dfa.states()];
        // x_q = λ·[q ∈ F] + (1 − λ)·Σ_a p(a)·x_δ(q,a), a contraction with rate 1 − λ
        for _ in 0..100_000 {
            let next: Vec<f64> = (0..dfa.states())
                .map(|q| {
                    let stay = if dfa.is_accepting(q) { self.stop_prob } else { 0.0 };
                    stay + go * (0..k).map(|a| self.letter_probs[a] * x[dfa.step(q, a)]).sum::<f64>()
                })
                .collect();
            let delta = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            x = next;
            if delta < 1e-15 {
                break;
            }
        }
        x[dfa.initial()]
    }

    /// Draws one word, reporting whether the length cap cut it short.
    pub fn sample<R: Rng + ?Sized>(&self, letters: &WeightedIndex<f64>, rng: &mut R) -> (Word, bool) {
        let mut word = Word::empty();
        loop {
            if rng.gen_bool(self.stop_prob) {
                return (word, false);
            }
            if word.len() == self.max_len {
                return (word, true);
            }
            word.push(letters.sample(rng));
        }
    }

    fn letter_index(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.letter_probs).expect("validated letter distribution")
    }
}

/// Seed for worker `index` derived from a master seed (SplitMix64 mix).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded stream of words with sampling counters.
#[derive(Debug, Clone)]
pub struct WordSampler {
    dist: WordDistribution,
    letters: WeightedIndex<f64>,
    rng: ChaCha8Rng,
    sampled: u64,
    truncated: u64,
}

impl WordSampler {
    pub fn new(dist: WordDistribution, seed: u64) -> Self {
        let letters = dist.letter_index();
        Self {
            dist,
            letters,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sampled: 0,
            truncated: 0,
        }
    }

    pub fn sample_word(&mut self) -> Word {
        let (word, truncated) = self.dist.sample(&self.letters, &mut self.rng);
        self.sampled += 1;
        self.truncated += u64::from(truncated);
        word
    }

    pub fn distribution(&self) -> &WordDistribution {
        &self.dist
    }

    pub fn sampled(&self) -> u64 {
        self.sampled
    }

    pub fn truncated(&self) -> u64 {
        self.truncated
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

impl Iterator for WordSampler {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        Some(self.sample_word())
    }
}
