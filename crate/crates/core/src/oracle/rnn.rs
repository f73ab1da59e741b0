//! Recurrent binary classifiers loaded from `rnn v1` JSON files.
//!
//! Inference runs in `f64`. Letters are one-hot encoded unless the file
//! carries an embedding matrix (one row per letter). The accept decision is
//! `sigmoid(w · h + b) ≥ threshold` on the last layer's hidden state.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LanguageOracle, OracleError, QueryCounter};
use crate::automata::{Alphabet, AutomataError, Word};

const FORMAT: &str = "rnn v1";
// prefix states cached per oracle; words longer than this are not cached
const CACHE_MAX_LEN: usize = 24;
const CACHE_MAX_ENTRIES: usize = 1 << 18;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format `{0}`, expected `rnn v1`")]
    Format(String),
    #[error("alphabet: {0}")]
    Alphabet(#[from] AutomataError),
    #[error("{field}: {message}")]
    Dimension { field: String, message: String },
    #[error("{0}: non-finite weight")]
    NonFinite(String),
}

fn dim_err(field: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Dimension {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    /// `h' = tanh(W_rec h + W_in x + b)`
    Elman,
    /// Four stacked gates in the order input, forget, cell, output.
    Lstm,
}

impl CellKind {
    fn gates(self) -> usize {
        match self {
            CellKind::Elman => 1,
            CellKind::Lstm => 4,
        }
    }
}

/// One recurrent layer; matrices are row-major with `gates * hidden` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub w_in: Vec<Vec<f64>>,
    pub w_rec: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl Layer {
    fn hidden(&self, cell: CellKind) -> usize {
        self.b.len() / cell.gates()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub w: Vec<f64>,
    pub b: f64,
    #[serde(default = "half")]
    pub threshold: f64,
}

fn half() -> f64 {
    0.5
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    cell: CellKind,
    alphabet: Vec<String>,
    layers: Vec<Layer>,
    h0: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c0: Option<Vec<Vec<f64>>>,
    readout: Readout,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Vec<Vec<f64>>>,
}

/// Hidden (and, for LSTM, cell) state of every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnnModel {
    cell: CellKind,
    alphabet: Alphabet,
    layers: Vec<Layer>,
    h0: Vec<Vec<f64>>,
    c0: Vec<Vec<f64>>,
    readout: Readout,
    embedding: Option<Vec<Vec<f64>>>,
}

fn check_matrix(field: &str, m: &[Vec<f64>], rows: usize, cols: usize) -> Result<(), ModelError> {
    if m.len() != rows {
        return Err(dim_err(field, format!("has {} rows, expected {rows}", m.len())));
    }
    if let Some((i, row)) = m.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(dim_err(
            field,
            format!("row {i} has {} columns, expected {cols}", row.len()),
        ));
    }
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite(field.to_string()));
    }
    Ok(())
}

fn check_vector(field: &str, v: &[f64], len: usize) -> Result<(), ModelError> {
    if v.len() != len {
        return Err(dim_err(field, format!("has length {}, expected {len}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(ModelError::NonFinite(field.to_string()));
    }
    Ok(())
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn mat_vec_add(out: &mut [f64], m: &[Vec<f64>], v: &[f64]) {
    for (o, row) in out.iter_mut().zip(m) {
        *o += row.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    }
}

impl RnnModel {
    /// Validates dimensions and finiteness. `c0` defaults to zeros for LSTM
    /// cells and is ignored for Elman cells.
    pub fn new(
        cell: CellKind,
        alphabet: Alphabet,
        layers: Vec<Layer>,
        h0: Vec<Vec<f64>>,
        c0: Option<Vec<Vec<f64>>>,
        readout: Readout,
        embedding: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, ModelError> {
        if layers.is_empty() {
            return Err(dim_err("layers", "at least one layer is required"));
        }
        let gates = cell.gates();
        let mut input = alphabet.len();
        if let Some(emb) = &embedding {
            let width = emb.first().map_or(0, Vec::len);
            if width == 0 {
                return Err(dim_err("embedding", "must have positive width"));
            }
            check_matrix("embedding", emb, alphabet.len(), width)?;
            input = width;
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.b.is_empty() || layer.b.len() % gates != 0 {
                return Err(dim_err(
                    format!("layer {l}.b"),
                    format!("has length {}, expected a positive multiple of {gates}", layer.b.len()),
                ));
            }
            let hidden = layer.b.len() / gates;
            check_vector(&format!("layer {l}.b"), &layer.b, gates * hidden)?;
            check_matrix(&format!("layer {l}.w_in"), &layer.w_in, gates * hidden, input)?;
            check_matrix(&format!("layer {l}.w_rec"), &layer.w_rec, gates * hidden, hidden)?;
            input = hidden;
        }
        if h0.len() != layers.len() {
            return Err(dim_err("h0", format!("has {} layers, expected {}", h0.len(), layers.len())));
        }
        for (l, (h, layer)) in h0.iter().zip(&layers).enumerate() {
            check_vector(&format!("h0[{l}]"), h, layer.hidden(cell))?;
        }
        let c0 = match cell {
            CellKind::Elman => Vec::new(),
            CellKind::Lstm => {
                let c0 = c0.unwrap_or_else(|| {
                    layers.iter().map(|l| vec![0.0; l.hidden(cell)]).collect()
                });
                if c0.len() != layers.len() {
                    return Err(dim_err("c0", format!("has {} layers, expected {}", c0.len(), layers.len())));
                }
                for (l, (c, layer)) in c0.iter().zip(&layers).enumerate() {
                    check_vector(&format!("c0[{l}]"), c, layer.hidden(cell))?;
                }
                c0
            }
        };
        check_vector("readout.w", &readout.w, input)?;
        if !readout.b.is_finite() {
            return Err(ModelError::NonFinite("readout.b".into()));
        }
        if !(readout.threshold > 0.0 && readout.threshold < 1.0) {
            return Err(dim_err("readout.threshold", "must lie in (0, 1)"));
        }
        Ok(Self {
            cell,
            alphabet,
            layers,
            h0,
            c0,
            readout,
            embedding,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT {
            return Err(ModelError::Format(file.format));
        }
        let alphabet = Alphabet::new(file.alphabet)?;
        Self::new(
            file.cell,
            alphabet,
            file.layers,
            file.h0,
            file.c0,
            file.readout,
            file.embedding,
        )
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: FORMAT.to_string(),
            cell: self.cell,
            alphabet: self.alphabet.letters().to_vec(),
            layers: self.layers.clone(),
            h0: self.h0.clone(),
            c0: (self.cell == CellKind::Lstm).then(|| self.c0.clone()),
            readout: self.readout.clone(),
            embedding: self.embedding.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn cell(&self) -> CellKind {
        self.cell
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(|l| l.hidden(self.cell)).collect()
    }

    pub fn initial_state(&self) -> RnnState {
        RnnState {
            h: self.h0.clone(),
            c: self.c0.clone(),
        }
    }

    /// Applies one letter to every layer.
    pub fn step(&self, state: &RnnState, letter: usize) -> Result<RnnState, OracleError> {
        self.alphabet.check(&Word::new(vec![letter]))?;
        let sizes = self.hidden_sizes();
        if state.h.len() != sizes.len()
            || state.h.iter().zip(&sizes).any(|(h, &n)| h.len() != n)
            || (self.cell == CellKind::Lstm
                && (state.c.len() != sizes.len()
                    || state.c.iter().zip(&sizes).any(|(c, &n)| c.len() != n)))
        {
            return Err(OracleError::Numeric("state dimensions do not match the model".into()));
        }

        let mut next = RnnState {
            h: Vec::with_capacity(self.layers.len()),
            c: Vec::with_capacity(state.c.len()),
        };
        for (l, layer) in self.layers.iter().enumerate() {
            let hidden = sizes[l];
            let mut z = layer.b.clone();
            if l == 0 {
                match &self.embedding {
                    None => {
                        for (zi, row) in z.iter_mut().zip(&layer.w_in) {
                            *zi += row[letter];
                        }
                    }
                    Some(emb) => mat_vec_add(&mut z, &layer.w_in, &emb[letter]),
                }
            } else {
                mat_vec_add(&mut z, &layer.w_in, &next.h[l - 1]);
            }
            mat_vec_add(&mut z, &layer.w_rec, &state.h[l]);

            match self.cell {
                CellKind::Elman => next.h.push(z.iter().map(|x| x.tanh()).collect()),
                CellKind::Lstm => {
                    let (mut h, mut c) = (vec![0.0; hidden], vec![0.0; hidden]);
                    for j in 0..hidden {
                        let i = sigmoid(z[j]);
                        let f = sigmoid(z[hidden + j]);
                        let g = z[2 * hidden + j].tanh();
                        let o = sigmoid(z[3 * hidden + j]);
                        c[j] = f * state.c[l][j] + i * g;
                        h[j] = o * c[j].tanh();
                    }
                    next.h.push(h);
                    next.c.push(c);
                }
            }
            let finite = next.h[l].iter().chain(next.c.get(l).into_iter().flatten());
            if finite.into_iter().any(|x| !x.is_finite()) {
                return Err(OracleError::Numeric(format!("layer {l}")));
            }
        }
        Ok(next)
    }

    pub fn run(&self, word: &[usize]) -> Result<RnnState, OracleError> {
        word.iter()
            .try_fold(self.initial_state(), |s, &a| self.step(&s, a))
    }

    pub fn logit_of(&self, state: &RnnState) -> f64 {
        let last = state.h.last().expect("at least one layer");
        self.readout.w.iter().zip(last).map(|(w, h)| w * h).sum::<f64>() + self.readout.b
    }

    pub fn logit(&self, word: &[usize]) -> Result<f64, OracleError> {
        Ok(self.logit_of(&self.run(word)?))
    }

    /// `sigmoid(logit) ≥ threshold`, evaluated as a logit comparison.
    pub fn accepts_state(&self, state: &RnnState) -> bool {
        let t = self.readout.threshold;
        self.logit_of(state) >= (t / (1.0 - t)).ln()
    }

    pub fn classify(&self, word: &[usize]) -> Result<bool, OracleError> {
        Ok(self.accepts_state(&self.run(word)?))
    }
}

/// Membership oracle backed by an RNN, caching hidden states of short
/// prefixes. The cache only saves work; answers are bit-identical.
#[derive(Debug)]
pub struct RnnOracle {
    model: RnnModel,
    counter: QueryCounter,
    cache: Mutex<HashMap<Vec<usize>, RnnState>>,
}

impl RnnOracle {
    pub fn new(model: RnnModel) -> Self {
        Self {
            model,
            counter: QueryCounter::default(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &RnnModel {
        &self.model
    }
}

impl LanguageOracle for RnnOracle {
    fn alphabet(&self) -> &Alphabet {
        self.model.alphabet()
    }

    fn membership(&self, word: &Word) -> Result<bool, OracleError> {
        self.counter.tick();
        self.model.alphabet().check(word)?;
        let mut cache = self.cache.lock().expect("cache lock");
        let (mut start, mut state) = (0, self.model.initial_state());
        for len in (1..=word.len().min(CACHE_MAX_LEN)).rev() {
            if let Some(s) = cache.get(&word[..len]) {
                (start, state) = (len, s.clone());
                break;
            }
        }
        if cache.len() > CACHE_MAX_ENTRIES {
            cache.clear();
        }
        for i in start..word.len() {
            state = self.model.step(&state, word[i])?;
            if i < CACHE_MAX_LEN {
                cache.insert(word[..=i].to_vec(), state.clone());
            }
        }
        Ok(self.model.accepts_state(&state))
    }

    fn queries(&self) -> u64 {
        self.counter.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_unit(readout_b: f64) -> RnnModel {
        RnnModel::new(
            CellKind::Elman,
            Alphabet::latin(1).unwrap(),
            vec![Layer {
                w_in: vec![vec![1.0]],
                w_rec: vec![vec![0.5]],
                b: vec![0.0],
            }],
            vec![vec![0.0]],
            None,
            Readout {
                w: vec![1.0],
                b: readout_b,
                threshold: 0.5,
            },
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_stay_zero() {
        let m = RnnModel::new(
            CellKind::Elman,
            Alphabet::latin(2).unwrap(),
            vec![Layer {
                w_in: vec![vec![0.0; 2]; 3],
                w_rec: vec![vec![0.0; 3]; 3],
                b: vec![0.0; 3],
            }],
            vec![vec![0.3, -0.2, 0.9]],
            None,
            Readout {
                w: vec![0.0; 3],
                b: -0.5,
                threshold: 0.5,
            },
            None,
        )
        .unwrap();
        let s = m.step(&m.initial_state(), 1).unwrap();
        assert_eq!(s.h, vec![vec![0.0; 3]]);
        assert!(!m.classify(&[]).unwrap());
        assert!(!m.classify(&[0, 1, 1]).unwrap());
    }

    #[test]
    fn hand_computed_elman_steps() {
        let m = one_unit(-0.5);
        let s1 = m.step(&m.initial_state(), 0).unwrap();
        assert!((s1.h[0][0] - 0.761594).abs() < 1e-6);
        let s2 = m.step(&s1, 0).unwrap();
        // tanh(0.5 · tanh(1) + 1) = tanh(1.380797) = 0.881130
        assert!((s2.h[0][0] - 0.881130).abs() < 1e-6);
        assert!((m.logit(&[]).unwrap() + 0.5).abs() < 1e-15);
        assert!(!m.classify(&[]).unwrap());
        assert!((m.logit(&[0]).unwrap() - 0.261594).abs() < 1e-6);
        assert!(m.classify(&[0]).unwrap());
    }

    #[test]
    fn lstm_matches_gate_formulas() {
        // one unit, one letter; gate pre-activations are w_in + w_rec·h + b
        let m = RnnModel::new(
            CellKind::Lstm,
            Alphabet::latin(1).unwrap(),
            vec![Layer {
                w_in: vec![vec![0.5], vec![-0.3], vec![0.8], vec![0.1]],
                w_rec: vec![vec![0.2], vec![0.4], vec![-0.6], vec![0.7]],
                b: vec![0.0, 1.0, 0.0, -0.2],
            }],
            vec![vec![0.1]],
            Some(vec![vec![0.3]]),
            Readout {
                w: vec![2.0],
                b: 0.0,
                threshold: 0.5,
            },
            None,
        )
        .unwrap();
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let (h, c) = (0.1f64, 0.3f64);
        let i = sig(0.5 + 0.2 * h);
        let f = sig(-0.3 + 0.4 * h + 1.0);
        let g = (0.8 - 0.6 * h).tanh();
        let o = sig(0.1 + 0.7 * h - 0.2);
        let c1 = f * c + i * g;
        let h1 = o * c1.tanh();
        let s = m.step(&m.initial_state(), 0).unwrap();
        assert!((s.c[0][0] - c1).abs() < 1e-15);
        assert!((s.h[0][0] - h1).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let m = one_unit(-0.5);
        let back = RnnModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(RnnModel::load(&path).unwrap(), m);
    }

    #[test]
    fn dimension_error_names_layer() {
        let text = r#"{"format":"rnn v1","cell":"elman","alphabet":["a","b"],
            "layers":[{"w_in":[[1,0],[0,1]],"w_rec":[[0.5,0,0],[0,0.5,0]],"b":[0,0]}],
            "h0":[[0,0]],"readout":{"w":[1,1],"b":0,"threshold":0.5}}"#;
        let err = RnnModel::from_json(text).unwrap_err();
        assert!(err.to_string().starts_with("layer 0.w_rec"), "{err}");
    }

    #[test]
    fn rejects_wrong_format_and_threshold() {
        let m = one_unit(0.0);
        let text = m.to_json().replace("rnn v1", "rnn v2");
        assert!(matches!(RnnModel::from_json(&text), Err(ModelError::Format(_))));
        let text = m.to_json().replace("\"threshold\": 0.5", "\"threshold\": 1.5");
        assert!(RnnModel::from_json(&text).unwrap_err().to_string().contains("threshold"));
        assert!(matches!(RnnModel::from_json("{"), Err(ModelError::Json(_))));
    }

    #[test]
    fn embedding_replaces_one_hot() {
        // embedding row for letter b is [0, 1], so b behaves like one-hot b
        let layer = Layer {
            w_in: vec![vec![1.0, -1.0]],
            w_rec: vec![vec![0.0]],
            b: vec![0.0],
        };
        let readout = Readout {
            w: vec![1.0],
            b: 0.0,
            threshold: 0.5,
        };
        let plain = RnnModel::new(
            CellKind::Elman,
            Alphabet::latin(2).unwrap(),
            vec![layer.clone()],
            vec![vec![0.0]],
            None,
            readout.clone(),
            None,
        )
        .unwrap();
        let embedded = RnnModel::new(
            CellKind::Elman,
            Alphabet::latin(2).unwrap(),
            vec![layer],
            vec![vec![0.0]],
            None,
            readout,
            Some(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        )
        .unwrap();
        for w in [vec![0], vec![1], vec![0, 1, 1]] {
            assert_eq!(plain.logit(&w).unwrap(), embedded.logit(&w).unwrap());
        }
    }

    #[test]
    fn numeric_overflow_is_reported() {
        // b + w_in overflows to +inf and w_rec·h to -inf, so the sum is NaN
        let m = RnnModel::new(
            CellKind::Elman,
            Alphabet::latin(1).unwrap(),
            vec![Layer {
                w_in: vec![vec![1e308]; 2],
                w_rec: vec![vec![1e308; 2]; 2],
                b: vec![1e308; 2],
            }],
            vec![vec![-1.0, -1.0]],
            None,
            Readout {
                w: vec![1.0, 1.0],
                b: 0.0,
                threshold: 0.5,
            },
            None,
        )
        .unwrap();
        assert!(matches!(m.classify(&[0]), Err(OracleError::Numeric(_))));
    }

    #[test]
    fn prefix_incremental_and_cached() {
        let m = one_unit(-0.9);
        let o = RnnOracle::new(m.clone());
        for n in 0..40 {
            let w = Word::new(vec![0; n]);
            assert_eq!(o.membership(&w).unwrap(), m.classify(&w).unwrap());
            let prefix_state = m.run(&w[..n.saturating_sub(1)]).unwrap();
            let incremental = if n == 0 {
                prefix_state
            } else {
                m.step(&prefix_state, 0).unwrap()
            };
            assert_eq!(incremental, m.run(&w).unwrap());
        }
        assert_eq!(o.queries(), 40);
    }
}
