//! Synthetic benchmark instances: a random ground-truth DFA, specifications
//! derived from it, labeled datasets, and optionally an injected fault.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::BenchError;
use crate::automata::{derive_specs, random_dfa, Alphabet, Dfa, SpecMode};
use crate::oracle::{DfaOracle, FaultInjectedOracle, LanguageOracle, RnnModel, RnnOracle};
use crate::sampling::{derive_seed, WordDistribution, DEFAULT_STOP_PROB};

pub const MANIFEST_FORMAT: &str = "manifest v1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Shape of `u · ℓ* · v` fault patterns; lengths are drawn uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FaultShape {
    pub prefix_max: usize,
    pub loop_min: usize,
    pub loop_max: usize,
    /// Suffix length is drawn from `1..=suffix_max`.
    pub suffix_max: usize,
}

impl Default for FaultShape {
    fn default() -> Self {
        Self {
            prefix_max: 2,
            loop_min: 2,
            loop_max: 4,
            suffix_max: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub count: usize,
    pub n_max: usize,
    pub alphabet_size: usize,
    pub specs_per_dfa: usize,
    pub spec_mode: SpecMode,
    pub train_size: usize,
    pub test_size: usize,
    pub stop_prob: f64,
    /// Inject a loop-shaped fault outside every spec; the oracle becomes the
    /// ground truth with the fault words flipped. The more specs, the more
    /// draws end up with no such word and are re-rolled.
    pub fault: Option<FaultShape>,
    pub max_rerolls: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            count: 30,
            n_max: 30,
            alphabet_size: 5,
            specs_per_dfa: 5,
            spec_mode: SpecMode::default(),
            train_size: 2000,
            test_size: 400,
            stop_prob: DEFAULT_STOP_PROB,
            fault: None,
            max_rerolls: 100,
        }
    }
}

impl BenchConfig {
    fn validate(&self) -> Result<(), BenchError> {
        if self.count == 0 || self.n_max == 0 || self.alphabet_size == 0 {
            return Err(BenchError::Invalid(
                "count, n_max and alphabet_size must be positive".into(),
            ));
        }
        if !(1..=5).contains(&self.specs_per_dfa) {
            return Err(BenchError::Invalid("specs_per_dfa must lie in 1..=5".into()));
        }
        if let Some(f) = &self.fault {
            if f.loop_min == 0 || f.loop_min > f.loop_max || f.suffix_max == 0 {
                return Err(BenchError::Invalid(format!("bad fault shape {f:?}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OracleSpec {
    /// The ground-truth DFA itself.
    Dfa,
    Xor { fault: String },
    Rnn { model: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEntry {
    pub id: String,
    pub ground: String,
    pub oracle: OracleSpec,
    pub specs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<String>,
}

/// Index of generated instances; paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub seed: u64,
    pub config: BenchConfig,
    pub instances: Vec<InstanceEntry>,
    #[serde(skip)]
    pub root: PathBuf,
}

/// One instance with its artifacts loaded.
pub struct LoadedInstance {
    pub id: String,
    pub ground: Dfa,
    pub oracle: Box<dyn LanguageOracle>,
    pub specs: Vec<Dfa>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let mut m: Manifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if m.format != MANIFEST_FORMAT {
            return Err(BenchError::Invalid(format!(
                "unsupported manifest format `{}`",
                m.format
            )));
        }
        m.root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(m)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf, BenchError> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }

    fn dfa(&self, rel: &str) -> Result<Dfa, BenchError> {
        let text = std::fs::read_to_string(self.root.join(rel))?;
        Ok(Dfa::parse(&text)?)
    }

    pub fn instantiate(&self, index: usize) -> Result<LoadedInstance, BenchError> {
        let entry = &self.instances[index];
        let ground = self.dfa(&entry.ground)?;
        let specs = entry
            .specs
            .iter()
            .map(|s| self.dfa(s))
            .collect::<Result<Vec<_>, _>>()?;
        let oracle: Box<dyn LanguageOracle> = match &entry.oracle {
            OracleSpec::Dfa => Box::new(DfaOracle::new(ground.clone())),
            OracleSpec::Xor { fault } => {
                Box::new(FaultInjectedOracle::new(ground.clone(), self.dfa(fault)?)?)
            }
            OracleSpec::Rnn { model } => {
                Box::new(RnnOracle::new(RnnModel::load(self.root.join(model))?))
            }
        };
        let sigma = ground.alphabet();
        if oracle.alphabet() != sigma || specs.iter().any(|s| s.alphabet() != sigma) {
            return Err(BenchError::Invalid(format!(
                "instance {}: artifacts disagree on the alphabet",
                entry.id
            )));
        }
        Ok(LoadedInstance {
            id: entry.id.clone(),
            ground,
            oracle,
            specs,
        })
    }
}

/// A fault `u · ℓ* · v` restricted to words outside every spec, or `None`
/// when the drawn pattern has no such word.
pub fn loop_fault<R: Rng>(specs: &[Dfa], shape: &FaultShape, rng: &mut R) -> Option<Dfa> {
    let sigma = specs.first()?.alphabet().clone();
    let k = sigma.len();
    let prefix_len = rng.gen_range(0..=shape.prefix_max);
    let loop_len = rng.gen_range(shape.loop_min..=shape.loop_max);
    let suffix_len = rng.gen_range(1..=shape.suffix_max);
    let mut draw = |len: usize| -> Vec<usize> { (0..len).map(|_| rng.gen_range(0..k)).collect() };
    let prefix = draw(prefix_len);
    let repeated = draw(loop_len);
    let mut suffix = draw(suffix_len);
    if k > 1 && suffix[0] == repeated[0] {
        suffix[0] = (suffix[0] + 1 + rng.gen_range(0..k - 1)) % k;
    }
    let pattern = Dfa::from_loop_pattern(sigma, &prefix, &repeated, &suffix).ok()?;
    let mut allowed = specs[0].clone();
    for s in &specs[1..] {
        allowed = allowed.product(s, |a, b| a || b).ok()?;
    }
    let fault = pattern.product(&allowed, |p, a| p && !a).ok()?.minimize();
    (!fault.is_empty_language()).then_some(fault)
}

struct Drawn {
    ground: Dfa,
    specs: Vec<Dfa>,
    fault: Option<Dfa>,
}

fn draw_instance(cfg: &BenchConfig, sigma: &Alphabet, seed: u64) -> Option<Drawn> {
    let ground = random_dfa(cfg.n_max, sigma, derive_seed(seed, 0));
    let specs = derive_specs(&ground, cfg.specs_per_dfa, derive_seed(seed, 1), cfg.spec_mode);
    if specs.is_empty() {
        return None;
    }
    let fault = match &cfg.fault {
        None => None,
        Some(shape) => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));
            Some(loop_fault(&specs, shape, &mut rng)?)
        }
    };
    Some(Drawn {
        ground,
        specs,
        fault,
    })
}

/// Writes `cfg.count` instances and `manifest.json` under `out_dir`.
pub fn gen_benchmark(cfg: &BenchConfig, seed: u64, out_dir: impl AsRef<Path>) -> Result<Manifest, BenchError> {
    cfg.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let sigma = Alphabet::latin(cfg.alphabet_size)?;
    let dist = WordDistribution::uniform(cfg.alphabet_size, cfg.stop_prob)
        .map_err(|e| BenchError::Invalid(e.to_string()))?;
    let mut instances = Vec::with_capacity(cfg.count);
    for i in 0..cfg.count {
        let id = format!("inst_{i:03}");
        let base_seed = derive_seed(seed, i as u64);
        let drawn = (0..cfg.max_rerolls as u64)
            .find_map(|attempt| draw_instance(cfg, &sigma, derive_seed(base_seed, attempt)))
            .ok_or_else(|| BenchError::Rerolls(id.clone(), cfg.max_rerolls))?;
        let dir = out_dir.join(&id);
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("ground.dfa"), drawn.ground.to_text())?;
        let mut specs = Vec::new();
        for (j, s) in drawn.specs.iter().enumerate() {
            let name = format!("spec_{j}.dfa");
            std::fs::write(dir.join(&name), s.to_text())?;
            specs.push(format!("{id}/{name}"));
        }
        let oracle = match &drawn.fault {
            None => OracleSpec::Dfa,
            Some(f) => {
                std::fs::write(dir.join("fault.dfa"), f.to_text())?;
                OracleSpec::Xor {
                    fault: format!("{id}/fault.dfa"),
                }
            }
        };
        let data_seed = derive_seed(base_seed, u64::MAX);
        Dataset::sample(&drawn.ground, &dist, cfg.train_size, derive_seed(data_seed, 0))?
            .save(dir.join("train.tsv"))?;
        Dataset::sample(&drawn.ground, &dist, cfg.test_size, derive_seed(data_seed, 1))?
            .save(dir.join("test.tsv"))?;
        instances.push(InstanceEntry {
            id: id.clone(),
            ground: format!("{id}/ground.dfa"),
            oracle,
            specs,
            train: Some(format!("{id}/train.tsv")),
            test: Some(format!("{id}/test.tsv")),
        });
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        seed,
        config: cfg.clone(),
        instances,
        root: out_dir.to_path_buf(),
    };
    manifest.save(out_dir)?;
    Ok(manifest)
}
