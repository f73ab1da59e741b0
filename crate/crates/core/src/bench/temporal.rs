//! Temporal contact networks, time-respecting paths, and the contact
//! sequence datasets derived from them.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, Example};
use super::BenchError;
use crate::automata::{Alphabet, Dfa};

pub const MIN_PATH_LEN: usize = 5;
pub const MAX_PATH_LEN: usize = 15;

const NEGATIVE_ATTEMPTS: usize = 1000;

/// Undirected edges labeled with contact times.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemporalNetwork {
    names: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<(u64, usize, usize)>,
    /// Sorted contact times per unordered pair `(min, max)`.
    times: HashMap<(usize, usize), Vec<u64>>,
}

fn pair(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

impl TemporalNetwork {
    /// Parses `t u v` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut net = TemporalNetwork::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| BenchError::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [t, u, v] = fields[..] else {
                return Err(err(format!("expected `t u v`, got {} fields", fields.len())));
            };
            let t: u64 = t
                .parse()
                .map_err(|_| err(format!("timestamp `{t}` is not a nonnegative integer")))?;
            if u == v {
                return Err(err(format!("self-loop on `{u}`")));
            }
            net.add_edge(t, u, v);
        }
        Ok(net)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    fn add_edge(&mut self, t: u64, u: &str, v: &str) {
        let (u, v) = (self.vertex(u), self.vertex(v));
        self.edges.push((t, u, v));
        let times = self.times.entry(pair(u, v)).or_default();
        let at = times.partition_point(|&x| x < t);
        times.insert(at, t);
    }

    pub fn vertices(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[(u64, usize, usize)] {
        &self.edges
    }

    pub fn vertex_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    fn ids(&self, path: &[&str]) -> Result<Vec<usize>, BenchError> {
        path.iter()
            .map(|n| self.vertex_id(n).ok_or_else(|| BenchError::UnknownVertex(n.to_string())))
            .collect()
    }

    /// Whether `path` can be traversed along contacts with strictly
    /// increasing times.
    pub fn time_respecting(&self, path: &[&str]) -> Result<bool, BenchError> {
        Ok(self.time_respecting_ids(&self.ids(path)?))
    }

    /// Greedy scan: each step takes the earliest contact later than the
    /// previous one. By induction the greedy time at every step is no later
    /// than in any feasible assignment, so it never rules out a continuation.
    pub fn time_respecting_ids(&self, path: &[usize]) -> bool {
        let mut last: Option<u64> = None;
        for step in path.windows(2) {
            let Some(times) = self.times.get(&pair(step[0], step[1])) else {
                return false;
            };
            let from = match last {
                None => 0,
                Some(t) => times.partition_point(|&x| x <= t),
            };
            match times.get(from) {
                Some(&t) => last = Some(t),
                None => return false,
            }
        }
        true
    }

    /// Accepts every walk of the static graph: contact times are ignored.
    ///
    /// States are one start state, one per vertex, and a dead state.
    pub fn path_spec_dfa(&self) -> Result<Dfa, BenchError> {
        let alphabet = Alphabet::new(self.names.iter().map(String::as_str))?;
        let n = self.vertices();
        let (start, dead) = (n, n + 1);
        let mut accepting = vec![true; n + 2];
        accepting[dead] = false;
        // states 0..n are the vertices, so a letter leads to its own state
        let dfa = Dfa::from_fn(alphabet, start, accepting, |q, v| {
            if q == start || (q < n && self.times.contains_key(&pair(q, v))) {
                v
            } else {
                dead
            }
        })?;
        Ok(dfa)
    }

    /// Longest time-respecting walk, in edges, that starts with each
    /// directed contact `(t, u → v)`.
    fn walk_lengths(&self) -> (Vec<(u64, usize, usize)>, Vec<usize>) {
        let mut directed: Vec<(u64, usize, usize)> = self
            .edges
            .iter()
            .flat_map(|&(t, u, v)| [(t, u, v), (t, v, u)])
            .collect();
        directed.sort_unstable();
        directed.dedup();
        let mut longest = vec![0; directed.len()];
        // best walk length leaving each vertex strictly after the current time
        let mut best_from = vec![0usize; self.vertices()];
        let mut hi = directed.len();
        while hi > 0 {
            let t = directed[hi - 1].0;
            let lo = directed[..hi].partition_point(|e| e.0 < t);
            for i in lo..hi {
                longest[i] = 1 + best_from[directed[i].2];
            }
            for i in lo..hi {
                let u = directed[i].1;
                best_from[u] = best_from[u].max(longest[i]);
            }
            hi = lo;
        }
        (directed, longest)
    }
}

/// Samples time-respecting walks of a requested vertex count.
struct WalkSampler<'n> {
    net: &'n TemporalNetwork,
    directed: Vec<(u64, usize, usize)>,
    longest: Vec<usize>,
    /// Indices into `directed` per source vertex, in time order.
    out: Vec<Vec<usize>>,
}

impl<'n> WalkSampler<'n> {
    fn new(net: &'n TemporalNetwork) -> Self {
        let (directed, longest) = net.walk_lengths();
        let mut out = vec![Vec::new(); net.vertices()];
        for (i, e) in directed.iter().enumerate() {
            out[e.1].push(i);
        }
        Self {
            net,
            directed,
            longest,
            out,
        }
    }

    /// Most vertices on any time-respecting walk.
    fn max_vertices(&self) -> usize {
        self.longest.iter().max().map_or(0, |l| l + 1)
    }

    fn sample<R: Rng>(&self, vertices: usize, rng: &mut R) -> Vec<usize> {
        let need = vertices - 1;
        let starts: Vec<usize> = (0..self.directed.len())
            .filter(|&i| self.longest[i] >= need)
            .collect();
        let mut e = *starts.choose(rng).expect("caller checked max_vertices");
        let mut walk = vec![self.directed[e].1, self.directed[e].2];
        while walk.len() < vertices {
            let (t, _, v) = self.directed[e];
            let remaining = vertices - walk.len();
            let next: Vec<usize> = self.out[v]
                .iter()
                .copied()
                .filter(|&f| self.directed[f].0 > t && self.longest[f] >= remaining)
                .collect();
            e = *next.choose(rng).expect("longest walk guarantees a continuation");
            walk.push(self.directed[e].2);
        }
        debug_assert!(self.net.time_respecting_ids(&walk));
        walk
    }
}

/// Training and test sizes for a network with `edges` contacts.
pub fn contact_sizes(edges: usize) -> (usize, usize) {
    let train = 2 * edges;
    (train, train.div_ceil(5))
}

/// Balanced contact-sequence datasets: time-respecting walks with 5 to 15
/// vertices labeled 1, and the same walks with one interior vertex replaced
/// so that they stop being time-respecting labeled 0.
///
/// Walks are capped at the longest walk the network admits.
pub fn contact_dataset(net: &TemporalNetwork, seed: u64) -> Result<(Dataset, Dataset), BenchError> {
    let sampler = WalkSampler::new(net);
    let longest = sampler.max_vertices();
    if longest < MIN_PATH_LEN {
        return Err(BenchError::NetworkTooSmall {
            longest,
            needed: MIN_PATH_LEN,
        });
    }
    let max_len = longest.min(MAX_PATH_LEN);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (train, test) = contact_sizes(net.edges().len());
    let mut make = |size: usize| -> Result<Dataset, BenchError> {
        let mut examples = Vec::with_capacity(size);
        for i in 0..size {
            let positive = i % 2 == 0;
            let len = rng.gen_range(MIN_PATH_LEN..=max_len);
            let mut walk = sampler.sample(len, &mut rng);
            if !positive {
                walk = break_walk(net, &sampler, walk, &mut rng)?;
            }
            assert_eq!(net.time_respecting_ids(&walk), positive);
            examples.push(Example {
                label: positive,
                tokens: walk.iter().map(|&v| net.names()[v].clone()).collect(),
            });
        }
        examples.shuffle(&mut rng);
        Ok(Dataset { examples })
    };
    let train = make(train)?;
    let test = make(test)?;
    Ok((train, test))
}

/// Replaces one interior vertex so the walk is no longer time-respecting,
/// drawing fresh walks if a walk resists.
fn break_walk<R: Rng>(
    net: &TemporalNetwork,
    sampler: &WalkSampler<'_>,
    mut walk: Vec<usize>,
    rng: &mut R,
) -> Result<Vec<usize>, BenchError> {
    let n = net.vertices();
    for _ in 0..NEGATIVE_ATTEMPTS {
        let mut broken = walk.clone();
        let at = rng.gen_range(1..walk.len() - 1);
        broken[at] = rng.gen_range(0..n);
        if !net.time_respecting_ids(&broken) {
            return Ok(broken);
        }
        if rng.gen_bool(0.01) {
            walk = sampler.sample(walk.len(), rng);
        }
    }
    Err(BenchError::Unbreakable)
}
