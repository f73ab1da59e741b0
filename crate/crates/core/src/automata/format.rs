//! `dfa v1` text format and GraphViz export.
//!
//! ```text
//! dfa v1
//! alphabet: a b
//! states: 2
//! initial: 0
//! accepting: 1
//! 0 a 1
//! 0 b 0
//! 1 a 0
//! 1 b 1
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{Alphabet, AutomataError, Dfa, StateId};

const HEADER: &str = "dfa v1";

fn parse_err(line: usize, message: impl Into<String>) -> AutomataError {
    AutomataError::Parse {
        line,
        message: message.into(),
    }
}

fn field<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str), AutomataError> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| parse_err(0, format!("missing `{key}:` line")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(':'))
        .ok_or_else(|| parse_err(no, format!("expected `{key}:`")))?;
    Ok((no, rest.trim()))
}

fn number(no: usize, text: &str, what: &str) -> Result<usize, AutomataError> {
    text.parse()
        .map_err(|_| parse_err(no, format!("invalid {what} `{text}`")))
}

impl Dfa {
    pub fn parse(text: &str) -> Result<Dfa, AutomataError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        match lines.next() {
            Some((_, HEADER)) => {}
            Some((no, other)) => return Err(parse_err(no, format!("expected `{HEADER}`, found `{other}`"))),
            None => return Err(parse_err(0, "empty input")),
        }
        let (no, letters) = field(&mut lines, "alphabet")?;
        let alphabet = Alphabet::new(letters.split_whitespace())
            .map_err(|e| parse_err(no, e.to_string()))?;
        let (no, states) = field(&mut lines, "states")?;
        let states = number(no, states, "state count")?;
        if states == 0 {
            return Err(parse_err(no, "state count must be positive"));
        }
        let (no, initial) = field(&mut lines, "initial")?;
        let initial = number(no, initial, "initial state")?;
        if initial >= states {
            return Err(parse_err(no, format!("initial state {initial} out of range")));
        }
        let (no, acc) = field(&mut lines, "accepting")?;
        let mut accepting = vec![false; states];
        for tok in acc.split_whitespace() {
            let q = number(no, tok, "accepting state")?;
            if q >= states {
                return Err(parse_err(no, format!("accepting state {q} out of range")));
            }
            accepting[q] = true;
        }

        let k = alphabet.len();
        let mut transitions: Vec<Option<StateId>> = vec![None; states * k];
        for (no, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let [src, letter, dst] = parts[..] else {
                return Err(parse_err(no, "expected `src letter dst`"));
            };
            let src = number(no, src, "source state")?;
            let dst = number(no, dst, "target state")?;
            if src >= states || dst >= states {
                return Err(parse_err(no, "state out of range"));
            }
            let a = alphabet
                .index_of(letter)
                .ok_or_else(|| parse_err(no, format!("unknown letter `{letter}`")))?;
            let slot = &mut transitions[src * k + a];
            if slot.is_some() {
                return Err(parse_err(no, format!("duplicate transition for ({src}, {letter})")));
            }
            *slot = Some(dst);
        }
        let transitions = transitions
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| {
                    parse_err(
                        0,
                        format!(
                            "missing transition for ({}, {})",
                            i / k,
                            alphabet.letter(i % k).unwrap_or("?")
                        ),
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Dfa::new(alphabet, initial, accepting, transitions)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "alphabet: {}", self.alphabet.letters().join(" "));
        let _ = writeln!(out, "states: {}", self.states());
        let _ = writeln!(out, "initial: {}", self.initial);
        let acc: Vec<String> = self.accepting_states().map(|q| q.to_string()).collect();
        let _ = writeln!(out, "accepting: {}", acc.join(" "));
        for q in 0..self.states() {
            for (a, letter) in self.alphabet.letters().iter().enumerate() {
                let _ = writeln!(out, "{q} {letter} {}", self.step(q, a));
            }
        }
        out
    }

    /// GraphViz rendering with parallel edges merged into one label.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  start [shape=point];\n");
        for q in 0..self.states() {
            let shape = if self.accepting[q] { "doublecircle" } else { "circle" };
            let _ = writeln!(out, "  {q} [shape={shape}];");
        }
        let _ = writeln!(out, "  start -> {};", self.initial);
        for q in 0..self.states() {
            let mut edges: BTreeMap<StateId, Vec<&str>> = BTreeMap::new();
            for (a, letter) in self.alphabet.letters().iter().enumerate() {
                edges.entry(self.step(q, a)).or_default().push(letter);
            }
            for (r, labels) in edges {
                let _ = writeln!(out, "  {q} -> {r} [label=\"{}\"];", labels.join(", "));
            }
        }
        out.push_str("}\n");
        out
    }
}

impl FromStr for Dfa {
    type Err = AutomataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dfa::parse(s)
    }
}
