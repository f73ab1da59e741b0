use super::{Dfa, StateId};

impl Dfa {
    /// Minimal language-equivalent automaton (Hopcroft partition
    /// refinement). The result is trimmed and numbered canonically, so two
    /// minimized automata of the same language are equal as values.
    pub fn minimize(&self) -> Dfa {
        // Every Dfa is total, so no dead-state completion is needed before
        // refinement; unreachable states are dropped first.
        let dfa = self.trim();
        let n = dfa.states();
        let k = dfa.alphabet.len();

        let mut inverse: Vec<Vec<Vec<StateId>>> = vec![vec![Vec::new(); n]; k];
        for q in 0..n {
            for (a, inv) in inverse.iter_mut().enumerate() {
                inv[dfa.step(q, a)].push(q);
            }
        }

        let mut block_of = vec![0usize; n];
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let (acc, rej): (Vec<_>, Vec<_>) = (0..n).partition(|&q| dfa.accepting[q]);
        for part in [acc, rej] {
            if !part.is_empty() {
                for &q in &part {
                    block_of[q] = blocks.len();
                }
                blocks.push(part);
            }
        }

        let mut in_work: Vec<Vec<bool>> = vec![vec![false; k]; blocks.len()];
        let mut work: Vec<(usize, usize)> = Vec::new();
        if blocks.len() == 2 {
            let smaller = if blocks[0].len() <= blocks[1].len() { 0 } else { 1 };
            for a in 0..k {
                work.push((smaller, a));
                in_work[smaller][a] = true;
            }
        }

        let mut marked = vec![false; n];
        let mut touched_count: Vec<usize> = vec![0; n.max(1)];
        while let Some((splitter, a)) = work.pop() {
            in_work[splitter][a] = false;
            let mut preimage = Vec::new();
            for &q in &blocks[splitter] {
                preimage.extend_from_slice(&inverse[a][q]);
            }
            let mut touched = Vec::new();
            for &p in &preimage {
                if !marked[p] {
                    marked[p] = true;
                    let b = block_of[p];
                    if touched_count[b] == 0 {
                        touched.push(b);
                    }
                    touched_count[b] += 1;
                }
            }
            for b in touched {
                let hit = touched_count[b];
                touched_count[b] = 0;
                if hit == blocks[b].len() {
                    continue;
                }
                let (inside, outside): (Vec<_>, Vec<_>) =
                    blocks[b].iter().partition(|&&q| marked[q]);
                let new_id = blocks.len();
                let (keep, moved) = (outside, inside);
                for &q in &moved {
                    block_of[q] = new_id;
                }
                let moved_smaller = moved.len() <= keep.len();
                blocks[b] = keep;
                blocks.push(moved);
                touched_count.push(0);
                in_work.push(vec![false; k]);
                for c in 0..k {
                    let target = if in_work[b][c] || moved_smaller {
                        new_id
                    } else {
                        b
                    };
                    if !in_work[target][c] {
                        in_work[target][c] = true;
                        work.push((target, c));
                    }
                }
            }
            for &p in &preimage {
                marked[p] = false;
            }
        }

        let mut transitions = Vec::with_capacity(blocks.len() * k);
        let mut accepting = Vec::with_capacity(blocks.len());
        for block in &blocks {
            let rep = block[0];
            accepting.push(dfa.accepting[rep]);
            transitions.extend((0..k).map(|a| block_of[dfa.step(rep, a)]));
        }
        Dfa {
            alphabet: dfa.alphabet.clone(),
            initial: block_of[dfa.initial],
            accepting,
            transitions,
        }
        .trim()
    }
}
