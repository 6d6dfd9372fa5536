//! Bounded search for a regular spread inside a given set of lines.
//!
//! Seeds are a regulus R(a, b, c) inside the line set plus one further line
//! d skew to it; the candidate is the closure of R u {d} under taking reguli
//! of triples. Candidates are tried in lexicographic order of (a, b, c, d),
//! so the first spread found is reproducible. One node is one regulus
//! computation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::projspace::Geometry;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadSearch {
    pub found: bool,
    pub spread: Vec<usize>,
    pub nodes: u64,
}

const PROGRESS_EVERY: u64 = 100_000;

struct Searcher<'a> {
    g: &'a Geometry,
    allowed: Vec<bool>,
    budget: u64,
    nodes: u64,
    progress: bool,
}

#[derive(Clone)]
struct Partial {
    covered: Vec<bool>,
    in_set: Vec<bool>,
    members: Vec<usize>,
    // triples (i, j, k) with k < next_k have been closed
    next_k: usize,
}

impl Partial {
    fn new(g: &Geometry) -> Self {
        Partial {
            covered: vec![false; g.num_points()],
            in_set: vec![false; g.num_lines()],
            members: Vec::new(),
            next_k: 2,
        }
    }

    /// Add a line unless it meets a member; already-present lines are fine.
    fn add(&mut self, g: &Geometry, l: usize) -> bool {
        if self.in_set[l] {
            return true;
        }
        if g.line_points(l).iter().any(|&p| self.covered[p as usize]) {
            return false;
        }
        for &p in g.line_points(l) {
            self.covered[p as usize] = true;
        }
        self.in_set[l] = true;
        self.members.push(l);
        true
    }
}

enum Closure {
    Closed(Partial),
    Dead,
    OutOfBudget,
}

impl Searcher<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.progress && self.nodes % PROGRESS_EVERY == 0 {
            eprintln!("search-spread: {} nodes", self.nodes);
        }
        self.nodes <= self.budget
    }

    fn regulus(&mut self, a: usize, b: usize, c: usize) -> Option<Vec<usize>> {
        self.g.regulus(a, b, c).ok().map(|(r, _)| r)
    }

    /// Close the partial set under reguli, failing as soon as a regulus
    /// leaves the allowed set or meets a line already taken.
    fn close(&mut self, mut part: Partial) -> Closure {
        let g = self.g;
        while part.next_k < part.members.len() {
            let k = part.next_k;
            for i in 0..k {
                for j in i + 1..k {
                    if !self.tick() {
                        return Closure::OutOfBudget;
                    }
                    let (a, b, c) = (part.members[i], part.members[j], part.members[k]);
                    let Some(reg) = self.regulus(a, b, c) else {
                        return Closure::Dead;
                    };
                    for l in reg {
                        if !self.allowed[l] || !part.add(g, l) {
                            return Closure::Dead;
                        }
                    }
                }
            }
            part.next_k += 1;
        }
        Closure::Closed(part)
    }

    /// Close, then if still short of a spread, branch on each allowed line
    /// skew to everything taken so far.
    fn extend(&mut self, part: Partial, lines: &[usize]) -> Option<Closure> {
        let target = self.g.q() * self.g.q() + 1;
        match self.close(part) {
            Closure::Closed(p) if p.members.len() == target => Some(Closure::Closed(p)),
            Closure::Closed(p) => {
                for &e in lines.iter().filter(|&&e| !p.in_set[e]) {
                    let mut child = p.clone();
                    if !child.add(self.g, e) {
                        continue;
                    }
                    match self.extend(child, lines) {
                        Some(Closure::Dead) | None => {}
                        found => return found,
                    }
                }
                Some(Closure::Dead)
            }
            Closure::OutOfBudget => Some(Closure::OutOfBudget),
            Closure::Dead => None,
        }
    }

    fn run(&mut self, lines: &[usize]) -> Option<Vec<usize>> {
        let g = self.g;
        for (ia, &a) in lines.iter().enumerate() {
            for (ib, &b) in lines.iter().enumerate().skip(ia + 1) {
                if !g.are_skew(a, b) {
                    continue;
                }
                for &c in &lines[ib + 1..] {
                    if !g.are_skew(a, c) || !g.are_skew(b, c) {
                        continue;
                    }
                    if !self.tick() {
                        return None;
                    }
                    let Some(reg) = self.regulus(a, b, c) else {
                        continue;
                    };
                    if reg.iter().any(|&l| !self.allowed[l]) {
                        continue;
                    }
                    for &d in lines {
                        if reg.iter().any(|&r| !g.are_skew(r, d)) {
                            continue;
                        }
                        let mut part = Partial::new(g);
                        for &l in reg.iter().chain(std::iter::once(&d)) {
                            part.add(g, l);
                        }
                        match self.extend(part, lines) {
                            Some(Closure::Closed(mut p)) => {
                                p.members.sort_unstable();
                                return Some(p.members);
                            }
                            Some(Closure::OutOfBudget) => return None,
                            _ => {}
                        }
                    }
                }
            }
        }
        None
    }
}

/// Look for a regular spread made of lines from `lines`. `NotFound`
/// (`found == false`) after `budget` nodes is not a proof of absence.
pub fn find_regular_spread_in_complex(
    lines: &[usize],
    g: &Geometry,
    budget: u64,
    progress: bool,
) -> SpreadSearch {
    find_regular_spread_seeded(lines, g, budget, progress, 0)
}

/// As `find_regular_spread_in_complex`, but a nonzero seed visits the lines
/// in a ChaCha-shuffled order instead of ascending order.
pub fn find_regular_spread_seeded(
    lines: &[usize],
    g: &Geometry,
    budget: u64,
    progress: bool,
    seed: u64,
) -> SpreadSearch {
    let mut sorted = lines.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if seed != 0 {
        sorted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut allowed = vec![false; g.num_lines()];
    for &l in &sorted {
        allowed[l] = true;
    }
    let mut s = Searcher {
        g,
        allowed,
        budget,
        nodes: 0,
        progress,
    };
    let spread = s.run(&sorted);
    SpreadSearch {
        found: spread.is_some(),
        spread: spread.unwrap_or_default(),
        nodes: s.nodes.min(budget),
    }
}
