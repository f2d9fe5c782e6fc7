//! Exhaustive search for 0/1 states (two-valued homomorphisms).

use crate::graph::OrthoGraph;
use crate::state::Semantics;

const UNSET: i8 = -1;

struct Solver<'a> {
    partners: Vec<Vec<usize>>,
    triples_of: Vec<Vec<usize>>,
    triples: &'a [[usize; 3]],
    val: Vec<i8>,
    trail: Vec<usize>,
}

impl Solver<'_> {
    fn assign(&mut self, v: usize, b: i8, queue: &mut Vec<usize>) -> bool {
        match self.val[v] {
            UNSET => {
                self.val[v] = b;
                self.trail.push(v);
                queue.push(v);
                true
            }
            x => x == b,
        }
    }

    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(v) = queue.pop() {
            if self.val[v] == 1 {
                for k in 0..self.partners[v].len() {
                    let u = self.partners[v][k];
                    if !self.assign(u, 0, &mut queue) {
                        return false;
                    }
                }
            } else {
                for k in 0..self.triples_of[v].len() {
                    let t = self.triples[self.triples_of[v][k]];
                    let mut zeros = 0;
                    let mut open = None;
                    for &u in &t {
                        match self.val[u] {
                            0 => zeros += 1,
                            UNSET => open = Some(u),
                            _ => {}
                        }
                    }
                    if zeros == 3 {
                        return false;
                    }
                    if zeros == 2 {
                        if let Some(u) = open {
                            if !self.assign(u, 1, &mut queue) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().unwrap();
            self.val[v] = UNSET;
        }
    }

    fn branch_triple(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, t) in self.triples.iter().enumerate() {
            if t.iter().any(|&u| self.val[u] == 1) {
                continue;
            }
            let open = t.iter().filter(|&&u| self.val[u] == UNSET).count();
            if best.is_none_or(|(_, b)| open < b) {
                best = Some((i, open));
            }
        }
        best.map(|(i, _)| i)
    }

    fn solve(&mut self) -> bool {
        let Some(ti) = self.branch_triple() else {
            return true;
        };
        let t = self.triples[ti];
        for &u in &t {
            if self.val[u] != UNSET {
                continue;
            }
            let mark = self.trail.len();
            let mut q = Vec::new();
            if self.assign(u, 1, &mut q) && self.propagate(q) && self.solve() {
                return true;
            }
            self.undo(mark);
        }
        false
    }
}

/// Find a 0/1 assignment with exactly one 1 per certified triple and (under
/// pair semantics) at most one 1 per certified orthogonal pair, extending
/// `pins`. Returns `None` when the search space is exhausted.
pub fn two_valued_search(g: &OrthoGraph, pins: &[(usize, bool)], sem: Semantics) -> Option<Vec<bool>> {
    let n = g.len();
    let triples: Vec<[usize; 3]> = g.triples.iter().copied().collect();
    let mut partners = vec![vec![]; n];
    let pairs: Vec<[usize; 2]> = match sem {
        Semantics::TriplesAndPairs => g.pairs.iter().copied().collect(),
        Semantics::TriplesOnly => {
            let mut ps = std::collections::BTreeSet::new();
            for t in &triples {
                ps.insert([t[0], t[1]]);
                ps.insert([t[0], t[2]]);
                ps.insert([t[1], t[2]]);
            }
            ps.into_iter().collect()
        }
    };
    for p in pairs {
        partners[p[0]].push(p[1]);
        partners[p[1]].push(p[0]);
    }
    let mut triples_of = vec![vec![]; n];
    for (i, t) in triples.iter().enumerate() {
        for &u in t {
            triples_of[u].push(i);
        }
    }
    let mut s = Solver {
        partners,
        triples_of,
        triples: &triples,
        val: vec![UNSET; n],
        trail: vec![],
    };
    let mut queue = Vec::new();
    for &(i, b) in pins {
        if !s.assign(i, b as i8, &mut queue) {
            return None;
        }
    }
    if !s.propagate(queue) || !s.solve() {
        return None;
    }
    Some(s.val.iter().map(|&v| v == 1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{Ray, Tolerance};

    fn frame() -> OrthoGraph {
        let mut g = OrthoGraph::new(Tolerance::default());
        g.add_triple(Ray::E1, Ray::E2, Ray::E3).unwrap();
        g
    }

    #[test]
    fn frame_has_witness() {
        let w = two_valued_search(&frame(), &[], Semantics::default()).unwrap();
        assert_eq!(w.iter().filter(|b| **b).count(), 1);
        let w = two_valued_search(&frame(), &[(1, true)], Semantics::default()).unwrap();
        assert_eq!(w, vec![false, true, false]);
    }

    #[test]
    fn two_ones_in_a_triple() {
        assert!(two_valued_search(&frame(), &[(0, true), (2, true)], Semantics::default()).is_none());
        assert!(two_valued_search(&frame(), &[(0, false), (1, false), (2, false)], Semantics::default()).is_none());
    }
}
