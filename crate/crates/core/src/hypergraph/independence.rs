//! Exact independence number by branch and bound.
//!
//! Vertices are decided in ascending order (include, then exclude). The bound
//! partitions the remaining candidates greedily into cliques of `H`; a clique
//! holds at most `k - 1` vertices of any independent set.

use super::KGraph;
use crate::bits::{dispatch_width, Bits};
use crate::error::Result;

/// `α(H)`, the size of a largest vertex set containing no edge.
///
/// Exponential in the worst case; intended for `n` up to about 40 at `k = 3`.
pub fn independence_number(h: &KGraph) -> Result<u64> {
    if h.n() == 0 {
        return Ok(0);
    }
    dispatch_width!(h.n(), solve(h))
}

struct Search<'a, const W: usize> {
    h: &'a KGraph,
    /// `incident[v - 1]`: masks of the edges containing `v`.
    incident: Vec<Vec<Bits<W>>>,
    best: u64,
}

fn solve<const W: usize>(h: &KGraph) -> Result<u64> {
    let mut incident = vec![Vec::new(); h.n()];
    for e in h.edges() {
        let mask = Bits::<W>::from_vertices(e.iter().copied());
        for &v in e {
            incident[(v - 1) as usize].push(mask);
        }
    }
    let mut s = Search {
        h,
        incident,
        best: (h.k() as u64 - 1).min(h.n() as u64),
    };
    let candidates: Vec<u32> = (1..=h.n() as u32).collect();
    s.branch(Bits::EMPTY, 0, &candidates);
    Ok(s.best)
}

impl<const W: usize> Search<'_, W> {
    fn branch(&mut self, chosen: Bits<W>, size: u64, candidates: &[u32]) {
        if candidates.is_empty() {
            self.best = self.best.max(size);
            return;
        }
        if size + self.clique_cover_bound(candidates) <= self.best {
            return;
        }
        let v = candidates[0];
        let rest = &candidates[1..];

        let mut with_v = chosen;
        with_v.insert(v);
        let still_ok: Vec<u32> = rest
            .iter()
            .copied()
            .filter(|&c| {
                let mut trial = with_v;
                trial.insert(c);
                !self.incident[(c - 1) as usize]
                    .iter()
                    .any(|e| e.is_subset(&trial))
            })
            .collect();
        self.branch(with_v, size + 1, &still_ok);
        self.branch(chosen, size, rest);
    }

    fn clique_cover_bound(&self, candidates: &[u32]) -> u64 {
        let cap = self.h.k() - 1;
        let mut cliques: Vec<Vec<u32>> = Vec::new();
        'next: for &v in candidates {
            for c in cliques.iter_mut() {
                if self.extends_clique(c, v) {
                    c.push(v);
                    continue 'next;
                }
            }
            cliques.push(vec![v]);
        }
        cliques.iter().map(|c| c.len().min(cap) as u64).sum()
    }

    /// Whether every `k`-subset of `clique ∪ {v}` containing `v` is an edge.
    fn extends_clique(&self, clique: &[u32], v: u32) -> bool {
        let k = self.h.k();
        if clique.len() + 1 < k {
            return true;
        }
        crate::numeric::subsets(clique, k - 1).all(|mut t| {
            t.push(v);
            self.h.contains_edge(&t)
        })
    }
}
