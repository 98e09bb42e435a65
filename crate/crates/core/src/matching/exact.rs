//! Exact maximum matching by branch and bound over vertex bitsets.
//!
//! Branching: take the lowest vertex `v` still covered by a live edge. Either
//! one of the live edges at `v` joins the matching, or `v` is discarded. Since
//! edges are lex-sorted and `v` is the smallest live vertex, the edges at `v`
//! are a contiguous prefix of the live list.

use crate::bits::{dispatch_width, Bits};
use crate::error::{Error, Result};
use crate::hypergraph::{KGraph, Matching};

/// Environment variable overriding the default branch-node budget.
pub const NODE_BUDGET_ENV: &str = "HYPERMATCH_NODE_BUDGET";

/// Budget used when the environment does not set one.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Reads [`NODE_BUDGET_ENV`], falling back to [`DEFAULT_NODE_BUDGET`].
pub fn default_node_budget() -> u64 {
    std::env::var(NODE_BUDGET_ENV)
        .ok()
        .and_then(|s| s.trim().replace('_', "").parse().ok())
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    /// Maximum number of search nodes before giving up.
    pub budget: u64,
    /// Also prune with `⌊ν'⌋` of the live subgraph (one exact LP per node).
    pub lp_bound: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            budget: default_node_budget(),
            lp_bound: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactOutcome {
    pub nu: usize,
    pub matching: Matching,
    /// Search nodes visited; deterministic for a given graph and options.
    pub nodes: u64,
}

/// `ν(H)` with a maximum matching, under the default options.
pub fn exact_nu(h: &KGraph) -> Result<(usize, Matching)> {
    let out = exact_nu_with(h, &ExactOptions::default())?;
    Ok((out.nu, out.matching))
}

/// As [`exact_nu`], with an explicit budget and bound selection.
///
/// Returns [`Error::BudgetExhausted`] when the node budget runs out before
/// optimality is proven.
pub fn exact_nu_with(h: &KGraph, opts: &ExactOptions) -> Result<ExactOutcome> {
    if h.is_empty() {
        return Ok(ExactOutcome {
            nu: 0,
            matching: Matching::empty(),
            nodes: 0,
        });
    }
    dispatch_width!(h.n(), search(h, opts))
}

struct Search<'a, const W: usize> {
    h: &'a KGraph,
    masks: Vec<Bits<W>>,
    first: Vec<u32>,
    opts: &'a ExactOptions,
    ceiling: usize,
    best: Vec<usize>,
    nodes: u64,
    exhausted: bool,
}

fn search<const W: usize>(h: &KGraph, opts: &ExactOptions) -> Result<ExactOutcome> {
    let masks: Vec<Bits<W>> = h
        .edges()
        .map(|e| Bits::from_vertices(e.iter().copied()))
        .collect();
    let first: Vec<u32> = h.edges().map(|e| e[0]).collect();
    let greedy: Vec<usize> = {
        let mut used = Bits::<W>::EMPTY;
        let mut out = Vec::new();
        for (i, m) in masks.iter().enumerate() {
            if m.is_disjoint(&used) {
                used = used.union(m);
                out.push(i);
            }
        }
        out
    };
    let mut s = Search {
        h,
        masks,
        first,
        opts,
        ceiling: h.n() / h.k(),
        best: greedy,
        nodes: 0,
        exhausted: false,
    };
    let live: Vec<usize> = (0..h.edge_count()).collect();
    let mut cur = Vec::new();
    s.branch(&live, &mut cur);
    if s.exhausted {
        return Err(Error::BudgetExhausted {
            budget: opts.budget,
        });
    }
    let matching = Matching::new(s.best.iter().map(|&i| h.edge(i).to_vec()));
    Ok(ExactOutcome {
        nu: s.best.len(),
        matching,
        nodes: s.nodes,
    })
}

impl<const W: usize> Search<'_, W> {
    fn done(&self) -> bool {
        self.exhausted || self.best.len() >= self.ceiling
    }

    fn branch(&mut self, live: &[usize], cur: &mut Vec<usize>) {
        if self.done() {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.opts.budget {
            self.exhausted = true;
            return;
        }
        if cur.len() > self.best.len() {
            self.best = cur.clone();
            if self.done() {
                return;
            }
        }
        if live.is_empty() {
            return;
        }
        let covered = live
            .iter()
            .fold(Bits::<W>::EMPTY, |acc, &i| acc.union(&self.masks[i]));
        let k = self.h.k();
        if cur.len() + covered.len() as usize / k <= self.best.len() {
            return;
        }
        if self.opts.lp_bound && cur.len() + self.lp_bound(live) <= self.best.len() {
            return;
        }

        let v = self.first[live[0]];
        let split = live
            .iter()
            .position(|&i| self.first[i] != v)
            .unwrap_or(live.len());
        let (at_v, rest) = live.split_at(split);
        for &e in at_v {
            let mask = self.masks[e];
            let next: Vec<usize> = rest
                .iter()
                .copied()
                .filter(|&j| self.masks[j].is_disjoint(&mask))
                .collect();
            cur.push(e);
            self.branch(&next, cur);
            cur.pop();
            if self.done() {
                return;
            }
        }
        self.branch(rest, cur);
    }

    fn lp_bound(&self, live: &[usize]) -> usize {
        let sub = KGraph::from_sorted_edges(
            self.h.n(),
            self.h.k(),
            live.iter().map(|&i| self.h.edge(i).to_vec()).collect(),
        );
        let (value, _) = crate::lp::max_fractional_matching(&sub);
        value.floor().to_integer().try_into().unwrap_or(usize::MAX)
    }
}
