//! The `k`-uniform hypergraph kernel.
//!
//! Vertices are the integers `1..=n`. Edges are stored as sorted `k`-tuples in
//! one flat, lexicographically sorted buffer, so membership is a binary search
//! and the edge list doubles as a canonical serialization order.

mod independence;
mod io;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numeric::{binomial_u64, colex_rank, subsets};

pub use independence::independence_number;

/// A `k`-uniform hypergraph on the vertex set `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct KGraph {
    n: usize,
    k: usize,
    /// `edge_count * k` vertex ids; each chunk ascending, chunks in lex order.
    edges: Vec<u32>,
}

/// A set of pairwise disjoint edges, each stored ascending, kept in lex order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matching {
    edges: Vec<Vec<u32>>,
}

/// Maps the vertices of an induced subgraph back to the host's labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexMap {
    old_of_new: Vec<u32>,
}

impl VertexMap {
    /// Host label of subgraph vertex `v` (1-based).
    pub fn to_host(&self, v: u32) -> u32 {
        self.old_of_new[(v - 1) as usize]
    }

    pub fn len(&self) -> usize {
        self.old_of_new.len()
    }

    pub fn is_empty(&self) -> bool {
        self.old_of_new.is_empty()
    }

    pub fn host_vertices(&self) -> &[u32] {
        &self.old_of_new
    }

    pub fn translate_edge(&self, e: &[u32]) -> Vec<u32> {
        let mut out: Vec<u32> = e.iter().map(|&v| self.to_host(v)).collect();
        out.sort_unstable();
        out
    }

    pub fn translate_matching(&self, m: &Matching) -> Matching {
        Matching::new(m.edges().iter().map(|e| self.translate_edge(e)))
    }
}

impl Matching {
    pub fn new(edges: impl IntoIterator<Item = Vec<u32>>) -> Self {
        let mut edges: Vec<Vec<u32>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e
            })
            .collect();
        edges.sort();
        Matching { edges }
    }

    pub fn empty() -> Self {
        Matching::default()
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Union of the member edges.
    pub fn vertices(&self) -> BTreeSet<u32> {
        self.edges.iter().flatten().copied().collect()
    }

    /// True when no vertex appears in two member edges.
    pub fn is_pairwise_disjoint(&self) -> bool {
        let total: usize = self.edges.iter().map(Vec::len).sum();
        self.vertices().len() == total
    }
}

impl KGraph {
    /// Builds a hypergraph, validating every edge.
    ///
    /// Edges may be given in any vertex order; they are sorted. Repeated
    /// vertices, out-of-range vertices, wrong sizes and duplicate edges are errors.
    pub fn new<E, I>(n: usize, k: usize, edges: I) -> Result<Self>
    where
        E: AsRef<[u32]>,
        I: IntoIterator<Item = E>,
    {
        if k == 0 {
            return Err(Error::Range("uniformity must be at least 1".into()));
        }
        let mut list: Vec<Vec<u32>> = Vec::new();
        for e in edges {
            let mut e = e.as_ref().to_vec();
            if e.len() != k {
                return Err(Error::InvalidEdge {
                    edge: e,
                    reason: format!("expected {k} vertices"),
                });
            }
            e.sort_unstable();
            if let Some(&v) = e.iter().find(|&&v| v == 0 || v as usize > n) {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidEdge {
                    edge: e,
                    reason: "repeated vertex".into(),
                });
            }
            list.push(e);
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].clone()));
        }
        Ok(KGraph {
            n,
            k,
            edges: list.concat(),
        })
    }

    /// Like [`KGraph::new`] but silently drops duplicate edges.
    pub fn new_dedup<E, I>(n: usize, k: usize, edges: I) -> Result<Self>
    where
        E: AsRef<[u32]>,
        I: IntoIterator<Item = E>,
    {
        let set: BTreeSet<Vec<u32>> = edges
            .into_iter()
            .map(|e| {
                let mut e = e.as_ref().to_vec();
                e.sort_unstable();
                e
            })
            .collect();
        KGraph::new(n, k, set)
    }

    pub fn edgeless(n: usize, k: usize) -> Self {
        assert!(k >= 1, "uniformity must be at least 1");
        KGraph {
            n,
            k,
            edges: Vec::new(),
        }
    }

    /// All `k`-subsets of `1..=n` satisfying `keep`, enumerated in lex order.
    pub fn from_predicate(n: usize, k: usize, mut keep: impl FnMut(&[u32]) -> bool) -> Self {
        assert!(k >= 1, "uniformity must be at least 1");
        let mut edges = Vec::new();
        for e in crate::numeric::k_sets(n, k) {
            if keep(&e) {
                edges.extend_from_slice(&e);
            }
        }
        KGraph { n, k, edges }
    }

    /// Trusted constructor: each edge sorted, edges in strictly increasing lex order.
    pub(crate) fn from_sorted_flat(n: usize, k: usize, edges: Vec<u32>) -> Self {
        debug_assert!(edges.len().is_multiple_of(k));
        debug_assert!(edges
            .chunks_exact(k)
            .all(|e| e.windows(2).all(|w| w[0] < w[1]) && e[0] >= 1 && e[k - 1] as usize <= n));
        debug_assert!(edges
            .chunks_exact(k)
            .zip(edges.chunks_exact(k).skip(1))
            .all(|(a, b)| a < b));
        KGraph { n, k, edges }
    }

    /// Trusted constructor from sorted edges in arbitrary order.
    pub(crate) fn from_sorted_edges(n: usize, k: usize, mut list: Vec<Vec<u32>>) -> Self {
        list.sort_unstable();
        list.dedup();
        KGraph::from_sorted_flat(n, k, list.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `e(H)`.
    pub fn edge_count(&self) -> usize {
        self.edges.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> std::slice::ChunksExact<'_, u32> {
        self.edges.chunks_exact(self.k)
    }

    pub fn edge(&self, i: usize) -> &[u32] {
        &self.edges[i * self.k..(i + 1) * self.k]
    }

    /// Position of a sorted edge in the edge list.
    pub fn edge_index(&self, e: &[u32]) -> Option<usize> {
        if e.len() != self.k {
            return None;
        }
        let (mut lo, mut hi) = (0, self.edge_count());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(e) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Membership test; `e` may be in any vertex order.
    pub fn contains_edge(&self, e: &[u32]) -> bool {
        if e.windows(2).all(|w| w[0] < w[1]) {
            self.edge_index(e).is_some()
        } else {
            let mut s = e.to_vec();
            s.sort_unstable();
            self.edge_index(&s).is_some()
        }
    }

    /// `E(self) ⊆ E(other)` on the same vertex set.
    pub fn is_subgraph_of(&self, other: &KGraph) -> bool {
        self.n == other.n
            && self.k == other.k
            && self.edges().all(|e| other.edge_index(e).is_some())
    }

    fn check_vertices(&self, vs: &[u32]) -> Result<()> {
        match vs.iter().find(|&&v| v == 0 || v as usize > self.n) {
            Some(&v) => Err(Error::VertexOutOfRange {
                vertex: v,
                n: self.n,
            }),
            None => Ok(()),
        }
    }

    /// `d_H(T)`: the number of edges containing `T`.
    pub fn degree(&self, t: &[u32]) -> Result<u64> {
        let mut t = t.to_vec();
        t.sort_unstable();
        t.dedup();
        if t.len() > self.k {
            return Err(Error::InvalidQuery(format!(
                "|T| = {} exceeds uniformity {}",
                t.len(),
                self.k
            )));
        }
        self.check_vertices(&t)?;
        Ok(self
            .edges()
            .filter(|e| t.iter().all(|v| e.binary_search(v).is_ok()))
            .count() as u64)
    }

    /// Degree of every vertex; index `v - 1`.
    pub fn vertex_degrees(&self) -> Vec<u64> {
        let mut d = vec![0u64; self.n];
        for &v in &self.edges {
            d[(v - 1) as usize] += 1;
        }
        d
    }

    fn check_l(&self, l: usize) -> Result<()> {
        if l + 1 > self.k {
            return Err(Error::InvalidQuery(format!(
                "l = {l} must be at most k - 1 = {}",
                self.k - 1
            )));
        }
        if l >= 1 && self.n < l {
            return Err(Error::InvalidQuery(format!(
                "no {l}-subsets of a {}-vertex set",
                self.n
            )));
        }
        Ok(())
    }

    /// Degrees of the `l`-sets that lie in at least one edge, keyed by colex rank.
    fn l_degree_counts(&self, l: usize) -> HashMap<u128, u64> {
        let mut counts: HashMap<u128, u64> = HashMap::new();
        for e in self.edges() {
            for t in subsets(e, l) {
                *counts.entry(colex_rank(&t)).or_default() += 1;
            }
        }
        counts
    }

    /// `δ_l(H)`, the minimum degree over all `l`-subsets of the vertex set.
    pub fn min_l_degree(&self, l: usize) -> Result<u64> {
        self.check_l(l)?;
        Ok(match l {
            0 => self.edge_count() as u64,
            1 => self.vertex_degrees().into_iter().min().unwrap_or(0),
            _ => {
                let counts = self.l_degree_counts(l);
                if (counts.len() as u64) < binomial_u64(self.n as u64, l as u64) {
                    0
                } else {
                    counts.values().copied().min().unwrap_or(0)
                }
            }
        })
    }

    /// `Δ_l(H)`, the maximum degree over all `l`-subsets of the vertex set.
    pub fn max_l_degree(&self, l: usize) -> Result<u64> {
        self.check_l(l)?;
        Ok(match l {
            0 => self.edge_count() as u64,
            1 => self.vertex_degrees().into_iter().max().unwrap_or(0),
            _ => self.l_degree_counts(l).values().copied().max().unwrap_or(0),
        })
    }

    /// The link `N_H(v)` as a `(k-1)`-graph on `1..=n-1`; vertices above `v` shift down by one.
    pub fn link(&self, v: u32) -> Result<KGraph> {
        self.check_vertices(&[v])?;
        if self.k < 2 {
            return Err(Error::InvalidQuery("link of a 1-graph".into()));
        }
        let mut flat = Vec::new();
        for e in self.edges() {
            if e.binary_search(&v).is_ok() {
                flat.extend(
                    e.iter()
                        .filter(|&&u| u != v)
                        .map(|&u| if u > v { u - 1 } else { u }),
                );
            }
        }
        // Removing a common vertex and shifting preserves lex order among these edges.
        Ok(KGraph::from_sorted_flat(self.n - 1, self.k - 1, flat))
    }

    /// `H[S]`, relabelled order-preservingly to `1..=|S|`.
    pub fn induced(&self, s: &[u32]) -> Result<(KGraph, VertexMap)> {
        self.check_vertices(s)?;
        let mut keep: Vec<u32> = s.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut new_of_old = vec![0u32; self.n + 1];
        for (i, &v) in keep.iter().enumerate() {
            new_of_old[v as usize] = i as u32 + 1;
        }
        let mut flat = Vec::new();
        for e in self.edges() {
            if e.iter().all(|&v| new_of_old[v as usize] != 0) {
                flat.extend(e.iter().map(|&v| new_of_old[v as usize]));
            }
        }
        Ok((
            KGraph::from_sorted_flat(keep.len(), self.k, flat),
            VertexMap { old_of_new: keep },
        ))
    }

    /// `H - S`: delete `S` and every edge meeting it.
    pub fn remove(&self, s: &[u32]) -> Result<(KGraph, VertexMap)> {
        self.check_vertices(s)?;
        let gone: BTreeSet<u32> = s.iter().copied().collect();
        let rest: Vec<u32> = (1..=self.n as u32).filter(|v| !gone.contains(v)).collect();
        self.induced(&rest)
    }

    /// Renames vertex `v` to `new_of_old[v - 1]` (a permutation of `1..=n`).
    pub fn relabel(&self, new_of_old: &[u32]) -> KGraph {
        assert_eq!(new_of_old.len(), self.n);
        let list = self
            .edges()
            .map(|e| {
                let mut f: Vec<u32> = e.iter().map(|&v| new_of_old[(v - 1) as usize]).collect();
                f.sort_unstable();
                f
            })
            .collect();
        KGraph::from_sorted_edges(self.n, self.k, list)
    }

    /// Adds `extra` isolated vertices `n+1..=n+extra`.
    pub fn with_extra_vertices(&self, extra: usize) -> KGraph {
        KGraph {
            n: self.n + extra,
            k: self.k,
            edges: self.edges.clone(),
        }
    }

    /// Edge-set union of two graphs on the same vertex set.
    pub fn union(&self, other: &KGraph) -> Result<KGraph> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::InvalidQuery(
                "union of graphs with different shapes".into(),
            ));
        }
        let list = self
            .edges()
            .chain(other.edges())
            .map(<[u32]>::to_vec)
            .collect();
        Ok(KGraph::from_sorted_edges(self.n, self.k, list))
    }

    /// Closure under single-coordinate decrements: the smallest stable supergraph.
    pub fn down_closure(&self) -> KGraph {
        let mut seen: BTreeSet<Vec<u32>> = self.edges().map(<[u32]>::to_vec).collect();
        let mut stack: Vec<Vec<u32>> = seen.iter().cloned().collect();
        while let Some(e) = stack.pop() {
            for f in decrements(&e) {
                if seen.insert(f.clone()) {
                    stack.push(f);
                }
            }
        }
        KGraph::from_sorted_flat(self.n, self.k, seen.into_iter().flatten().collect())
    }

    /// Whether the edge set is a down-set of the coordinatewise order on sorted `k`-sets.
    ///
    /// Single-coordinate decrements generate that order, so checking them for
    /// every edge suffices.
    pub fn is_stable(&self) -> bool {
        self.edges()
            .all(|e| decrements(e).all(|f| self.edge_index(&f).is_some()))
    }

    /// True iff every member of `m` is an edge here and the members are pairwise disjoint.
    pub fn verify_matching(&self, m: &Matching) -> bool {
        m.edges().iter().all(|e| self.contains_edge(e)) && m.is_pairwise_disjoint()
    }

    pub fn independence_number(&self) -> Result<u64> {
        independence_number(self)
    }

    /// Hex SHA-256 of the canonical text serialization.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Every sorted set obtained from `e` by lowering one coordinate by one.
fn decrements(e: &[u32]) -> impl Iterator<Item = Vec<u32>> + '_ {
    (0..e.len()).filter_map(move |i| {
        let floor = if i == 0 { 0 } else { e[i - 1] };
        (e[i] - 1 > floor).then(|| {
            let mut f = e.to_vec();
            f[i] -= 1;
            f
        })
    })
}

impl fmt::Debug for KGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KGraph")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}
