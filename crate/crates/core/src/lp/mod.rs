//! Exact fractional matchings and fractional vertex covers.
//!
//! `ν'` is solved as the full edge-variable packing program with a revised
//! simplex. `τ'` is solved separately with the dense tableau solver, adding
//! violated edge rows until the cover is feasible, so the two optima come out
//! of different code paths and [`check_duality`] is a real cross-check.

mod packing;
pub mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{KGraph, Matching};
use crate::numeric::{common_denominator, format_rational, k_sets, rational, Rational};
use simplex::{Constraint, LinearProgram, LpOutcome, Relation};

/// Edge weights `φ` on a `k`-graph with vertex set `1..=n`; zero weights are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FractionalAssignment {
    n: usize,
    k: usize,
    weights: BTreeMap<Vec<u32>, Rational>,
}

impl FractionalAssignment {
    pub fn new(n: usize, k: usize) -> Self {
        FractionalAssignment {
            n,
            k,
            weights: BTreeMap::new(),
        }
    }

    /// Each matching edge at weight 1.
    pub fn from_matching(n: usize, k: usize, m: &Matching) -> Self {
        let mut f = Self::new(n, k);
        for e in m.edges() {
            f.set(e.clone(), Rational::one());
        }
        f
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Sets `φ(e)`; the edge is sorted first and a zero weight removes it.
    pub fn set(&mut self, mut e: Vec<u32>, w: Rational) {
        e.sort_unstable();
        if w.is_zero() {
            self.weights.remove(&e);
        } else {
            self.weights.insert(e, w);
        }
    }

    /// Adds `w` to `φ(e)`.
    pub fn add(&mut self, mut e: Vec<u32>, w: &Rational) {
        e.sort_unstable();
        let entry = self.weights.entry(e.clone()).or_insert_with(Rational::zero);
        *entry += w;
        if entry.is_zero() {
            self.weights.remove(&e);
        }
    }

    pub fn get(&self, e: &[u32]) -> Rational {
        let mut s = e.to_vec();
        s.sort_unstable();
        self.weights.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.weights.iter().map(|(e, w)| (e.as_slice(), w))
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// `Σ_e φ(e)`.
    pub fn value(&self) -> Rational {
        self.weights.values().sum()
    }

    /// `Σ_{e ∋ v} φ(e)` for each vertex, indexed `v - 1`.
    pub fn vertex_loads(&self) -> Vec<Rational> {
        let mut loads = vec![Rational::zero(); self.n];
        for (e, w) in &self.weights {
            for &v in e {
                if let Some(l) = loads.get_mut((v - 1) as usize) {
                    *l += w;
                }
            }
        }
        loads
    }

    /// Checks support ⊆ `E(h)`, weights in `[0, 1]` and every vertex load at most 1.
    pub fn check_feasible(&self, h: &KGraph) -> Result<()> {
        if self.n != h.n() || self.k != h.k() {
            return Err(Error::Precondition(format!(
                "assignment on ({}, {}) used with a graph on ({}, {})",
                self.n,
                self.k,
                h.n(),
                h.k()
            )));
        }
        for (e, w) in &self.weights {
            if !h.contains_edge(e) {
                return Err(Error::Precondition(format!(
                    "{e:?} carries weight but is not an edge"
                )));
            }
            if w.is_negative() || *w > Rational::one() {
                return Err(Error::Precondition(format!(
                    "weight {} on {e:?} is outside [0, 1]",
                    format_rational(w)
                )));
            }
        }
        for (i, l) in self.vertex_loads().iter().enumerate() {
            if *l > Rational::one() {
                return Err(Error::Precondition(format!(
                    "vertex {} has load {}",
                    i + 1,
                    format_rational(l)
                )));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, h: &KGraph) -> bool {
        self.check_feasible(h).is_ok()
    }

    /// Feasible with value `n/k`, which forces every vertex load to be exactly 1.
    pub fn is_perfect(&self, h: &KGraph) -> bool {
        self.is_feasible(h) && self.value() == rational(self.n as i64, self.k as i64)
    }

    /// `[[edge..., "p/q"], ...]` in lexicographic edge order.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.weights
                .iter()
                .map(|(e, w)| serde_json::json!({ "edge": e, "weight": format_rational(w) }))
                .collect(),
        )
    }
}

/// Vertex weights `w`, indexed `v - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexWeights {
    pub w: Vec<Rational>,
}

impl VertexWeights {
    pub fn new(w: Vec<Rational>) -> Self {
        VertexWeights { w }
    }

    pub fn uniform(n: usize, x: Rational) -> Self {
        VertexWeights { w: vec![x; n] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, v: u32) -> &Rational {
        &self.w[(v - 1) as usize]
    }

    pub fn total(&self) -> Rational {
        self.w.iter().sum()
    }

    pub fn edge_sum(&self, e: &[u32]) -> Rational {
        e.iter().map(|&v| self.get(v)).sum()
    }

    /// Nonnegative and every edge of `h` has weight sum at least 1.
    pub fn is_cover_of(&self, h: &KGraph) -> bool {
        self.w.len() == h.n()
            && self.w.iter().all(|x| !x.is_negative())
            && h.edges().all(|e| self.edge_sum(e) >= Rational::one())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.w
                .iter()
                .map(|x| serde_json::Value::String(format_rational(x)))
                .collect(),
        )
    }
}

/// `ν'(H)` and an optimal fractional matching.
pub fn max_fractional_matching(h: &KGraph) -> (Rational, FractionalAssignment) {
    let (value, phi, _) = packing_with_duals(h);
    (value, phi)
}

/// Solves the packing program once and also returns its optimal dual.
pub fn packing_with_duals(h: &KGraph) -> (Rational, FractionalAssignment, VertexWeights) {
    let columns: Vec<Vec<usize>> = h
        .edges()
        .map(|e| e.iter().map(|&v| (v - 1) as usize).collect())
        .collect();
    let sol = packing::solve_packing(h.n(), &columns);
    let mut phi = FractionalAssignment::new(h.n(), h.k());
    for (i, x) in sol.x.into_iter().enumerate() {
        if !x.is_zero() {
            phi.set(h.edge(i).to_vec(), x);
        }
    }
    (sol.value, phi, VertexWeights::new(sol.duals))
}

/// `τ'(H)` and an optimal fractional cover.
pub fn min_fractional_cover(h: &KGraph) -> (Rational, VertexWeights) {
    let n = h.n();
    if h.is_empty() {
        return (
            Rational::zero(),
            VertexWeights::uniform(n, Rational::zero()),
        );
    }
    let mut active: BTreeSet<usize> = BTreeSet::new();
    let mut used = vec![false; n + 1];
    let mut first_edge = vec![None; n + 1];
    for (i, e) in h.edges().enumerate() {
        if e.iter().all(|&v| !used[v as usize]) {
            active.insert(i);
            for &v in e {
                used[v as usize] = true;
            }
        }
        for &v in e {
            first_edge[v as usize].get_or_insert(i);
        }
    }
    active.extend(first_edge.into_iter().flatten());
    let batch = n.max(16);

    loop {
        let lp = LinearProgram {
            num_vars: n,
            objective: vec![-Rational::one(); n],
            constraints: active
                .iter()
                .map(|&i| Constraint {
                    coeffs: h
                        .edge(i)
                        .iter()
                        .map(|&v| ((v - 1) as usize, Rational::one()))
                        .collect(),
                    relation: Relation::Ge,
                    rhs: Rational::one(),
                })
                .collect(),
        };
        let w = match simplex::solve(&lp) {
            LpOutcome::Optimal { x, .. } => VertexWeights::new(x),
            // Nonnegative weights, all-ones is feasible and the objective is bounded by 0.
            other => unreachable!("restricted cover program returned {other:?}"),
        };
        let mut violated: Vec<(Rational, usize)> = h
            .edges()
            .enumerate()
            .filter(|(i, _)| !active.contains(i))
            .filter_map(|(i, e)| {
                let s = w.edge_sum(e);
                (s < Rational::one()).then_some((s, i))
            })
            .collect();
        if violated.is_empty() {
            return (w.total(), w);
        }
        violated.sort();
        active.extend(violated.into_iter().take(batch).map(|(_, i)| i));
    }
}

/// Both optima with their witnesses, and whether each witness checks out.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityCertificate {
    pub nu_frac: Rational,
    pub tau_frac: Rational,
    pub matching: FractionalAssignment,
    pub cover: VertexWeights,
    pub matching_feasible: bool,
    pub cover_feasible: bool,
}

impl DualityCertificate {
    /// Both witnesses feasible and `ν' = τ'` exactly.
    pub fn holds(&self) -> bool {
        self.matching_feasible
            && self.cover_feasible
            && self.nu_frac == self.tau_frac
            && self.matching.value() == self.nu_frac
            && self.cover.total() == self.tau_frac
    }
}

pub fn duality_certificate(h: &KGraph) -> DualityCertificate {
    let (nu_frac, matching) = max_fractional_matching(h);
    let (tau_frac, cover) = min_fractional_cover(h);
    DualityCertificate {
        matching_feasible: matching.is_feasible(h),
        cover_feasible: cover.is_cover_of(h),
        nu_frac,
        tau_frac,
        matching,
        cover,
    }
}

/// True iff `ν'(H) = τ'(H)` with both witnesses verified.
pub fn check_duality(h: &KGraph) -> bool {
    duality_certificate(h).holds()
}

/// Weight `1/k` on each cyclic window `{i, ..., i+k-1}` (mod `n`): a perfect
/// fractional matching of `K_n^k`.
pub fn clique_window_matching(n: usize, k: usize) -> Result<FractionalAssignment> {
    clique_window_on(&(1..=n as u32).collect::<Vec<_>>(), n, k)
}

/// Cyclic windows over `vertices` (in the given order), for a host on `1..=n_host`.
pub(crate) fn clique_window_on(
    vertices: &[u32],
    n_host: usize,
    k: usize,
) -> Result<FractionalAssignment> {
    let n = vertices.len();
    if n <= k || k == 0 {
        return Err(Error::Range(format!(
            "cyclic windows need n > k, got n = {n}, k = {k}"
        )));
    }
    let mut phi = FractionalAssignment::new(n_host, k);
    let w = rational(1, k as i64);
    for i in 0..n {
        let e: Vec<u32> = (0..k).map(|j| vertices[(i + j) % n]).collect();
        phi.set(e, w.clone());
    }
    Ok(phi)
}

/// All `k`-subsets of `1..=n_total` whose weights sum to at least 1.
pub fn weight_closure(n_total: usize, k: usize, w: &VertexWeights) -> Result<KGraph> {
    if w.len() != n_total {
        return Err(Error::Range(format!(
            "{} weights given for {n_total} vertices",
            w.len()
        )));
    }
    let den = common_denominator(&w.w);
    let ints: Vec<BigInt> = w.w.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    let mut flat = Vec::new();
    for e in k_sets(n_total, k) {
        let s: BigInt = e.iter().map(|&v| &ints[(v - 1) as usize]).sum();
        if s >= den {
            flat.extend_from_slice(&e);
        }
    }
    Ok(KGraph::from_sorted_flat(n_total, k, flat))
}

/// A vertex renaming; both directions stored, 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relabeling {
    /// `new_of_old[v - 1]` is the new name of old vertex `v`.
    pub new_of_old: Vec<u32>,
    /// `old_of_new[v - 1]` is the old name of new vertex `v`.
    pub old_of_new: Vec<u32>,
}

impl Relabeling {
    /// Sorts vertices `1..=prefix` by non-increasing weight, ties by old index;
    /// the vertices after `prefix` keep their names.
    pub fn by_weights(w: &VertexWeights, prefix: usize) -> Self {
        let mut order: Vec<u32> = (1..=prefix as u32).collect();
        order.sort_by(|&a, &b| w.get(b).cmp(w.get(a)).then(a.cmp(&b)));
        order.extend(prefix as u32 + 1..=w.len() as u32);
        let mut new_of_old = vec![0; w.len()];
        for (i, &old) in order.iter().enumerate() {
            new_of_old[(old - 1) as usize] = i as u32 + 1;
        }
        Relabeling {
            new_of_old,
            old_of_new: order,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.old_of_new
            .iter()
            .enumerate()
            .all(|(i, &v)| v == i as u32 + 1)
    }

    /// Weights under the new names.
    pub fn apply_weights(&self, w: &VertexWeights) -> VertexWeights {
        VertexWeights::new(
            self.old_of_new
                .iter()
                .map(|&old| w.get(old).clone())
                .collect(),
        )
    }

    pub fn to_old(&self, v: u32) -> u32 {
        self.old_of_new[(v - 1) as usize]
    }

    pub fn to_new(&self, v: u32) -> u32 {
        self.new_of_old[(v - 1) as usize]
    }
}

/// Renames the vertices of `h` so that `w` is non-increasing.
pub fn relabel_by_weights(h: &KGraph, w: &VertexWeights) -> Result<(KGraph, Relabeling)> {
    if w.len() != h.n() {
        return Err(Error::Range(format!(
            "{} weights given for {} vertices",
            w.len(),
            h.n()
        )));
    }
    let p = Relabeling::by_weights(w, h.n());
    Ok((h.relabel(&p.new_of_old), p))
}
