//! Extremal families, barrier constructions, closed-form thresholds and seeded
//! random generators.
//!
//! Every threshold is computed with arbitrary-precision integers or rationals;
//! nothing here touches floating point except the random generators.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::KGraph;
use crate::numeric::{binomial, binomial_u128, colex_unrank, k_sets, rational, Rational};

/// A split of `1..=n` into `U` and `W`; `W` is the side every template edge must meet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexPartition {
    pub u: Vec<u32>,
    pub w: Vec<u32>,
}

impl VertexPartition {
    /// `W` as given, `U` its complement in `1..=n`.
    pub fn from_w(n: usize, w: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut w: Vec<u32> = w.into_iter().collect();
        w.sort_unstable();
        w.dedup();
        if let Some(&v) = w.iter().find(|&&v| v == 0 || v as usize > n) {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        let u = (1..=n as u32)
            .filter(|v| w.binary_search(v).is_err())
            .collect();
        Ok(VertexPartition { u, w })
    }

    /// The threshold split: `W = {1, .., m-1}`.
    pub fn lowest(n: usize, w_size: usize) -> Result<Self> {
        if w_size > n {
            return Err(Error::Range(format!("|W| = {w_size} exceeds n = {n}")));
        }
        Self::from_w(n, 1..=w_size as u32)
    }

    pub fn n(&self) -> usize {
        self.u.len() + self.w.len()
    }

    /// Checks disjointness and coverage of `1..=n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut all: Vec<u32> = self.u.iter().chain(&self.w).copied().collect();
        all.sort_unstable();
        if all.len() != n || all.iter().zip(1..).any(|(&v, i)| v != i) {
            return Err(Error::Range(format!(
                "U and W must partition 1..={n} (got |U| = {}, |W| = {})",
                self.u.len(),
                self.w.len()
            )));
        }
        Ok(())
    }

    /// Membership table for `W`, indexed by vertex id.
    pub fn w_indicator(&self) -> Vec<bool> {
        let mut ind = vec![false; self.n() + 1];
        for &v in &self.w {
            ind[v as usize] = true;
        }
        ind
    }
}

/// `H_{k,l}(U, W)`: all `k`-sets meeting `W` in between 1 and `l` vertices.
pub fn build_hkl(u: &[u32], w: &[u32], k: usize, l: usize) -> Result<KGraph> {
    if l < 1 || l > k {
        return Err(Error::Range(format!("l = {l} must lie in 1..={k}")));
    }
    let part = VertexPartition {
        u: u.to_vec(),
        w: w.to_vec(),
    };
    let n = part.n();
    part.validate(n)?;
    let in_w = part.w_indicator();
    Ok(KGraph::from_predicate(n, k, |e| {
        let hits = e.iter().filter(|&&v| in_w[v as usize]).count();
        (1..=l).contains(&hits)
    }))
}

/// `H_k(n, m) = H_{k,k-1}(U, W)` with `W = {1, .., m-1}`.
pub fn build_hknm(n: usize, k: usize, m: usize) -> Result<(KGraph, VertexPartition)> {
    if m < 1 || m - 1 + k > n {
        return Err(Error::Range(format!(
            "H_k(n,m) needs 1 <= m and m - 1 + k <= n (n={n}, k={k}, m={m})"
        )));
    }
    let part = VertexPartition::lowest(n, m - 1)?;
    let h = build_hkl(&part.u, &part.w, k, k - 1)?;
    Ok((h, part))
}

/// `K_n^k`.
pub fn complete(n: usize, k: usize) -> Result<KGraph> {
    if k == 0 || n < k {
        return Err(Error::Range(format!(
            "K_n^k needs n >= k >= 1 (n={n}, k={k})"
        )));
    }
    Ok(KGraph::from_predicate(n, k, |_| true))
}

/// `H + K_r^k`: adds vertices `n+1..=n+r` and every `k`-set meeting them.
pub fn join_clique(h: &KGraph, r: usize) -> KGraph {
    if r == 0 {
        return h.clone();
    }
    let n = h.n() as u32;
    let k = h.k();
    let mut edges: Vec<Vec<u32>> = h.edges().map(<[u32]>::to_vec).collect();
    edges.extend(k_sets(h.n() + r, k).filter(|e| e[k - 1] > n));
    KGraph::new(h.n() + r, k, edges).expect("joined edges are valid")
}

/// Sizes outside the classical parity setting; returned as warnings, never errors.
pub fn parity_warnings(a: usize, b: usize) -> Vec<String> {
    let mut out = Vec::new();
    if a.abs_diff(b) > 2 {
        out.push(format!("||A| - |B|| = {} exceeds 2", a.abs_diff(b)));
    }
    if a.is_multiple_of(2) {
        out.push(format!("|A| = {a} is even"));
    }
    out
}

/// All `k`-subsets of `A ∪ B` meeting `A = {1..a}` in an even number of vertices.
pub fn parity_construction(a: usize, b: usize, k: usize) -> Result<KGraph> {
    if a + b < k {
        return Err(Error::Range(format!("a + b = {} < k = {k}", a + b)));
    }
    let a32 = a as u32;
    Ok(KGraph::from_predicate(a + b, k, |e| {
        e.iter().filter(|&&v| v <= a32).count() % 2 == 0
    }))
}

/// `K_n^k` minus every edge inside `{1, .., n - n/k + 1}`.
pub fn space_barrier(n: usize, k: usize) -> Result<KGraph> {
    if k == 0 || !n.is_multiple_of(k) || n < k {
        return Err(Error::Range(format!(
            "space barrier needs k | n (n={n}, k={k})"
        )));
    }
    let core = (n - n / k + 1) as u32;
    Ok(KGraph::from_predicate(n, k, |e| e[e.len() - 1] > core))
}

/// `C(n-1, k-1) - C(n-m, k-1)`, the vertex-degree threshold for a matching of size `m`.
pub fn vertex_degree_threshold(n: usize, k: usize, m: usize) -> Result<BigUint> {
    if m < 1 || k < 1 || n < m + k - 1 {
        return Err(Error::Range(format!(
            "threshold needs m >= 1 and n >= m + k - 1 (n={n}, k={k}, m={m})"
        )));
    }
    let (n, k, m) = (n as u64, k as u64, m as u64);
    Ok(binomial(n - 1, k - 1) - binomial(n - m, k - 1))
}

/// `max{C(km-1, k), C(n,k) - C(n-m+1, k)} + 1`, the edge-count threshold for a matching of size `m`.
pub fn erdos_threshold(n: usize, k: usize, m: usize) -> Result<BigUint> {
    if m < 1 || k * m > n {
        return Err(Error::Range(format!(
            "Erdős threshold needs 1 <= m and km <= n (n={n}, k={k}, m={m})"
        )));
    }
    let (n, k, m) = (n as u64, k as u64, m as u64);
    let clique = binomial(k * m - 1, k);
    let star = binomial(n, k) - binomial(n - m + 1, k);
    Ok(clique.max(star) + BigUint::one())
}

/// `max{1/2, 1 - (1 - 1/k)^(k-l)}`, the conjectured `l`-degree fraction for perfect matchings.
pub fn l_degree_conjectured_fraction(k: usize, l: usize) -> Result<Rational> {
    if l < 1 || l >= k {
        return Err(Error::Range(format!("need 1 <= l < k (k={k}, l={l})")));
    }
    let base = rational(k as i64 - 1, k as i64);
    let mut power = Rational::one();
    for _ in 0..k - l {
        power *= &base;
    }
    let space = Rational::one() - power;
    Ok(space.max(rational(1, 2)))
}

/// Degree parameters around the main threshold, plus the optional asymptotic constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub vertex_degree_threshold: BigUint,
    pub erdos_threshold: Option<BigUint>,
    pub beta: Option<Rational>,
    pub rho: Option<Rational>,
    pub eps: Option<Rational>,
}

impl ThresholdSpec {
    pub fn new(n: usize, k: usize, m: usize) -> Result<Self> {
        Ok(ThresholdSpec {
            n,
            k,
            m,
            vertex_degree_threshold: vertex_degree_threshold(n, k, m)?,
            erdos_threshold: erdos_threshold(n, k, m).ok(),
            beta: None,
            rho: None,
            eps: None,
        })
    }

    /// Upper bound `1 / (3^k 2 k^5 k!)^4` on the range constant `β(k)`.
    pub fn beta_upper_bound(k: usize) -> Rational {
        let k_big = BigUint::from(k);
        let fact: BigUint = (1..=k as u64).map(BigUint::from).product();
        let inner = BigUint::from(3u32).pow(k as u32) * 2u32 * k_big.pow(5) * fact;
        Rational::new(1.into(), num_bigint::BigInt::from(inner.pow(4)))
    }

    /// Non-fatal notes about constants outside their admissible ranges.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(beta) = &self.beta {
            if *beta >= Self::beta_upper_bound(self.k) || *beta <= Rational::zero() {
                out.push(format!("beta = {beta} lies outside (0, 1/(3^k 2k^5 k!)^4)"));
            }
        }
        out
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Binomial random `k`-graph: each `k`-set independently with probability `p`.
///
/// Uses geometric skipping over colex ranks, so sparse graphs on many vertices
/// cost time proportional to the number of edges drawn.
pub fn random_kgraph(n: usize, k: usize, p: f64, seed: u64) -> Result<KGraph> {
    random_kgraph_stream(n, k, p, seed, 0)
}

fn random_kgraph_stream(n: usize, k: usize, p: f64, seed: u64, stream: u64) -> Result<KGraph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range(format!("probability {p} outside [0, 1]")));
    }
    if k == 0 {
        return Err(Error::Range("uniformity must be at least 1".into()));
    }
    let total = binomial_u128(n as u64, k as u64)
        .ok_or_else(|| Error::TooLarge(format!("C({n}, {k}) overflows 128 bits")))?;
    if p == 0.0 || total == 0 {
        return Ok(KGraph::edgeless(n, k));
    }
    if p == 1.0 {
        return complete(n, k);
    }
    let mut rng = rng_for(seed, stream);
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    let mut idx: u128 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (total - idx) as f64 {
            break;
        }
        idx += skip as u128;
        if idx >= total {
            break;
        }
        edges.push(colex_unrank(idx, n as u64, k as u64));
        idx += 1;
    }
    edges.sort_unstable();
    Ok(KGraph::from_sorted_flat(n, k, edges.concat()))
}

/// Rejection sampler: redraws `random_kgraph` until `δ_1 >= floor`.
///
/// Attempt `t` uses stream `t` of the seeded generator, so the accepted graph
/// and the attempt count are reproducible.
pub fn random_kgraph_conditioned(
    n: usize,
    k: usize,
    p: f64,
    floor: u64,
    tries: usize,
    seed: u64,
) -> Result<(KGraph, usize)> {
    for t in 0..tries {
        let g = random_kgraph_stream(n, k, p, seed, t as u64 + 1)?;
        if g.min_l_degree(1)? >= floor {
            return Ok((g, t + 1));
        }
    }
    Err(Error::SamplingExhausted { tries })
}

/// `H_k(n, m)` plus each `k`-subset of `U` independently with probability `p`.
///
/// Concentrates samples right at the degree threshold: the template alone has
/// `δ_1` exactly at the bound, and the planted `U`-edges push it over.
pub fn planted_extremal(n: usize, k: usize, m: usize, p: f64, seed: u64) -> Result<KGraph> {
    let (template, part) = build_hknm(n, k, m)?;
    let extra = random_kgraph(part.u.len(), k, p, seed)?;
    let lifted = extra.edges().map(|e| {
        e.iter()
            .map(|&v| part.u[(v - 1) as usize])
            .collect::<Vec<u32>>()
    });
    let mut all: Vec<Vec<u32>> = template.edges().map(<[u32]>::to_vec).collect();
    all.extend(lifted);
    KGraph::new(n, k, all)
}
