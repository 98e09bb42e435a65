//! Random sparsification driven by perfect fractional matchings on vertex copies.
//!
//! Each edge lying inside copy `R^i` is kept independently with probability
//! `φ^i(e)`. The sampling rule is a reconstruction: the source states only the
//! resulting degree and codegree bounds.

use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::constructions::rng_for;
use crate::error::{Error, Result};
use crate::hypergraph::KGraph;
use crate::lp::FractionalAssignment;
use crate::numeric::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq)]
pub struct SparsifyReport {
    pub graph: KGraph,
    /// Degree of each vertex in the sparsified graph, indexed `v - 1`.
    pub degrees: Vec<u64>,
    /// Expected degree `Σ_i Σ_{e ∋ v, e ⊆ R^i} φ^i(e)`, indexed `v - 1`.
    pub expected_degrees: Vec<Rational>,
    pub max_codegree: u64,
}

/// Spanning subgraph of `h` keeping each copy edge with probability `φ^i(e)`.
pub fn sparsify_by_fractional(
    h: &KGraph,
    copies: &[(Vec<u32>, FractionalAssignment)],
    seed: u64,
) -> Result<SparsifyReport> {
    let n = h.n();
    let mut member = vec![false; n + 1];
    // owner[e] = copy containing edge e.
    let mut owner: Vec<Option<usize>> = vec![None; h.edge_count()];
    for (ci, (r, phi)) in copies.iter().enumerate() {
        member.iter_mut().for_each(|m| *m = false);
        for &v in r {
            if v == 0 || v as usize > n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            member[v as usize] = true;
        }
        check_perfect_on(h, r, &member, phi, ci)?;
        for (i, e) in h.edges().enumerate() {
            if e.iter().all(|&v| member[v as usize]) {
                if let Some(prev) = owner[i] {
                    return Err(Error::Precondition(format!(
                        "edge {e:?} lies in copies {prev} and {ci}"
                    )));
                }
                owner[i] = Some(ci);
            }
        }
    }

    let mut rng = rng_for(seed, 0);
    let mut kept = Vec::new();
    let mut expected_degrees = vec![Rational::zero(); n];
    for (i, e) in h.edges().enumerate() {
        let Some(ci) = owner[i] else { continue };
        let p = copies[ci].1.get(e);
        if p.is_zero() {
            continue;
        }
        for &v in e {
            expected_degrees[(v - 1) as usize] += &p;
        }
        if bernoulli(&mut rng, &p) {
            kept.push(e.to_vec());
        }
    }
    let graph = KGraph::from_sorted_edges(n, h.k(), kept);
    let max_codegree = if h.k() >= 3 {
        graph.max_l_degree(2)?
    } else {
        0
    };
    Ok(SparsifyReport {
        degrees: graph.vertex_degrees(),
        expected_degrees,
        max_codegree,
        graph,
    })
}

fn check_perfect_on(
    h: &KGraph,
    r: &[u32],
    member: &[bool],
    phi: &FractionalAssignment,
    ci: usize,
) -> Result<()> {
    let fail = |why: String| Err(Error::Precondition(format!("copy {ci}: {why}")));
    if phi.n() != h.n() || phi.k() != h.k() {
        return fail("assignment dimensions differ from the host".into());
    }
    for (e, w) in phi.support() {
        if !e.iter().all(|&v| member[v as usize]) || !h.contains_edge(e) {
            return fail(format!("{e:?} is not an edge of the induced subgraph"));
        }
        if *w > Rational::one() {
            return fail(format!("weight {} exceeds 1", format_rational(w)));
        }
    }
    let loads = phi.vertex_loads();
    for &v in r {
        if !loads[(v - 1) as usize].is_one() {
            return fail(format!(
                "vertex {v} has load {}, not 1",
                format_rational(&loads[(v - 1) as usize])
            ));
        }
    }
    Ok(())
}

/// Exact Bernoulli draw for a rational probability in `[0, 1]`.
fn bernoulli(rng: &mut impl Rng, p: &Rational) -> bool {
    if p.is_one() {
        return true;
    }
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(a), Some(b)) => rng.random_range(0..b) < a,
        _ => rng.random::<f64>() < p.to_f64().unwrap_or(0.0),
    }
}
