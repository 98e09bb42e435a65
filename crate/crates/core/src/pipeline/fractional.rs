//! The weight-closure argument run as an algorithm: from a minimum fractional
//! cover of `H_r^k` to an explicit perfect fractional matching of the closure.

use std::time::Instant;

use num_traits::Signed;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{check_preconditions, PipelineConfig, Preconditions, Route};
use crate::constructions::{join_clique, VertexPartition};
use crate::containment::per_vertex_deficits;
use crate::error::{Error, Result};
use crate::hypergraph::{KGraph, Matching};
use crate::lp::{
    clique_window_on, max_fractional_matching, min_fractional_cover, weight_closure,
    FractionalAssignment, Relabeling,
};
use crate::matching::exact_nu;
use crate::numeric::{
    binomial_u128, ceil_u64, format_rational, int_rational, pow_rational, rational, Rational,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `G'` is a down-set.
    pub link_stable: bool,
    /// `min(n, m + ⌈εn⌉)`.
    pub block_size: usize,
    /// `G` restricted to the first `block_size` vertices is complete.
    pub block_complete: bool,
    /// Every link edge extends by every other vertex of `[n]`.
    pub transfer_holds: bool,
    /// Number of `(e, i)` pairs the transfer check examined.
    pub transfer_checks: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatchingRoute {
    /// Maximum matching of the link `G'`, each edge extended by a fresh vertex.
    ExactLink,
    /// `M_21` inside the complete block plus one-`W`-vertex link edges, extended.
    Greedy,
    /// Maximum matching of `G` itself.
    ExactG,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub name: String,
    pub elapsed_micros: u64,
    pub detail: serde_json::Value,
}

/// Everything the pipeline produced, in the relabelled vertex names.
#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    /// Perfect fractional matching of `h_prime`.
    pub phi: FractionalAssignment,
    /// The weight closure `H'` on `n + r` vertices.
    pub h_prime: KGraph,
    pub relabeling: Relabeling,
    /// `τ'(H_r^k)`.
    pub cover_value: Rational,
    /// `ν'(H_r^k)` from the packing solver; equal to `phi.value()` on success.
    pub lp_value: Rational,
    pub preconditions: Preconditions,
    pub structure: StructureReport,
    /// `m` disjoint edges of `G = H' - Q`.
    pub matching: Matching,
    pub route: MatchingRoute,
    /// Perfect matching of `H' - Q' - V(M)`.
    pub completion: Matching,
    /// `(n + r) mod k`.
    pub s: usize,
    pub trace: Vec<TraceStep>,
}

impl PipelineOutcome {
    /// The trace as one JSON array; with `timings == false` the elapsed times are dropped.
    pub fn trace_json(&self, timings: bool) -> serde_json::Value {
        serde_json::Value::Array(
            self.trace
                .iter()
                .map(|t| {
                    let mut v = json!({ "step": t.name, "detail": t.detail });
                    if timings {
                        v["elapsed_micros"] = json!(t.elapsed_micros);
                    }
                    v
                })
                .collect(),
        )
    }
}

struct Tracer {
    steps: Vec<TraceStep>,
    clock: Instant,
}

impl Tracer {
    fn new() -> Self {
        Tracer {
            steps: Vec::new(),
            clock: Instant::now(),
        }
    }

    fn record(&mut self, name: &str, detail: serde_json::Value) {
        let now = Instant::now();
        self.steps.push(TraceStep {
            name: name.into(),
            elapsed_micros: now.duration_since(self.clock).as_micros() as u64,
            detail,
        });
        self.clock = now;
    }
}

fn contradiction(claim: &str) -> Error {
    Error::InternalContradiction {
        claim: claim.into(),
    }
}

fn step_failure(step: &str, reason: impl Into<String>) -> Error {
    Error::StepFailure {
        step: step.into(),
        reason: reason.into(),
    }
}

/// Builds `H_r^k`, runs the cover / closure / matching / splice steps and
/// verifies the result is a perfect fractional matching of `H'` whose value is
/// `ν'(H_r^k)`.
///
/// Hypotheses are evaluated and returned in [`PipelineOutcome::preconditions`]
/// but not enforced. Link stability and edge transfer follow from the closure
/// alone, so their failure is always an [`Error::InternalContradiction`]; an
/// incomplete initial block is one only when the independence hypothesis was
/// checked and holds.
pub fn fractional_pm_pipeline(
    h: &KGraph,
    m: usize,
    r: usize,
    cfg: &PipelineConfig,
) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let n = h.n();
    let k = h.k();
    if k < 2 {
        return Err(Error::Range("pipeline needs k >= 2".into()));
    }
    let mut tr = Tracer::new();
    let pre = check_preconditions(h, m, r, cfg)?;
    let eps_n = ceil_u64(&(&cfg.eps * int_rational(n)))? as usize;
    tr.record(
        "preconditions",
        json!({
            "n": n, "k": k, "m": m, "r": r,
            "alpha": pre.alpha, "alpha_bound": pre.alpha_bound, "alpha_ok": pre.alpha_ok,
            "min_degree": pre.min_degree, "degree_bound": format_rational(&pre.degree_bound),
            "degree_ok": pre.degree_ok, "r_condition_ok": pre.r_condition_ok,
            "m_range_ok": pre.m_range_ok, "constants_ok": pre.constants_ok,
            "eps_n_ceil": eps_n, "warnings": pre.warnings,
            "two_eta_over_k": format_rational(&(&cfg.eta * rational(2, k as i64))),
            "four_rho": format_rational(&(&cfg.rho * int_rational(4))),
        }),
    );

    // (1) minimum fractional cover, vertices of H sorted by weight.
    let aug = join_clique(h, r);
    let (tau, w) = min_fractional_cover(&aug);
    let relabeling = Relabeling::by_weights(&w, n);
    let w2 = relabeling.apply_weights(&w);
    tr.record(
        "cover",
        json!({
            "tau_frac": format_rational(&tau),
            "relabel_identity": relabeling.is_identity(),
            "max_weight": w2.w.first().map(format_rational),
        }),
    );

    // (2) closure and its restriction to the original vertices.
    let h_prime = weight_closure(n + r, k, &w2)?;
    if !aug.relabel(&relabeling.new_of_old).is_subgraph_of(&h_prime) {
        return Err(contradiction("closure contains the augmented graph"));
    }
    let all: Vec<u32> = (1..=n as u32).collect();
    let (g, _) = h_prime.induced(&all)?;
    let g_link = g.link(n as u32)?;
    tr.record(
        "closure",
        json!({
            "closure_edges": h_prime.edge_count(),
            "g_edges": g.edge_count(),
            "link_edges": g_link.edge_count(),
        }),
    );

    // (3) structure of the closure: stable link, complete block, transfer.
    let structure = inspect_structure(&g, &g_link, m, eps_n)?;
    tr.record(
        "structure",
        serde_json::to_value(&structure).expect("plain struct serializes"),
    );
    if !structure.link_stable {
        return Err(contradiction("closure link is stable"));
    }
    if !structure.transfer_holds {
        return Err(contradiction("link edges extend by every vertex"));
    }
    if !structure.block_complete && pre.alpha_ok == Some(true) {
        return Err(contradiction("initial block is complete"));
    }

    // (4) m disjoint edges in G.
    let (matching, route, attempts) = find_matching(&g, &g_link, m, eps_n, &cfg.rho, cfg.route)?;
    tr.record(
        "matching",
        json!({ "route": route, "size": matching.len(), "attempts": attempts }),
    );

    // (5) perfect matching of H' - Q' - V(M) through Q.
    let s = (n + r) % k;
    if s > r {
        return Err(step_failure(
            "completion",
            format!("(n + r) mod k = {s} exceeds r = {r}"),
        ));
    }
    let completion = complete_through_q(&h_prime, n, r, s, &matching)?;
    tr.record(
        "completion",
        json!({ "s": s, "edges": completion.len(), "q_prime": (n + 1..=n + s).collect::<Vec<_>>() }),
    );

    // (6) assemble, splicing cyclic windows on f ∪ Q' when s > 0.
    let mut phi = FractionalAssignment::new(n + r, k);
    let mut integral: Vec<Vec<u32>> = matching
        .edges()
        .iter()
        .chain(completion.edges())
        .cloned()
        .collect();
    let spliced = if s > 0 {
        let pos = integral
            .iter()
            .position(|e| !matching.edges().contains(e))
            .unwrap_or(0);
        let f = integral.remove(pos);
        let mut window_vertices = f.clone();
        window_vertices.extend(n as u32 + 1..=(n + s) as u32);
        let windows = clique_window_on(&window_vertices, n + r, k)?;
        for (e, x) in windows.support() {
            phi.add(e.to_vec(), x);
        }
        Some(f)
    } else {
        None
    };
    for e in integral {
        phi.add(e, &rational(1, 1));
    }

    phi.check_feasible(&h_prime)
        .map_err(|e| contradiction(&format!("assembled assignment is feasible ({e})")))?;
    let value = phi.value();
    if value != rational((n + r) as i64, k as i64) {
        return Err(contradiction("assembled assignment is perfect"));
    }
    let (lp_value, _) = max_fractional_matching(&aug);
    if lp_value != value || tau != value {
        return Err(contradiction("value equals the fractional matching number"));
    }
    tr.record(
        "assemble",
        json!({
            "value": format_rational(&value),
            "lp_value": format_rational(&lp_value),
            "support": phi.support_len(),
            "spliced_edge": spliced,
        }),
    );

    Ok(PipelineOutcome {
        phi,
        h_prime,
        relabeling,
        cover_value: tau,
        lp_value,
        preconditions: pre,
        structure,
        matching,
        route,
        completion,
        s,
        trace: tr.steps,
    })
}

fn inspect_structure(
    g: &KGraph,
    g_link: &KGraph,
    m: usize,
    eps_n: usize,
) -> Result<StructureReport> {
    let n = g.n();
    let k = g.k();
    let block_size = n.min(m + eps_n);
    let block: Vec<u32> = (1..=block_size as u32).collect();
    let (gb, _) = g.induced(&block)?;
    let full = binomial_u128(block_size as u64, k as u64).unwrap_or(u128::MAX);
    let block_complete = gb.edge_count() as u128 == full;

    let mut transfer_holds = true;
    let mut transfer_checks = 0u64;
    'outer: for e in g_link.edges() {
        for i in 1..=n as u32 {
            if e.binary_search(&i).is_ok() {
                continue;
            }
            transfer_checks += 1;
            let mut f = e.to_vec();
            f.push(i);
            f.sort_unstable();
            if !g.contains_edge(&f) {
                transfer_holds = false;
                break 'outer;
            }
        }
    }
    Ok(StructureReport {
        link_stable: g_link.is_stable(),
        block_size,
        block_complete,
        transfer_holds,
        transfer_checks,
    })
}

/// Runs the routes `route` allows in order; returns the first success and the
/// failure reasons of the routes tried before it.
fn find_matching(
    g: &KGraph,
    g_link: &KGraph,
    m: usize,
    eps_n: usize,
    rho: &Rational,
    route: Route,
) -> Result<(Matching, MatchingRoute, Vec<String>)> {
    let order: &[MatchingRoute] = match route {
        Route::Auto => &[
            MatchingRoute::ExactLink,
            MatchingRoute::Greedy,
            MatchingRoute::ExactG,
        ],
        Route::Exact => &[MatchingRoute::ExactLink, MatchingRoute::ExactG],
        Route::Greedy => &[MatchingRoute::Greedy],
    };
    let mut reasons = Vec::new();
    let mut budget_hit = None;
    for &r in order {
        let attempt = match r {
            MatchingRoute::ExactLink => exact_link_route(g, g_link, m),
            MatchingRoute::Greedy => greedy_route(g, g_link, m, eps_n, rho),
            MatchingRoute::ExactG => exact_g_route(g, m),
        };
        match attempt {
            Ok(mm) => return Ok((mm, r, reasons)),
            Err(e @ Error::BudgetExhausted { .. }) => {
                reasons.push(format!("{r:?}: {e}"));
                budget_hit = Some(e);
            }
            Err(e) => reasons.push(format!("{r:?}: {e}")),
        }
    }
    match budget_hit {
        Some(e) => Err(e),
        None => Err(step_failure("matching", reasons.join("; "))),
    }
}

/// Adds a distinct unused vertex of `[n]` to each `(k-1)`-edge and checks the result lies in `g`.
fn extend_fresh(g: &KGraph, fixed: &[Vec<u32>], partial: &[Vec<u32>]) -> Result<Vec<Vec<u32>>> {
    let n = g.n();
    let mut used = vec![false; n + 1];
    for v in fixed.iter().chain(partial).flatten() {
        used[*v as usize] = true;
    }
    let mut fresh = (1..=n as u32).filter(|&v| !used[v as usize]);
    let mut out = Vec::with_capacity(partial.len());
    for e in partial {
        let v = fresh.next().ok_or_else(|| {
            step_failure("matching", "not enough fresh vertices to extend link edges")
        })?;
        let mut f = e.clone();
        f.push(v);
        f.sort_unstable();
        if !g.contains_edge(&f) {
            return Err(contradiction("extended link edge lies in G"));
        }
        out.push(f);
    }
    Ok(out)
}

fn exact_link_route(g: &KGraph, g_link: &KGraph, m: usize) -> Result<Matching> {
    let (nu, mm) = exact_nu(g_link)?;
    if nu < m {
        return Err(step_failure(
            "matching",
            format!("link matching number {nu} < {m}"),
        ));
    }
    let chosen: Vec<Vec<u32>> = mm.edges()[..m].to_vec();
    Ok(Matching::new(extend_fresh(g, &[], &chosen)?))
}

fn exact_g_route(g: &KGraph, m: usize) -> Result<Matching> {
    let (nu, mm) = exact_nu(g)?;
    if nu < m {
        return Err(step_failure(
            "matching",
            format!("matching number of G is {nu} < {m}"),
        ));
    }
    Ok(Matching::new(mm.edges()[..m].iter().cloned()))
}

/// `V^bad`: vertices of the link whose deficit `d` against `H_{k-1,k-2}(U, W)`
/// exceeds `ρ^{1/4} (n-1)^{k-2}`, tested as `d^4 > ρ (n-1)^{4(k-2)}`.
fn bad_link_vertices(g_link: &KGraph, m: usize, rho: &Rational) -> Result<Vec<u32>> {
    if m < 2 {
        return Ok(Vec::new());
    }
    let nl = g_link.n();
    let l = g_link.k() - 1;
    let p = VertexPartition::lowest(nl, m - 1)?;
    let deficits = per_vertex_deficits(g_link, &p, l)?;
    let bound = rho * pow_rational(nl as u64, 4 * l as u32);
    Ok(deficits
        .iter()
        .enumerate()
        .filter(|&(_, &d)| {
            let d = int_rational(d);
            let d4 = &d * &d * &d * &d;
            d4 > bound
        })
        .map(|(i, _)| i as u32 + 1)
        .collect())
}

/// The close-to-extremal construction: `b + 1` disjoint edges inside
/// `S_1 = B^bad ∪ {m, .., m + ⌈εn⌉}`, then `m - b - 1` link edges meeting
/// `W \ B^bad` once and avoiding `V^bad`, each extended by a fresh vertex.
fn greedy_route(
    g: &KGraph,
    g_link: &KGraph,
    m: usize,
    eps_n: usize,
    rho: &Rational,
) -> Result<Matching> {
    let n = g.n();
    let k = g.k();
    if k < 3 {
        return Err(step_failure(
            "matching",
            "the close-to-extremal route needs k >= 3",
        ));
    }
    if rho.is_negative() {
        return Err(Error::Range("rho must be nonnegative".into()));
    }
    let v_bad = bad_link_vertices(g_link, m, rho)?;
    let b_bad: Vec<u32> = v_bad
        .iter()
        .copied()
        .filter(|&v| (v as usize) < m)
        .collect();
    let b = b_bad.len();
    let top = n.min(m + eps_n) as u32;
    let mut s1: Vec<u32> = b_bad.clone();
    s1.extend(m as u32..=top);
    if (b + 1) * k > s1.len() {
        return Err(step_failure(
            "matching",
            format!(
                "|S_1| = {} cannot hold {} disjoint {k}-sets",
                s1.len(),
                b + 1
            ),
        ));
    }
    let m21: Vec<Vec<u32>> = s1
        .chunks_exact(k)
        .take(b + 1)
        .map(<[u32]>::to_vec)
        .collect();
    if let Some(e) = m21.iter().find(|e| !g.contains_edge(e)) {
        return Err(step_failure(
            "matching",
            format!("{e:?} missing from the initial block"),
        ));
    }

    let mut blocked = vec![false; n + 1];
    for &v in m21.iter().flatten().chain(&v_bad) {
        blocked[v as usize] = true;
    }
    let need = m - b - 1;
    let mut m22: Vec<Vec<u32>> = Vec::with_capacity(need);
    for e in g_link.edges() {
        if m22.len() == need {
            break;
        }
        let in_w = e.iter().filter(|&&v| (v as usize) < m).count();
        if in_w == 1 && e.iter().all(|&v| !blocked[v as usize]) {
            for &v in e {
                blocked[v as usize] = true;
            }
            m22.push(e.to_vec());
        }
    }
    if m22.len() < need {
        return Err(step_failure(
            "matching",
            format!("found {} of {need} one-W-vertex link edges", m22.len()),
        ));
    }
    let mut edges = extend_fresh(g, &m21, &m22)?;
    edges.extend(m21);
    Ok(Matching::new(edges))
}

/// A perfect matching of `H' - Q' - V(M)`: originals in groups of `k - 1`
/// padded with `Q`-vertices, then the leftover `Q` in blocks of `k`. Falls back
/// to an exact search when `Q` is too small for that.
fn complete_through_q(
    h_prime: &KGraph,
    n: usize,
    r: usize,
    s: usize,
    mm: &Matching,
) -> Result<Matching> {
    let k = h_prime.k();
    let mut used = vec![false; n + 1];
    for &v in mm.edges().iter().flatten() {
        used[v as usize] = true;
    }
    let originals: Vec<u32> = (1..=n as u32).filter(|&v| !used[v as usize]).collect();
    let q: Vec<u32> = ((n + s + 1) as u32..=(n + r) as u32).collect();
    if !(originals.len() + q.len()).is_multiple_of(k) {
        return Err(step_failure(
            "completion",
            "remaining vertex count is not a multiple of k",
        ));
    }
    let groups = originals.chunks(k - 1);
    let q_needed: usize = groups.clone().map(|c| k - c.len()).sum();
    if q_needed <= q.len() {
        let mut q_iter = q.iter().copied();
        let mut edges: Vec<Vec<u32>> = groups
            .map(|c| {
                let mut e = c.to_vec();
                e.extend(q_iter.by_ref().take(k - c.len()));
                e
            })
            .collect();
        let rest: Vec<u32> = q_iter.collect();
        edges.extend(rest.chunks_exact(k).map(<[u32]>::to_vec));
        let out = Matching::new(edges);
        if !h_prime.verify_matching(&out) {
            return Err(contradiction("Q-vertices have full degree in the closure"));
        }
        return Ok(out);
    }
    let mut rest = originals;
    rest.extend(&q);
    let (sub, map) = h_prime.induced(&rest)?;
    let (nu, found) = exact_nu(&sub)?;
    if nu * k != rest.len() {
        return Err(step_failure(
            "completion",
            format!(
                "no perfect matching on the {} remaining vertices (maximum {nu})",
                rest.len()
            ),
        ));
    }
    Ok(map.translate_matching(&found))
}
