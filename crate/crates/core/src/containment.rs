//! Distance to the extremal template, good/bad vertices and the subset
//! edge-density test.
//!
//! Every comparison against `ε n^k` or `θ n^{k-1}` is an exact rational one.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::constructions::{rng_for, VertexPartition};
use crate::error::{Error, Result};
use crate::hypergraph::KGraph;
use crate::numeric::{
    binomial_u128, ceil_u64, format_rational, int_rational, pow_rational, subsets, Rational,
};

/// Exhaustive search is used up to this many candidate sets.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    LocalSearch,
}

/// Which search `eps_contains` runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeRequest {
    /// Exhaustive when at most [`EXHAUSTIVE_LIMIT`] partitions exist, else local search.
    #[default]
    Auto,
    Exhaustive,
    Local,
}

impl std::str::FromStr for ModeRequest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ModeRequest::Auto),
            "exhaustive" => Ok(ModeRequest::Exhaustive),
            "local" => Ok(ModeRequest::Local),
            _ => Err(Error::Range(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    /// Best partition found.
    pub partition: VertexPartition,
    /// Template edges missing from `H` under `partition`.
    pub deficiency: u64,
    /// `ε n^k`.
    #[serde(with = "rational_string")]
    pub epsilon_bound: Rational,
    pub satisfied: bool,
    pub search_mode: SearchMode,
    /// Partitions evaluated.
    pub evaluated: u64,
}

pub(crate) mod rational_string {
    use crate::numeric::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

fn check_partition(h: &KGraph, p: &VertexPartition, l: usize) -> Result<Vec<bool>> {
    p.validate(h.n())?;
    if l == 0 || l > h.k() {
        return Err(Error::Range(format!("l = {l} outside 1..={}", h.k())));
    }
    Ok(p.w_indicator())
}

fn template_size(n: usize, w: usize, k: usize, l: usize) -> Result<u128> {
    let u = n - w;
    (1..=l.min(w))
        .try_fold(0u128, |acc, j| {
            let a = binomial_u128(w as u64, j as u64)?;
            let b = binomial_u128(u as u64, (k - j) as u64)?;
            acc.checked_add(a.checked_mul(b)?)
        })
        .ok_or_else(|| Error::TooLarge(format!("template on n = {n}, k = {k} overflows")))
}

/// `|E(H_{k,l}(U, W)) \ E(H)|`, counted by strata `|e ∩ W|` without building the template.
pub fn deficiency(h: &KGraph, p: &VertexPartition, l: usize) -> Result<u64> {
    let in_w = check_partition(h, p, l)?;
    let total = template_size(h.n(), p.w.len(), h.k(), l)?;
    let present = template_edges_present(h, &in_w, l);
    u64::try_from(total - present as u128)
        .map_err(|_| Error::TooLarge("deficiency exceeds u64".into()))
}

fn template_edges_present(h: &KGraph, in_w: &[bool], l: usize) -> u64 {
    h.edges()
        .filter(|e| {
            let j = e.iter().filter(|&&v| in_w[v as usize]).count();
            (1..=l).contains(&j)
        })
        .count() as u64
}

/// Whether `H` is within `ε n^k` missing edges of `H_k(n, m)` for some `|W| = m - 1`.
pub fn eps_contains(
    h: &KGraph,
    m: usize,
    eps: &Rational,
    mode: ModeRequest,
) -> Result<ContainmentReport> {
    let n = h.n();
    let k = h.k();
    if m == 0 {
        return Err(Error::Range("m must be at least 1".into()));
    }
    let w_size = m - 1;
    if w_size > n {
        return Err(Error::Range(format!("|W| = {w_size} exceeds n = {n}")));
    }
    let l = k - 1;
    let candidates = binomial_u128(n as u64, w_size as u64).unwrap_or(u128::MAX);
    let search_mode = match mode {
        ModeRequest::Exhaustive => SearchMode::Exhaustive,
        ModeRequest::Local => SearchMode::LocalSearch,
        ModeRequest::Auto if candidates <= EXHAUSTIVE_LIMIT => SearchMode::Exhaustive,
        ModeRequest::Auto => SearchMode::LocalSearch,
    };
    let total = template_size(n, w_size, k, l)?;
    let eval = |w: &[u32]| -> u64 {
        let mut in_w = vec![false; n + 1];
        for &v in w {
            in_w[v as usize] = true;
        }
        (total - template_edges_present(h, &in_w, l) as u128) as u64
    };

    let (best_w, deficiency, evaluated) = match search_mode {
        SearchMode::Exhaustive => {
            let all: Vec<u32> = (1..=n as u32).collect();
            let mut best: Option<(Vec<u32>, u64)> = None;
            let mut count = 0u64;
            for w in subsets(&all, w_size) {
                count += 1;
                let d = eval(&w);
                if best.as_ref().is_none_or(|(_, b)| d < *b) {
                    best = Some((w, d));
                    if d == 0 {
                        break;
                    }
                }
            }
            let (w, d) = best.expect("at least one subset");
            (w, d, count)
        }
        SearchMode::LocalSearch => local_search(h, w_size, &eval),
    };
    let epsilon_bound = eps * pow_rational(n as u64, k as u32);
    Ok(ContainmentReport {
        partition: VertexPartition::from_w(n, best_w)?,
        satisfied: int_rational(deficiency) <= epsilon_bound,
        deficiency,
        epsilon_bound,
        search_mode,
        evaluated,
    })
}

/// Seeds `W` with the highest-degree vertices, then applies the first
/// improving swap in (lowest `U`, lowest `W`) order until none improves.
fn local_search(h: &KGraph, w_size: usize, eval: &dyn Fn(&[u32]) -> u64) -> (Vec<u32>, u64, u64) {
    let n = h.n();
    let deg = h.vertex_degrees();
    let mut order: Vec<u32> = (1..=n as u32).collect();
    order.sort_by(|&a, &b| {
        deg[(b - 1) as usize]
            .cmp(&deg[(a - 1) as usize])
            .then(a.cmp(&b))
    });
    let mut w: Vec<u32> = order[..w_size].to_vec();
    w.sort_unstable();
    let mut best = eval(&w);
    let mut count = 1u64;
    'improve: while best > 0 {
        let u: Vec<u32> = (1..=n as u32)
            .filter(|v| w.binary_search(v).is_err())
            .collect();
        for &x in &u {
            for i in 0..w.len() {
                let mut trial = w.clone();
                trial[i] = x;
                trial.sort_unstable();
                count += 1;
                let d = eval(&trial);
                if d < best {
                    best = d;
                    w = trial;
                    continue 'improve;
                }
            }
        }
        break;
    }
    (w, best, count)
}

/// `|N_{H_{k,l}(U,W)}(v) \ N_H(v)|` for each vertex, indexed `v - 1`.
pub fn per_vertex_deficits(h: &KGraph, p: &VertexPartition, l: usize) -> Result<Vec<u64>> {
    let in_w = check_partition(h, p, l)?;
    let k = h.k();
    let w = p.w.len();
    let u = h.n() - w;
    let b = |a: usize, c: usize| binomial_u128(a as u64, c as u64).unwrap_or(u128::MAX);
    let in_w_deg: u128 = (1..=l.min(w)).map(|j| b(w - 1, j - 1) * b(u, k - j)).sum();
    let in_u_deg: u128 = (1..=l.min(w))
        .map(|j| b(w, j) * b(u.saturating_sub(1), k - 1 - j))
        .sum();
    let mut present = vec![0u128; h.n()];
    for e in h.edges() {
        let j = e.iter().filter(|&&v| in_w[v as usize]).count();
        if (1..=l).contains(&j) {
            for &v in e {
                present[(v - 1) as usize] += 1;
            }
        }
    }
    (0..h.n())
        .map(|i| {
            let t = if in_w[i + 1] { in_w_deg } else { in_u_deg };
            u64::try_from(t - present[i]).map_err(|_| Error::TooLarge("deficit exceeds u64".into()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodBad {
    pub good: Vec<u32>,
    pub bad: Vec<u32>,
    pub deficits: Vec<u64>,
    /// `θ |V(H)|^{k-1}`.
    #[serde(with = "rational_string")]
    pub bound: Rational,
}

/// Splits vertices by whether their template-neighbourhood deficit exceeds
/// `θ |V(H)|^{k-1}` (`k` the uniformity of `h`). Supports `l ∈ {k-2, k-1}`.
pub fn classify_good_bad(
    h: &KGraph,
    p: &VertexPartition,
    l: usize,
    theta: &Rational,
) -> Result<GoodBad> {
    let k = h.k();
    if !(l + 1 == k || (l + 2 == k && l >= 1)) {
        return Err(Error::Range(format!(
            "classification supports l in {{k-2, k-1}}, got l = {l}, k = {k}"
        )));
    }
    let deficits = per_vertex_deficits(h, p, l)?;
    let bound = theta * pow_rational(h.n() as u64, (k - 1) as u32);
    let (mut good, mut bad) = (Vec::new(), Vec::new());
    for (i, &d) in deficits.iter().enumerate() {
        if int_rational(d) > bound {
            bad.push(i as u32 + 1);
        } else {
            good.push(i as u32 + 1);
        }
    }
    Ok(GoodBad {
        good,
        bad,
        deficits,
        bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub set_size: usize,
    /// `ε n^k / (2k²)`.
    #[serde(with = "rational_string")]
    pub bound: Rational,
    pub exhaustive: bool,
    pub checked: u64,
    /// Sets with `e(H[S])` below the bound.
    pub violations: Vec<Vec<u32>>,
    /// Parameter-range notes for the hypotheses of the density check.
    pub warnings: Vec<String>,
}

/// Tests `e(H[S]) >= ε n^k / (2k²)` on sets of size `⌈n - m - εn/7⌉`.
///
/// Exhaustive when at most [`EXHAUSTIVE_LIMIT`] such sets exist, else
/// `samples` uniform draws. `samples = 0` checks nothing. `rho`, when given,
/// is checked against `ρ < ε/12` and used in the degree hypothesis note.
pub fn subset_density_check(
    h: &KGraph,
    m: usize,
    eps: &Rational,
    rho: Option<&Rational>,
    samples: usize,
    seed: u64,
) -> Result<DensityReport> {
    let n = h.n();
    let k = h.k();
    let size_q =
        int_rational((n as i64 - m as i64).max(0)) - eps * int_rational(n) / int_rational(7);
    let set_size = if size_q <= Rational::zero() {
        0
    } else {
        (ceil_u64(&size_q)? as usize).min(n)
    };
    let bound = eps * pow_rational(n as u64, k as u32) / int_rational(2 * k * k);
    let warnings = density_warnings(h, m, eps, rho)?;
    let mut report = DensityReport {
        set_size,
        bound,
        exhaustive: false,
        checked: 0,
        violations: Vec::new(),
        warnings,
    };
    if samples == 0 {
        return Ok(report);
    }
    let bound_int = report.bound.ceil().to_integer();
    let count = |s: &[u32]| -> bool {
        let mut member = vec![false; n + 1];
        for &v in s {
            member[v as usize] = true;
        }
        let e = h
            .edges()
            .filter(|e| e.iter().all(|&v| member[v as usize]))
            .count();
        BigInt::from(e) < bound_int
    };
    let total = binomial_u128(n as u64, set_size as u64).unwrap_or(u128::MAX);
    if total <= EXHAUSTIVE_LIMIT {
        report.exhaustive = true;
        let all: Vec<u32> = (1..=n as u32).collect();
        for s in subsets(&all, set_size) {
            report.checked += 1;
            if count(&s) {
                report.violations.push(s);
            }
        }
    } else {
        let mut rng = rng_for(seed, 0);
        for _ in 0..samples {
            let mut s: Vec<u32> = sample(&mut rng, n, set_size)
                .into_iter()
                .map(|i| i as u32 + 1)
                .collect();
            s.sort_unstable();
            report.checked += 1;
            if count(&s) {
                report.violations.push(s);
            }
        }
        report.violations.sort();
        report.violations.dedup();
    }
    Ok(report)
}

fn density_warnings(
    h: &KGraph,
    m: usize,
    eps: &Rational,
    rho: Option<&Rational>,
) -> Result<Vec<String>> {
    let n = h.n();
    let k = h.k();
    let mut w = Vec::new();
    if k < 3 {
        w.push(format!("k = {k} < 3"));
    }
    let m_q = int_rational(m);
    if m_q < int_rational(n) / int_rational(2 * k.pow(4)) || m * k >= n {
        w.push(format!("m = {m} outside [n/(2k^4), n/k)"));
    }
    if *eps <= Rational::zero() || *eps >= Rational::new(1.into(), (k as i64).into()) {
        w.push(format!("eps = {} outside (0, 1/k)", format_rational(eps)));
    }
    if let Some(rho) = rho {
        if *rho <= Rational::zero() || *rho >= eps / int_rational(12) {
            w.push(format!(
                "rho = {} outside (0, eps/12)",
                format_rational(rho)
            ));
        }
        if n > 0 && m >= 1 && n >= m + k - 1 {
            let threshold = crate::constructions::vertex_degree_threshold(n, k, m)?;
            let floor = Rational::from_integer(BigInt::from(threshold))
                - rho * pow_rational(n as u64, (k - 1) as u32);
            if int_rational(h.min_l_degree(1)?) < floor {
                w.push("minimum degree below the density check hypothesis".into());
            }
        }
    }
    Ok(w)
}

impl ContainmentReport {
    pub fn deficiency_f64(&self) -> f64 {
        self.deficiency.to_f64().unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_hkl, build_hknm, complete, random_kgraph};
    use crate::numeric::{k_sets, rational};
    use proptest::prelude::*;

    /// Template built explicitly and compared edge by edge.
    fn deficiency_oracle(h: &KGraph, p: &VertexPartition, l: usize) -> u64 {
        let t = build_hkl(&p.u, &p.w, h.k(), l).unwrap();
        t.edges().filter(|e| !h.contains_edge(e)).count() as u64
    }

    #[test]
    fn deficiency_examples() {
        let (h, p) = build_hknm(9, 3, 3).unwrap();
        assert_eq!(deficiency(&h, &p, 2).unwrap(), 0);
        let kept: Vec<Vec<u32>> = h.edges().skip(5).map(<[u32]>::to_vec).collect();
        let cut = KGraph::new(9, 3, kept).unwrap();
        assert_eq!(deficiency(&cut, &p, 2).unwrap(), 5);
        let k9 = complete(9, 3).unwrap();
        let p2 = VertexPartition::from_w(9, [4, 7]).unwrap();
        assert_eq!(deficiency(&k9, &p2, 2).unwrap(), 0);
        assert_eq!(deficiency_oracle(&k9, &p2, 2), 0);
    }

    #[test]
    fn containment_examples() {
        let (h, _) = build_hknm(9, 3, 3).unwrap();
        let r = eps_contains(&h, 3, &rational(0, 1), ModeRequest::Auto).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.deficiency, 0);
        let r = eps_contains(
            &complete(9, 3).unwrap(),
            3,
            &rational(0, 1),
            ModeRequest::Auto,
        )
        .unwrap();
        assert!(r.satisfied && r.deficiency == 0);
        let r = eps_contains(
            &KGraph::edgeless(9, 3),
            3,
            &rational(0, 1),
            ModeRequest::Auto,
        )
        .unwrap();
        assert!(!r.satisfied);
        // Every template edge is missing: C(9,3) - C(7,3).
        assert_eq!(r.deficiency, 49);
        assert_eq!(r.search_mode, SearchMode::Exhaustive);
    }

    #[test]
    fn classification_examples() {
        let (h, p) = build_hknm(9, 3, 3).unwrap();
        let gb = classify_good_bad(&h, &p, 2, &rational(0, 1)).unwrap();
        assert!(gb.bad.is_empty());
        let v = 5u32;
        let kept: Vec<Vec<u32>> = h
            .edges()
            .filter(|e| !e.contains(&v))
            .map(<[u32]>::to_vec)
            .collect();
        let cut = KGraph::new(9, 3, kept).unwrap();
        let gb = classify_good_bad(&cut, &p, 2, &rational(1, 1000)).unwrap();
        assert!(gb.bad.contains(&v));
        assert_eq!(gb.deficits[(v - 1) as usize], h.degree(&[v]).unwrap());
        assert!(classify_good_bad(&h, &p, 3, &rational(0, 1)).is_err());
        let link = h.link(9).unwrap();
        let lp = VertexPartition::lowest(8, 2).unwrap();
        assert!(classify_good_bad(&link, &lp, 1, &rational(0, 1))
            .unwrap()
            .bad
            .is_empty());
    }

    #[test]
    fn density_examples() {
        let (h, p) = build_hknm(9, 3, 3).unwrap();
        // S = U misses W entirely, so H[S] has no edges.
        let mut member = [false; 10];
        for &v in &p.u {
            member[v as usize] = true;
        }
        assert_eq!(
            h.edges()
                .filter(|e| e.iter().all(|&v| member[v as usize]))
                .count(),
            0
        );
        let r = subset_density_check(&h, 3, &rational(1, 100), None, 1, 0).unwrap();
        assert_eq!(r.set_size, 6);
        // Sets of the minimum size suffice: shrinking S never adds edges.
        assert!(r.violations.contains(&p.u[..6].to_vec()));

        let k = complete(12, 3).unwrap();
        let r = subset_density_check(&k, 3, &rational(1, 1), None, 10, 0).unwrap();
        // C(|S|,3) against n^3/18 with |S| = ceil(12 - 3 - 12/7) = 8: 56 < 96.
        assert_eq!(r.set_size, 8);
        assert!(r.violations.len() as u64 == r.checked);
        let r = subset_density_check(&k, 3, &rational(1, 4), None, 10, 0).unwrap();
        assert_eq!(r.set_size, 9);
        assert!(r.violations.is_empty());
        let r = subset_density_check(&k, 3, &rational(1, 4), None, 0, 0).unwrap();
        assert_eq!(r.checked, 0);
        assert!(r.violations.is_empty());
    }

    fn brute_min(h: &KGraph, m: usize) -> u64 {
        let all: Vec<u32> = (1..=h.n() as u32).collect();
        subsets(&all, m - 1)
            .map(|w| deficiency_oracle(h, &VertexPartition::from_w(h.n(), w).unwrap(), h.k() - 1))
            .min()
            .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn deficiency_matches_template(seed in 0u64..10_000, n in 4usize..10, w in 0usize..4, p in 0.0f64..1.0) {
            let h = random_kgraph(n, 3, p, seed).unwrap();
            let part = VertexPartition::lowest(n, w.min(n)).unwrap();
            for l in 1..=3 {
                prop_assert_eq!(deficiency(&h, &part, l).unwrap(), deficiency_oracle(&h, &part, l));
            }
        }

        #[test]
        fn exhaustive_is_minimum(seed in 0u64..10_000, n in 4usize..10, m in 1usize..4, p in 0.0f64..1.0) {
            let h = random_kgraph(n, 3, p, seed).unwrap();
            let ex = eps_contains(&h, m, &rational(0, 1), ModeRequest::Exhaustive).unwrap();
            prop_assert_eq!(ex.deficiency, brute_min(&h, m));
            let local = eps_contains(&h, m, &rational(0, 1), ModeRequest::Local).unwrap();
            prop_assert!(local.deficiency >= ex.deficiency);
        }

        #[test]
        fn adding_edges_never_increases(seed in 0u64..10_000, n in 4usize..10, p in 0.0f64..1.0) {
            let h = random_kgraph(n, 3, p, seed).unwrap();
            let more = h.union(&random_kgraph(n, 3, 0.3, seed + 1).unwrap()).unwrap();
            let part = VertexPartition::lowest(n, 2).unwrap();
            prop_assert!(deficiency(&more, &part, 2).unwrap() <= deficiency(&h, &part, 2).unwrap());
        }

        #[test]
        fn deficits_bracket_deficiency(seed in 0u64..10_000, n in 4usize..10, p in 0.0f64..1.0) {
            let h = random_kgraph(n, 3, p, seed).unwrap();
            let part = VertexPartition::lowest(n, 2).unwrap();
            let d = deficiency(&h, &part, 2).unwrap();
            let sum: u64 = per_vertex_deficits(&h, &part, 2).unwrap().iter().sum();
            prop_assert!(d <= sum && sum <= 3 * d);
        }

        #[test]
        fn few_bad_vertices_when_close(seed in 0u64..10_000, n in 6usize..12, drop in 0.0f64..0.5, t in 1i64..6) {
            // theta = t/10, rho = theta^4: deficiency <= sqrt(rho) n^k forces |bad| <= k theta n.
            let (tmpl, part) = build_hknm(n, 3, 3).unwrap();
            let mask = random_kgraph(n, 3, drop, seed).unwrap();
            let kept: Vec<Vec<u32>> = tmpl.edges().filter(|e| !mask.contains_edge(e)).map(<[u32]>::to_vec).collect();
            let h = KGraph::new(n, 3, kept).unwrap();
            let theta = rational(t, 10);
            let d = deficiency(&h, &part, 2).unwrap();
            let gb = classify_good_bad(&h, &part, 2, &theta).unwrap();
            if int_rational(d) <= &theta * &theta * pow_rational(n as u64, 3) {
                prop_assert!(int_rational(gb.bad.len()) <= int_rational(3 * n) * &theta);
            }
        }

        #[test]
        fn density_matches_arithmetic(n in 7usize..12) {
            // On K_n^3, e(H[S]) = C(|S|,3) for every S.
            let h = complete(n, 3).unwrap();
            let eps = rational(1, 10);
            let r = subset_density_check(&h, 2, &eps, None, 5, 1).unwrap();
            let e = crate::numeric::binomial_u64(r.set_size as u64, 3);
            let violated = int_rational(e) < r.bound;
            prop_assert_eq!(r.violations.is_empty(), !violated);
            prop_assert!(k_sets(n, r.set_size).count() as u64 >= r.checked);
        }
    }
}
