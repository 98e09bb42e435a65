//! Random vertex subsets `R^1, .., R^N` of the host and the concentration
//! statistics their analysis relies on.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::PipelineConfig;
use crate::constructions::rng_for;
use crate::containment::rational_string;
use crate::error::{Error, Result};
use crate::hypergraph::KGraph;
use crate::numeric::{binomial_int, int_rational, pow_rational, to_f64, Rational};

/// How many vertex pairs lie in exactly `copies` of the sampled sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairStats {
    pub copies: u64,
    pub pairs: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFamily {
    /// Host order.
    pub n: usize,
    pub k: usize,
    pub keep_probability: f64,
    /// Each `R^i`, sorted, after trimming to a multiple of `k`.
    pub copies: Vec<Vec<u32>>,
    /// `|R^i|` before trimming.
    pub raw_sizes: Vec<usize>,
    /// `Y_v`, the number of copies containing `v`; index `v - 1`.
    pub vertex_incidence: Vec<u64>,
    /// Pairs grouped by the number of copies containing both ends (only counts >= 1).
    pub pair_histogram: Vec<PairStats>,
    /// Copies containing each host edge, in host edge order.
    pub edge_incidence: Vec<u64>,
}

impl SampleFamily {
    /// Builds the incidence statistics for explicit copies (each sorted, inside `1..=n`).
    pub fn from_copies(
        h: &KGraph,
        copies: Vec<Vec<u32>>,
        raw_sizes: Vec<usize>,
        keep_probability: f64,
    ) -> Self {
        let n = h.n();
        let mut vertex_incidence = vec![0u64; n];
        let mut pair_keys: Vec<u64> = Vec::new();
        for c in &copies {
            for (a, &u) in c.iter().enumerate() {
                vertex_incidence[(u - 1) as usize] += 1;
                pair_keys.extend(
                    c[a + 1..]
                        .iter()
                        .map(|&v| (u64::from(u) << 32) | u64::from(v)),
                );
            }
        }
        pair_keys.sort_unstable();
        let mut per_pair: Vec<u64> = pair_keys
            .chunk_by(|a, b| a == b)
            .map(|run| run.len() as u64)
            .collect();
        per_pair.sort_unstable();
        let pair_histogram = per_pair
            .chunk_by(|a, b| a == b)
            .map(|run| PairStats {
                copies: run[0],
                pairs: run.len() as u64,
            })
            .collect();

        let mut edge_incidence = vec![0u64; h.edge_count()];
        let mut member = vec![false; n + 1];
        for c in &copies {
            for &v in c {
                member[v as usize] = true;
            }
            for (i, e) in h.edges().enumerate() {
                if e.iter().all(|&v| member[v as usize]) {
                    edge_incidence[i] += 1;
                }
            }
            for &v in c {
                member[v as usize] = false;
            }
        }

        SampleFamily {
            n,
            k: h.k(),
            keep_probability,
            copies,
            raw_sizes,
            vertex_incidence,
            pair_histogram,
            edge_incidence,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.copies.iter().map(Vec::len).collect()
    }

    pub fn max_pair_incidence(&self) -> u64 {
        self.pair_histogram.last().map_or(0, |p| p.copies)
    }

    pub fn max_edge_incidence(&self) -> u64 {
        self.edge_incidence.iter().copied().max().unwrap_or(0)
    }

    /// `r_i = |R^i ∩ Q|` where `Q` is every vertex above `n_orig`.
    pub fn q_counts(&self, n_orig: usize) -> Vec<usize> {
        self.copies
            .iter()
            .map(|c| c.iter().filter(|&&v| v as usize > n_orig).count())
            .collect()
    }
}

/// Draws the copies. Copy `i` uses its own stream derived from `cfg.seed` and `i`,
/// so results do not depend on evaluation order.
pub fn first_round_sampler(h: &KGraph, cfg: &PipelineConfig) -> Result<SampleFamily> {
    cfg.validate()?;
    let n = h.n();
    let k = h.k();
    let s = &cfg.sampler;
    let nf = n.max(1) as f64;
    let p = s
        .keep_probability
        .unwrap_or_else(|| nf.powf(-to_f64(&s.p_exponent)));
    let count = s
        .copies
        .unwrap_or_else(|| nf.powf(to_f64(&s.copy_exponent)).ceil() as usize);

    let mut copies = Vec::with_capacity(count);
    let mut raw_sizes = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = rng_for(cfg.seed, i as u64 + 1);
        let mut r: Vec<u32> = (1..=n as u32).filter(|_| rng.random_bool(p)).collect();
        raw_sizes.push(r.len());
        let extra = r.len() % k;
        if extra > 0 {
            let mut drop: Vec<usize> =
                rand::seq::index::sample(&mut rng, r.len(), extra).into_vec();
            drop.sort_unstable_by(|a, b| b.cmp(a));
            for j in drop {
                r.remove(j);
            }
        }
        copies.push(r);
    }

    Ok(SampleFamily::from_copies(h, copies, raw_sizes, p))
}

/// Caller-chosen stand-ins for the asymptotic error terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerThresholds {
    /// Accepted range for trimmed copy sizes.
    pub size_band: (f64, f64),
    /// Accepted range for `Y_v`.
    pub y_band: (f64, f64),
    pub max_pair: u64,
    pub max_edge: u64,
    #[serde(with = "rational_string")]
    pub rho_prime: Rational,
    /// Fraction of copies / vertices that must fall inside their band.
    pub required_fraction: f64,
}

impl SamplerThresholds {
    /// Bands from [`chernoff_band`] at the given failure probability: sizes as
    /// `Bin(n, p)` (lower end widened by the `< k` trimmed vertices), `Y_v` as
    /// `Bin(copies, p)`.
    pub fn chernoff(
        n: u64,
        p: f64,
        copies: u64,
        k: usize,
        failure: f64,
        rho_prime: Rational,
        required_fraction: f64,
    ) -> Result<Self> {
        let (lo, hi) = chernoff_band(n, p, failure)?;
        Ok(SamplerThresholds {
            size_band: (lo - (k as f64 - 1.0), hi),
            y_band: chernoff_band(copies, p, failure)?,
            max_pair: 2,
            max_edge: 1,
            rho_prime,
            required_fraction,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerReport {
    /// Share of vertices whose copy count `Y_v` is in band.
    pub y_inside: f64,
    pub y_ok: bool,
    /// Most copies any vertex pair shares.
    pub max_pair: u64,
    pub pair_ok: bool,
    /// Most copies any edge lies inside.
    pub max_edge: u64,
    pub edge_ok: bool,
    /// Share of copies whose size is in band.
    pub size_inside: f64,
    pub size_ok: bool,
    /// Copies meeting the induced degree bound.
    pub degree_passing: usize,
    pub degree_ok: bool,
}

impl SamplerReport {
    pub fn all_ok(&self) -> bool {
        self.y_ok && self.pair_ok && self.edge_ok && self.size_ok && self.degree_ok
    }
}

fn inside(xs: impl Iterator<Item = f64>, band: (f64, f64)) -> f64 {
    let (mut hit, mut total) = (0usize, 0usize);
    for x in xs {
        total += 1;
        if band.0 <= x && x <= band.1 {
            hit += 1;
        }
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

/// Measures the five copy-family properties against `t`. Nothing here is an error: the
/// guarantees are asymptotic and the report says which held.
pub fn check_sampler_properties(
    f: &SampleFamily,
    h: &KGraph,
    t: &SamplerThresholds,
) -> Result<SamplerReport> {
    if h.n() != f.n || h.k() != f.k || h.edge_count() != f.edge_incidence.len() {
        return Err(Error::Precondition(
            "family was not drawn from this host".into(),
        ));
    }
    let k = h.k();
    let y_inside = inside(f.vertex_incidence.iter().map(|&y| y as f64), t.y_band);
    let size_inside = inside(f.copies.iter().map(|c| c.len() as f64), t.size_band);
    let mut degree_passing = 0;
    for c in &f.copies {
        if degree_bound_holds(h, c, k, &t.rho_prime)? {
            degree_passing += 1;
        }
    }
    let max_pair = f.max_pair_incidence();
    let max_edge = f.max_edge_incidence();
    Ok(SamplerReport {
        y_inside,
        y_ok: y_inside >= t.required_fraction,
        max_pair,
        pair_ok: max_pair <= t.max_pair,
        max_edge,
        edge_ok: max_edge <= t.max_edge,
        size_inside,
        size_ok: size_inside >= t.required_fraction,
        degree_passing,
        degree_ok: degree_passing == f.copies.len(),
    })
}

/// `δ_1(H[R]) > C(|R|-1,k-1) - C(|R|-|R|/k,k-1) - ρ'|R|^{k-1}`; vacuous for empty `R`.
fn degree_bound_holds(h: &KGraph, r: &[u32], k: usize, rho_prime: &Rational) -> Result<bool> {
    let s = r.len() as u64;
    if s == 0 {
        return Ok(true);
    }
    let (sub, _) = h.induced(r)?;
    let min_deg = sub.min_l_degree(1)?;
    let kk = (k - 1) as u64;
    let bound = int_rational(binomial_int(s - 1, kk) - binomial_int(s - s / k as u64, kk))
        - rho_prime * pow_rational(s, kk as u32);
    Ok(int_rational(min_deg) > bound)
}

/// Tail bounds for `X ~ Bin(n, p)` at deviation `λ`, with `μ = np` and `δ = λ/μ`:
/// `(exp(-δ²μ/2), exp(-δ²μ/3))`, bounding `P[X <= μ - λ]` and `P[X >= μ + λ]`.
pub fn chernoff_tail(n: u64, p: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Range(format!("probability {p} outside [0, 1]")));
    }
    let mu = n as f64 * p;
    if lambda.is_nan() || lambda < 0.0 || lambda >= 1.5 * mu {
        return Err(Error::Range(format!(
            "need 0 <= lambda < 3np/2 = {}, got {lambda}",
            1.5 * mu
        )));
    }
    let delta = lambda / mu;
    Ok((
        (-delta * delta * mu / 2.0).exp(),
        (-delta * delta * mu / 3.0).exp(),
    ))
}

/// The interval `μ ± λ` with `2 exp(-λ²/(3μ)) = failure`, checked against the
/// range where [`chernoff_tail`] applies.
pub fn chernoff_band(n: u64, p: f64, failure: f64) -> Result<(f64, f64)> {
    if !(failure > 0.0 && failure < 1.0) {
        return Err(Error::Range(format!(
            "failure probability {failure} outside (0, 1)"
        )));
    }
    let mu = n as f64 * p;
    let lambda = (3.0 * mu * (2.0 / failure).ln()).sqrt();
    let (lower, upper) = chernoff_tail(n, p, lambda)?;
    debug_assert!(lower + upper <= failure * (1.0 + 1e-9));
    Ok((mu - lambda, mu + lambda))
}
