//! Semi-random nibble for almost perfect matchings in near-regular graphs.
//!
//! Each round samples every surviving edge with probability `bite / D`, where
//! `D` is the current average degree, keeps the sampled edges that meet no
//! other sampled edge, and deletes their vertices. A greedy pass finishes the
//! remainder.

use num_traits::ToPrimitive;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::rng_for;
use crate::error::{Error, Result};
use crate::hypergraph::{KGraph, Matching};
use crate::numeric::{format_rational, rational, to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NibbleConfig {
    /// Expected fraction of vertices hit by sampled edges per round.
    #[serde(with = "crate::containment::rational_string")]
    pub bite_fraction: Rational,
    pub max_rounds: usize,
    /// Target uncovered fraction `σ`; reported against, not enforced.
    #[serde(with = "crate::containment::rational_string")]
    pub sigma_target: Rational,
    pub seed: u64,
    /// Regularity slack `τ` for the input gate.
    #[serde(with = "crate::containment::rational_string")]
    pub tau_check: Rational,
    /// Minimum-degree gate `d_0`, reported alongside the regularity check.
    pub min_degree: u64,
}

impl Default for NibbleConfig {
    fn default() -> Self {
        NibbleConfig {
            bite_fraction: rational(1, 4),
            max_rounds: 50,
            sigma_target: rational(1, 10),
            seed: 0,
            tau_check: rational(1, 10),
            min_degree: 1,
        }
    }
}

impl NibbleConfig {
    pub fn validate(&self) -> Result<()> {
        let zero = rational(0, 1);
        let one = rational(1, 1);
        for (name, x) in [
            ("bite_fraction", &self.bite_fraction),
            ("sigma_target", &self.sigma_target),
        ] {
            if *x <= zero || *x >= one {
                return Err(Error::Range(format!(
                    "{name} = {} outside (0, 1)",
                    format_rational(x)
                )));
            }
        }
        if self.tau_check < zero {
            return Err(Error::Range("tau_check must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Input regularity measured against `(1 ± τ)D` and `Δ_2 < τD`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityGate {
    pub average_degree: f64,
    pub min_degree: u64,
    pub max_degree: u64,
    pub max_codegree: u64,
    pub degrees_within_band: bool,
    pub codegree_small: bool,
    pub min_degree_ok: bool,
}

impl RegularityGate {
    pub fn passes(&self) -> bool {
        self.degrees_within_band && self.codegree_small && self.min_degree_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundStats {
    pub round: usize,
    pub alive_vertices: usize,
    pub alive_edges: usize,
    pub average_degree: f64,
    pub sampled: usize,
    pub accepted: usize,
    pub matching_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NibbleReport {
    pub matching: Matching,
    /// `k|M| / n`, exact.
    #[serde(with = "crate::containment::rational_string")]
    pub covered_fraction: Rational,
    pub rounds: Vec<RoundStats>,
    /// Edges added by the final greedy pass.
    pub greedy_added: usize,
    pub gate: RegularityGate,
    /// Whether at most `σn` vertices were left uncovered.
    pub sigma_met: bool,
}

fn gate(h: &KGraph, cfg: &NibbleConfig) -> Result<RegularityGate> {
    let degrees = h.vertex_degrees();
    let n = h.n().max(1);
    let d = h.k() as f64 * h.edge_count() as f64 / n as f64;
    let tau = to_f64(&cfg.tau_check);
    let max_codegree = if h.k() >= 3 { h.max_l_degree(2)? } else { 1 };
    let min_degree = degrees.iter().copied().min().unwrap_or(0);
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    Ok(RegularityGate {
        average_degree: d,
        min_degree,
        max_degree,
        max_codegree,
        degrees_within_band: degrees
            .iter()
            .all(|&x| (1.0 - tau) * d < x as f64 && (x as f64) < (1.0 + tau) * d),
        codegree_small: (max_codegree as f64) < tau * d,
        min_degree_ok: min_degree >= cfg.min_degree,
    })
}

/// Runs the nibble and the greedy cleanup. Returns an error only for an
/// invalid configuration; edgeless and tiny inputs fall through to greedy.
pub fn nibble_matching(h: &KGraph, cfg: &NibbleConfig) -> Result<NibbleReport> {
    cfg.validate()?;
    let k = h.k();
    let n = h.n();
    let gate = gate(h, cfg)?;
    let bite = to_f64(&cfg.bite_fraction);
    let mut rng = rng_for(cfg.seed, 0);

    let mut alive_vertex = vec![true; n + 1];
    let mut alive: Vec<u32> = h.edges().flatten().copied().collect();
    let mut alive_vertices = n;
    let mut chosen: Vec<Vec<u32>> = Vec::new();
    let mut rounds = Vec::new();
    let mut hits = vec![0u32; n + 1];

    for round in 1..=cfg.max_rounds {
        let edges = alive.len() / k.max(1);
        if edges == 0 || alive_vertices == 0 {
            break;
        }
        let d = k as f64 * edges as f64 / alive_vertices as f64;
        if d < 1.0 {
            break;
        }
        let p = (bite / d).min(1.0);
        let sampled: Vec<usize> = (0..edges).filter(|_| rng.random::<f64>() < p).collect();
        for &i in &sampled {
            for &v in &alive[i * k..(i + 1) * k] {
                hits[v as usize] += 1;
            }
        }
        let mut accepted = 0;
        for &i in &sampled {
            let e = &alive[i * k..(i + 1) * k];
            if e.iter().all(|&v| hits[v as usize] == 1) {
                chosen.push(e.to_vec());
                accepted += 1;
            }
        }
        for &i in &sampled {
            for &v in &alive[i * k..(i + 1) * k] {
                hits[v as usize] = 0;
            }
        }
        for e in &chosen[chosen.len() - accepted..] {
            for &v in e {
                alive_vertex[v as usize] = false;
            }
        }
        alive_vertices -= accepted * k;
        rounds.push(RoundStats {
            round,
            alive_vertices: alive_vertices + accepted * k,
            alive_edges: edges,
            average_degree: d,
            sampled: sampled.len(),
            accepted,
            matching_size: chosen.len(),
        });
        if accepted > 0 {
            let mut kept = Vec::with_capacity(alive.len());
            for e in alive.chunks_exact(k) {
                if e.iter().all(|&v| alive_vertex[v as usize]) {
                    kept.extend_from_slice(e);
                }
            }
            alive = kept;
        }
    }

    let before = chosen.len();
    for e in alive.chunks_exact(k.max(1)) {
        if e.iter().all(|&v| alive_vertex[v as usize]) {
            for &v in e {
                alive_vertex[v as usize] = false;
            }
            chosen.push(e.to_vec());
        }
    }
    let greedy_added = chosen.len() - before;
    let matching = Matching::new(chosen);
    debug_assert!(h.verify_matching(&matching));
    let covered_fraction = if n == 0 {
        rational(0, 1)
    } else {
        Rational::new(((k * matching.len()) as i64).into(), (n as i64).into())
    };
    let uncovered = rational(1, 1) - &covered_fraction;
    Ok(NibbleReport {
        sigma_met: uncovered <= cfg.sigma_target,
        covered_fraction,
        matching,
        rounds,
        greedy_added,
        gate,
    })
}

impl NibbleReport {
    pub fn covered_fraction_f64(&self) -> f64 {
        self.covered_fraction.to_f64().unwrap_or(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, random_kgraph};
    use proptest::prelude::*;

    #[test]
    fn complete_graph_nearly_covered() {
        let h = complete(30, 3).unwrap();
        let good = (0..10)
            .filter(|&seed| {
                let cfg = NibbleConfig {
                    seed,
                    ..NibbleConfig::default()
                };
                let r = nibble_matching(&h, &cfg).unwrap();
                r.covered_fraction >= rational(9, 10)
            })
            .count();
        assert!(good >= 8, "{good} of 10 seeds reached 0.9");
    }

    #[test]
    fn degenerate_inputs() {
        let one = KGraph::new(7, 3, [vec![1, 4, 7]]).unwrap();
        let r = nibble_matching(&one, &NibbleConfig::default()).unwrap();
        assert_eq!(r.matching.len(), 1);
        assert_eq!(r.covered_fraction, rational(3, 7));
        let empty = KGraph::edgeless(9, 3);
        let r = nibble_matching(&empty, &NibbleConfig::default()).unwrap();
        assert!(r.matching.is_empty());
        assert_eq!(r.covered_fraction, rational(0, 1));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = NibbleConfig {
            bite_fraction: rational(3, 2),
            ..NibbleConfig::default()
        };
        assert!(nibble_matching(&KGraph::edgeless(3, 3), &cfg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn output_is_a_matching(seed in 0u64..10_000, n in 3usize..30, p in 0.0f64..0.6) {
            let h = random_kgraph(n, 3, p, seed).unwrap();
            let r = nibble_matching(&h, &NibbleConfig { seed, ..NibbleConfig::default() }).unwrap();
            prop_assert!(h.verify_matching(&r.matching));
            prop_assert_eq!(
                r.covered_fraction,
                Rational::new(((3 * r.matching.len()) as i64).into(), (n as i64).into())
            );
        }
    }
}
