//! The constructive route from a degree condition to a perfect fractional
//! matching of the clique-augmented graph, and the first-round vertex sampler.

mod fractional;
mod sampler;

pub use fractional::{
    fractional_pm_pipeline, MatchingRoute, PipelineOutcome, StructureReport, TraceStep,
};
pub use sampler::{
    check_sampler_properties, chernoff_band, chernoff_tail, first_round_sampler, PairStats,
    SampleFamily, SamplerReport, SamplerThresholds,
};

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::constructions::{join_clique, vertex_degree_threshold};
use crate::containment::rational_string;
use crate::error::{Error, Result};
use crate::hypergraph::{KGraph, Matching};
use crate::numeric::{ceil_u64, format_rational, int_rational, pow_rational, rational, Rational};

/// Which search step (4) uses to find the size-`m` matching.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Exact link matching, then the close-to-extremal greedy construction, then exact search on `G`.
    #[default]
    Auto,
    /// Exact link matching, then exact search on `G`.
    Exact,
    /// Only the close-to-extremal greedy construction.
    Greedy,
}

impl std::str::FromStr for Route {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Route::Auto),
            "exact" => Ok(Route::Exact),
            "greedy" => Ok(Route::Greedy),
            _ => Err(Error::Range(format!("unknown route {s:?}"))),
        }
    }
}

/// Sampling rates for the first-round sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Each vertex is kept with probability `n^{-p_exponent}`.
    #[serde(with = "rational_string")]
    pub p_exponent: Rational,
    /// `⌈n^{copy_exponent}⌉` copies are drawn.
    #[serde(with = "rational_string")]
    pub copy_exponent: Rational,
    /// Overrides `n^{-p_exponent}`.
    pub keep_probability: Option<f64>,
    /// Overrides `⌈n^{copy_exponent}⌉`.
    pub copies: Option<usize>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            p_exponent: rational(9, 10),
            copy_exponent: rational(11, 10),
            keep_probability: None,
            copies: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Padding `η`; the augmentation leaves about `ηn` vertices of slack.
    #[serde(with = "rational_string")]
    pub eta: Rational,
    /// Degree slack `ρ`.
    #[serde(with = "rational_string")]
    pub rho: Rational,
    /// Containment / independence parameter `ε`.
    #[serde(with = "rational_string")]
    pub eps: Rational,
    /// Range parameter `β`.
    #[serde(with = "rational_string")]
    pub beta: Rational,
    pub sampler: SamplerConfig,
    pub seed: u64,
    pub route: Route,
    /// Compute `α(H)` exactly for the independence hypothesis; skipped with a warning otherwise.
    pub check_independence: bool,
}

impl PipelineConfig {
    /// `η = β/3`, other fields at their defaults.
    pub fn new(eps: Rational, rho: Rational, beta: Rational) -> Self {
        PipelineConfig {
            eta: &beta / int_rational(3),
            rho,
            eps,
            beta,
            sampler: SamplerConfig::default(),
            seed: 0,
            route: Route::Auto,
            check_independence: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eta.is_positive() {
            return Err(Error::Range(format!(
                "eta = {} must be positive",
                format_rational(&self.eta)
            )));
        }
        if !self.eps.is_positive() || self.eps >= Rational::one() {
            return Err(Error::Range(format!(
                "eps = {} outside (0, 1)",
                format_rational(&self.eps)
            )));
        }
        if self.rho.is_negative() {
            return Err(Error::Range(format!(
                "rho = {} is negative",
                format_rational(&self.rho)
            )));
        }
        let s = &self.sampler;
        if !s.p_exponent.is_positive() || s.p_exponent >= Rational::one() {
            return Err(Error::Range("p_exponent must lie in (0, 1)".into()));
        }
        if s.copy_exponent <= Rational::one() || s.copy_exponent >= int_rational(2) {
            return Err(Error::Range("copy_exponent must lie in (1, 2)".into()));
        }
        if let Some(p) = s.keep_probability {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Range(format!("keep probability {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Notes on constants outside the ranges the asymptotic argument assumes.
    pub fn warnings(&self, k: usize) -> Vec<String> {
        let mut w = Vec::new();
        let bound =
            (&self.eps * &self.eps * &self.eps * &self.eps) / pow_rational(18 * (k * k) as u64, 4);
        if !(self.beta.is_positive() && self.beta < self.rho && self.rho < bound) {
            w.push("expected 0 < beta << rho < eps^4/(18k^2)^4".into());
        }
        if self.eta != &self.beta / int_rational(3) {
            w.push("eta differs from beta/3".into());
        }
        w
    }
}

/// `H_r^k` with the padding it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Augmented {
    pub graph: KGraph,
    pub r: usize,
    /// `⌈ηn⌉`.
    pub eta_n: u64,
    /// `r(k-1) - (n - km - ⌈ηn⌉)`, the slack introduced by rounding `r` up.
    pub residual: u64,
    /// Whether `(r - k)(k - 1) >= n - km`.
    pub r_condition: bool,
}

/// `r = ⌈(n - km - ⌈ηn⌉)/(k-1)⌉` and `H_r^k`.
///
/// The size condition `(r - k)(k - 1) >= n - km` is reported, not enforced:
/// with this `r` it holds only when `ηn` is small against `k(k-1)`.
pub fn build_augmented(h: &KGraph, m: usize, eta: &Rational) -> Result<Augmented> {
    let n = h.n();
    let k = h.k();
    if k < 2 {
        return Err(Error::Range("augmentation needs k >= 2".into()));
    }
    if eta.is_negative() {
        return Err(Error::Range("eta must be nonnegative".into()));
    }
    let eta_n = ceil_u64(&(eta * int_rational(n)))?;
    let slack = n as i64 - (k * m) as i64 - eta_n as i64;
    if slack < 0 {
        return Err(Error::InfeasibleAugmentation(slack.to_string()));
    }
    let slack = slack as u64;
    let r = slack.div_ceil(k as u64 - 1);
    Ok(Augmented {
        graph: join_clique(h, r as usize),
        r: r as usize,
        eta_n,
        residual: r * (k as u64 - 1) - slack,
        r_condition: r_condition(n, k, m, r as usize),
    })
}

fn r_condition(n: usize, k: usize, m: usize, r: usize) -> bool {
    (r as i64 - k as i64) * (k as i64 - 1) >= n as i64 - (k * m) as i64
}

/// The smallest `r` with `(r - k)(k - 1) >= n - km`.
pub fn minimal_r(n: usize, k: usize, m: usize) -> usize {
    k + (n.saturating_sub(k * m)).div_ceil(k - 1)
}

/// Hypotheses of the fractional perfect matching construction, each evaluated exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preconditions {
    /// `α(H)`, when computed.
    pub alpha: Option<u64>,
    /// `n - m - ⌈εn⌉`; the hypothesis is `α(H)` strictly below it.
    pub alpha_bound: i64,
    pub alpha_ok: Option<bool>,
    pub min_degree: u64,
    /// `C(n-1,k-1) - C(n-m,k-1) - ρn^{k-1}`; the hypothesis is `δ_1` strictly above it.
    #[serde(with = "rational_string")]
    pub degree_bound: Rational,
    pub degree_ok: bool,
    pub r_condition_ok: bool,
    /// `n/(2k^4) < m <= (n-1)/(2(k-1)) + 1`.
    pub m_range_ok: bool,
    /// `0 < ε <= 1/(3^{k-2} k! k^3)` and `0 < ρ < ε^4/k^8`.
    pub constants_ok: bool,
    pub warnings: Vec<String>,
}

impl Preconditions {
    /// The three hypotheses the closure structure and the matching step rely on.
    pub fn core_hold(&self) -> bool {
        self.alpha_ok == Some(true) && self.degree_ok && self.r_condition_ok
    }

    /// Every exactly checkable hypothesis, including the parameter ranges.
    pub fn all_hold(&self) -> bool {
        self.core_hold() && self.m_range_ok && self.constants_ok
    }
}

pub fn check_preconditions(
    h: &KGraph,
    m: usize,
    r: usize,
    cfg: &PipelineConfig,
) -> Result<Preconditions> {
    let n = h.n();
    let k = h.k();
    if m == 0 || k * m > n {
        return Err(Error::Range(format!(
            "need 1 <= m <= n/k (n={n}, k={k}, m={m})"
        )));
    }
    let eps_n = ceil_u64(&(&cfg.eps * int_rational(n)))?;
    let alpha_bound = n as i64 - m as i64 - eps_n as i64;
    let mut warnings = Vec::new();
    let alpha = if cfg.check_independence {
        Some(h.independence_number()?)
    } else {
        warnings.push("independence hypothesis not checked".into());
        None
    };
    let threshold = vertex_degree_threshold(n, k, m)?;
    let degree_bound = Rational::from_integer(BigInt::from(threshold))
        - &cfg.rho * pow_rational(n as u64, (k - 1) as u32);
    let min_degree = h.min_l_degree(1)?;
    let m_q = int_rational(m);
    let m_range_ok = m_q > rational(n as i64, 2 * (k as i64).pow(4))
        && m_q <= rational(n as i64 - 1, 2 * (k as i64 - 1)) + Rational::one();
    let fact: i64 = (1..=k as i64).product();
    let eps_max = rational(1, 3i64.pow(k as u32 - 2) * fact * (k as i64).pow(3));
    let eps4 = &cfg.eps * &cfg.eps * &cfg.eps * &cfg.eps;
    let constants_ok = cfg.eps.is_positive()
        && cfg.eps <= eps_max
        && cfg.rho.is_positive()
        && cfg.rho < eps4 / pow_rational(k as u64, 8);
    if !constants_ok {
        warnings.push("eps or rho outside the allowed constant ranges".into());
    }
    Ok(Preconditions {
        alpha_ok: alpha.map(|a| (a as i64) < alpha_bound),
        alpha,
        alpha_bound,
        degree_ok: int_rational(min_degree) > degree_bound,
        min_degree,
        degree_bound,
        r_condition_ok: r_condition(n, k, m, r),
        m_range_ok,
        constants_ok,
        warnings,
    })
}

/// The edges of a matching of `H_r^k` that avoid `Q = {n+1, .., n+r}`.
///
/// At most `r` edges meet `Q`, so a matching of size `m + r` leaves at least `m`.
pub fn extract_matching(m: &Matching, n: usize) -> Matching {
    Matching::new(
        m.edges()
            .iter()
            .filter(|e| e.iter().all(|&v| v as usize <= n))
            .cloned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete, random_kgraph};
    use crate::matching::exact_nu;
    use num_traits::Zero;
    use proptest::prelude::*;

    #[test]
    fn augmentation_examples() {
        let h = random_kgraph(20, 3, 0.2, 1).unwrap();
        let a = build_augmented(&h, 3, &rational(1, 10)).unwrap();
        assert_eq!(a.r, 5);
        assert_eq!(a.eta_n, 2);
        assert_eq!(a.residual, 1);
        let h = complete(9, 3).unwrap();
        let a = build_augmented(&h, 3, &Rational::zero()).unwrap();
        assert_eq!(a.r, 0);
        assert_eq!(a.graph, h);
        assert!(matches!(
            build_augmented(&h, 3, &rational(1, 2)),
            Err(Error::InfeasibleAugmentation(_))
        ));
    }

    #[test]
    fn augmented_degrees_gain() {
        let h = random_kgraph(10, 3, 0.3, 4).unwrap();
        let a = build_augmented(&h, 2, &rational(1, 10)).unwrap();
        let gain = crate::numeric::binomial_u64(10 + a.r as u64 - 1, 2)
            - crate::numeric::binomial_u64(9, 2);
        let before = h.vertex_degrees();
        let after = a.graph.vertex_degrees();
        for v in 0..10 {
            assert_eq!(after[v], before[v] + gain);
        }
    }

    #[test]
    fn config_validation() {
        let cfg = PipelineConfig::new(rational(1, 12), rational(1, 100), rational(3, 100));
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.eta, rational(1, 100));
        let mut bad = cfg.clone();
        bad.eps = rational(1, 1);
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.sampler.copy_exponent = rational(1, 2);
        assert!(bad.validate().is_err());
        assert!(!cfg.warnings(3).is_empty());
    }

    #[test]
    fn minimal_r_meets_condition() {
        for n in 6..30 {
            for m in 1..=n / 3 {
                let r = minimal_r(n, 3, m);
                assert!(r_condition(n, 3, m, r));
                assert!(!r_condition(n, 3, m, r - 1));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn stripping_q_keeps_m(seed in 0u64..5000, n in 6usize..11, r in 0usize..3) {
            let h = random_kgraph(n, 3, 0.3, seed).unwrap();
            let aug = join_clique(&h, r);
            let (nu_aug, m_aug) = exact_nu(&aug).unwrap();
            let kept = extract_matching(&m_aug, n);
            prop_assert!(h.verify_matching(&kept));
            prop_assert!(kept.len() + r >= nu_aug);
            prop_assert!(exact_nu(&h).unwrap().0 >= kept.len());
        }
    }
}
