//! Experiment drivers: tightness of the degree threshold, counterexample
//! search, the two-branch case split, and report serialization.
//!
//! Reports are deterministic functions of their inputs and seed. Wall-clock
//! times are only recorded when asked for, since they would break that.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    build_hkl, build_hknm, planted_extremal, random_kgraph, random_kgraph_conditioned, rng_for,
    vertex_degree_threshold, VertexPartition,
};
use crate::containment::{eps_contains, ModeRequest};
use crate::error::{Error, Result};
use crate::hypergraph::{KGraph, Matching};
use crate::lp::max_fractional_matching;
use crate::matching::{exact_nu_with, ExactOptions};
use crate::numeric::format_rational;
use crate::pipeline::{
    build_augmented, check_preconditions, extract_matching, fractional_pm_pipeline, PipelineConfig,
    Preconditions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceStatus {
    /// Every assertion on the instance held.
    Passed,
    /// An assertion failed; the report is aborted at this instance.
    Failed,
    /// The node budget ran out before `ν` was settled.
    Indeterminate,
    /// Measured without an assertion (search instances).
    Recorded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecord {
    /// Grid or trial index; reports are ordered by it.
    pub index: u64,
    pub label: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub min_degree: u64,
    pub threshold: u64,
    pub nu: Option<u64>,
    /// `ν'` as an exact fraction, when computed.
    pub nu_frac: Option<String>,
    pub status: InstanceStatus,
    /// SHA-256 of the graph's text form.
    pub fingerprint: String,
    /// Branch-and-bound nodes spent on `ν`.
    pub nodes: u64,
    pub runtime_micros: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub index: u64,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub min_degree: u64,
    pub threshold: u64,
    pub nu: u64,
    pub fingerprint: String,
    /// The graph in the text format.
    pub graph: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeBucket {
    pub min_degree: u64,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub version: String,
    pub parameters: serde_json::Value,
    pub trials: u64,
    /// Trials whose conditioned sampler gave up.
    pub rejected: u64,
    /// Instances passing the strict degree filter.
    pub filtered: u64,
    /// `δ_1` over all sampled graphs.
    pub degree_histogram: Vec<DegreeBucket>,
    /// False if some instance was left indeterminate.
    pub complete: bool,
    /// The offending instance, serialized, when an assertion failed.
    pub failure: Option<String>,
    pub instances: Vec<InstanceRecord>,
    pub counterexamples: Vec<Counterexample>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, parameters: serde_json::Value) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            seed,
            version: crate::VERSION.into(),
            parameters,
            trials: 0,
            rejected: 0,
            filtered: 0,
            degree_histogram: Vec::new(),
            complete: true,
            failure: None,
            instances: Vec::new(),
            counterexamples: Vec::new(),
        }
    }

    /// 0 when every assertion held, 1 on an assertion failure, 2 when a budget ran out.
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some()
            || self
                .instances
                .iter()
                .any(|i| i.status == InstanceStatus::Failed)
        {
            1
        } else if !self.complete
            || self
                .instances
                .iter()
                .any(|i| i.status == InstanceStatus::Indeterminate)
        {
            2
        } else {
            0
        }
    }
}

fn threshold_u64(n: usize, k: usize, m: usize) -> Result<u64> {
    u64::try_from(vertex_degree_threshold(n, k, m)?)
        .map_err(|_| Error::TooLarge(format!("threshold for n = {n}, k = {k} exceeds u64")))
}

/// `δ_1(H) > C(n-1,k-1) - C(n-m,k-1)`, the strict filter of the search.
pub fn degree_filter(h: &KGraph, m: usize) -> Result<bool> {
    Ok(h.min_l_degree(1)? > threshold_u64(h.n(), h.k(), m)?)
}

/// Every `(n, k, m)` with `k + m - 1 <= n <= n_max` and `1 <= m <= n/k`.
pub fn tightness_grid(ks: &[usize], n_max: usize) -> Vec<(usize, usize, usize)> {
    let mut grid = Vec::new();
    for &k in ks {
        for n in k..=n_max {
            for m in 1..=n / k {
                if k + m - 1 <= n {
                    grid.push((n, k, m));
                }
            }
        }
    }
    grid
}

struct Measured {
    nu: Option<u64>,
    nodes: u64,
    micros: u64,
    /// The returned matching is valid in `h` and has `nu` edges.
    witness_ok: bool,
}

fn measure_nu(h: &KGraph, opts: &ExactOptions) -> Result<Measured> {
    let start = Instant::now();
    match exact_nu_with(h, opts) {
        Ok(out) => Ok(Measured {
            nu: Some(out.nu as u64),
            nodes: out.nodes,
            micros: start.elapsed().as_micros() as u64,
            witness_ok: out.matching.len() == out.nu && h.verify_matching(&out.matching),
        }),
        Err(Error::BudgetExhausted { budget }) => Ok(Measured {
            nu: None,
            nodes: budget,
            micros: start.elapsed().as_micros() as u64,
            witness_ok: true,
        }),
        Err(e) => Err(e),
    }
}

/// For each grid point builds `H_k(n, m)` and checks `δ_1` equals the threshold
/// and `ν = m - 1`; then `H_k(n, m+1)` with `δ_1` above it and `ν = m`. Stops at
/// the first failed check and stores that instance in `failure`.
pub fn verify_tightness(
    grid: &[(usize, usize, usize)],
    opts: &ExactOptions,
    timings: bool,
) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "tightness",
        0,
        serde_json::json!({ "grid": grid, "budget": opts.budget }),
    );
    let mut index = 0u64;
    for &(n, k, m) in grid {
        let threshold = threshold_u64(n, k, m)?;
        let mut cases: Vec<(String, KGraph, usize, bool)> = vec![(
            format!("H_{k}({n},{m})"),
            build_hknm(n, k, m)?.0,
            m - 1,
            true,
        )];
        if k + m <= n {
            cases.push((
                format!("H_{k}({n},{})", m + 1),
                build_hknm(n, k, m + 1)?.0,
                m,
                false,
            ));
        }
        for (label, h, expected_nu, at_threshold) in cases {
            report.trials += 1;
            let d = h.min_l_degree(1)?;
            let got = measure_nu(&h, opts)?;
            let (nu_frac, _) = max_fractional_matching(&h);
            let degree_ok = if at_threshold {
                d == threshold
            } else {
                d > threshold
            };
            let status = match got.nu {
                None => InstanceStatus::Indeterminate,
                Some(nu) if degree_ok && got.witness_ok && nu == expected_nu as u64 => {
                    InstanceStatus::Passed
                }
                Some(_) => InstanceStatus::Failed,
            };
            let rec = InstanceRecord {
                index,
                label,
                n,
                k,
                m,
                min_degree: d,
                threshold,
                nu: got.nu,
                nu_frac: Some(format_rational(&nu_frac)),
                status,
                fingerprint: h.fingerprint(),
                nodes: got.nodes,
                runtime_micros: timings.then_some(got.micros),
            };
            index += 1;
            match status {
                InstanceStatus::Failed => {
                    report.failure = Some(serde_json::to_string(&rec).expect("record serializes"));
                    report.instances.push(rec);
                    return Ok(report);
                }
                InstanceStatus::Indeterminate => report.complete = false,
                _ => {}
            }
            report.instances.push(rec);
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchModel {
    /// Binomial random graph.
    UniformP,
    /// Binomial random graph redrawn until `δ_1` reaches the threshold.
    Conditioned,
    /// `H_k(n, m)` plus random edges inside `U`.
    Planted,
}

impl FromStr for SearchModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-p" | "uniform" => Ok(SearchModel::UniformP),
            "conditioned" => Ok(SearchModel::Conditioned),
            "planted" => Ok(SearchModel::Planted),
            _ => Err(Error::Range(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub model: SearchModel,
    pub trials: u64,
    pub seed: u64,
    /// Edge probability of the underlying binomial draw.
    pub p: f64,
    /// Redraws allowed per conditioned trial.
    pub rejection_cap: usize,
    pub budget: u64,
    pub timings: bool,
}

impl SearchParams {
    pub fn new(n: usize, k: usize, m: usize, model: SearchModel, trials: u64, seed: u64) -> Self {
        SearchParams {
            n,
            k,
            m,
            model,
            trials,
            seed,
            p: 0.4,
            rejection_cap: 1000,
            budget: crate::matching::default_node_budget(),
            timings: false,
        }
    }
}

/// Samples graphs, keeps those with `δ_1` strictly above the threshold and
/// computes `ν` exactly. A graph with `ν < m` is re-verified (degree recomputed
/// from the degree sequence, `ν` recomputed with the LP bound) before it is
/// listed. The edge-set hash is taken at the filter and again after `ν`; a
/// mismatch is an internal contradiction.
pub fn conjecture_search(params: &SearchParams) -> Result<ExperimentReport> {
    let SearchParams {
        n,
        k,
        m,
        model,
        trials,
        seed,
        p,
        ..
    } = *params;
    if k == 0 || m == 0 || k * m >= n {
        return Err(Error::Range(format!(
            "need 1 <= m < n/k (n={n}, k={k}, m={m})"
        )));
    }
    let threshold = threshold_u64(n, k, m)?;
    let opts = ExactOptions {
        budget: params.budget,
        lp_bound: false,
    };
    let mut report = ExperimentReport::new(
        "conjecture-search",
        seed,
        serde_json::to_value(params).expect("params serialize"),
    );
    let mut histogram = std::collections::BTreeMap::<u64, u64>::new();
    let mut seeds = rng_for(seed, u64::MAX);
    for t in 0..trials {
        report.trials += 1;
        let trial_seed: u64 = seeds.random();
        let h = match model {
            SearchModel::UniformP => random_kgraph(n, k, p, trial_seed)?,
            SearchModel::Planted => planted_extremal(n, k, m, p, trial_seed)?,
            SearchModel::Conditioned => {
                match random_kgraph_conditioned(
                    n,
                    k,
                    p,
                    threshold,
                    params.rejection_cap,
                    trial_seed,
                ) {
                    Ok((g, _)) => g,
                    Err(Error::SamplingExhausted { .. }) => {
                        report.rejected += 1;
                        continue;
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        let d = h.min_l_degree(1)?;
        *histogram.entry(d).or_default() += 1;
        if d <= threshold {
            continue;
        }
        report.filtered += 1;
        let fp_filter = h.fingerprint();
        let got = measure_nu(&h, &opts)?;
        if h.fingerprint() != fp_filter {
            return Err(Error::InternalContradiction {
                claim: "graph unchanged between filter and matching".into(),
            });
        }
        let d_again = h.vertex_degrees().into_iter().min().unwrap_or(0);
        if d_again != d || !got.witness_ok {
            return Err(Error::InternalContradiction {
                claim: format!("trial {t}: degree and matching re-verify"),
            });
        }
        let status = if got.nu.is_some() {
            InstanceStatus::Recorded
        } else {
            report.complete = false;
            InstanceStatus::Indeterminate
        };
        if let Some(nu) = got.nu.filter(|&nu| nu < m as u64) {
            if let Some(c) = reverify(&h, m, threshold, t, &opts)? {
                report.counterexamples.push(c);
            } else {
                return Err(Error::InternalContradiction {
                    claim: format!("candidate {t} with nu = {nu} did not re-verify"),
                });
            }
        }
        report.instances.push(InstanceRecord {
            index: t,
            label: format!("trial-{t}"),
            n,
            k,
            m,
            min_degree: d,
            threshold,
            nu: got.nu,
            nu_frac: None,
            status,
            fingerprint: fp_filter,
            nodes: got.nodes,
            runtime_micros: params.timings.then_some(got.micros),
        });
    }
    report.degree_histogram = histogram
        .into_iter()
        .map(|(min_degree, count)| DegreeBucket { min_degree, count })
        .collect();
    Ok(report)
}

fn reverify(
    h: &KGraph,
    m: usize,
    threshold: u64,
    index: u64,
    opts: &ExactOptions,
) -> Result<Option<Counterexample>> {
    let d = h.vertex_degrees().into_iter().min().unwrap_or(0);
    if d <= threshold {
        return Ok(None);
    }
    let again = exact_nu_with(
        h,
        &ExactOptions {
            budget: opts.budget,
            lp_bound: true,
        },
    )?;
    if again.nu >= m || !h.verify_matching(&again.matching) {
        return Ok(None);
    }
    Ok(Some(Counterexample {
        index,
        n: h.n(),
        k: h.k(),
        m,
        min_degree: d,
        threshold,
        nu: again.nu as u64,
        fingerprint: h.fingerprint(),
        graph: h.to_text(),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Contains,
    NonContains,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSplitReport {
    pub branch: Branch,
    pub deficiency: u64,
    pub partition: VertexPartition,
    /// Contains branch: template edges present in `H` plus edges inside `U`.
    pub template_matching: Option<Matching>,
    /// Non-contains branch.
    pub r: Option<usize>,
    pub preconditions: Option<Preconditions>,
    /// Why the fractional pipeline stopped, if it did.
    pub pipeline_error: Option<String>,
    /// `ν'(H_r^k)` from a successful pipeline run.
    pub pipeline_value: Option<String>,
    /// `ν(H_r^k)`.
    pub augmented_nu: Option<usize>,
    /// The maximum matching of `H_r^k` with edges meeting `Q` removed.
    pub extracted: Option<Matching>,
    /// A matching of size `m` in `H` was exhibited.
    pub concluded: bool,
}

fn labelled(branch: &str, e: Error) -> Error {
    match e {
        Error::BudgetExhausted { .. } => e,
        other => Error::StepFailure {
            step: branch.into(),
            reason: other.to_string(),
        },
    }
}

/// Decides which branch applies and runs it.
///
/// Contains: `ν` of `H` restricted to its edges meeting `W` at most once (the
/// one-`W`-vertex template edges plus edges inside `U`). Non-contains: the
/// fractional pipeline on `H_r^k`, then a maximum matching of `H_r^k` with the
/// `Q`-edges stripped. A conclusion is drawn only from a matching of size `m`
/// verified in `H`.
pub fn case_split_demo(
    h: &KGraph,
    m: usize,
    cfg: &PipelineConfig,
    opts: &ExactOptions,
) -> Result<CaseSplitReport> {
    let n = h.n();
    let k = h.k();
    let c =
        eps_contains(h, m, &cfg.eps, ModeRequest::Auto).map_err(|e| labelled("containment", e))?;
    if c.satisfied {
        let in_w = c.partition.w_indicator();
        let template =
            build_hkl(&c.partition.u, &c.partition.w, k, 1).map_err(|e| labelled("contains", e))?;
        let kept = h.edges().filter(|e| {
            let j = e.iter().filter(|&&v| in_w[v as usize]).count();
            j == 0 || template.contains_edge(e)
        });
        let sub = KGraph::new(n, k, kept.map(<[u32]>::to_vec).collect::<Vec<_>>())
            .map_err(|e| labelled("contains", e))?;
        let out = exact_nu_with(&sub, opts).map_err(|e| labelled("contains", e))?;
        let concluded = out.nu >= m && h.verify_matching(&out.matching);
        return Ok(CaseSplitReport {
            branch: Branch::Contains,
            deficiency: c.deficiency,
            partition: c.partition,
            template_matching: Some(out.matching),
            r: None,
            preconditions: None,
            pipeline_error: None,
            pipeline_value: None,
            augmented_nu: None,
            extracted: None,
            concluded,
        });
    }

    let aug = build_augmented(h, m, &cfg.eta).map_err(|e| labelled("non-contains", e))?;
    let pre = check_preconditions(h, m, aug.r, cfg).map_err(|e| labelled("non-contains", e))?;
    let (pipeline_error, pipeline_value) = match fractional_pm_pipeline(h, m, aug.r, cfg) {
        Ok(out) => (None, Some(format_rational(&out.lp_value))),
        Err(e @ Error::InternalContradiction { .. }) => return Err(e),
        Err(e) => (Some(e.to_string()), None),
    };
    let out = exact_nu_with(&aug.graph, opts).map_err(|e| labelled("non-contains", e))?;
    let extracted = extract_matching(&out.matching, n);
    if extracted.len() + aug.r < out.nu || !h.verify_matching(&extracted) {
        return Err(Error::InternalContradiction {
            claim: "at most r edges of a matching meet Q".into(),
        });
    }
    Ok(CaseSplitReport {
        branch: Branch::NonContains,
        deficiency: c.deficiency,
        partition: c.partition,
        template_matching: None,
        r: Some(aug.r),
        preconditions: Some(pre),
        pipeline_error,
        pipeline_value,
        augmented_nu: Some(out.nu),
        concluded: extracted.len() >= m,
        extracted: Some(extracted),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    /// Comma-separated, one row per instance.
    #[default]
    Rows,
    /// JSON lines: a meta line, then one line per instance and per counterexample.
    Records,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rows" | "csv" => Ok(ReportFormat::Rows),
            "records" | "jsonl" => Ok(ReportFormat::Records),
            _ => Err(Error::Range(format!("unknown format {s:?}"))),
        }
    }
}

const ROW_HEADER: [&str; 13] = [
    "index",
    "label",
    "n",
    "k",
    "m",
    "min_degree",
    "threshold",
    "nu",
    "nu_frac",
    "status",
    "fingerprint",
    "nodes",
    "runtime_micros",
];

pub fn to_rows(report: &ExperimentReport) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(ROW_HEADER).map_err(io)?;
    for r in &report.instances {
        w.serialize(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn parse_rows(text: &str) -> Result<Vec<InstanceRecord>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| {
            row.map_err(|e| Error::Parse {
                line: 0,
                message: e.to_string(),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
enum Line {
    Meta {
        experiment: String,
        seed: u64,
        version: String,
        parameters: serde_json::Value,
        trials: u64,
        rejected: u64,
        filtered: u64,
        degree_histogram: Vec<DegreeBucket>,
        complete: bool,
        failure: Option<String>,
    },
    Instance(InstanceRecord),
    Counterexample(Counterexample),
}

pub fn to_records(report: &ExperimentReport) -> String {
    let meta = Line::Meta {
        experiment: report.experiment.clone(),
        seed: report.seed,
        version: report.version.clone(),
        parameters: report.parameters.clone(),
        trials: report.trials,
        rejected: report.rejected,
        filtered: report.filtered,
        degree_histogram: report.degree_histogram.clone(),
        complete: report.complete,
        failure: report.failure.clone(),
    };
    let mut out = String::new();
    let mut push = |l: &Line| {
        out.push_str(&serde_json::to_string(l).expect("report lines serialize"));
        out.push('\n');
    };
    push(&meta);
    for i in &report.instances {
        push(&Line::Instance(i.clone()));
    }
    for c in &report.counterexamples {
        push(&Line::Counterexample(c.clone()));
    }
    out
}

pub fn parse_records(text: &str) -> Result<ExperimentReport> {
    let mut report: Option<ExperimentReport> = None;
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        let missing_meta = || Error::Parse {
            line: i + 1,
            message: "record before the meta line".into(),
        };
        match line {
            Line::Meta {
                experiment,
                seed,
                version,
                parameters,
                trials,
                rejected,
                filtered,
                degree_histogram,
                complete,
                failure,
            } => {
                let mut r = ExperimentReport::new(&experiment, seed, parameters);
                r.version = version;
                r.trials = trials;
                r.rejected = rejected;
                r.filtered = filtered;
                r.degree_histogram = degree_histogram;
                r.complete = complete;
                r.failure = failure;
                report = Some(r);
            }
            Line::Instance(x) => report.as_mut().ok_or_else(missing_meta)?.instances.push(x),
            Line::Counterexample(x) => report
                .as_mut()
                .ok_or_else(missing_meta)?
                .counterexamples
                .push(x),
        }
    }
    report.ok_or_else(|| Error::Parse {
        line: 0,
        message: "no meta line".into(),
    })
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Rows => to_rows(report),
        ReportFormat::Records => Ok(to_records(report)),
    }
}

/// Writes the report to `path`, or to stdout when `path` is `None`.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: Option<&Path>,
) -> Result<()> {
    let text = render_report(report, format)?;
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::complete;
    use crate::numeric::rational;
    use proptest::prelude::*;

    fn opts() -> ExactOptions {
        ExactOptions {
            budget: 10_000_000,
            lp_bound: false,
        }
    }

    #[test]
    fn tightness_example() {
        let rep = verify_tightness(&[(9, 3, 3)], &opts(), false).unwrap();
        assert_eq!(rep.exit_code(), 0);
        let a = &rep.instances[0];
        assert_eq!((a.min_degree, a.threshold, a.nu), (13, 13, Some(2)));
        let b = &rep.instances[1];
        assert_eq!((b.min_degree, b.nu), (18, Some(3)));
    }

    #[test]
    fn tightness_m_one_is_edgeless() {
        let rep = verify_tightness(&[(7, 3, 1)], &opts(), false).unwrap();
        let a = &rep.instances[0];
        assert_eq!((a.min_degree, a.threshold, a.nu), (0, 0, Some(0)));
        assert_eq!(rep.exit_code(), 0);
    }

    #[test]
    fn budget_exhaustion_is_indeterminate() {
        let tiny = ExactOptions {
            budget: 1,
            lp_bound: false,
        };
        let rep = verify_tightness(&[(12, 3, 4)], &tiny, false).unwrap();
        assert!(!rep.complete);
        assert_eq!(rep.exit_code(), 2);
    }

    #[test]
    fn grid_shape() {
        let g = tightness_grid(&[3], 6);
        assert_eq!(
            g,
            vec![(3, 3, 1), (4, 3, 1), (5, 3, 1), (6, 3, 1), (6, 3, 2)]
        );
    }

    #[test]
    fn boundary_instance_is_filtered_out() {
        let (h, _) = build_hknm(9, 3, 2).unwrap();
        assert_eq!(h.min_l_degree(1).unwrap(), 7);
        assert!(!degree_filter(&h, 2).unwrap());
        assert!(degree_filter(&complete(9, 3).unwrap(), 2).unwrap());
    }

    #[test]
    fn search_edge_cases() {
        let mut p = SearchParams::new(9, 3, 2, SearchModel::UniformP, 0, 1);
        let rep = conjecture_search(&p).unwrap();
        assert!(rep.instances.is_empty() && rep.counterexamples.is_empty());
        assert_eq!(to_rows(&rep).unwrap().lines().count(), 1);
        p.trials = 3;
        p.p = 1.0;
        let rep = conjecture_search(&p).unwrap();
        assert_eq!(rep.filtered, 3);
        assert!(rep.instances.iter().all(|i| i.nu == Some(3)));
        assert!(
            conjecture_search(&SearchParams::new(9, 3, 3, SearchModel::UniformP, 1, 1)).is_err()
        );
    }

    #[test]
    fn search_is_deterministic_and_round_trips() {
        let mut p = SearchParams::new(9, 3, 2, SearchModel::Conditioned, 40, 11);
        p.p = 0.3;
        let a = conjecture_search(&p).unwrap();
        let b = conjecture_search(&p).unwrap();
        assert_eq!(to_records(&a), to_records(&b));
        assert_eq!(to_rows(&a).unwrap(), to_rows(&b).unwrap());
        assert_eq!(parse_records(&to_records(&a)).unwrap(), a);
        assert_eq!(parse_rows(&to_rows(&a).unwrap()).unwrap(), a.instances);
        let total: u64 = a.degree_histogram.iter().map(|b| b.count).sum();
        assert_eq!(total + a.rejected, a.trials);
    }

    #[test]
    fn planted_model_runs() {
        let p = SearchParams::new(10, 3, 3, SearchModel::Planted, 10, 2);
        let rep = conjecture_search(&p).unwrap();
        assert_eq!(rep.trials, 10);
        assert!(rep.instances.iter().all(|i| i.min_degree > i.threshold));
    }

    #[test]
    fn case_split_examples() {
        let cfg = PipelineConfig::new(rational(1, 1000), rational(1, 100), rational(1, 100));
        let (h, _) = build_hknm(12, 3, 4).unwrap();
        let rep = case_split_demo(&h, 4, &cfg, &opts()).unwrap();
        assert_eq!(rep.branch, Branch::Contains);
        assert_eq!(rep.deficiency, 0);
        assert!(!rep.concluded);

        let rep = case_split_demo(&complete(12, 3).unwrap(), 3, &cfg, &opts()).unwrap();
        assert!(rep.concluded);

        let rep = case_split_demo(&KGraph::edgeless(12, 3), 3, &cfg, &opts()).unwrap();
        assert_eq!(rep.branch, Branch::NonContains);
        assert!(!rep.preconditions.as_ref().unwrap().degree_ok);
        assert!(!rep.concluded);
    }

    #[test]
    fn non_contains_branch_concludes_on_dense_graph() {
        let cfg = PipelineConfig::new(rational(1, 1000), rational(1, 100), rational(1, 100));
        // A fifth of the template is missing, far above eps * n^3.
        let h = random_kgraph(12, 3, 0.8, 5).unwrap();
        let rep = case_split_demo(&h, 3, &cfg, &opts()).unwrap();
        assert_eq!(rep.branch, Branch::NonContains);
        assert!(
            rep.extracted.as_ref().unwrap().len() + rep.r.unwrap() >= rep.augmented_nu.unwrap()
        );
        assert!(rep.concluded);
    }

    #[test]
    fn format_names() {
        assert_eq!("rows".parse::<ReportFormat>().unwrap(), ReportFormat::Rows);
        assert_eq!(
            "records".parse::<ReportFormat>().unwrap(),
            ReportFormat::Records
        );
        assert!("xml".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn emit_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let rep = verify_tightness(&[(6, 3, 2)], &opts(), false).unwrap();
        let path = dir.path().join("r.jsonl");
        emit_report(&rep, ReportFormat::Records, Some(&path)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(parse_records(&text).unwrap(), rep);
        let bad = dir.path().join("missing").join("r.csv");
        assert!(matches!(
            emit_report(&rep, ReportFormat::Rows, Some(&bad)),
            Err(Error::Io(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn counterexamples_always_reverify(seed in 0u64..10_000, p in 0.2f64..0.9) {
            let mut params = SearchParams::new(8, 3, 2, SearchModel::UniformP, 5, seed);
            params.p = p;
            let rep = conjecture_search(&params).unwrap();
            for c in &rep.counterexamples {
                let h = KGraph::parse(&c.graph).unwrap();
                prop_assert!(degree_filter(&h, c.m).unwrap());
                prop_assert!(crate::matching::exact_nu(&h).unwrap().0 < c.m);
            }
            for i in &rep.instances {
                prop_assert!(i.min_degree > i.threshold);
            }
        }
    }
}
