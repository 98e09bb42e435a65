//! End-to-end acceptance suite. Each criterion prints one `PASS` or `FAIL`
//! line; the test fails if any criterion fails.

use std::io::Write;
use std::time::{Duration, Instant};

use hypermatch::constructions::{
    build_hkl, build_hknm, complete, join_clique, parity_construction, planted_extremal,
    random_kgraph, space_barrier, vertex_degree_threshold,
};
use hypermatch::containment::{eps_contains, ModeRequest};
use hypermatch::harness::{
    conjecture_search, degree_filter, parse_records, render_report, tightness_grid,
    verify_tightness, InstanceStatus, ReportFormat, SearchModel, SearchParams,
};
use hypermatch::lp::{
    clique_window_matching, duality_certificate, max_fractional_matching, relabel_by_weights,
    weight_closure, VertexWeights,
};
use hypermatch::matching::{exact_nu, nibble_matching, ExactOptions, NibbleConfig};
use hypermatch::numeric::{binomial_u64, pow_rational, rational, subsets, Rational};
use hypermatch::pipeline::{
    check_preconditions, chernoff_band, chernoff_tail, first_round_sampler, fractional_pm_pipeline,
    minimal_r, PipelineConfig, SamplerThresholds,
};
use hypermatch::KGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn tightness() -> Check {
    let start = Instant::now();
    let grid = tightness_grid(&[3, 4], 14);
    for &(n, k, m) in &grid {
        let (h, _) = build_hknm(n, k, m).map_err(e)?;
        let expected = binomial_u64((n - 1) as u64, (k - 1) as u64)
            - binomial_u64((n - m) as u64, (k - 1) as u64);
        let d = h.min_l_degree(1).map_err(e)?;
        ensure(d == expected, || {
            format!("({n},{k},{m}): delta_1 {d} != {expected}")
        })?;
        let (nu, mm) = exact_nu(&h).map_err(e)?;
        ensure(nu == m - 1 && h.verify_matching(&mm), || {
            format!("({n},{k},{m}): nu {nu} != {}", m - 1)
        })?;
    }
    let report = verify_tightness(&grid, &ExactOptions::default(), false).map_err(e)?;
    ensure(report.complete && report.failure.is_none(), || {
        format!("harness run reported {:?}", report.failure)
    })?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{} grid points, {} instances with the m+1 companions",
        grid.len(),
        report.instances.len()
    ))
}

fn duality() -> Check {
    let start = Instant::now();
    let ps = [0.2, 0.5, 0.8];
    for i in 0..200u64 {
        let k = 3 + (i % 2) as usize;
        let p = ps[(i / 2 % 3) as usize];
        let n = k + 1 + (i / 6) as usize % (9 - k);
        let h = random_kgraph(n, k, p, 1000 + i).map_err(e)?;
        let cert = duality_certificate(&h);
        ensure(cert.holds(), || {
            format!("graph {i} (n={n},k={k},p={p}): certificate")
        })?;
        let (nu, _) = exact_nu(&h).map_err(e)?;
        ensure(rational(nu as i64, 1) <= cert.nu_frac, || {
            format!("graph {i}: nu {nu} > nu'")
        })?;
    }
    within(start, Duration::from_secs(300))?;
    Ok("200 graphs, nu' = tau' exactly, nu <= nu'".into())
}

fn clique_windows() -> Check {
    let mut count = 0;
    for k in 3..=5usize {
        for n in k + 1..=13 {
            let kn = complete(n, k).map_err(e)?;
            let target = rational(n as i64, k as i64);
            let phi = clique_window_matching(n, k).map_err(e)?;
            ensure(phi.is_feasible(&kn) && phi.value() == target, || {
                format!("windows on K_{n}^{k}")
            })?;
            let (v, _) = max_fractional_matching(&kn);
            ensure(v == target, || format!("nu'(K_{n}^{k}) = {v}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} cliques"))
}

fn pipeline() -> Check {
    let start = Instant::now();
    let eps = rational(1, 486);
    let rho = (&eps * &eps * &eps * &eps) / (pow_rational(3, 8) * rational(2, 1));
    let cfg = PipelineConfig::new(eps, rho.clone(), &rho / rational(2, 1));
    let mut done = 0;
    let mut seed = 0u64;
    while done < 20 {
        ensure(seed < 200, || {
            format!("only {done} instances met the hypotheses")
        })?;
        let n = 12 + (seed % 7) as usize;
        let m = 1 + (seed % 3) as usize;
        let h = random_kgraph(n, 3, 0.5, seed).map_err(e)?;
        let r = minimal_r(n, 3, m);
        seed += 1;
        if !check_preconditions(&h, m, r, &cfg).map_err(e)?.all_hold() {
            continue;
        }
        let out = fractional_pm_pipeline(&h, m, r, &cfg)
            .map_err(|err| format!("seed {}: {err}", seed - 1))?;
        let (lp, _) = max_fractional_matching(&join_clique(&h, r));
        let c = &out.structure;
        ensure(
            out.phi.is_perfect(&out.h_prime)
                && out.phi.value() == lp
                && out.lp_value == lp
                && c.link_stable
                && c.block_complete
                && c.transfer_holds,
            || format!("seed {}: outcome checks", seed - 1),
        )?;
        done += 1;
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("20 instances from {seed} seeds"))
}

fn stability() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..100u64 {
        let n = rng.random_range(4..=12usize);
        let w: Vec<Rational> = (0..n)
            .map(|_| {
                let d = rng.random_range(1..=12i64);
                rational(rng.random_range(0..=d), d)
            })
            .collect();
        let w = VertexWeights::new(w);
        let h = random_kgraph(n, 3, 0.5, i).map_err(e)?;
        let (_, relabeling) = relabel_by_weights(&h, &w).map_err(e)?;
        let sorted = relabeling.apply_weights(&w);
        ensure(sorted.w.windows(2).all(|p| p[0] >= p[1]), || {
            format!("vector {i}: relabelled weights not sorted")
        })?;
        let closure = weight_closure(n, 3, &sorted).map_err(e)?;
        ensure(closure.is_stable(), || {
            format!("vector {i}: closure not stable")
        })?;
    }
    Ok("100 weight vectors".into())
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let h = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        (xs[h - 1] + xs[h]) / 2.0
    } else {
        xs[h]
    }
}

fn nibble_median(h: &KGraph) -> Result<f64, String> {
    let mut fractions = Vec::new();
    for seed in 0..10 {
        let cfg = NibbleConfig {
            seed,
            ..NibbleConfig::default()
        };
        let rep = nibble_matching(h, &cfg).map_err(e)?;
        ensure(h.verify_matching(&rep.matching), || {
            "invalid matching".into()
        })?;
        fractions.push(rep.covered_fraction_f64());
    }
    Ok(median(fractions))
}

fn nibble() -> Check {
    let start = Instant::now();
    let k300 = complete(300, 3).map_err(e)?;
    let a = nibble_median(&k300)?;
    let n = 400;
    let p = 200.0 / binomial_u64(n as u64 - 1, 2) as f64;
    let g = random_kgraph(n, 3, p, 77).map_err(e)?;
    let d = 3.0 * g.edge_count() as f64 / n as f64;
    let ratio = g.max_l_degree(2).map_err(e)? as f64 / d;
    ensure((d - 200.0).abs() < 20.0 && ratio < 0.05, || {
        format!("random host off target: D = {d:.1}, Delta_2/D = {ratio:.3}")
    })?;
    let b = nibble_median(&g)?;
    ensure(a >= 0.85 && b >= 0.85, || format!("medians {a:.3}, {b:.3}"))?;
    within(start, Duration::from_secs(120))?;
    Ok(format!(
        "median covered K_300^3 {a:.3}, random (D = {d:.1}, Delta_2/D = {ratio:.3}) {b:.3}"
    ))
}

fn sampler() -> Check {
    let (n, p, copies, failure) = (4000u64, 0.05, 500u64, 1e-3);
    let host = random_kgraph(n as usize, 3, 1e-7, 11).map_err(e)?;
    let mut cfg = PipelineConfig::new(rational(1, 10), rational(1, 100), rational(1, 1000));
    cfg.sampler.keep_probability = Some(p);
    cfg.sampler.copies = Some(copies as usize);
    cfg.seed = 3;
    let fam = first_round_sampler(&host, &cfg).map_err(e)?;
    for (trials, band) in [
        (n, chernoff_band(n, p, failure).map_err(e)?),
        (copies, chernoff_band(copies, p, failure).map_err(e)?),
    ] {
        let mu = trials as f64 * p;
        let (lo, hi) = chernoff_tail(trials, p, mu - band.0).map_err(e)?;
        ensure(lo + hi <= failure * (1.0 + 1e-9), || {
            format!("band tails {lo} + {hi}")
        })?;
    }
    let t =
        SamplerThresholds::chernoff(n, p, copies, 3, failure, rational(1, 100), 0.99).map_err(e)?;
    let raw_inside = fam
        .raw_sizes
        .iter()
        .filter(|&&s| {
            let band = chernoff_band(n, p, failure).unwrap();
            band.0 <= s as f64 && s as f64 <= band.1
        })
        .count() as f64
        / copies as f64;
    let size_inside = fam
        .copies
        .iter()
        .filter(|c| t.size_band.0 <= c.len() as f64 && c.len() as f64 <= t.size_band.1)
        .count() as f64
        / copies as f64;
    let y_inside = fam
        .vertex_incidence
        .iter()
        .filter(|&&y| t.y_band.0 <= y as f64 && y as f64 <= t.y_band.1)
        .count() as f64
        / n as f64;
    ensure(
        raw_inside >= 0.99 && size_inside >= 0.99 && y_inside >= 0.99,
        || format!("inside: raw {raw_inside}, trimmed {size_inside}, Y {y_inside}"),
    )?;
    Ok(format!(
        "|R^i| inside {:.3}, Y_v inside {:.4}",
        size_inside.min(raw_inside),
        y_inside
    ))
}

fn brute_force_deficiency(h: &KGraph, m: usize) -> Result<u64, String> {
    let n = h.n();
    let vs: Vec<u32> = (1..=n as u32).collect();
    let mut best = u64::MAX;
    for w in subsets(&vs, m - 1) {
        let u: Vec<u32> = vs.iter().copied().filter(|v| !w.contains(v)).collect();
        let t = build_hkl(&u, &w, h.k(), h.k() - 1).map_err(e)?;
        let missing = t.edges().filter(|f| !h.contains_edge(f)).count() as u64;
        best = best.min(missing);
    }
    Ok(best)
}

fn containment() -> Check {
    let eps = rational(1, 200);
    let ps = [0.3, 0.6, 0.9];
    for i in 0..50u64 {
        let n = 6 + (i % 5) as usize;
        let m = 1 + (i / 5 % 3) as usize;
        let p = ps[(i % 3) as usize];
        let h = if i % 2 == 0 {
            random_kgraph(n, 3, p, 500 + i).map_err(e)?
        } else {
            let (t, _) = build_hknm(n, 3, m).map_err(e)?;
            let noise = random_kgraph(n, 3, 1.0 - p, 900 + i).map_err(e)?;
            let kept = t
                .edges()
                .filter(|f| !noise.contains_edge(f))
                .map(<[u32]>::to_vec);
            let planted = planted_extremal(n, 3, m, p / 3.0, 700 + i).map_err(e)?;
            KGraph::new_dedup(
                n,
                3,
                kept.chain(
                    planted
                        .edges()
                        .filter(|f| f[0] > (m - 1) as u32)
                        .map(<[u32]>::to_vec),
                ),
            )
            .map_err(e)?
        };
        let brute = brute_force_deficiency(&h, m)?;
        let ex = eps_contains(&h, m, &eps, ModeRequest::Exhaustive).map_err(e)?;
        let bound = &eps * pow_rational(n as u64, 3);
        ensure(
            ex.deficiency == brute && ex.satisfied == (rational(brute as i64, 1) <= bound),
            || {
                format!(
                    "graph {i}: exhaustive {} vs brute force {brute}",
                    ex.deficiency
                )
            },
        )?;
        let local = eps_contains(&h, m, &eps, ModeRequest::Local).map_err(e)?;
        ensure(local.deficiency >= ex.deficiency, || {
            format!(
                "graph {i}: local search {} beat {}",
                local.deficiency, ex.deficiency
            )
        })?;
    }
    Ok("50 graphs".into())
}

fn conjecture() -> Check {
    let params = SearchParams::new(9, 3, 2, SearchModel::Conditioned, 5000, 2024);
    let a = conjecture_search(&params).map_err(e)?;
    let b = conjecture_search(&params).map_err(e)?;
    let ra = render_report(&a, ReportFormat::Records).map_err(e)?;
    let rb = render_report(&b, ReportFormat::Records).map_err(e)?;
    ensure(ra == rb, || "reports differ between runs".into())?;
    ensure(parse_records(&ra).map_err(e)? == a, || {
        "records do not round-trip".into()
    })?;
    ensure(a.complete && a.trials == 5000, || {
        "search incomplete".into()
    })?;
    ensure(a.instances.len() as u64 == a.filtered, || {
        "filtered count mismatch".into()
    })?;
    ensure(
        a.instances
            .iter()
            .all(|r| r.status == InstanceStatus::Recorded && r.min_degree > r.threshold),
        || "an instance escaped the filter".into(),
    )?;
    let threshold = u64::try_from(vertex_degree_threshold(9, 3, 2).map_err(e)?).map_err(e)?;
    let (hx, _) = build_hknm(9, 3, 2).map_err(e)?;
    ensure(
        hx.min_l_degree(1).map_err(e)? == threshold && !degree_filter(&hx, 2).map_err(e)?,
        || "H_3(9,2) not excluded at the boundary".into(),
    )?;
    Ok(format!(
        "{} filtered, {} counterexamples, {} rejected; H_3(9,2) excluded",
        a.filtered,
        a.counterexamples.len(),
        a.rejected
    ))
}

fn negative_controls() -> Check {
    let sb = space_barrier(6, 3).map_err(e)?;
    let (nu_sb, _) = exact_nu(&sb).map_err(e)?;
    ensure(nu_sb == 1, || format!("space barrier nu = {nu_sb}"))?;
    let par = parity_construction(3, 3, 3).map_err(e)?;
    let (nu_par, _) = exact_nu(&par).map_err(e)?;
    ensure(nu_par == 1, || format!("parity nu = {nu_par}"))?;
    Ok("space barrier nu = 1 < 2, parity nu = 1".into())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("tightness", tightness),
        ("duality", duality),
        ("clique windows", clique_windows),
        ("pipeline end-to-end", pipeline),
        ("stability", stability),
        ("nibble", nibble),
        ("sampler concentration", sampler),
        ("containment oracle", containment),
        ("conjecture harness", conjecture),
        ("negative controls", negative_controls),
    ];
    // Written to the raw handle so the lines survive the test harness's capture.
    let mut out = std::io::stdout();
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => {
                writeln!(out, "PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1).expect("stdout")
            }
            Err(why) => {
                writeln!(out, "FAIL {:>2} {name} ({secs:.1}s): {why}", i + 1).expect("stdout");
                failed.push(*name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
