//! End-to-end acceptance checks. Runs without the libtest harness so every
//! check prints exactly one `PASS` or `FAIL` line.

use std::path::PathBuf;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use semifix_core::contraction::{
    lambda_star, m_t, verify_generalized_rational_contraction, verify_integral_contraction,
};
use semifix_core::graph::chainability;
use semifix_core::hyperspace::{hausdorff, nadler_select, point_to_set_distance};
use semifix_core::oracle::{brute_fixed_points, brute_hausdorff, brute_lambda_star, random_instance, FamilyMode};
use semifix_core::problem::{parse_problem_file, Problem, ProblemSpec};
use semifix_core::solver::{fixed_points, picard_orbit, solve_single_valued};
use semifix_core::{Extended, GammaFunction, PhMatrix, PointMap, Rational, Scalar, SetEdgeSemantics, SetMap};
use serde_json::{json, Value};

const CORPUS_SIZE: u64 = 500;

type Check = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn rat(text: &str) -> Rational {
    Rational::parse_literal(text).expect("valid literal")
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../instances/golden.json")
}

fn golden() -> ProblemSpec<Rational> {
    match parse_problem_file(&golden_path()).expect("golden instance parses") {
        Problem::Exact(p) => p,
        Problem::Float(_) => panic!("golden instance is exact"),
    }
}

fn cli(args: &[&str]) -> Result<(i32, Value), String> {
    let out = Process::new(env!("CARGO_BIN_EXE_semifix"))
        .arg("--machine")
        .args(args)
        .arg(golden_path())
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    let doc = serde_json::from_slice(&out.stdout)
        .map_err(|e| format!("{args:?}: bad output ({e}): {}", String::from_utf8_lossy(&out.stderr)))?;
    Ok((code, doc))
}

/// Seeded powerset corpus with 2 to 6 points.
fn corpus() -> impl Iterator<Item = ProblemSpec<Rational>> {
    (0..CORPUS_SIZE).map(|seed| {
        let n = 2 + (seed % 5) as usize;
        let density = [0.0, 0.25, 0.5, 0.75, 1.0][(seed / 5 % 5) as usize];
        random_instance(seed, n, FamilyMode::Powerset, density).expect("parameters in range")
    })
}

fn golden_hausdorff() -> Check {
    let (code, doc) = cli(&["hausdorff"])?;
    ensure(code == 0, format!("exit code {code}"))?;
    let m = &doc["result"]["matrix"];
    ensure(doc["result"]["members"] == json!(["bar0", "bar1", "bar4"]), "member order")?;
    for (u, v, want) in [(0, 1, "1"), (1, 2, "9"), (0, 2, "16")] {
        ensure(m[u][v] == want && m[v][u] == want, format!("H({u},{v}) = {}, expected {want}", m[u][v]))?;
    }
    Ok("H(bar0,bar1)=1, H(bar1,bar4)=9, H(bar0,bar4)=16".into())
}

fn golden_analyze() -> Check {
    let (code, doc) = cli(&["analyze"])?;
    let r = &doc["result"];
    ensure(code == 0, format!("exit code {code}"))?;
    ensure(r["lambda_star"] == "1/9", format!("lambda* = {}", r["lambda_star"]))?;
    ensure(r["witness"] == json!(["bar1", "bar4"]), format!("witness {}", r["witness"]))?;
    ensure(r["edge_preserving"] == true, "edges not preserved")?;
    ensure(r["verdict"] == "contraction", format!("verdict {}", r["verdict"]))?;
    let p = golden();
    let brute = brute_lambda_star(&p.space, &p.family, &p.map);
    ensure(brute == Extended::Finite(rat("1/9")), format!("oracle gives {brute}"))?;
    Ok("lambda* = 1/9 at (bar1, bar4), edges preserved, contraction".into())
}

fn golden_theorem() -> Check {
    let (code, doc) = cli(&["theorem"])?;
    let r = &doc["result"];
    ensure(code == 0, format!("exit code {code}"))?;
    ensure(r["fixed_points"] == json!(["bar0"]), format!("F(T) = {}", r["fixed_points"]))?;
    ensure(r["singleton"] == true && r["fixed_points_complete"] == true, "F(T) not a complete singleton")?;
    ensure(r["hypotheses"]["y_t"].as_array().is_some_and(|y| !y.is_empty()), "Y_T empty")?;
    let statements = r["statements"].as_array().ok_or("no statements")?;
    ensure(statements.len() == 4, "expected four statements")?;
    for s in statements {
        ensure(s["outcome"] == "pass", format!("statement {} -> {}", s["statement"], s["outcome"]))?;
    }
    let p = golden();
    let ph = PhMatrix::build(&p.space, &p.family);
    ensure(ph.get(0, 0).is_zero(), "PH weight on F(T) is not zero")?;
    Ok("F(T) = {bar0}, complete singleton, all four statements pass".into())
}

fn golden_orbit() -> Check {
    let (code, doc) = cli(&["iterate", "--start", "bar4"])?;
    let r = &doc["result"];
    ensure(code == 0, format!("exit code {code}"))?;
    ensure(r["orbit"] == json!(["bar4", "bar1", "bar0", "bar0"]), format!("orbit {}", r["orbit"]))?;
    ensure(r["status"] == json!({"kind": "fixed", "index": 2}), format!("status {}", r["status"]))?;
    let cert = &r["certificate"];
    ensure(cert["holds"] == true && cert["lambda"] == "1/9", "geometric bound not certified at 1/9")?;
    let steps = cert["steps"].as_array().ok_or("no steps")?;
    ensure(steps[1]["distance"] == "1" && steps[1]["bound"] == "1", "H(U1,U2) != 1 = (1/9)*9")?;
    for s in steps {
        let (d, b) = (rat(s["distance"].as_str().unwrap()), rat(s["bound"].as_str().unwrap()));
        ensure(d <= b, format!("step {}: {d} > {b}", s["n"]))?;
    }
    Ok("bar4 -> bar1 -> bar0 fixed at step 2; bound holds at every step".into())
}

fn oracle_equivalence() -> Check {
    let mut pairs = 0usize;
    for (seed, p) in corpus().enumerate() {
        let ph = PhMatrix::build(&p.space, &p.family);
        for u in 0..p.family.len() {
            for v in 0..p.family.len() {
                let (a, b) = (p.family.set(u), p.family.set(v));
                let brute = brute_hausdorff(&p.space, a.points(), b.points()).map_err(|e| e.to_string())?;
                ensure(
                    *ph.get(u, v) == brute && hausdorff(&p.space, a, b) == brute,
                    format!("seed {seed}: H({u},{v})"),
                )?;
                pairs += 1;
            }
        }
        let fast = lambda_star(&ph, &p.map).value;
        let slow = brute_lambda_star(&p.space, &p.family, &p.map);
        ensure(fast == slow, format!("seed {seed}: lambda* {fast} vs {slow}"))?;
        ensure(fixed_points(&p.map) == brute_fixed_points(&p.family, &p.map), format!("seed {seed}: F(T)"))?;
    }
    Ok(format!("{CORPUS_SIZE} instances, {pairs} ordered pairs, exact equality"))
}

fn lemma_suite() -> Check {
    let mus = [rat("101/100"), rat("2"), rat("1000001/1000000")];
    let mut checks = 0usize;
    for (seed, p) in corpus().enumerate() {
        let ph = PhMatrix::build(&p.space, &p.family);
        for u in 0..p.family.len() {
            for v in 0..p.family.len() {
                let (a, b) = (p.family.set(u), p.family.set(v));
                let h = ph.get(u, v);
                for x in a.iter() {
                    ensure(point_to_set_distance(&p.space, x, b) <= *h, format!("seed {seed}: d(x,V) > H"))?;
                }
                for mu in &mus {
                    let bound = mu.mul(h);
                    let picks = nadler_select(&p.space, a, b, mu).map_err(|e| e.to_string())?;
                    ensure(picks.len() == a.len(), format!("seed {seed}: selection not total"))?;
                    for s in picks {
                        ensure(b.contains(s.to), format!("seed {seed}: selection outside V"))?;
                        ensure(*p.space.distance(s.from, s.to) <= bound, format!("seed {seed}: selection bound"))?;
                    }
                }
                for eps in [h.add(&rat("1/1000")), h.add(&rat("1"))] {
                    for x in a.iter() {
                        let near = b.iter().any(|y| *p.space.distance(x, y) < eps);
                        ensure(near, format!("seed {seed}: no point of V within {eps} of {x}"))?;
                    }
                }
                checks += 1;
            }
        }
    }
    Ok(format!("{checks} pairs checked against all three lemmas, zero exceptions"))
}

/// Maps that collapse part of the family onto one member, so that enough
/// instances satisfy the contraction hypotheses.
fn collapsing_maps(p: &ProblemSpec<Rational>, seed: u64) -> Vec<SetMap> {
    let n = p.family.len();
    let target = (seed as usize) % n;
    let mut maps = vec![p.map.clone(), SetMap::constant(n, target)];
    let ph = PhMatrix::build(&p.space, &p.family);
    // Each member steps to the member nearest the target among those strictly closer.
    let greedy: Vec<usize> = (0..n)
        .map(|u| {
            (0..n)
                .filter(|&w| ph.get(w, target) < ph.get(u, target))
                .min_by(|&a, &b| ph.get(a, u).cmp(ph.get(b, u)).then(a.cmp(&b)))
                .unwrap_or(target)
        })
        .collect();
    maps.push(SetMap::new(n, greedy).expect("total"));
    let half: Vec<usize> = (0..n).map(|u| if (u + seed as usize) % 2 == 0 { target } else { p.map.image(u) }).collect();
    maps.push(SetMap::new(n, half).expect("total"));
    maps
}

fn theorem_property() -> Check {
    let (mut qualifying, mut nonconstant, mut examined) = (0usize, 0usize, 0usize);
    let semantics = SetEdgeSemantics::Existential;
    for (seed, base) in corpus().enumerate() {
        for map in collapsing_maps(&base, seed as u64) {
            examined += 1;
            let ph = PhMatrix::build(&base.space, &base.family);
            let cert = verify_generalized_rational_contraction(&base.graph, &base.family, &ph, &map, semantics);
            let y_t = base.graph.y_t(&base.family, &map, semantics);
            if !cert.is_contraction() || !base.graph.is_weakly_connected() || y_t.is_empty() {
                continue;
            }
            qualifying += 1;
            let fixed = fixed_points(&map);
            if map.images().iter().any(|&i| i != map.image(0)) {
                nonconstant += 1;
            }
            ensure(fixed.len() == 1, format!("seed {seed}: |F(T)| = {}", fixed.len()))?;
            for &start in &y_t {
                let orbit = picard_orbit(&map, start, map.len() + 1).map_err(|e| e.to_string())?;
                ensure(orbit.fixed_point() == Some(fixed[0]), format!("seed {seed}: orbit from {start} misses F(T)"))?;
            }
            ensure(
                base.graph.is_family_complete(&base.family, &fixed, semantics),
                format!("seed {seed}: F(T) incomplete"),
            )?;
        }
    }
    ensure(qualifying > 0 && nonconstant > 0, "no qualifying instances generated")?;
    Ok(format!("{qualifying} of {examined} instances qualify ({nonconstant} non-constant maps), zero exceptions"))
}

fn chainability_sweep() -> Check {
    let (code, doc) = cli(&["chainable", "--epsilon", "2"])?;
    ensure(code == 1 && doc["result"]["chainable"] == false, "chainable at 2")?;
    ensure(doc["result"]["isolated"] == json!(["4"]), format!("isolated {}", doc["result"]["isolated"]))?;
    let (code, doc) = cli(&["chainable", "--epsilon", "10"])?;
    ensure(code == 0 && doc["result"]["chainable"] == true, "not chainable at 10")?;
    let chains = doc["result"]["chains"].as_array().ok_or("no chains")?;
    ensure(chains.iter().any(|c| c["points"] == json!(["0", "1", "4"])), "missing chain 0-1-4")?;
    let p = golden();
    let mut seen_chainable = false;
    for eps in ["1", "2", "5", "9", "10", "17"] {
        let now = chainability(&p.space, &rat(eps)).map_err(|e| e.to_string())?.chainable;
        ensure(!seen_chainable || now, format!("chainability lost at epsilon = {eps}"))?;
        seen_chainable |= now;
    }
    ensure(seen_chainable, "never chainable in the sweep")?;
    Ok("not chainable at 2 (4 isolated), chain 0-1-4 at 10, monotone over the sweep".into())
}

fn integral_condition() -> Check {
    let one = GammaFunction::parse("const:1").map_err(|e| e.to_string())?;
    let alphas = [rat("1/10"), rat("1/2"), rat("9/10")];
    let (mut holds, mut fails) = (0usize, 0usize);
    for seed in 0..100u64 {
        let n = 2 + (seed % 4) as usize;
        let mut p = random_instance(10_000 + seed, n, FamilyMode::Powerset, 0.5).map_err(|e| e.to_string())?;
        if seed % 2 == 1 {
            p.map = collapsing_maps(&p, seed)[2].clone();
        }
        let ph = PhMatrix::build(&p.space, &p.family);
        let alpha = match lambda_star(&ph, &p.map).value {
            Extended::Finite(l) if seed % 3 == 0 && l < Rational::one() => l,
            _ => alphas[(seed % 3) as usize].clone(),
        };
        let cert = verify_integral_contraction(&ph, &p.map, &alpha, &one).map_err(|e| e.to_string())?;
        let linear = (0..p.map.len()).all(|u| {
            (0..p.map.len()).all(|v| *ph.get(p.map.image(u), p.map.image(v)) <= alpha.mul(&m_t(&ph, &p.map, u, v)))
        });
        ensure(cert.holds == linear, format!("seed {seed}: integral {} vs linear {linear}", cert.holds))?;
        if linear {
            holds += 1;
        } else {
            fails += 1;
        }
    }

    let p = golden();
    let ph = PhMatrix::build(&p.space, &p.family);
    let gamma = GammaFunction::parse("poly:0,2").map_err(|e| e.to_string())?;
    let cert = verify_integral_contraction(&ph, &p.map, &rat("1/2"), &gamma).map_err(|e| e.to_string())?;
    ensure(cert.holds, "golden integral condition fails")?;
    ensure(cert.worst.pair == (1, 2), format!("worst pair {:?}", cert.worst.pair))?;
    ensure(cert.worst.lhs == rat("1") && cert.worst.rhs == rat("81/4"), "worst pair is not 1 <= 81/4")?;
    Ok(format!("const 1 matches the linear check on 100 instances ({holds} hold, {fails} fail); golden worst (bar1, bar4): 1 <= 81/4"))
}

fn single_valued() -> Check {
    let p = golden();
    let f = PointMap::new(3, vec![0, 0, 1]).map_err(|e| e.to_string())?;
    for start in 0..3 {
        let r = solve_single_valued(&p.space, &f, start, 5).map_err(|e| e.to_string())?;
        ensure(r.lipschitz == rat("1/9"), format!("Lipschitz constant {}", r.lipschitz))?;
        ensure(r.unique_fixed_point == Some(0), "fixed point is not 0")?;
        ensure(r.all_starts_converge == Some(true), "not every start converges")?;
        ensure(
            r.orbit.fixed_point() == Some(0) && r.steps.is_some_and(|s| s <= 2),
            format!("start {start}: {:?}", r.steps),
        )?;
    }
    Ok("Lipschitz constant 1/9; fixed point 0 reached from every start within 2 steps".into())
}

fn main() {
    let checks = [
        Criterion { name: "golden Pompeiu-Hausdorff values", limit: Duration::from_secs(1), run: golden_hausdorff },
        Criterion { name: "golden contraction analysis", limit: Duration::from_secs(1), run: golden_analyze },
        Criterion { name: "golden fixed-point statements", limit: Duration::from_secs(1), run: golden_theorem },
        Criterion { name: "golden Picard orbit", limit: Duration::from_secs(1), run: golden_orbit },
        Criterion { name: "oracle equivalence", limit: Duration::from_secs(60), run: oracle_equivalence },
        Criterion { name: "distance lemmas", limit: Duration::from_secs(60), run: lemma_suite },
        Criterion { name: "fixed-point property", limit: Duration::from_secs(120), run: theorem_property },
        Criterion { name: "epsilon-chainability", limit: Duration::from_secs(1), run: chainability_sweep },
        Criterion { name: "integral condition", limit: Duration::from_secs(10), run: integral_condition },
        Criterion { name: "single-valued contraction", limit: Duration::from_secs(1), run: single_valued },
    ];
    let mut failed = 0;
    for (i, Criterion { name, limit, run }) in checks.iter().enumerate() {
        let started = Instant::now();
        let outcome = run();
        let elapsed = started.elapsed();
        let (status, detail) = match outcome {
            Ok(detail) if elapsed <= *limit => ("PASS", detail),
            Ok(detail) => ("FAIL", format!("{detail}; took {elapsed:?}, limit {limit:?}")),
            Err(why) => ("FAIL", why),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("[{status}] {:>2}. {name} ({:.1} ms): {detail}", i + 1, elapsed.as_secs_f64() * 1e3);
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
