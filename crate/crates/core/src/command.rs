//! Command dispatch and report rendering.
//!
//! Machine output is canonical JSON: keys sorted, exact rationals rendered
//! as `p/q` strings, no timing. Identical inputs give identical bytes.

use std::time::{Duration, Instant};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::contraction::{
    verify_generalized_rational_contraction, verify_integral_contraction, ContractionError, ContractionVerdict,
    GammaFunction,
};
use crate::graph::{chainability, SetEdgeSemantics};
use crate::hyperspace::PhMatrix;
use crate::problem::{resolve_member, Problem, ProblemSpec};
use crate::scalar::{Extended, Scalar};
use crate::solver::{convergence_certificate, fixed_points, picard_orbit, theorem_verdicts, OrbitStatus, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Validate,
    Hausdorff,
    Analyze,
    Iterate { start: String, max_steps: Option<usize> },
    FixedPoints,
    Theorem,
    Chainable { epsilon: String },
    Integral { alpha: String, gamma: String },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Hausdorff => "hausdorff",
            Command::Analyze => "analyze",
            Command::Iterate { .. } => "iterate",
            Command::FixedPoints => "fixed-points",
            Command::Theorem => "theorem",
            Command::Chainable { .. } => "chainable",
            Command::Integral { .. } => "integral",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Options {
    /// Overrides the instance's configured semantics.
    pub semantics: Option<SetEdgeSemantics>,
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("unknown family member `{0}`")]
    UnknownMember(String),
    #[error("bad value for --{option}: {message}")]
    BadOption { option: &'static str, message: String },
    #[error(transparent)]
    Contraction(#[from] ContractionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    /// SHA-256 of the normalized instance.
    pub inputs_digest: String,
    pub result: Value,
    pub lines: Vec<String>,
    /// False when the command's verdict failed.
    pub passed: bool,
    pub elapsed: Duration,
}

pub fn emit_report(report: &Report, format: Format) -> String {
    match format {
        Format::Machine => {
            let doc = json!({
                "command": report.command,
                "inputs_digest": report.inputs_digest,
                "passed": report.passed,
                "result": report.result,
            });
            let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
            out.push('\n');
            out
        }
        Format::Text => {
            let mut out = format!("== {} ==\n", report.command);
            for line in &report.lines {
                out.push_str(line);
                out.push('\n');
            }
            out.push_str(&format!(
                "verdict: {}\nelapsed: {:.3} ms\n",
                if report.passed { "pass" } else { "FAIL" },
                report.elapsed.as_secs_f64() * 1e3
            ));
            out
        }
    }
}

pub fn execute(command: &Command, problem: &Problem, options: &Options) -> Result<Report, ExecError> {
    let started = Instant::now();
    let digest = Sha256::digest(problem.to_normalized_json().as_bytes());
    let inputs_digest = digest.iter().map(|b| format!("{b:02x}")).collect();
    let outcome = match problem {
        Problem::Exact(p) => run(command, p, options)?,
        Problem::Float(p) => run(command, p, options)?,
    };
    Ok(Report {
        command: command.name(),
        inputs_digest,
        result: outcome.result,
        lines: outcome.lines,
        passed: outcome.passed,
        elapsed: started.elapsed(),
    })
}

struct Outcome_ {
    result: Value,
    lines: Vec<String>,
    passed: bool,
}

fn run<S: Scalar>(command: &Command, p: &ProblemSpec<S>, options: &Options) -> Result<Outcome_, ExecError> {
    let semantics = options.semantics.unwrap_or(p.config.semantics);
    let names = |members: &[usize]| -> Vec<String> { members.iter().map(|&m| p.family.name(m).to_owned()).collect() };
    let labels = |points: &[usize]| -> Vec<String> { points.iter().map(|&x| p.space.label(x).to_owned()).collect() };
    let pair = |(u, v): (usize, usize)| format!("({}, {})", p.family.name(u), p.family.name(v));
    let ph = PhMatrix::build(&p.space, &p.family);
    let mut lines = Vec::new();

    let (result, passed) = match command {
        Command::Validate => {
            let weights = p.graph.validate(&p.space).expect("validated at parse time");
            lines.push(format!(
                "space: {} points, mode {:?}, diameter {}",
                p.space.len(),
                p.config.mode,
                p.space.diameter()
            ));
            lines.push(format!("graph: {} edges (loops included)", p.graph.edge_count()));
            lines.push(format!("family: {} members ({:?})", p.family.len(), p.family.kind()));
            lines.push("map: total".to_owned());
            let weights: Vec<Value> = weights
                .iter()
                .map(|e| json!({"from": p.space.label(e.from), "to": p.space.label(e.to), "weight": e.weight.to_string()}))
                .collect();
            let result = json!({
                "points": p.space.len(),
                "edges": p.graph.edge_count(),
                "edge_weights": weights,
                "family_members": p.family.len(),
                "family_kind": p.family.kind(),
                "map_total": true,
                "semantics": semantics,
                "mode": p.config.mode,
                "diameter": p.space.diameter().to_string(),
            });
            (result, true)
        }

        Command::Hausdorff => {
            let matrix: Vec<Vec<String>> = ph.rows().map(|row| row.iter().map(ToString::to_string).collect()).collect();
            for u in 0..p.family.len() {
                for v in (u + 1)..p.family.len() {
                    lines.push(format!("H{} = {}", pair((u, v)), ph.get(u, v)));
                }
            }
            (json!({"members": p.family.names(), "matrix": matrix}), true)
        }

        Command::Analyze => {
            let cert = verify_generalized_rational_contraction(&p.graph, &p.family, &ph, &p.map, semantics);
            let witness = cert.lambda_star.witness;
            lines.push(format!("lambda* = {} attained at {}", cert.lambda_star.value, pair(witness)));
            lines.push(format!("edge preserving: {}", cert.edge_preserving));
            if let Some(c) = &cert.counterexample {
                lines.push(format!("{:?} not preserved at {}", c.level, pair(c.pair)));
            }
            let (verdict, reasons) = match &cert.verdict {
                ContractionVerdict::Contraction { lambda } => {
                    lines.push(format!("verdict: generalized rational graph contraction with lambda = {lambda}"));
                    ("contraction", Vec::new())
                }
                ContractionVerdict::NotAContraction { lambda_not_below_one, edges_not_preserved } => {
                    let mut reasons = Vec::new();
                    if *lambda_not_below_one {
                        reasons.push("lambda_star_not_below_one");
                    }
                    if *edges_not_preserved {
                        reasons.push("edges_not_preserved");
                    }
                    lines.push(format!("verdict: not a contraction ({})", reasons.join(", ")));
                    ("not-a-contraction", reasons)
                }
            };
            let result = json!({
                "lambda_star": cert.lambda_star.value.to_string(),
                "witness": names(&[witness.0, witness.1]),
                "edge_preserving": cert.edge_preserving,
                "counterexample": cert.counterexample.as_ref().map(|c| json!({
                    "pair": names(&[c.pair.0, c.pair.1]),
                    "level": c.level,
                })),
                "verdict": verdict,
                "reasons": reasons,
                "semantics": semantics,
            });
            (result, cert.is_contraction())
        }

        Command::Iterate { start, max_steps } => {
            let u0 =
                resolve_member(&p.space, &p.family, start).ok_or_else(|| ExecError::UnknownMember(start.clone()))?;
            let steps = max_steps.unwrap_or(p.family.len() + 1);
            if steps == 0 {
                return Err(ExecError::BadOption { option: "max-steps", message: "must be at least 1".into() });
            }
            let orbit = picard_orbit(&p.map, u0, steps).expect("start and steps checked");
            let lambda = crate::contraction::lambda_star(&ph, &p.map);
            lines.push(format!("orbit: {}", names(&orbit.members).join(" -> ")));
            lines.push(format!("status: {}", status_text(&orbit.status)));
            lines.push(format!("lambda* = {}", lambda.value));
            let (certificate, cert_ok) = match &lambda.value {
                Extended::Finite(l) if *l < S::one() => {
                    let c = convergence_certificate(&ph, &orbit, l).expect("lambda in [0, 1)");
                    for s in &c.steps {
                        lines.push(format!("  n = {}: H(U_n, U_n+1) = {} <= {}", s.n, s.distance, s.bound));
                    }
                    lines.push(format!("geometric bound holds: {}", c.holds));
                    let steps: Vec<Value> = c
                        .steps
                        .iter()
                        .map(|s| json!({"n": s.n, "distance": s.distance.to_string(), "bound": s.bound.to_string()}))
                        .collect();
                    (
                        json!({"lambda": l.to_string(), "holds": c.holds, "steps": steps, "first_violation": c.first_violation}),
                        c.holds,
                    )
                }
                _ => {
                    lines.push("no contraction constant below one; geometric bound not checked".to_owned());
                    (Value::Null, false)
                }
            };
            let fixed = orbit.fixed_point();
            let result = json!({
                "orbit": names(&orbit.members),
                "status": orbit.status,
                "fixed_point": fixed.map(|f| p.family.name(f).to_owned()),
                "lambda_star": lambda.value.to_string(),
                "certificate": certificate,
            });
            (result, fixed.is_some() && cert_ok)
        }

        Command::FixedPoints => {
            let fixed = fixed_points(&p.map);
            let complete = p.graph.is_family_complete(&p.family, &fixed, semantics);
            lines.push(format!("F(T) = {{{}}}", names(&fixed).join(", ")));
            lines.push(format!("complete: {complete}"));
            (json!({"fixed_points": names(&fixed), "complete": complete}), true)
        }

        Command::Theorem => {
            let report = theorem_verdicts(&p.space, &p.graph, &p.family, &ph, &p.map, semantics);
            let h = &report.hypotheses;
            lines.push(format!("F(T) = {{{}}}", names(&report.fixed_points).join(", ")));
            lines.push(format!(
                "hypotheses: contraction {} (lambda* = {}), weakly connected {}, P* {}, Y_T = {{{}}}",
                h.contraction.is_contraction(),
                h.contraction.lambda_star.value,
                h.weakly_connected,
                h.p_star.holds,
                names(&h.y_t).join(", ")
            ));
            for s in &report.statements {
                lines.push(format!(
                    "statement {}: {} - {} [{}]",
                    s.statement,
                    outcome_text(s.outcome),
                    s.detail,
                    names(&s.witness).join(", ")
                ));
            }
            let statements: Vec<Value> = report
                .statements
                .iter()
                .map(|s| json!({"statement": s.statement, "outcome": s.outcome, "detail": s.detail, "witness": names(&s.witness)}))
                .collect();
            let result = json!({
                "fixed_points": names(&report.fixed_points),
                "fixed_points_complete": report.fixed_points_complete,
                "singleton": report.fixed_points.len() == 1,
                "hypotheses": {
                    "contraction": h.contraction.is_contraction(),
                    "lambda_star": h.contraction.lambda_star.value.to_string(),
                    "edge_preserving": h.contraction.edge_preserving,
                    "weakly_connected": h.weakly_connected,
                    "p_star": h.p_star.holds,
                    "p_star_min_distance": h.p_star.min_positive_distance.as_ref().map(ToString::to_string),
                    "y_t": names(&h.y_t),
                },
                "statements": statements,
                "semantics": semantics,
            });
            (result, !report.any_fail())
        }

        Command::Chainable { epsilon } => {
            let eps = S::parse_literal(epsilon)
                .map_err(|e| ExecError::BadOption { option: "epsilon", message: e.to_string() })?;
            let c = chainability(&p.space, &eps)
                .map_err(|e| ExecError::BadOption { option: "epsilon", message: e.to_string() })?;
            lines.push(format!("epsilon = {eps}: chainable {}", c.chainable));
            for chain in &c.chains {
                let steps: Vec<String> = chain.steps.iter().map(ToString::to_string).collect();
                lines.push(format!("  chain {} (steps {})", labels(&chain.points).join(" - "), steps.join(", ")));
            }
            if !c.isolated.is_empty() {
                lines.push(format!("isolated: {}", labels(&c.isolated).join(", ")));
            }
            if !c.unreachable.is_empty() {
                lines.push(format!("unreachable from {}: {}", p.space.label(0), labels(&c.unreachable).join(", ")));
            }
            let chains: Vec<Value> = c
                .chains
                .iter()
                .map(|ch| json!({"points": labels(&ch.points), "steps": ch.steps.iter().map(ToString::to_string).collect::<Vec<_>>()}))
                .collect();
            let result = json!({
                "epsilon": eps.to_string(),
                "chainable": c.chainable,
                "chains": chains,
                "unreachable": labels(&c.unreachable),
                "isolated": labels(&c.isolated),
            });
            (result, c.chainable)
        }

        Command::Integral { alpha, gamma } => {
            let a = S::parse_literal(alpha)
                .map_err(|e| ExecError::BadOption { option: "alpha", message: e.to_string() })?;
            let g = GammaFunction::parse(gamma)?;
            let cert = verify_integral_contraction(&ph, &p.map, &a, &g)?;
            lines.push(format!(
                "worst pair {}: {} <= {} (margin {})",
                pair(cert.worst.pair),
                cert.worst.lhs,
                cert.worst.rhs,
                cert.worst_margin
            ));
            if !cert.violations.is_empty() {
                let v: Vec<String> = cert.violations.iter().map(|&x| pair(x)).collect();
                lines.push(format!("violations: {}", v.join(", ")));
            }
            let result = json!({
                "alpha": a.to_string(),
                "gamma": gamma,
                "holds": cert.holds,
                "worst": {
                    "pair": names(&[cert.worst.pair.0, cert.worst.pair.1]),
                    "lhs": cert.worst.lhs.to_string(),
                    "rhs": cert.worst.rhs.to_string(),
                },
                "worst_margin": cert.worst_margin.to_string(),
                "violations": cert.violations.iter().map(|&(u, v)| names(&[u, v])).collect::<Vec<_>>(),
                "step": cert.step,
            });
            (result, cert.holds)
        }
    };
    Ok(Outcome_ { result, lines, passed })
}

fn status_text(status: &OrbitStatus) -> String {
    match status {
        OrbitStatus::Fixed { index } => format!("fixed at step {index}"),
        OrbitStatus::Cycle { entry, period } => format!("cycle entered at {entry} with period {period}"),
        OrbitStatus::MaxSteps => "step limit reached".to_owned(),
    }
}

fn outcome_text(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Pass => "pass",
        Outcome::Fail => "FAIL",
        Outcome::HypothesesUnmet => "hypotheses unmet",
    }
}
