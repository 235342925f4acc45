//! Picard iteration, fixed points, and the four fixed-point statements for
//! set-valued contractions.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::contraction::{
    single_lipschitz, verify_generalized_rational_contraction, ContractionCertificate, PointMap, SetMap,
};
use crate::graph::{check_p_star, DirectedGraph, PStarCertificate, SetEdgeSemantics};
use crate::hyperspace::{Family, PhMatrix};
use crate::scalar::Scalar;
use crate::space::SemiMetricSpace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("start {0} is out of range")]
    StartOutOfRange(usize),
    #[error("max_steps must be at least 1")]
    NoSteps,
    #[error("lambda must lie in [0, 1)")]
    LambdaOutOfRange,
    #[error("orbit is empty")]
    EmptyOrbit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitStatus {
    /// `x_{index + 1} = x_index`.
    Fixed {
        index: usize,
    },
    /// `x_{entry + period} = x_entry` with `period >= 2`.
    Cycle {
        entry: usize,
        period: usize,
    },
    MaxSteps,
}

/// Iterates `U_{n+1} = T(U_n)`; the repeated term that ends the orbit is included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Orbit {
    pub members: Vec<usize>,
    pub status: OrbitStatus,
}

impl Orbit {
    pub fn fixed_point(&self) -> Option<usize> {
        match self.status {
            OrbitStatus::Fixed { index } => Some(self.members[index]),
            _ => None,
        }
    }
}

fn iterate(start: usize, max_steps: usize, step: impl Fn(usize) -> usize) -> Orbit {
    let mut members = vec![start];
    let mut seen = HashMap::from([(start, 0usize)]);
    for _ in 0..max_steps {
        let last = *members.last().expect("nonempty");
        let next = step(last);
        members.push(next);
        let at = members.len() - 1;
        if next == last {
            return Orbit { members, status: OrbitStatus::Fixed { index: at - 1 } };
        }
        if let Some(&entry) = seen.get(&next) {
            return Orbit { members, status: OrbitStatus::Cycle { entry, period: at - entry } };
        }
        seen.insert(next, at);
    }
    Orbit { members, status: OrbitStatus::MaxSteps }
}

/// Picard orbit of a family member. Finite families always end in a fixed
/// point or a cycle within `|family| + 1` steps.
pub fn picard_orbit(map: &SetMap, start: usize, max_steps: usize) -> Result<Orbit, SolverError> {
    if start >= map.len() {
        return Err(SolverError::StartOutOfRange(start));
    }
    if max_steps == 0 {
        return Err(SolverError::NoSteps);
    }
    Ok(iterate(start, max_steps, |u| map.image(u)))
}

/// `F(T)`: members with `T(U) = U`.
pub fn fixed_points(map: &SetMap) -> Vec<usize> {
    (0..map.len()).filter(|&u| map.image(u) == u).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceStep<S> {
    pub n: usize,
    /// `H(U_n, U_{n+1})`.
    pub distance: S,
    /// `lambda^n H(U_0, U_1)`.
    pub bound: S,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceCertificate<S> {
    pub holds: bool,
    pub steps: Vec<ConvergenceStep<S>>,
    pub first_violation: Option<usize>,
}

/// Checks the geometric bound `H(U_n, U_{n+1}) <= lambda^n H(U_0, U_1)`
/// along an orbit.
pub fn convergence_certificate<S: Scalar>(
    ph: &PhMatrix<S>,
    orbit: &Orbit,
    lambda: &S,
) -> Result<ConvergenceCertificate<S>, SolverError> {
    if lambda.is_negative() || *lambda >= S::one() {
        return Err(SolverError::LambdaOutOfRange);
    }
    if orbit.members.is_empty() {
        return Err(SolverError::EmptyOrbit);
    }
    let m = &orbit.members;
    let first = if m.len() > 1 { ph.get(m[0], m[1]).clone() } else { S::zero() };
    let mut factor = S::one();
    let mut steps = Vec::new();
    let mut first_violation = None;
    for (n, w) in m.windows(2).enumerate() {
        let distance = ph.get(w[0], w[1]).clone();
        let bound = factor.mul(&first);
        if distance > bound && first_violation.is_none() {
            first_violation = Some(n);
        }
        steps.push(ConvergenceStep { n, distance, bound });
        factor = factor.mul(lambda);
    }
    Ok(ConvergenceCertificate { holds: first_violation.is_none(), steps, first_violation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    HypothesesUnmet,
}

/// Outcome of one statement with the members that witness it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatementVerdict {
    pub statement: u8,
    pub outcome: Outcome,
    pub detail: String,
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypotheses<S> {
    pub contraction: ContractionCertificate<S>,
    pub weakly_connected: bool,
    pub p_star: PStarCertificate<S>,
    pub y_t: Vec<usize>,
}

impl<S: Scalar> Hypotheses<S> {
    fn unmet_for_existence(&self) -> Vec<&'static str> {
        let mut unmet = Vec::new();
        if !self.contraction.is_contraction() {
            unmet.push("map is not a generalized rational graph contraction");
        }
        if self.y_t.is_empty() {
            unmet.push("Y_T is empty");
        }
        if !self.weakly_connected {
            unmet.push("graph is not weakly connected");
        }
        if !self.p_star.holds {
            unmet.push("property P* not certified");
        }
        unmet
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport<S> {
    pub fixed_points: Vec<usize>,
    pub fixed_points_complete: bool,
    pub hypotheses: Hypotheses<S>,
    pub statements: Vec<StatementVerdict>,
    /// Orbits from every member of `Y_T`, when the existence statement was checked.
    pub orbits: Vec<Orbit>,
}

impl<S: Scalar> TheoremReport<S> {
    pub fn all_pass(&self) -> bool {
        self.statements.iter().all(|s| s.outcome == Outcome::Pass)
    }

    pub fn any_fail(&self) -> bool {
        self.statements.iter().any(|s| s.outcome == Outcome::Fail)
    }
}

fn verdict(statement: u8, outcome: Outcome, detail: impl Into<String>, witness: Vec<usize>) -> StatementVerdict {
    StatementVerdict { statement, outcome, detail: detail.into(), witness }
}

/// Evaluates the hypotheses and each of the four statements.
///
/// Every statement presumes the contraction property; when it is missing
/// all four are reported as `HypothesesUnmet`. The existence statement also
/// needs `Y_T`, weak connectivity, and the subsequence property, and it
/// reports uniqueness of the fixed point along with existence.
pub fn theorem_verdicts<S: Scalar>(
    space: &SemiMetricSpace<S>,
    graph: &DirectedGraph,
    family: &Family,
    ph: &PhMatrix<S>,
    map: &SetMap,
    semantics: SetEdgeSemantics,
) -> TheoremReport<S> {
    let fixed = fixed_points(map);
    let complete = graph.is_family_complete(family, &fixed, semantics);
    let y_t = graph.y_t(family, map, semantics);
    let contraction = verify_generalized_rational_contraction(graph, family, ph, map, semantics);
    let p_star = check_p_star(space, graph, family, ph, None, semantics);
    let hypotheses = Hypotheses { contraction, weakly_connected: graph.is_weakly_connected(), p_star, y_t };

    if !hypotheses.contraction.is_contraction() {
        let detail = "map is not a generalized rational graph contraction";
        let statements = (1..=4).map(|k| verdict(k, Outcome::HypothesesUnmet, detail, Vec::new())).collect();
        return TheoremReport {
            fixed_points: fixed,
            fixed_points_complete: complete,
            hypotheses,
            statements,
            orbits: Vec::new(),
        };
    }

    let mut statements = Vec::with_capacity(4);

    // (1) complete nonempty F(T) has zero PH weight.
    statements.push(if fixed.is_empty() || !complete {
        verdict(1, Outcome::Pass, "vacuous: F(T) is empty or not complete", fixed.clone())
    } else {
        let positive = fixed
            .iter()
            .flat_map(|&u| fixed.iter().map(move |&v| (u, v)))
            .find(|&(u, v)| !space.is_negligible(ph.get(u, v)));
        match positive {
            None => verdict(1, Outcome::Pass, "every pair in F(T) has PH weight zero", fixed.clone()),
            Some((u, v)) => verdict(1, Outcome::Fail, "pair in F(T) with positive PH weight", vec![u, v]),
        }
    });

    // (2) F(T) nonempty implies Y_T nonempty.
    statements.push(if fixed.is_empty() {
        verdict(2, Outcome::Pass, "vacuous: F(T) is empty", Vec::new())
    } else {
        let outside: Vec<usize> = fixed.iter().copied().filter(|u| !hypotheses.y_t.contains(u)).collect();
        let outcome = if hypotheses.y_t.is_empty() { Outcome::Fail } else { Outcome::Pass };
        let detail = if outside.is_empty() {
            "F(T) is contained in Y_T".to_owned()
        } else {
            format!("{} fixed point(s) lack a set edge to their image under {semantics} semantics", outside.len())
        };
        verdict(2, outcome, detail, hypotheses.y_t.clone())
    });

    // (3) existence, with uniqueness.
    let unmet = hypotheses.unmet_for_existence();
    let mut orbits = Vec::new();
    statements.push(if !unmet.is_empty() {
        verdict(3, Outcome::HypothesesUnmet, unmet.join("; "), Vec::new())
    } else {
        orbits = hypotheses
            .y_t
            .iter()
            .map(|&u| picard_orbit(map, u, family.len() + 1).expect("member of Y_T is in range"))
            .collect();
        let terminals: Vec<Option<usize>> = orbits.iter().map(Orbit::fixed_point).collect();
        let common = terminals[0].filter(|t| terminals.iter().all(|x| *x == Some(*t)));
        match common {
            Some(t) if fixed == [t] => {
                verdict(3, Outcome::Pass, "every orbit from Y_T reaches the unique fixed point", vec![t])
            }
            Some(t) => verdict(3, Outcome::Fail, "orbits agree but F(T) is not a singleton", {
                let mut w = vec![t];
                w.extend(fixed.iter().copied().filter(|&u| u != t));
                w
            }),
            None => {
                verdict(3, Outcome::Fail, "orbits from Y_T do not reach one common fixed point", hypotheses.y_t.clone())
            }
        }
    });

    // (4) nonempty F(T) is complete iff it is a singleton.
    statements.push(if fixed.is_empty() {
        verdict(4, Outcome::Pass, "vacuous: F(T) is empty", Vec::new())
    } else {
        let singleton = fixed.len() == 1;
        let outcome = if complete == singleton { Outcome::Pass } else { Outcome::Fail };
        let detail = format!(
            "F(T) is {} and {}",
            if complete { "complete" } else { "not complete" },
            if singleton { "a singleton" } else { "not a singleton" }
        );
        verdict(4, outcome, detail, fixed.clone())
    });

    TheoremReport { fixed_points: fixed, fixed_points_complete: complete, hypotheses, statements, orbits }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleValuedResult<S> {
    pub orbit: Orbit,
    /// Applications of `f` before the fixed point was reached.
    pub steps: Option<usize>,
    pub lipschitz: S,
    /// Set when the Lipschitz constant is below one and every start reaches
    /// the same fixed point.
    pub unique_fixed_point: Option<usize>,
    /// Checked only when the Lipschitz constant is below one.
    pub all_starts_converge: Option<bool>,
}

/// Iterates a point map from `start`, then sweeps every start when the map
/// is a contraction.
pub fn solve_single_valued<S: Scalar>(
    space: &SemiMetricSpace<S>,
    f: &PointMap,
    start: usize,
    max_steps: usize,
) -> Result<SingleValuedResult<S>, SolverError> {
    if start >= space.len() || f.len() != space.len() {
        return Err(SolverError::StartOutOfRange(start));
    }
    if max_steps == 0 {
        return Err(SolverError::NoSteps);
    }
    let orbit = iterate(start, max_steps, |x| f.image(x));
    let steps = match orbit.status {
        OrbitStatus::Fixed { index } => Some(index),
        _ => None,
    };
    let lipschitz = single_lipschitz(space, f);
    let (unique_fixed_point, all_starts_converge) = if lipschitz < S::one() {
        let limits: Vec<Option<usize>> =
            (0..space.len()).map(|y| iterate(y, space.len() + 1, |x| f.image(x)).fixed_point()).collect();
        let common = limits[0].filter(|p| limits.iter().all(|l| *l == Some(*p)));
        (common, Some(common.is_some()))
    } else {
        (None, None)
    };
    Ok(SingleValuedResult { orbit, steps, lipschitz, unique_fixed_point, all_starts_converge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{golden_cycle_map, golden_family, golden_graph, golden_map, golden_space, q, r};
    use crate::scalar::Rational;

    fn golden_ph() -> PhMatrix<Rational> {
        PhMatrix::build(&golden_space(), &golden_family())
    }

    #[test]
    fn orbits() {
        let o = picard_orbit(&golden_map(), 2, 10).unwrap();
        assert_eq!(o.members, vec![2, 1, 0, 0]);
        assert_eq!(o.status, OrbitStatus::Fixed { index: 2 });
        let o = picard_orbit(&golden_map(), 0, 10).unwrap();
        assert_eq!(o.members, vec![0, 0]);
        assert_eq!(o.status, OrbitStatus::Fixed { index: 0 });
        let cycle = SetMap::new(3, vec![1, 2, 0]).unwrap();
        let o = picard_orbit(&cycle, 0, 10).unwrap();
        assert_eq!(o.status, OrbitStatus::Cycle { entry: 0, period: 3 });
        assert_eq!(picard_orbit(&cycle, 0, 1).unwrap().status, OrbitStatus::MaxSteps);
        assert_eq!(picard_orbit(&cycle, 5, 1), Err(SolverError::StartOutOfRange(5)));
        assert_eq!(picard_orbit(&cycle, 0, 0), Err(SolverError::NoSteps));
    }

    #[test]
    fn fixed_point_scan() {
        assert_eq!(fixed_points(&golden_map()), vec![0]);
        assert_eq!(fixed_points(&SetMap::identity(3)), vec![0, 1, 2]);
        assert!(fixed_points(&golden_cycle_map()).is_empty());
    }

    #[test]
    fn geometric_bound() {
        let ph = golden_ph();
        let o = picard_orbit(&golden_map(), 2, 10).unwrap();
        let c = convergence_certificate(&ph, &o, &q(1, 9)).unwrap();
        assert!(c.holds);
        assert_eq!(c.steps[1].distance, r(1));
        assert_eq!(c.steps[1].bound, r(1));

        let c = convergence_certificate(&ph, &o, &q(1, 10)).unwrap();
        assert_eq!(c.first_violation, Some(1));

        let constant = picard_orbit(&golden_map(), 0, 10).unwrap();
        assert!(convergence_certificate(&ph, &constant, &q(1, 2)).unwrap().holds);
        assert_eq!(convergence_certificate(&ph, &o, &r(1)), Err(SolverError::LambdaOutOfRange));
    }

    #[test]
    fn theorem_on_golden_instance() {
        let report = theorem_verdicts(
            &golden_space(),
            &golden_graph(),
            &golden_family(),
            &golden_ph(),
            &golden_map(),
            SetEdgeSemantics::Existential,
        );
        assert!(report.all_pass(), "{:?}", report.statements);
        assert_eq!(report.fixed_points, vec![0]);
        assert!(report.fixed_points_complete);
        assert_eq!(report.statements[2].witness, vec![0]);
    }

    #[test]
    fn theorem_with_unmet_hypotheses() {
        let s = golden_space();
        let two = Family::explicit(&s, vec![("a".into(), vec![0]), ("b".into(), vec![1])]).unwrap();
        let ph = PhMatrix::build(&s, &two);
        let report =
            theorem_verdicts(&s, &golden_graph(), &two, &ph, &SetMap::identity(2), SetEdgeSemantics::Existential);
        assert!(report.statements.iter().all(|v| v.outcome == Outcome::HypothesesUnmet));

        let report = theorem_verdicts(
            &s,
            &golden_graph(),
            &golden_family(),
            &golden_ph(),
            &golden_cycle_map(),
            SetEdgeSemantics::Existential,
        );
        assert!(report.fixed_points.is_empty());
        assert!(!report.hypotheses.contraction.lambda_star.value.is_below_one());
        assert!(report.statements.iter().all(|v| v.outcome == Outcome::HypothesesUnmet));
    }

    #[test]
    fn single_valued() {
        let s = golden_space();
        let f = PointMap::new(3, vec![0, 0, 1]).unwrap();
        let res = solve_single_valued(&s, &f, 2, 10).unwrap();
        assert_eq!(res.orbit.fixed_point(), Some(0));
        assert_eq!(res.steps, Some(2));
        assert_eq!(res.lipschitz, q(1, 9));
        assert_eq!(res.unique_fixed_point, Some(0));
        assert_eq!(res.all_starts_converge, Some(true));

        let res = solve_single_valued(&s, &PointMap::identity(3), 1, 10).unwrap();
        assert_eq!(res.orbit.fixed_point(), Some(1));
        assert_eq!(res.steps, Some(0));
        assert_eq!(res.all_starts_converge, None);
    }
}
