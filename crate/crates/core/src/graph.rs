//! Directed graphs on the points of a space, lifted to family members.
//!
//! Every vertex carries a loop. Set-level edges follow one of two readings
//! (see [`SetEdgeSemantics`]); set-level paths and the relation `R` are
//! searched in the undirected version of the graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contraction::SetMap;
use crate::hyperspace::{Family, PhMatrix, PointSet};
use crate::scalar::Scalar;
use crate::space::SemiMetricSpace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) has an endpoint outside the vertex set")]
    EndpointOutOfRange(usize, usize),
    #[error("edge ({0}, {1}) is listed more than once")]
    DuplicateEdge(usize, usize),
    #[error("vertex {0} has no loop")]
    MissingLoop(usize),
    #[error("graph has {graph} vertices but the space has {space} points")]
    SizeMismatch { graph: usize, space: usize },
    #[error("epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("member index {0} is not in the family")]
    UnknownMember(usize),
}

/// How an edge between two sets is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetEdgeSemantics {
    /// Some `(u, v)` with `u` in `U`, `v` in `V` is an edge.
    #[default]
    Existential,
    /// Every `(u, v)` in `U x V` is an edge.
    Universal,
}

impl fmt::Display for SetEdgeSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SetEdgeSemantics::Existential => "existential",
            SetEdgeSemantics::Universal => "universal",
        })
    }
}

impl FromStr for SetEdgeSemantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "existential" => Ok(SetEdgeSemantics::Existential),
            "universal" => Ok(SetEdgeSemantics::Universal),
            other => Err(format!("unknown semantics `{other}` (expected existential or universal)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    vertices: usize,
    edges: BTreeSet<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl DirectedGraph {
    /// Strict constructor: all loops must be listed.
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let graph = Self::collect(vertices, edges)?;
        if let Some(v) = (0..vertices).find(|&v| !graph.has_edge(v, v)) {
            return Err(GraphError::MissingLoop(v));
        }
        Ok(graph)
    }

    /// Adds any missing loops before validating.
    pub fn with_implicit_loops(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut graph = Self::collect(vertices, edges)?;
        for v in 0..vertices {
            graph.insert(v, v);
        }
        Ok(graph)
    }

    fn collect(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut graph = DirectedGraph { vertices, edges: BTreeSet::new(), out: vec![Vec::new(); vertices] };
        for (u, v) in edges {
            if u >= vertices || v >= vertices {
                return Err(GraphError::EndpointOutOfRange(u, v));
            }
            if !graph.insert(u, v) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
        }
        Ok(graph)
    }

    fn insert(&mut self, u: usize, v: usize) -> bool {
        if self.edges.insert((u, v)) {
            self.out[u].push(v);
            self.out[u].sort_unstable();
            true
        } else {
            false
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    /// Checks the graph against `space` and reports every edge with its
    /// weight `d(u, v)` (zero on loops).
    pub fn validate<S: Scalar>(&self, space: &SemiMetricSpace<S>) -> Result<Vec<WeightedEdge<S>>, GraphError> {
        if self.vertices != space.len() {
            return Err(GraphError::SizeMismatch { graph: self.vertices, space: space.len() });
        }
        if let Some(v) = (0..self.vertices).find(|&v| !self.has_edge(v, v)) {
            return Err(GraphError::MissingLoop(v));
        }
        Ok(self.edges().map(|(from, to)| WeightedEdge { from, to, weight: space.distance(from, to).clone() }).collect())
    }

    /// `G~`: every edge together with its reverse.
    pub fn undirected(&self) -> DirectedGraph {
        let mut g = self.clone();
        for (u, v) in self.edges() {
            g.insert(v, u);
        }
        g
    }

    /// `G^-1`: every edge reversed.
    pub fn reverse(&self) -> DirectedGraph {
        let mut g =
            DirectedGraph { vertices: self.vertices, edges: BTreeSet::new(), out: vec![Vec::new(); self.vertices] };
        for (u, v) in self.edges() {
            g.insert(v, u);
        }
        g
    }

    /// Component id of every vertex in `G~`, numbered by smallest member.
    pub fn weak_components(&self) -> Vec<usize> {
        let undirected = self.undirected();
        let mut component = vec![usize::MAX; self.vertices];
        let mut next = 0;
        for start in 0..self.vertices {
            if component[start] != usize::MAX {
                continue;
            }
            component[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in undirected.successors(u) {
                    if component[v] == usize::MAX {
                        component[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        component
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.weak_components().iter().all(|&c| c == 0)
    }

    /// Shortest directed path from `from` to `to` in this graph.
    pub fn directed_path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        bfs_path(self.vertices, &[from], |v| v == to, |u| self.successors(u).to_vec())
    }

    pub fn set_edge(&self, u: &PointSet, v: &PointSet, semantics: SetEdgeSemantics) -> bool {
        match semantics {
            SetEdgeSemantics::Existential => u.iter().any(|a| v.iter().any(|b| self.has_edge(a, b))),
            SetEdgeSemantics::Universal => u.iter().all(|a| v.iter().all(|b| self.has_edge(a, b))),
        }
    }

    /// Path witness in `G~` between two sets.
    ///
    /// Existential: one shortest path from some `u` to some `v` (a single
    /// vertex when the sets share a point). Universal: one path per pair.
    pub fn set_path(&self, u: &PointSet, v: &PointSet, semantics: SetEdgeSemantics) -> Option<SetPath> {
        let undirected = self.undirected();
        let step = |x: usize| undirected.successors(x).to_vec();
        match semantics {
            SetEdgeSemantics::Existential => {
                bfs_path(self.vertices, u.points(), |x| v.contains(x), step).map(|p| SetPath { paths: vec![p] })
            }
            SetEdgeSemantics::Universal => {
                let mut paths = Vec::with_capacity(u.len() * v.len());
                for a in u.iter() {
                    for b in v.iter() {
                        paths.push(bfs_path(self.vertices, &[a], |x| x == b, step)?);
                    }
                }
                Some(SetPath { paths })
            }
        }
    }

    /// Members `V` with `U R V`, i.e. the class `[U]` in `G~`.
    pub fn equivalence_class(
        &self,
        family: &Family,
        member: usize,
        semantics: SetEdgeSemantics,
    ) -> Result<Vec<usize>, GraphError> {
        if member >= family.len() {
            return Err(GraphError::UnknownMember(member));
        }
        let related = SetRelation::new(self, semantics);
        let u = family.set(member);
        Ok((0..family.len()).filter(|&v| related.holds(u, family.set(v))).collect())
    }

    /// `Y_T`: members `U` with a set edge from `U` to `T(U)`.
    pub fn y_t(&self, family: &Family, map: &SetMap, semantics: SetEdgeSemantics) -> Vec<usize> {
        (0..family.len()).filter(|&u| self.set_edge(family.set(u), family.set(map.image(u)), semantics)).collect()
    }

    /// True iff there is a set edge for every ordered pair of `members`.
    pub fn is_family_complete(&self, family: &Family, members: &[usize], semantics: SetEdgeSemantics) -> bool {
        members.iter().all(|&u| members.iter().all(|&v| self.set_edge(family.set(u), family.set(v), semantics)))
    }
}

/// Fast path-relation test through the weak components of `G~`.
pub struct SetRelation {
    component: Vec<usize>,
    semantics: SetEdgeSemantics,
}

impl SetRelation {
    pub fn new(graph: &DirectedGraph, semantics: SetEdgeSemantics) -> Self {
        SetRelation { component: graph.weak_components(), semantics }
    }

    pub fn holds(&self, u: &PointSet, v: &PointSet) -> bool {
        let c = &self.component;
        match self.semantics {
            SetEdgeSemantics::Existential => u.iter().any(|a| v.iter().any(|b| c[a] == c[b])),
            SetEdgeSemantics::Universal => {
                let first = c[u.points()[0]];
                u.iter().chain(v.iter()).all(|x| c[x] == first)
            }
        }
    }
}

fn bfs_path(
    vertices: usize,
    sources: &[usize],
    is_target: impl Fn(usize) -> bool,
    step: impl Fn(usize) -> Vec<usize>,
) -> Option<Vec<usize>> {
    let mut parent = vec![usize::MAX; vertices];
    let mut queue = VecDeque::new();
    for &s in sources {
        if s < vertices && parent[s] == usize::MAX {
            parent[s] = s;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        if is_target(u) {
            let mut path = vec![u];
            let mut cur = u;
            while parent[cur] != cur {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for v in step(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightedEdge<S> {
    pub from: usize,
    pub to: usize,
    pub weight: S,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetPath {
    pub paths: Vec<Vec<usize>>,
}

/// Evidence for the subsequence property on a finite family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PStarCertificate<S> {
    pub holds: bool,
    /// Smallest positive PH distance in the family, `None` if there is none.
    pub min_positive_distance: Option<S>,
    pub orbit: Option<PStarOrbitCheck>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PStarOrbitCheck {
    pub converged: bool,
    pub limit: Option<usize>,
    /// Orbit indices `n_k` whose member has a set edge to the limit.
    pub subsequence: Vec<usize>,
    pub holds: bool,
}

/// Finite-space subsequence-property certificate.
///
/// With a positive minimum PH distance, any convergent sequence is
/// eventually equal to its limit, and a loop at the limit supplies the
/// subsequence. When an orbit (a member-index sequence) is given, the
/// condition is also checked on its convergent tail.
pub fn check_p_star<S: Scalar>(
    space: &SemiMetricSpace<S>,
    graph: &DirectedGraph,
    family: &Family,
    ph: &PhMatrix<S>,
    orbit: Option<&[usize]>,
    semantics: SetEdgeSemantics,
) -> PStarCertificate<S> {
    let min_positive = ph.min_positive().cloned();
    let finite_argument = match &min_positive {
        Some(m) => !space.is_negligible(m),
        None => true,
    };

    let orbit_check = orbit.filter(|o| !o.is_empty()).map(|seq| {
        let limit = *seq.last().expect("nonempty");
        let tail: Vec<usize> =
            (0..seq.len()).rev().take_while(|&k| space.is_negligible(ph.get(seq[k], limit))).collect();
        let converged = tail.len() >= seq.len().min(2);
        if !converged {
            return PStarOrbitCheck { converged, limit: None, subsequence: Vec::new(), holds: true };
        }
        let target = family.set(limit);
        let mut subsequence: Vec<usize> =
            tail.into_iter().filter(|&k| graph.set_edge(family.set(seq[k]), target, semantics)).collect();
        subsequence.reverse();
        let holds = !subsequence.is_empty();
        PStarOrbitCheck { converged, limit: Some(limit), subsequence, holds }
    });

    let holds = finite_argument && orbit_check.as_ref().map_or(true, |c| c.holds);
    PStarCertificate { holds, min_positive_distance: min_positive, orbit: orbit_check }
}

/// A chain of points whose consecutive steps are all shorter than `epsilon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chain<S> {
    pub points: Vec<usize>,
    pub steps: Vec<S>,
}

fn threshold_neighbors<S: Scalar>(space: &SemiMetricSpace<S>, epsilon: &S, x: usize) -> Vec<usize> {
    (0..space.len()).filter(|&y| y != x && space.distance(x, y) < epsilon).collect()
}

/// Shortest chain from `from` to `to` in the threshold graph `d < epsilon`.
pub fn epsilon_chain<S: Scalar>(
    space: &SemiMetricSpace<S>,
    from: usize,
    to: usize,
    epsilon: &S,
) -> Result<Option<Chain<S>>, GraphError> {
    if *epsilon <= S::zero() {
        return Err(GraphError::NonPositiveEpsilon);
    }
    for p in [from, to] {
        if p >= space.len() {
            return Err(GraphError::PointOutOfRange(p));
        }
    }
    let path = bfs_path(space.len(), &[from], |x| x == to, |x| threshold_neighbors(space, epsilon, x));
    Ok(path.map(|points| {
        let steps = points.windows(2).map(|w| space.distance(w[0], w[1]).clone()).collect();
        Chain { points, steps }
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Chainability<S> {
    pub chainable: bool,
    /// Chains from the first point to every point it reaches.
    pub chains: Vec<Chain<S>>,
    /// Points the first point cannot reach.
    pub unreachable: Vec<usize>,
    /// Points with no neighbour closer than `epsilon`.
    pub isolated: Vec<usize>,
}

/// The space is chainable iff its threshold graph `d < epsilon` is connected.
pub fn chainability<S: Scalar>(space: &SemiMetricSpace<S>, epsilon: &S) -> Result<Chainability<S>, GraphError> {
    if *epsilon <= S::zero() {
        return Err(GraphError::NonPositiveEpsilon);
    }
    let mut chains = Vec::new();
    let mut unreachable = Vec::new();
    for to in 1..space.len() {
        match epsilon_chain(space, 0, to, epsilon)? {
            Some(c) => chains.push(c),
            None => unreachable.push(to),
        }
    }
    let isolated = if space.len() > 1 {
        (0..space.len()).filter(|&x| threshold_neighbors(space, epsilon, x).is_empty()).collect()
    } else {
        Vec::new()
    };
    Ok(Chainability { chainable: unreachable.is_empty(), chains, unreachable, isolated })
}
