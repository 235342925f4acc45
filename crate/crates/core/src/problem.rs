//! Problem instance files.
//!
//! An instance is one UTF-8 JSON document:
//!
//! ```json
//! {
//!   "space":  { "points": [0, 1, 4], "formula": "squared_difference" },
//!   "graph":  { "edges": [[0, 1], [0, 4], [1, 4]], "implicit_loops": true },
//!   "family": { "bar0": [0], "bar1": [0, 1], "bar4": [0, 4] },
//!   "map":    { "bar0": "bar0", "bar1": "bar0", "bar4": "bar1" },
//!   "config": { "semantics": "existential", "mode": "exact" }
//! }
//! ```
//!
//! `space` takes either `"matrix"` (rows of numbers or `"p/q"` strings) or
//! `"formula": "squared_difference"` for numeric labels. `family` is either
//! the string `"powerset"` or an object of named point lists; power-set
//! members are named by their label sets, e.g. `"{0,4}"`.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contraction::{ContractionError, SetMap};
use crate::graph::{DirectedGraph, GraphError, SetEdgeSemantics};
use crate::hyperspace::{Family, FamilyKind, HyperspaceError, PointSet};
use crate::scalar::{Float, Rational, Scalar};
use crate::space::{SemiMetricSpace, SpaceError, DEFAULT_TOLERANCE};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("{path}: {message} (line {line}, column {column})")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("{path}: unknown identifier `{id}`")]
    Dangling { path: String, id: String },
    #[error("space: {0}")]
    Space(#[from] SpaceError),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("family: {0}")]
    Family(#[from] HyperspaceError),
    #[error("map: {0}")]
    Map(#[from] ContractionError),
    #[error("cannot read {path}")]
    Io { path: String, source: std::io::Error },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> ProblemError {
    ProblemError::Field { path: path.into(), message: message.into() }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumberMode {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub semantics: SetEdgeSemantics,
    pub mode: NumberMode,
    pub tolerance: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config { semantics: SetEdgeSemantics::Existential, mode: NumberMode::Exact, tolerance: DEFAULT_TOLERANCE }
    }
}

/// A validated instance: every cross-reference resolves and every
/// component passed its validator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec<S> {
    pub space: SemiMetricSpace<S>,
    pub graph: DirectedGraph,
    pub family: Family,
    pub map: SetMap,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Exact(ProblemSpec<Rational>),
    Float(ProblemSpec<Float>),
}

impl Problem {
    pub fn config(&self) -> &Config {
        match self {
            Problem::Exact(p) => &p.config,
            Problem::Float(p) => &p.config,
        }
    }

    /// Canonical JSON form of the instance; parsing it yields an equal problem.
    pub fn to_normalized_json(&self) -> String {
        match self {
            Problem::Exact(p) => p.to_normalized_json(),
            Problem::Float(p) => p.to_normalized_json(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    space: RawSpace,
    graph: RawGraph,
    family: RawFamily,
    map: IndexMap<String, String>,
    #[serde(default)]
    config: RawConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    points: Vec<Atom>,
    #[serde(default)]
    matrix: Option<Vec<Vec<Atom>>>,
    #[serde(default)]
    formula: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    edges: Vec<(Atom, Atom)>,
    #[serde(default = "default_true")]
    implicit_loops: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFamily {
    Keyword(String),
    Named(IndexMap<String, Vec<Atom>>),
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    semantics: Option<SetEdgeSemantics>,
    mode: Option<NumberMode>,
    tolerance: Option<f64>,
}

/// A label or numeric literal written as a JSON string or number.
#[derive(Deserialize)]
#[serde(untagged)]
enum Atom {
    Text(String),
    Number(serde_json::Number),
}

impl Atom {
    fn text(&self) -> String {
        match self {
            Atom::Text(s) => s.clone(),
            Atom::Number(n) => n.to_string(),
        }
    }
}

pub fn parse_problem_file(path: &Path) -> Result<Problem, ProblemError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ProblemError::Io { path: path.display().to_string(), source })?;
    parse_problem(&text)
}

/// Parses and fully validates an instance document.
pub fn parse_problem(text: &str) -> Result<Problem, ProblemError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: RawDocument = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        ProblemError::Syntax { path, line: inner.line(), column: inner.column(), message: inner.to_string() }
    })?;

    let mut config = Config::default();
    if let Some(s) = raw.config.semantics {
        config.semantics = s;
    }
    if let Some(m) = raw.config.mode {
        config.mode = m;
    }
    if let Some(t) = raw.config.tolerance {
        if !(t.is_finite() && t > 0.0) {
            return Err(field("config.tolerance", "must be a positive finite number"));
        }
        config.tolerance = t;
    }

    match config.mode {
        NumberMode::Exact => build(raw, config).map(Problem::Exact),
        NumberMode::Float => build(raw, config).map(Problem::Float),
    }
}

fn build<S: Scalar>(raw: RawDocument, config: Config) -> Result<ProblemSpec<S>, ProblemError> {
    let labels: Vec<String> = raw.space.points.iter().map(Atom::text).collect();
    let matrix = match (&raw.space.matrix, &raw.space.formula) {
        (Some(_), Some(_)) => return Err(field("space", "give either `matrix` or `formula`, not both")),
        (None, None) => return Err(field("space", "missing `matrix` or `formula`")),
        (Some(rows), None) => rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, cell)| {
                        S::parse_literal(&cell.text())
                            .map_err(|e| field(format!("space.matrix[{i}][{j}]"), e.to_string()))
                    })
                    .collect::<Result<Vec<S>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?,
        (None, Some(formula)) if formula == "squared_difference" => {
            let coords = labels
                .iter()
                .enumerate()
                .map(|(i, l)| S::parse_literal(l).map_err(|e| field(format!("space.points[{i}]"), e.to_string())))
                .collect::<Result<Vec<S>, _>>()?;
            coords.iter().map(|x| coords.iter().map(|y| x.sub(y).mul(&x.sub(y))).collect()).collect()
        }
        (None, Some(other)) => return Err(field("space.formula", format!("unknown formula `{other}`"))),
    };
    let tolerance = match config.mode {
        NumberMode::Exact => 0.0,
        NumberMode::Float => config.tolerance,
    };
    let space = SemiMetricSpace::new(labels, matrix, tolerance)?;

    let point = |path: String, atom: &Atom| {
        let label = atom.text();
        space.index_of(&label).map_err(|_| ProblemError::Dangling { path, id: label })
    };
    let edges = raw
        .graph
        .edges
        .iter()
        .enumerate()
        .map(|(k, (u, v))| Ok((point(format!("graph.edges[{k}][0]"), u)?, point(format!("graph.edges[{k}][1]"), v)?)))
        .collect::<Result<Vec<_>, ProblemError>>()?;
    let graph = if raw.graph.implicit_loops {
        DirectedGraph::with_implicit_loops(space.len(), edges)?
    } else {
        DirectedGraph::new(space.len(), edges)?
    };

    let family = match &raw.family {
        RawFamily::Keyword(k) if k == "powerset" => Family::powerset(&space)?,
        RawFamily::Keyword(k) => {
            return Err(field("family", format!("expected \"powerset\" or named sets, got `{k}`")))
        }
        RawFamily::Named(members) => {
            let members = members
                .iter()
                .map(|(name, pts)| {
                    let pts = pts
                        .iter()
                        .enumerate()
                        .map(|(i, a)| point(format!("family.{name}[{i}]"), a))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok((name.clone(), pts))
                })
                .collect::<Result<Vec<_>, ProblemError>>()?;
            Family::explicit(&space, members)?
        }
    };

    let mut images = vec![None; family.len()];
    for (key, value) in &raw.map {
        let u = resolve_member(&space, &family, key)
            .ok_or_else(|| ProblemError::Dangling { path: "map".into(), id: key.clone() })?;
        let v = resolve_member(&space, &family, value)
            .ok_or_else(|| ProblemError::Dangling { path: format!("map.{key}"), id: value.clone() })?;
        if images[u].replace(v).is_some() {
            return Err(field(format!("map.{key}"), "member mapped more than once"));
        }
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(u, img)| img.ok_or_else(|| field("map", format!("no image for member `{}`", family.name(u)))))
        .collect::<Result<Vec<_>, _>>()?;
    let map = SetMap::new(family.len(), images)?;

    graph.validate(&space)?;
    Ok(ProblemSpec { space, graph, family, map, config })
}

/// Finds a member by name, or by a `{a,b}` label set in any order.
pub fn resolve_member<S: Scalar>(space: &SemiMetricSpace<S>, family: &Family, name: &str) -> Option<usize> {
    if let Some(i) = family.index_of(name) {
        return Some(i);
    }
    let inner = name.trim().strip_prefix('{')?.strip_suffix('}')?;
    let points = inner.split(',').map(|l| space.index_of(l.trim()).ok()).collect::<Option<Vec<_>>>()?;
    family.index_of_set(&PointSet::new(points).ok()?)
}

#[derive(Serialize)]
struct NormalizedDocument {
    space: NormalizedSpace,
    graph: NormalizedGraph,
    family: NormalizedFamily,
    map: IndexMap<String, String>,
    config: Config,
}

#[derive(Serialize)]
struct NormalizedSpace {
    points: Vec<String>,
    matrix: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct NormalizedGraph {
    edges: Vec<(String, String)>,
    implicit_loops: bool,
}

#[derive(Serialize)]
#[serde(untagged)]
enum NormalizedFamily {
    Keyword(&'static str),
    Named(IndexMap<String, Vec<String>>),
}

impl<S: Scalar> ProblemSpec<S> {
    /// Explicit matrix, every edge including loops, and the map by name.
    pub fn to_normalized_json(&self) -> String {
        let labels = self.space.labels();
        let doc = NormalizedDocument {
            space: NormalizedSpace {
                points: labels.to_vec(),
                matrix: self.space.matrix().iter().map(|row| row.iter().map(ToString::to_string).collect()).collect(),
            },
            graph: NormalizedGraph {
                edges: self.graph.edges().map(|(u, v)| (labels[u].clone(), labels[v].clone())).collect(),
                implicit_loops: false,
            },
            family: match self.family.kind() {
                FamilyKind::Powerset => NormalizedFamily::Keyword("powerset"),
                FamilyKind::Explicit => NormalizedFamily::Named(
                    (0..self.family.len())
                        .map(|m| {
                            let pts = self.family.set(m).iter().map(|p| labels[p].clone()).collect();
                            (self.family.name(m).to_owned(), pts)
                        })
                        .collect(),
                ),
            },
            map: (0..self.family.len())
                .map(|m| (self.family.name(m).to_owned(), self.family.name(self.map.image(m)).to_owned()))
                .collect(),
            config: self.config.clone(),
        };
        serde_json::to_string(&doc).expect("normalized document serializes")
    }
}
