//! Finite semi-metric spaces.
//!
//! A semi-metric is symmetric, vanishes exactly on the diagonal, and is
//! strictly positive elsewhere. The triangle inequality is never checked
//! and nothing in the crate relies on it.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;

/// Default zero-test tolerance for float-mode instances.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    NonNegativity,
    Symmetry,
    IdentityOfIndiscernibles,
    ZeroDiagonal,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::NonNegativity => "non-negativity",
            Axiom::Symmetry => "symmetry",
            Axiom::IdentityOfIndiscernibles => "identity of indiscernibles",
            Axiom::ZeroDiagonal => "zero diagonal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub col: usize,
    pub axiom: Axiom,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at ({}, {})", self.axiom, self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpaceError {
    #[error("space has no points")]
    Empty,
    #[error("matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, expected: usize, found: usize },
    #[error("{labels} labels for a {size}x{size} matrix")]
    LabelCount { labels: usize, size: usize },
    #[error("duplicate point label `{0}`")]
    DuplicateLabel(String),
    #[error("semi-metric axioms violated: {}", join_violations(.0))]
    Axioms(Vec<Violation>),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("radius must be positive")]
    NonPositiveRadius,
    #[error("sequence is empty")]
    EmptySequence,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiMetricSpace<S> {
    labels: Vec<String>,
    dist: Vec<S>,
    tolerance: f64,
}

impl<S: Scalar> SemiMetricSpace<S> {
    /// Validates `matrix` against the semi-metric axioms. On failure every
    /// violated cell is reported; off-diagonal pair checks are reported once
    /// at `(i, j)` with `i < j`.
    pub fn new(labels: Vec<String>, matrix: Vec<Vec<S>>, tolerance: f64) -> Result<Self, SpaceError> {
        let n = matrix.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        if labels.len() != n {
            return Err(SpaceError::LabelCount { labels: labels.len(), size: n });
        }
        for (row, entries) in matrix.iter().enumerate() {
            if entries.len() != n {
                return Err(SpaceError::NotSquare { row, expected: n, found: entries.len() });
            }
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(SpaceError::DuplicateLabel(label.clone()));
            }
        }

        let mut violations = Vec::new();
        for (i, row) in matrix.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if v.is_negative() {
                    violations.push(Violation { row: i, col: j, axiom: Axiom::NonNegativity });
                    continue;
                }
                if i == j {
                    if !v.is_zero() {
                        violations.push(Violation { row: i, col: j, axiom: Axiom::ZeroDiagonal });
                    }
                } else if i < j {
                    let w = &matrix[j][i];
                    if !v.sub(w).is_negligible(tolerance) {
                        violations.push(Violation { row: i, col: j, axiom: Axiom::Symmetry });
                    }
                    if v.is_zero() || w.is_zero() {
                        violations.push(Violation { row: i, col: j, axiom: Axiom::IdentityOfIndiscernibles });
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Err(SpaceError::Axioms(violations));
        }

        Ok(SemiMetricSpace { labels, dist: matrix.into_iter().flatten().collect(), tolerance })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, point: usize) -> &str {
        &self.labels[point]
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn index_of(&self, label: &str) -> Result<usize, SpaceError> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| SpaceError::UnknownPoint(label.to_owned()))
    }

    /// Zero test under the space's tolerance (exact zero for rationals).
    pub fn is_negligible(&self, value: &S) -> bool {
        value.is_negligible(self.tolerance)
    }

    #[inline]
    pub fn distance(&self, x: usize, y: usize) -> &S {
        &self.dist[x * self.labels.len() + y]
    }

    pub fn distance_by_label(&self, x: &str, y: &str) -> Result<&S, SpaceError> {
        Ok(self.distance(self.index_of(x)?, self.index_of(y)?))
    }

    pub fn matrix(&self) -> Vec<Vec<S>> {
        self.dist.chunks(self.len()).map(<[S]>::to_vec).collect()
    }

    /// `{x : d(center, x) < radius}`.
    pub fn open_ball(&self, center: usize, radius: &S) -> Result<Vec<usize>, SpaceError> {
        self.check_point(center)?;
        if *radius <= S::zero() {
            return Err(SpaceError::NonPositiveRadius);
        }
        Ok((0..self.len()).filter(|&x| self.distance(center, x) < radius).collect())
    }

    /// Smallest off-diagonal distance, `None` for a one-point space.
    pub fn min_positive_distance(&self) -> Option<S> {
        self.off_diagonal().min().cloned()
    }

    /// The bound `sup d(x, y)`; zero for a one-point space.
    pub fn diameter(&self) -> S {
        self.off_diagonal().max().cloned().unwrap_or_else(S::zero)
    }

    fn off_diagonal(&self) -> impl Iterator<Item = &S> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| (0..n).filter(move |&j| j != i).map(move |j| self.distance(i, j)))
    }

    pub fn check_point(&self, point: usize) -> Result<(), SpaceError> {
        if point < self.len() {
            Ok(())
        } else {
            Err(SpaceError::PointOutOfRange(point))
        }
    }

    /// Finite-scale Cauchy and convergence diagnostics for a point sequence.
    ///
    /// The stable tail is the longest suffix whose pairwise distances are all
    /// negligible. A sequence is Cauchy when that tail has at least two terms
    /// (or the sequence has one term). It converges to `limit` when the tail
    /// of terms negligibly close to `limit` has the same length requirement.
    /// Without a candidate, the last term of a Cauchy tail is the limit.
    pub fn orbit_diagnostics(
        &self,
        sequence: &[usize],
        candidate_limit: Option<usize>,
    ) -> Result<OrbitDiagnostics, SpaceError> {
        if sequence.is_empty() {
            return Err(SpaceError::EmptySequence);
        }
        for &p in sequence {
            self.check_point(p)?;
        }
        if let Some(l) = candidate_limit {
            self.check_point(l)?;
        }
        let required = sequence.len().min(2);

        let mut cauchy_start = sequence.len();
        while cauchy_start > 0 {
            let next = sequence[cauchy_start - 1];
            let stable = sequence[cauchy_start..].iter().all(|&later| self.is_negligible(self.distance(next, later)));
            if !stable {
                break;
            }
            cauchy_start -= 1;
        }
        let is_cauchy_tail = sequence.len() - cauchy_start >= required;

        let limit = candidate_limit.or(if is_cauchy_tail { sequence.last().copied() } else { None });
        let converged = match limit {
            Some(l) => {
                let close = sequence.iter().rev().take_while(|&&p| self.is_negligible(self.distance(p, l))).count();
                close >= required
            }
            None => false,
        };

        Ok(OrbitDiagnostics {
            is_cauchy_tail,
            tail_start: is_cauchy_tail.then_some(cauchy_start),
            limit: if converged { limit } else { candidate_limit },
            converged,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitDiagnostics {
    pub is_cauchy_tail: bool,
    /// First index of the stable tail when Cauchy.
    pub tail_start: Option<usize>,
    pub limit: Option<usize>,
    pub converged: bool,
}
