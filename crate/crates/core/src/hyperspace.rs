//! Closed subsets of a finite semi-metric space and the Pompeiu-Hausdorff
//! semi-metric between them.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::scalar::Scalar;
use crate::space::SemiMetricSpace;

/// Largest space for which the power-set family may be generated.
pub const POWERSET_MAX_POINTS: usize = 12;
const POWERSET_WARN_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HyperspaceError {
    #[error("empty point set")]
    EmptySet,
    #[error("point index {0} out of range")]
    PointOutOfRange(usize),
    #[error("family has no members")]
    EmptyFamily,
    #[error("family member `{0}` is empty")]
    EmptyMember(String),
    #[error("family members `{first}` and `{second}` are the same set")]
    DuplicateMember { first: String, second: String },
    #[error("duplicate family member name `{0}`")]
    DuplicateName(String),
    #[error("family member `{0}` is not closed")]
    NotClosed(String),
    #[error("power-set family requested for {0} points (limit {POWERSET_MAX_POINTS})")]
    PowersetTooLarge(usize),
    #[error("selection factor must exceed 1")]
    FactorNotAboveOne,
}

/// Nonempty sorted set of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct PointSet(Vec<usize>);

impl PointSet {
    pub fn new(points: impl IntoIterator<Item = usize>) -> Result<Self, HyperspaceError> {
        let mut v: Vec<usize> = points.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(HyperspaceError::EmptySet);
        }
        Ok(PointSet(v))
    }

    pub fn singleton(point: usize) -> Self {
        PointSet(vec![point])
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.0.binary_search(&point).is_ok()
    }

    pub fn intersects(&self, other: &PointSet) -> bool {
        self.iter().any(|p| other.contains(p))
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    /// `{a,b}` using the space's labels.
    pub fn display<'a, S: Scalar>(&'a self, space: &'a SemiMetricSpace<S>) -> impl fmt::Display + 'a {
        DisplaySet { set: self, labels: space.labels() }
    }

    fn check_in<S: Scalar>(&self, space: &SemiMetricSpace<S>) -> Result<(), HyperspaceError> {
        match self.iter().find(|&p| p >= space.len()) {
            Some(p) => Err(HyperspaceError::PointOutOfRange(p)),
            None => Ok(()),
        }
    }
}

struct DisplaySet<'a> {
    set: &'a PointSet,
    labels: &'a [String],
}

impl fmt::Display for DisplaySet<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.set.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(&self.labels[p])?;
        }
        f.write_str("}")
    }
}

/// `d(x, A) = min_{a in A} d(x, a)`.
pub fn point_to_set_distance<S: Scalar>(space: &SemiMetricSpace<S>, x: usize, set: &PointSet) -> S {
    set.iter().map(|a| space.distance(x, a)).min().cloned().expect("point sets are nonempty")
}

/// `D(A, B) = max_{a in A} d(a, B)`.
pub fn directed_excess<S: Scalar>(space: &SemiMetricSpace<S>, a: &PointSet, b: &PointSet) -> S {
    a.iter().map(|x| point_to_set_distance(space, x, b)).max().expect("point sets are nonempty")
}

/// Pompeiu-Hausdorff semi-metric `max(D(A, B), D(B, A))`.
pub fn hausdorff<S: Scalar>(space: &SemiMetricSpace<S>, a: &PointSet, b: &PointSet) -> S {
    let forward = directed_excess(space, a, b);
    let backward = directed_excess(space, b, a);
    forward.max(backward)
}

/// `{y : d(y, U) = 0}`, with the zero test under the space's tolerance.
pub fn closure<S: Scalar>(space: &SemiMetricSpace<S>, set: &PointSet) -> PointSet {
    let points = (0..space.len()).filter(|&y| space.is_negligible(&point_to_set_distance(space, y, set)));
    PointSet::new(points).expect("closure contains the set itself")
}

pub fn is_closed<S: Scalar>(space: &SemiMetricSpace<S>, set: &PointSet) -> bool {
    closure(space, set) == *set
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub from: usize,
    pub to: usize,
}

/// For each `u` in `U` picks `v` in `V` with `d(u, v) <= mu * H(U, V)`.
///
/// The nearest point of `V` is chosen, ties going to the lowest point index,
/// so the bound always holds once `mu > 1`.
pub fn nadler_select<S: Scalar>(
    space: &SemiMetricSpace<S>,
    u: &PointSet,
    v: &PointSet,
    mu: &S,
) -> Result<Vec<Selection>, HyperspaceError> {
    if *mu <= S::one() {
        return Err(HyperspaceError::FactorNotAboveOne);
    }
    let bound = mu.mul(&hausdorff(space, u, v));
    let picks = u
        .iter()
        .map(|from| {
            let to = v
                .iter()
                .min_by(|&a, &b| space.distance(from, a).cmp(space.distance(from, b)).then(a.cmp(&b)))
                .expect("point sets are nonempty");
            debug_assert!(*space.distance(from, to) <= bound);
            Selection { from, to }
        })
        .collect();
    Ok(picks)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Explicit,
    Powerset,
}

/// Finite model of the closed bounded subsets: named, distinct, closed sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    names: Vec<String>,
    sets: Vec<PointSet>,
    kind: FamilyKind,
}

impl Family {
    pub fn explicit<S: Scalar>(
        space: &SemiMetricSpace<S>,
        members: Vec<(String, Vec<usize>)>,
    ) -> Result<Self, HyperspaceError> {
        if members.is_empty() {
            return Err(HyperspaceError::EmptyFamily);
        }
        let mut names = Vec::with_capacity(members.len());
        let mut sets = Vec::with_capacity(members.len());
        let mut by_set: HashMap<PointSet, usize> = HashMap::new();
        for (name, points) in members {
            if names.contains(&name) {
                return Err(HyperspaceError::DuplicateName(name));
            }
            let set = PointSet::new(points).map_err(|_| HyperspaceError::EmptyMember(name.clone()))?;
            set.check_in(space)?;
            if let Some(&prev) = by_set.get(&set) {
                return Err(HyperspaceError::DuplicateMember { first: names[prev].clone(), second: name });
            }
            if !is_closed(space, &set) {
                return Err(HyperspaceError::NotClosed(name));
            }
            by_set.insert(set.clone(), names.len());
            names.push(name);
            sets.push(set);
        }
        Ok(Family { names, sets, kind: FamilyKind::Explicit })
    }

    /// All nonempty closed subsets, ordered by bitmask; each is named by its
    /// label set, e.g. `{0,4}`. In exact mode every subset is closed and the
    /// family has `2^n - 1` members.
    pub fn powerset<S: Scalar>(space: &SemiMetricSpace<S>) -> Result<Self, HyperspaceError> {
        let n = space.len();
        if n > POWERSET_MAX_POINTS {
            return Err(HyperspaceError::PowersetTooLarge(n));
        }
        if n > POWERSET_WARN_POINTS {
            log::warn!("power-set family over {n} points has {} members", (1usize << n) - 1);
        }
        let mut names = Vec::new();
        let mut sets = Vec::new();
        for mask in 1usize..(1 << n) {
            let set = PointSet::new((0..n).filter(|i| mask & (1 << i) != 0)).expect("mask is nonzero");
            if !is_closed(space, &set) {
                continue;
            }
            names.push(set.display(space).to_string());
            sets.push(set);
        }
        Ok(Family { names, sets, kind: FamilyKind::Powerset })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn name(&self, member: usize) -> &str {
        &self.names[member]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn set(&self, member: usize) -> &PointSet {
        &self.sets[member]
    }

    pub fn sets(&self) -> &[PointSet] {
        &self.sets
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn index_of_set(&self, set: &PointSet) -> Option<usize> {
        self.sets.iter().position(|s| s == set)
    }
}

/// Cached PH distances between every pair of family members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhMatrix<S> {
    size: usize,
    values: Vec<S>,
}

impl<S: Scalar> PhMatrix<S> {
    pub fn build(space: &SemiMetricSpace<S>, family: &Family) -> Self {
        let size = family.len();
        let mut values = vec![S::zero(); size * size];
        for i in 0..size {
            for j in (i + 1)..size {
                let h = hausdorff(space, family.set(i), family.set(j));
                values[j * size + i] = h.clone();
                values[i * size + j] = h;
            }
        }
        PhMatrix { size, values }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> &S {
        &self.values[u * self.size + v]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[S]> {
        self.values.chunks(self.size.max(1))
    }

    /// Smallest nonzero entry, `None` when every entry is zero.
    pub fn min_positive(&self) -> Option<&S> {
        self.values.iter().filter(|v| !v.is_zero()).min()
    }
}
