//! Brute-force reference implementations and seeded random instances.
//!
//! Nothing here shares code with the fast paths beyond the raw distance
//! lookup: distances between sets are recomputed from points every time.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::contraction::SetMap;
use crate::graph::DirectedGraph;
use crate::hyperspace::Family;
use crate::problem::{Config, ProblemSpec};
use crate::scalar::{Extended, Rational, Scalar};
use crate::space::SemiMetricSpace;

/// Largest distance drawn by [`random_instance`]; distances are distinct
/// integers in `1..=MAX_DISTANCE`.
pub const MAX_DISTANCE: u64 = 100;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("distance to an empty set")]
    EmptySet,
    #[error("{0} points out of range for this family mode ({1}..={2})")]
    PointCount(usize, usize, usize),
    #[error("edge density {0} is not in [0, 1]")]
    Density(f64),
    #[error("random family needs between 1 and {max} members, got {got}")]
    MemberCount { got: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyMode {
    /// Every nonempty subset.
    Powerset,
    /// One member per point.
    Singletons,
    /// The given number of distinct random subsets.
    Random(usize),
}

pub fn brute_hausdorff<S: Scalar>(space: &SemiMetricSpace<S>, a: &[usize], b: &[usize]) -> Result<S, OracleError> {
    if a.is_empty() || b.is_empty() {
        return Err(OracleError::EmptySet);
    }
    let excess = |from: &[usize], to: &[usize]| {
        let mut worst = S::zero();
        for &x in from {
            let mut nearest: Option<S> = None;
            for &y in to {
                let d = space.distance(x, y);
                if nearest.as_ref().map_or(true, |n| d < n) {
                    nearest = Some(d.clone());
                }
            }
            let nearest = nearest.expect("nonempty");
            if nearest > worst {
                worst = nearest;
            }
        }
        worst
    };
    let ab = excess(a, b);
    let ba = excess(b, a);
    Ok(if ab >= ba { ab } else { ba })
}

/// Supremum of `H(TU, TV) / M_T(U, V)` over every ordered pair, with every
/// distance recomputed from the point matrix.
pub fn brute_lambda_star<S: Scalar>(space: &SemiMetricSpace<S>, family: &Family, map: &SetMap) -> Extended<S> {
    let h = |u: usize, v: usize| {
        brute_hausdorff(space, family.set(u).points(), family.set(v).points()).expect("members are nonempty")
    };
    let mut best = Extended::Finite(S::zero());
    for u in 0..family.len() {
        for v in 0..family.len() {
            let (tu, tv) = (map.image(u), map.image(v));
            let numer = h(tu, tv);
            let huv = h(u, v);
            let hutu = h(u, tu);
            let hvtv = h(v, tv);
            let hvtu = h(v, tu);
            let denom = S::one().add(&huv);
            let grow = S::one().add(&hutu);
            let t4 = hvtv.mul(&grow).checked_div(&denom).expect("denominator at least one");
            let t5 = hvtu.mul(&grow).checked_div(&denom).expect("denominator at least one");
            let m = [huv, hutu, hvtv, t4, t5].into_iter().max().expect("five terms");
            let ratio = if numer.is_zero() {
                Extended::Finite(S::zero())
            } else if m.is_zero() {
                Extended::Infinite
            } else {
                Extended::Finite(numer.checked_div(&m).expect("nonzero"))
            };
            if ratio > best {
                best = ratio;
            }
        }
    }
    best
}

/// Members whose image is the same point set.
pub fn brute_fixed_points(family: &Family, map: &SetMap) -> Vec<usize> {
    (0..family.len()).filter(|&u| family.set(map.image(u)).points() == family.set(u).points()).collect()
}

/// A reproducible exact instance: distinct integer distances, a random
/// graph containing every loop, and a random total map on the family.
pub fn random_instance(
    seed: u64,
    n_points: usize,
    family_mode: FamilyMode,
    edge_density: f64,
) -> Result<ProblemSpec<Rational>, OracleError> {
    let max_points = match family_mode {
        FamilyMode::Powerset => 8,
        _ => 14,
    };
    if !(2..=max_points).contains(&n_points) {
        return Err(OracleError::PointCount(n_points, 2, max_points));
    }
    if !(0.0..=1.0).contains(&edge_density) {
        return Err(OracleError::Density(edge_density));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let pairs = n_points * (n_points - 1) / 2;
    let mut values = sample(&mut rng, MAX_DISTANCE as usize, pairs).into_iter();
    let mut flat = vec![Rational::zero(); n_points * n_points];
    for i in 0..n_points {
        for j in (i + 1)..n_points {
            let d = Rational::from_u64(values.next().expect("enough samples") as u64 + 1);
            flat[i * n_points + j] = d.clone();
            flat[j * n_points + i] = d;
        }
    }
    let matrix = flat.chunks(n_points).map(<[Rational]>::to_vec).collect();
    let labels = (0..n_points).map(|i| i.to_string()).collect();
    let space = SemiMetricSpace::new(labels, matrix, 0.0).expect("generated matrix is a semi-metric");

    let mut edges = Vec::new();
    for i in 0..n_points {
        for j in 0..n_points {
            if i != j && rng.random_bool(edge_density) {
                edges.push((i, j));
            }
        }
    }
    let graph = DirectedGraph::with_implicit_loops(n_points, edges).expect("endpoints in range");

    let family = match family_mode {
        FamilyMode::Powerset => Family::powerset(&space).expect("size checked"),
        FamilyMode::Singletons => {
            Family::explicit(&space, (0..n_points).map(|i| (format!("{{{i}}}"), vec![i])).collect())
                .expect("singletons are closed")
        }
        FamilyMode::Random(count) => {
            let max = (1usize << n_points) - 1;
            if count == 0 || count > max {
                return Err(OracleError::MemberCount { got: count, max });
            }
            let masks = sample(&mut rng, max, count);
            let members = masks
                .into_iter()
                .map(|m| {
                    let points: Vec<usize> = (0..n_points).filter(|&i| (m + 1) >> i & 1 == 1).collect();
                    let name = format!("{{{}}}", points.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
                    (name, points)
                })
                .collect();
            Family::explicit(&space, members).expect("distinct nonempty subsets")
        }
    };

    let images = (0..family.len()).map(|_| rng.random_range(0..family.len())).collect();
    let map = SetMap::new(family.len(), images).expect("images in range");
    Ok(ProblemSpec { space, graph, family, map, config: Config::default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contraction::lambda_star;
    use crate::fixtures::{golden_cycle_map, golden_family, golden_map, golden_space, q, r};
    use crate::hyperspace::{hausdorff, PhMatrix};
    use crate::solver::fixed_points;

    #[test]
    fn hausdorff_examples() {
        let s = golden_space();
        assert_eq!(brute_hausdorff(&s, &[0], &[0, 2]).unwrap(), r(16));
        assert_eq!(brute_hausdorff(&s, &[0, 1], &[0, 2]).unwrap(), r(9));
        assert_eq!(brute_hausdorff(&s, &[0, 1], &[0, 1]).unwrap(), r(0));
        assert_eq!(brute_hausdorff(&s, &[], &[0]), Err(OracleError::EmptySet));
    }

    #[test]
    fn lambda_star_examples() {
        let (s, f) = (golden_space(), golden_family());
        assert_eq!(brute_lambda_star(&s, &f, &golden_map()), Extended::Finite(q(1, 9)));
        assert_eq!(brute_lambda_star(&s, &f, &SetMap::constant(3, 1)), Extended::Finite(r(0)));
        assert_eq!(brute_lambda_star(&s, &f, &SetMap::identity(3)), Extended::Finite(r(1)));
    }

    #[test]
    fn fixed_point_examples() {
        let f = golden_family();
        assert_eq!(brute_fixed_points(&f, &golden_map()), vec![0]);
        assert_eq!(brute_fixed_points(&f, &SetMap::identity(3)), vec![0, 1, 2]);
        assert!(brute_fixed_points(&f, &golden_cycle_map()).is_empty());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = random_instance(1, 3, FamilyMode::Powerset, 0.5).unwrap();
        let b = random_instance(1, 3, FamilyMode::Powerset, 0.5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.family.len(), 7);
        let c = random_instance(2, 3, FamilyMode::Powerset, 0.5).unwrap();
        assert!(c.graph.validate(&c.space).is_ok());
    }

    #[test]
    fn singletons_with_full_density_give_complete_graph() {
        let p = random_instance(7, 2, FamilyMode::Singletons, 1.0).unwrap();
        assert_eq!(p.graph.edge_count(), 4);
        assert_eq!(p.family.len(), 2);
        assert!(p.graph.validate(&p.space).is_ok());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(random_instance(1, 1, FamilyMode::Powerset, 0.5), Err(OracleError::PointCount(1, 2, 8)));
        assert_eq!(random_instance(1, 9, FamilyMode::Powerset, 0.5), Err(OracleError::PointCount(9, 2, 8)));
        assert_eq!(random_instance(1, 3, FamilyMode::Powerset, 1.5), Err(OracleError::Density(1.5)));
        assert!(matches!(
            random_instance(1, 3, FamilyMode::Random(8), 0.5),
            Err(OracleError::MemberCount { got: 8, max: 7 })
        ));
    }

    #[test]
    fn random_family_members_are_distinct() {
        let p = random_instance(3, 5, FamilyMode::Random(6), 0.3).unwrap();
        assert_eq!(p.family.len(), 6);
    }

    #[test]
    fn oracles_agree_with_fast_paths_on_a_few_seeds() {
        for seed in 0..20 {
            let p = random_instance(seed, 4, FamilyMode::Powerset, 0.4).unwrap();
            let ph = PhMatrix::build(&p.space, &p.family);
            for u in 0..p.family.len() {
                for v in 0..p.family.len() {
                    let (a, b) = (p.family.set(u), p.family.set(v));
                    assert_eq!(brute_hausdorff(&p.space, a.points(), b.points()).unwrap(), hausdorff(&p.space, a, b));
                }
            }
            assert_eq!(brute_lambda_star(&p.space, &p.family, &p.map), lambda_star(&ph, &p.map).value);
            assert_eq!(brute_fixed_points(&p.family, &p.map), fixed_points(&p.map));
        }
    }
}
