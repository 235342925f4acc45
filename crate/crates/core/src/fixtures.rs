//! The three-point golden instance shared by unit tests.

use num_bigint::BigInt;

use crate::contraction::SetMap;
use crate::graph::DirectedGraph;
use crate::hyperspace::Family;
use crate::scalar::Rational;
use crate::space::SemiMetricSpace;

pub fn r(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Points `0, 1, 4` with `d(x, y) = (x - y)^2`.
pub fn golden_space() -> SemiMetricSpace<Rational> {
    let m = vec![vec![r(0), r(1), r(16)], vec![r(1), r(0), r(9)], vec![r(16), r(9), r(0)]];
    SemiMetricSpace::new(vec!["0".into(), "1".into(), "4".into()], m, 0.0).unwrap()
}

/// `bar0 = {0}`, `bar1 = {0,1}`, `bar4 = {0,4}`.
pub fn golden_family() -> Family {
    Family::explicit(
        &golden_space(),
        vec![("bar0".into(), vec![0]), ("bar1".into(), vec![0, 1]), ("bar4".into(), vec![0, 2])],
    )
    .unwrap()
}

/// Loops plus `(0,1), (0,4), (1,4)`.
pub fn golden_graph() -> DirectedGraph {
    DirectedGraph::new(3, vec![(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)]).unwrap()
}

/// `bar0 -> bar0`, `bar1 -> bar0`, `bar4 -> bar1`.
pub fn golden_map() -> SetMap {
    SetMap::new(3, vec![0, 0, 1]).unwrap()
}

/// `bar0 -> bar4 -> bar1 -> bar0`.
pub fn golden_cycle_map() -> SetMap {
    SetMap::new(3, vec![2, 0, 1]).unwrap()
}
