//! Fixed-point analysis of set-valued maps on finite semi-metric spaces
//! carrying a directed graph.
//!
//! The crate computes Pompeiu-Hausdorff distances between closed subsets,
//! contraction constants of rational type for self-maps of a subset family,
//! Picard orbits, and certificates for the fixed-point statements that
//! follow from the contraction property. Every fast path has a brute-force
//! counterpart in [`oracle`].

pub mod command;
pub mod contraction;
pub mod graph;
pub mod hyperspace;
pub mod oracle;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod space;

#[cfg(test)]
mod fixtures;

pub use contraction::{ContractionCertificate, GammaFunction, PointMap, SetMap};
pub use graph::{DirectedGraph, SetEdgeSemantics};
pub use hyperspace::{Family, PhMatrix, PointSet};
pub use scalar::{Extended, Float, Rational, Scalar};
pub use space::SemiMetricSpace;
