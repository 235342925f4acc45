//! Contraction constants for set-valued and single-valued maps.
//!
//! The central quantity is the rational maximum
//!
//! ```text
//! M_T(U, V) = max { H(U,V), H(U,TU), H(V,TV),
//!                   H(V,TV) (1 + H(U,TU)) / (1 + H(U,V)),
//!                   H(V,TU) (1 + H(U,TU)) / (1 + H(U,V)) }
//! ```
//!
//! evaluated for the ordered pair `(U, V)` exactly as written. A map is a
//! generalized rational graph contraction when it preserves set edges and
//! paths and `H(TU, TV) <= lambda * M_T(U, V)` holds for every ordered pair
//! with some `lambda < 1`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{DirectedGraph, SetEdgeSemantics, SetRelation};
use crate::hyperspace::{hausdorff, is_closed, Family, PhMatrix, PointSet};
use crate::scalar::{parse_rational, Extended, ParseValueError, Rational, Scalar};
use crate::space::SemiMetricSpace;

/// Default trapezoid step for tabulated integrands.
pub const DEFAULT_TRAPEZOID_STEP: f64 = 1e-4;

/// Upper bound on trapezoid panels per integral; wider ranges use a coarser step.
pub const MAX_TRAPEZOID_PANELS: usize = 1 << 22;
const MAX_HALVINGS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractionError {
    #[error("map has {found} entries for {expected} members")]
    MapNotTotal { expected: usize, found: usize },
    #[error("image {image} of entry {entry} is out of range")]
    ImageOutOfRange { entry: usize, image: usize },
    #[error("image of point {0} is not a closed set of the target space")]
    ImageNotClosed(usize),
    #[error("alpha must lie in [0, 1)")]
    AlphaOutOfRange,
    #[error("invalid gamma function: {0}")]
    InvalidGamma(String),
    #[error("gamma table covers [0, {max}] but the integral needs [0, {needed}]")]
    GammaTableTooShort { max: f64, needed: f64 },
}

/// Total self-map of a family, stored as the member index of each image.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetMap {
    images: Vec<usize>,
}

impl SetMap {
    pub fn new(members: usize, images: Vec<usize>) -> Result<Self, ContractionError> {
        check_table(members, &images)?;
        Ok(SetMap { images })
    }

    pub fn identity(members: usize) -> Self {
        SetMap { images: (0..members).collect() }
    }

    pub fn constant(members: usize, target: usize) -> Self {
        SetMap { images: vec![target; members] }
    }

    #[inline]
    pub fn image(&self, member: usize) -> usize {
        self.images[member]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Total self-map of the points of a space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointMap {
    images: Vec<usize>,
}

impl PointMap {
    pub fn new(points: usize, images: Vec<usize>) -> Result<Self, ContractionError> {
        check_table(points, &images)?;
        Ok(PointMap { images })
    }

    pub fn identity(points: usize) -> Self {
        PointMap { images: (0..points).collect() }
    }

    #[inline]
    pub fn image(&self, point: usize) -> usize {
        self.images[point]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

fn check_table(expected: usize, images: &[usize]) -> Result<(), ContractionError> {
    if images.len() != expected {
        return Err(ContractionError::MapNotTotal { expected, found: images.len() });
    }
    match images.iter().position(|&i| i >= expected) {
        Some(entry) => Err(ContractionError::ImageOutOfRange { entry, image: images[entry] }),
        None => Ok(()),
    }
}

/// The five terms of `M_T(u, v)` in order.
pub fn m_t_terms<S: Scalar>(ph: &PhMatrix<S>, map: &SetMap, u: usize, v: usize) -> [S; 5] {
    let (tu, tv) = (map.image(u), map.image(v));
    let h_uv = ph.get(u, v);
    let h_u_tu = ph.get(u, tu);
    let h_v_tv = ph.get(v, tv);
    let h_v_tu = ph.get(v, tu);
    let one = S::one();
    let denom = one.add(h_uv);
    let lift = one.add(h_u_tu);
    let fourth = h_v_tv.mul(&lift).checked_div(&denom).expect("denominator is at least one");
    let fifth = h_v_tu.mul(&lift).checked_div(&denom).expect("denominator is at least one");
    [h_uv.clone(), h_u_tu.clone(), h_v_tv.clone(), fourth, fifth]
}

/// `M_T(u, v)` for the ordered pair `(u, v)` of family members.
pub fn m_t<S: Scalar>(ph: &PhMatrix<S>, map: &SetMap, u: usize, v: usize) -> S {
    let [a, b, c, d, e] = m_t_terms(ph, map, u, v);
    a.max(b).max(c).max(d).max(e)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaStar<S> {
    pub value: Extended<S>,
    /// First ordered pair (row-major) attaining the supremum.
    pub witness: (usize, usize),
}

/// `sup H(TU, TV) / M_T(U, V)` over all ordered pairs, with `0/0 = 0` and
/// `x/0 = +inf`.
pub fn lambda_star<S: Scalar>(ph: &PhMatrix<S>, map: &SetMap) -> LambdaStar<S> {
    let mut best = LambdaStar { value: Extended::Finite(S::zero()), witness: (0, 0) };
    for u in 0..ph.len() {
        for v in 0..ph.len() {
            let numer = ph.get(map.image(u), map.image(v));
            let ratio = Extended::ratio(numer, &m_t(ph, map, u, v));
            if ratio > best.value {
                best = LambdaStar { value: ratio, witness: (u, v) };
            }
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreservationLevel {
    Edge,
    Path,
}

/// An ordered pair related in the graph whose images are not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeCounterexample {
    pub pair: (usize, usize),
    pub level: PreservationLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ContractionVerdict<S> {
    Contraction { lambda: S },
    NotAContraction { lambda_not_below_one: bool, edges_not_preserved: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractionCertificate<S> {
    pub lambda_star: LambdaStar<S>,
    pub edge_preserving: bool,
    pub counterexample: Option<EdgeCounterexample>,
    pub verdict: ContractionVerdict<S>,
}

impl<S: Scalar> ContractionCertificate<S> {
    pub fn is_contraction(&self) -> bool {
        matches!(self.verdict, ContractionVerdict::Contraction { .. })
    }
}

/// First ordered pair where a set edge or set path is not carried over to
/// the images, if any.
pub fn edge_preservation_counterexample(
    graph: &DirectedGraph,
    family: &Family,
    map: &SetMap,
    semantics: SetEdgeSemantics,
) -> Option<EdgeCounterexample> {
    let relation = SetRelation::new(graph, semantics);
    for u in 0..family.len() {
        for v in 0..family.len() {
            let (su, sv) = (family.set(u), family.set(v));
            let (tu, tv) = (family.set(map.image(u)), family.set(map.image(v)));
            if graph.set_edge(su, sv, semantics) && !graph.set_edge(tu, tv, semantics) {
                return Some(EdgeCounterexample { pair: (u, v), level: PreservationLevel::Edge });
            }
            if relation.holds(su, sv) && !relation.holds(tu, tv) {
                return Some(EdgeCounterexample { pair: (u, v), level: PreservationLevel::Path });
            }
        }
    }
    None
}

pub fn verify_generalized_rational_contraction<S: Scalar>(
    graph: &DirectedGraph,
    family: &Family,
    ph: &PhMatrix<S>,
    map: &SetMap,
    semantics: SetEdgeSemantics,
) -> ContractionCertificate<S> {
    let lambda_star = lambda_star(ph, map);
    let counterexample = edge_preservation_counterexample(graph, family, map, semantics);
    let edge_preserving = counterexample.is_none();
    let verdict = match (&lambda_star.value, edge_preserving) {
        (Extended::Finite(l), true) if *l < S::one() => ContractionVerdict::Contraction { lambda: l.clone() },
        (value, _) => ContractionVerdict::NotAContraction {
            lambda_not_below_one: !value.is_below_one(),
            edges_not_preserved: !edge_preserving,
        },
    };
    ContractionCertificate { lambda_star, edge_preserving, counterexample, verdict }
}

/// Lipschitz constant `max_{x != y} d(fx, fy) / d(x, y)`; zero on a one-point space.
pub fn single_lipschitz<S: Scalar>(space: &SemiMetricSpace<S>, f: &PointMap) -> S {
    let mut best = S::zero();
    for x in 0..space.len() {
        for y in 0..space.len() {
            if x == y {
                continue;
            }
            let ratio = space
                .distance(f.image(x), f.image(y))
                .checked_div(space.distance(x, y))
                .expect("off-diagonal distances are positive");
            best = best.max(ratio);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BanachCertificate<S> {
    pub conserves_edges: bool,
    /// An edge whose image is not an edge.
    pub counterexample: Option<(usize, usize)>,
    /// Largest `d(fu, fv) / d(u, v)` over non-loop edges.
    pub shrink_constant: S,
    pub shrinks: bool,
}

impl<S: Scalar> BanachCertificate<S> {
    pub fn holds(&self) -> bool {
        self.conserves_edges && self.shrinks
    }
}

/// Edge conservation and edge-weight shrinking of a point map.
pub fn verify_banach_g_contraction<S: Scalar>(
    space: &SemiMetricSpace<S>,
    graph: &DirectedGraph,
    f: &PointMap,
) -> BanachCertificate<S> {
    let counterexample = graph.edges().find(|&(u, v)| !graph.has_edge(f.image(u), f.image(v)));
    let shrink_constant = graph
        .edges()
        .filter(|(u, v)| u != v)
        .map(|(u, v)| {
            space
                .distance(f.image(u), f.image(v))
                .checked_div(space.distance(u, v))
                .expect("off-diagonal distances are positive")
        })
        .max()
        .unwrap_or_else(S::zero);
    let shrinks = shrink_constant < S::one();
    BanachCertificate { conserves_edges: counterexample.is_none(), counterexample, shrink_constant, shrinks }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetLipschitz<S> {
    pub constant: S,
    pub witness: Option<(usize, usize)>,
    pub contraction: bool,
}

/// `max_{x != z} H(fx, fz) / d(x, z)` for a point-to-set map between spaces.
pub fn point_to_set_lipschitz<S: Scalar>(
    domain: &SemiMetricSpace<S>,
    target: &SemiMetricSpace<S>,
    f: &[PointSet],
) -> Result<SetLipschitz<S>, ContractionError> {
    if f.len() != domain.len() {
        return Err(ContractionError::MapNotTotal { expected: domain.len(), found: f.len() });
    }
    for (x, image) in f.iter().enumerate() {
        if image.iter().any(|p| p >= target.len()) || !is_closed(target, image) {
            return Err(ContractionError::ImageNotClosed(x));
        }
    }
    let mut best = SetLipschitz { constant: S::zero(), witness: None, contraction: true };
    for x in 0..domain.len() {
        for z in 0..domain.len() {
            if x == z {
                continue;
            }
            let ratio = hausdorff(target, &f[x], &f[z])
                .checked_div(domain.distance(x, z))
                .expect("off-diagonal distances are positive");
            if best.witness.is_none() || ratio > best.constant {
                best.constant = ratio;
                best.witness = Some((x, z));
            }
        }
    }
    best.contraction = best.constant < S::one();
    Ok(best)
}

/// Textual form of a gamma function before any file is read.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GammaSpec {
    Constant(Rational),
    Polynomial(Vec<Rational>),
    Table(PathBuf),
}

impl GammaSpec {
    /// Accepts `const:c`, `poly:a0,a1,...` and `table:path`.
    pub fn parse(text: &str) -> Result<Self, ContractionError> {
        let bad = |msg: String| ContractionError::InvalidGamma(msg);
        let (kind, body) = text.split_once(':').ok_or_else(|| bad(format!("missing kind prefix in `{text}`")))?;
        let coeff = |s: &str| parse_rational(s).map_err(|e: ParseValueError| bad(e.to_string()));
        match kind {
            "const" => Ok(GammaSpec::Constant(coeff(body)?)),
            "poly" => {
                let coeffs = body.split(',').map(coeff).collect::<Result<Vec<_>, _>>()?;
                Ok(GammaSpec::Polynomial(coeffs))
            }
            "table" if !body.is_empty() => Ok(GammaSpec::Table(PathBuf::from(body))),
            _ => Err(bad(format!("unknown gamma form `{text}`"))),
        }
    }
}

/// Piecewise-linear integrand given by samples `(t, gamma(t))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    ts: Vec<f64>,
    values: Vec<f64>,
}

impl GammaTable {
    /// Two whitespace-separated columns per line; blank lines and lines
    /// starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Self, ContractionError> {
        let mut ts = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse::<f64>().ok()).collect();
            match parsed.as_deref() {
                Some(&[t, g]) => {
                    ts.push(t);
                    values.push(g);
                }
                _ => {
                    return Err(ContractionError::InvalidGamma(format!(
                        "table line {}: expected two numbers",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(ts, values)
    }

    pub fn new(ts: Vec<f64>, values: Vec<f64>) -> Result<Self, ContractionError> {
        let bad = |msg: &str| Err(ContractionError::InvalidGamma(msg.to_owned()));
        if ts.len() < 2 || ts.len() != values.len() {
            return bad("table needs at least two rows");
        }
        if ts[0] != 0.0 {
            return bad("table must start at t = 0");
        }
        if ts.iter().chain(&values).any(|x| !x.is_finite()) {
            return bad("table entries must be finite");
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return bad("table abscissae must be strictly increasing");
        }
        if values.iter().any(|&g| g < 0.0) {
            return bad("gamma must be nonnegative");
        }
        if values[0] <= 0.0 && values[1] <= 0.0 {
            return bad("gamma vanishes on an initial segment");
        }
        Ok(GammaTable { ts, values })
    }

    pub fn max_t(&self) -> f64 {
        *self.ts.last().expect("at least two rows")
    }

    fn eval(&self, t: f64) -> f64 {
        let i = self.ts.partition_point(|&x| x <= t).clamp(1, self.ts.len() - 1);
        let (t0, t1) = (self.ts[i - 1], self.ts[i]);
        let (g0, g1) = (self.values[i - 1], self.values[i]);
        g0 + (g1 - g0) * (t - t0) / (t1 - t0)
    }

    /// Composite trapezoid rule for `int_0^x gamma` with step at most `step`,
    /// or with [`MAX_TRAPEZOID_PANELS`] panels when that would need more.
    pub fn integral(&self, x: f64, step: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let n = ((x / step).ceil().max(1.0) as usize).min(MAX_TRAPEZOID_PANELS);
        let h = x / n as f64;
        let inner: f64 = (1..n).map(|k| self.eval(k as f64 * h)).sum();
        h * (0.5 * (self.eval(0.0) + self.eval(x)) + inner)
    }
}

/// A member of the integrand class: nonnegative, integrable, and with a
/// positive integral over every initial segment.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaFunction {
    /// Coefficients `a0, a1, ...` of `a0 + a1 t + ...`.
    Polynomial(Vec<Rational>),
    Table(GammaTable),
}

impl GammaFunction {
    pub fn polynomial(coeffs: Vec<Rational>) -> Result<Self, ContractionError> {
        check_polynomial(&coeffs)?;
        Ok(GammaFunction::Polynomial(coeffs))
    }

    pub fn from_spec(spec: GammaSpec) -> Result<Self, ContractionError> {
        match spec {
            GammaSpec::Constant(c) => Self::polynomial(vec![c]),
            GammaSpec::Polynomial(coeffs) => Self::polynomial(coeffs),
            GammaSpec::Table(path) => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| ContractionError::InvalidGamma(format!("cannot read {}: {e}", path.display())))?;
                Ok(GammaFunction::Table(GammaTable::parse_text(&text)?))
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, ContractionError> {
        Self::from_spec(GammaSpec::parse(text)?)
    }

    /// Exact `int_0^x gamma` for polynomials.
    pub fn antiderivative<S: Scalar>(coeffs: &[Rational], x: &S) -> S {
        // Horner on a_i / (i + 1), then one more factor of x.
        let mut acc = S::zero();
        for (i, a) in coeffs.iter().enumerate().rev() {
            let c = S::from_rational(&(a / Rational::from_integer((i as u64 + 1).into())));
            acc = acc.mul(x).add(&c);
        }
        acc.mul(x)
    }
}

fn check_polynomial(coeffs: &[Rational]) -> Result<(), ContractionError> {
    let bad = |msg: &str| Err(ContractionError::InvalidGamma(msg.to_owned()));
    let zero = <Rational as Scalar>::zero();
    let nonzero: Vec<&Rational> = coeffs.iter().filter(|c| !c.is_zero()).collect();
    let (Some(lowest), Some(leading)) = (nonzero.first(), nonzero.last()) else {
        return bad("gamma is identically zero");
    };
    if **lowest < zero {
        return bad("gamma is negative near zero");
    }
    if **leading < zero {
        return bad("gamma is negative for large t");
    }
    if coeffs.iter().all(|c| *c >= zero) {
        return Ok(());
    }
    // Mixed signs: every positive root lies below the Cauchy bound, so a
    // dense scan of [0, bound] decides the sign in practice.
    let lead = leading.to_f64();
    let bound = 1.0 + coeffs.iter().map(|c| (c.to_f64() / lead).abs()).fold(0.0, f64::max);
    let samples = 1 << 14;
    for k in 0..=samples {
        let t = bound * k as f64 / samples as f64;
        let value = coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c.to_f64());
        if value < -1e-12 {
            return bad("gamma takes negative values on [0, inf)");
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralPair<S> {
    pub pair: (usize, usize),
    /// `H(TU, TV)`.
    pub lhs: S,
    /// `int_0^{alpha M_T(U, V)} gamma`.
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralCertificate<S> {
    pub holds: bool,
    /// Pair with the largest `lhs / rhs`.
    pub worst: IntegralPair<S>,
    /// `rhs - lhs` at the worst pair.
    pub worst_margin: S,
    pub violations: Vec<(usize, usize)>,
    /// Trapezoid step used for tabulated integrands.
    pub step: Option<f64>,
}

/// Checks `H(TU, TV) <= int_0^{alpha M_T(U, V)} gamma` for every ordered pair.
pub fn verify_integral_contraction<S: Scalar>(
    ph: &PhMatrix<S>,
    map: &SetMap,
    alpha: &S,
    gamma: &GammaFunction,
) -> Result<IntegralCertificate<S>, ContractionError> {
    if alpha.is_negative() || *alpha >= S::one() {
        return Err(ContractionError::AlphaOutOfRange);
    }
    let mut args = BTreeMap::new();
    for u in 0..ph.len() {
        for v in 0..ph.len() {
            args.entry(alpha.mul(&m_t(ph, map, u, v))).or_insert_with(S::zero);
        }
    }

    let step = match gamma {
        GammaFunction::Polynomial(coeffs) => {
            for (x, value) in args.iter_mut() {
                *value = GammaFunction::antiderivative(coeffs, x);
            }
            None
        }
        GammaFunction::Table(table) => {
            let needed = args.keys().next_back().map_or(0.0, Scalar::to_f64);
            if needed > table.max_t() {
                return Err(ContractionError::GammaTableTooShort { max: table.max_t(), needed });
            }
            Some(integrate_until_stable(ph, map, alpha, table, &mut args)?)
        }
    };

    Ok(certify_pairs(ph, map, alpha, &args, step))
}

fn fill_table_integrals<S: Scalar>(
    table: &GammaTable,
    step: f64,
    args: &mut BTreeMap<S, S>,
) -> Result<(), ContractionError> {
    for (x, value) in args.iter_mut() {
        let integral = table.integral(x.to_f64(), step);
        *value =
            S::from_f64(integral).ok_or_else(|| ContractionError::InvalidGamma("non-finite integral".to_owned()))?;
    }
    Ok(())
}

/// Halves the trapezoid step until the per-pair verdicts agree between two
/// consecutive refinements; returns the final step.
fn integrate_until_stable<S: Scalar>(
    ph: &PhMatrix<S>,
    map: &SetMap,
    alpha: &S,
    table: &GammaTable,
    args: &mut BTreeMap<S, S>,
) -> Result<f64, ContractionError> {
    let mut step = DEFAULT_TRAPEZOID_STEP;
    fill_table_integrals(table, step, args)?;
    let mut previous = certify_pairs(ph, map, alpha, args, Some(step)).violations;
    for _ in 0..MAX_HALVINGS {
        let finer = step / 2.0;
        fill_table_integrals(table, finer, args)?;
        let current = certify_pairs(ph, map, alpha, args, Some(finer)).violations;
        step = finer;
        if current == previous {
            break;
        }
        previous = current;
    }
    Ok(step)
}

fn certify_pairs<S: Scalar>(
    ph: &PhMatrix<S>,
    map: &SetMap,
    alpha: &S,
    integrals: &BTreeMap<S, S>,
    step: Option<f64>,
) -> IntegralCertificate<S> {
    let mut violations = Vec::new();
    let mut worst: Option<(Extended<S>, IntegralPair<S>)> = None;
    for u in 0..ph.len() {
        for v in 0..ph.len() {
            let lhs = ph.get(map.image(u), map.image(v)).clone();
            let rhs = integrals[&alpha.mul(&m_t(ph, map, u, v))].clone();
            if lhs > rhs {
                violations.push((u, v));
            }
            let ratio = Extended::ratio(&lhs, &rhs);
            if worst.as_ref().map_or(true, |(best, _)| ratio > *best) {
                worst = Some((ratio, IntegralPair { pair: (u, v), lhs, rhs }));
            }
        }
    }
    let (_, worst) = worst.expect("family is nonempty");
    let worst_margin = worst.rhs.sub(&worst.lhs);
    IntegralCertificate { holds: violations.is_empty(), worst, worst_margin, violations, step }
}
