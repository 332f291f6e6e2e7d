//! Pseudo-quasi-metrics on pairs of jointly distributed random variables.
//!
//! Every metric here is a function of the joint distribution of an ordered
//! pair only, is nonnegative, vanishes on the diagonal coupling of a
//! variable with itself, and satisfies the triangle inequality whenever the
//! three pairwise marginals come from one joint distribution. Symmetry is
//! not assumed and never imposed silently: use [`Transform::Sum`] or
//! [`Transform::Max`] with a transposed copy if you want it.

mod config;
mod functions;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::num::Num;
use crate::probspace::{BivariateMarginal, PointLabel};

pub use config::{LayersConfig, MetricConfig, TransformConfig, UPoint};
pub use functions::{
    classification_distance, conditional_entropy, expected_ground, frechet_distance, order_distance,
    p_distance, separation_distance, separation_distance_independent, triangle_defect, DEFAULT_LOG_BASE,
    EPS_SUPPORT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("value `{value}` of {var} has no rank")]
    UnrankedValue { value: String, var: String },
    #[error("rank of `{0}` must be at least 1")]
    InvalidRank(String),
    #[error("value `{value}` of {var} is not in any partition cell")]
    ValueNotInPartition { value: String, var: String },
    #[error("partition lists `{0}` in more than one cell")]
    OverlappingCells(String),
    #[error("value `{value}` of {var} has no numeric embedding")]
    MissingEmbedding { value: String, var: String },
    #[error("p must be at least 1, got {0}")]
    InvalidP(f64),
    #[error("exponent must lie in (0, 1], got {0}")]
    InvalidExponent(f64),
    #[error("logarithm base must exceed 1, got {0}")]
    InvalidBase(f64),
    #[error("ground metric violates the p.q.-metric axioms: {0}")]
    GroundAxiomViolation(String),
    #[error("value `{0}` is not in the ground metric's value set")]
    UnknownGroundValue(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("invalid distribution for U: {0}")]
    InvalidSeparationPoint(String),
    #[error("table must have {expected} axes, found {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("metric config: {0}")]
    Config(String),
}

fn var_name(var: Option<&PointLabel>) -> String {
    var.map_or_else(|| "variable".to_string(), |v| v.to_string())
}

/// A per-variable parameter with fallbacks: the most specific layer that
/// is defined for a variable (its input point, then its input, then the
/// global default) is used wholesale.
#[derive(Debug, Clone, PartialEq)]
pub struct Layers<L> {
    pub global: Option<L>,
    pub by_input: BTreeMap<String, L>,
    pub by_point: BTreeMap<(String, String), L>,
}

impl<L> Default for Layers<L> {
    fn default() -> Self {
        Layers {
            global: None,
            by_input: BTreeMap::new(),
            by_point: BTreeMap::new(),
        }
    }
}

impl<L> Layers<L> {
    pub fn global(layer: L) -> Self {
        Layers {
            global: Some(layer),
            ..Layers::default()
        }
    }

    pub fn with_input(mut self, input: impl Into<String>, layer: L) -> Self {
        self.by_input.insert(input.into(), layer);
        self
    }

    pub fn with_point(mut self, input: impl Into<String>, value: impl Into<String>, layer: L) -> Self {
        self.by_point.insert((input.into(), value.into()), layer);
        self
    }

    pub fn for_var(&self, var: Option<&PointLabel>) -> Option<&L> {
        if let Some(v) = var {
            if let Some(l) = self.by_point.get(&(v.input.clone(), v.value.clone())) {
                return Some(l);
            }
            if let Some(l) = self.by_input.get(&v.input) {
                return Some(l);
            }
        }
        self.global.as_ref()
    }

    fn layers(&self) -> impl Iterator<Item = &L> {
        self.global.iter().chain(self.by_input.values()).chain(self.by_point.values())
    }

    pub fn map<M>(&self, mut f: impl FnMut(&L) -> M) -> Layers<M> {
        Layers {
            global: self.global.as_ref().map(&mut f),
            by_input: self.by_input.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
            by_point: self.by_point.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

/// A total preorder on output values given by integer ranks: `a ⪯ b` iff
/// `rank(a) <= rank(b)`, equal ranks are ties.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderSpec {
    ranks: Layers<BTreeMap<String, u32>>,
}

impl OrderSpec {
    pub fn new(ranks: Layers<BTreeMap<String, u32>>) -> Result<Self, MetricError> {
        for layer in ranks.layers() {
            if let Some((label, _)) = layer.iter().find(|(_, &r)| r == 0) {
                return Err(MetricError::InvalidRank(label.clone()));
            }
        }
        Ok(OrderSpec { ranks })
    }

    /// One rank map shared by every variable.
    pub fn global<S: Into<String>>(ranks: impl IntoIterator<Item = (S, u32)>) -> Result<Self, MetricError> {
        OrderSpec::new(Layers::global(ranks.into_iter().map(|(k, v)| (k.into(), v)).collect()))
    }

    pub fn rank(&self, var: Option<&PointLabel>, value: &str) -> Result<u32, MetricError> {
        self.ranks
            .for_var(var)
            .and_then(|m| m.get(value).copied())
            .ok_or_else(|| MetricError::UnrankedValue {
                value: value.to_string(),
                var: var_name(var),
            })
    }

    pub fn layers(&self) -> &Layers<BTreeMap<String, u32>> {
        &self.ranks
    }
}

/// Ordered partitions of output value sets; cell `k` (0-based) gets rank
/// `k + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    cells: Layers<Vec<Vec<String>>>,
}

impl Partition {
    pub fn new(cells: Layers<Vec<Vec<String>>>) -> Result<Self, MetricError> {
        for layer in cells.layers() {
            let mut seen = std::collections::BTreeSet::new();
            for v in layer.iter().flatten() {
                if !seen.insert(v) {
                    return Err(MetricError::OverlappingCells(v.clone()));
                }
            }
        }
        Ok(Partition { cells })
    }

    pub fn global(cells: Vec<Vec<String>>) -> Result<Self, MetricError> {
        Partition::new(Layers::global(cells))
    }

    pub fn cell_rank(&self, var: Option<&PointLabel>, value: &str) -> Result<u32, MetricError> {
        self.cells
            .for_var(var)
            .and_then(|cells| cells.iter().position(|c| c.iter().any(|v| v == value)))
            .map(|k| k as u32 + 1)
            .ok_or_else(|| MetricError::ValueNotInPartition {
                value: value.to_string(),
                var: var_name(var),
            })
    }
}

/// Numeric embedding of output values.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    values: Layers<BTreeMap<String, Num>>,
}

impl Embedding {
    pub fn new(values: Layers<BTreeMap<String, Num>>) -> Self {
        Embedding { values }
    }

    pub fn global<S: Into<String>>(values: impl IntoIterator<Item = (S, Num)>) -> Self {
        Embedding::new(Layers::global(values.into_iter().map(|(k, v)| (k.into(), v)).collect()))
    }

    /// Embeds labels that parse as numbers (exactly where possible) and
    /// leaves the rest unmapped.
    pub fn parse_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        Embedding::global(
            labels
                .into_iter()
                .filter_map(|l| Num::parse(l, crate::num::Arithmetic::Auto).ok().map(|n| (l, n))),
        )
    }

    pub fn value(&self, var: Option<&PointLabel>, value: &str) -> Result<&Num, MetricError> {
        self.values
            .for_var(var)
            .and_then(|m| m.get(value))
            .ok_or_else(|| MetricError::MissingEmbedding {
                value: value.to_string(),
                var: var_name(var),
            })
    }
}

/// The exponent `p` of `d^(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub fn finite(p: f64) -> Result<Self, MetricError> {
        if p.is_nan() || p < 1.0 {
            return Err(MetricError::InvalidP(p));
        }
        if p.is_infinite() {
            return Ok(PExponent::Infinity);
        }
        Ok(PExponent::Finite(p))
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

/// A validated p.q.-metric on a finite value set, as a dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundMetric {
    labels: Vec<String>,
    dist: Vec<Num>,
}

impl GroundMetric {
    /// Validates nonnegativity, zero diagonal and every triangle
    /// `d(a,c) <= d(a,b) + d(b,c)` exhaustively (floats within `1e-12`).
    pub fn new(labels: Vec<String>, dist: Vec<Num>) -> Result<Self, MetricError> {
        let n = labels.len();
        if dist.len() != n * n {
            return Err(MetricError::GroundAxiomViolation(format!(
                "expected a {n}x{n} matrix, got {} entries",
                dist.len()
            )));
        }
        const TOL: f64 = 1e-12;
        let at = |i: usize, j: usize| &dist[i * n + j];
        for i in 0..n {
            if !at(i, i).is_zero() {
                return Err(MetricError::GroundAxiomViolation(format!(
                    "d({0},{0}) = {1} != 0",
                    labels[i],
                    at(i, i)
                )));
            }
            for j in 0..n {
                if at(i, j).is_negative_tol(TOL) {
                    return Err(MetricError::GroundAxiomViolation(format!(
                        "d({},{}) = {} < 0",
                        labels[i],
                        labels[j],
                        at(i, j)
                    )));
                }
                for k in 0..n {
                    let slack = at(i, j) + at(j, k) - at(i, k);
                    if slack.is_negative_tol(TOL) {
                        return Err(MetricError::GroundAxiomViolation(format!(
                            "d({a},{c}) > d({a},{b}) + d({b},{c})",
                            a = labels[i],
                            b = labels[j],
                            c = labels[k]
                        )));
                    }
                }
            }
        }
        Ok(GroundMetric { labels, dist })
    }

    /// `|e(a) - e(b)|` on the given embedded labels.
    pub fn absolute_difference<S: Into<String>>(points: impl IntoIterator<Item = (S, Num)>) -> Result<Self, MetricError> {
        let (labels, vals): (Vec<String>, Vec<Num>) = points.into_iter().map(|(l, v)| (l.into(), v)).unzip();
        let dist = vals.iter().flat_map(|a| vals.iter().map(move |b| (a - b).abs())).collect();
        GroundMetric::new(labels, dist)
    }

    /// The discrete metric: 0 on equal labels, 1 otherwise.
    pub fn discrete<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Self {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        let dist = (0..n * n)
            .map(|k| if k / n == k % n { Num::zero() } else { Num::one() })
            .collect();
        GroundMetric { labels, dist }
    }

    pub fn distance(&self, a: &str, b: &str) -> Result<&Num, MetricError> {
        let i = self.index(a)?;
        let j = self.index(b)?;
        Ok(&self.dist[i * self.labels.len() + j])
    }

    fn index(&self, label: &str) -> Result<usize, MetricError> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| MetricError::UnknownGroundValue(label.to_string()))
    }
}

/// Distribution of the separation point `U`, independent of the variables.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparationPoints {
    points: Vec<(Num, Num)>,
}

impl SeparationPoints {
    /// `(value, probability)` pairs; probabilities must be nonnegative and
    /// sum to one (exactly for rationals, within 1e-9 for floats).
    pub fn new(points: Vec<(Num, Num)>) -> Result<Self, MetricError> {
        if points.is_empty() {
            return Err(MetricError::InvalidSeparationPoint("no support points".into()));
        }
        if points.iter().any(|(_, p)| p.is_negative_tol(0.0)) {
            return Err(MetricError::InvalidSeparationPoint("negative probability".into()));
        }
        let total: Num = points.iter().map(|(_, p)| p).sum();
        if (total - Num::one()).abs().is_positive_tol(1e-9) {
            return Err(MetricError::InvalidSeparationPoint("probabilities do not sum to 1".into()));
        }
        Ok(SeparationPoints { points })
    }

    pub fn points(&self) -> &[(Num, Num)] {
        &self.points
    }
}

/// Ways of building a new p.q.-metric from an existing one.
#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    /// `d^q` for `0 < q <= 1`.
    Power(f64),
    /// `d / (1 + d)`.
    Bounded,
    /// `max(d, other)`.
    Max(Box<Metric>),
    /// `d + other`.
    Sum(Box<Metric>),
    /// `weights[0] * d + Σ weights[i] * others[i-1]`; weights form a
    /// probability vector.
    Mixture { others: Vec<Metric>, weights: Vec<Num> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Order(OrderSpec),
    Classification(Partition),
    P { p: PExponent, embed: Embedding },
    CondEntropy { base: f64 },
    Frechet { embed: Embedding },
    Separation { embed: Embedding, u: SeparationPoints },
    ExpectedGround(GroundMetric),
    Transformed(Box<Metric>, Transform),
}

impl Metric {
    pub fn cond_entropy(base: f64) -> Result<Metric, MetricError> {
        if base.is_nan() || base <= 1.0 || base.is_infinite() {
            return Err(MetricError::InvalidBase(base));
        }
        Ok(Metric::CondEntropy { base })
    }

    /// Wraps `self` in a transform after checking its parameters.
    pub fn transform(self, t: Transform) -> Result<Metric, MetricError> {
        match &t {
            Transform::Power(q) => {
                if !(*q > 0.0 && *q <= 1.0) {
                    return Err(MetricError::InvalidExponent(*q));
                }
            }
            Transform::Mixture { others, weights } => {
                if weights.len() != others.len() + 1 {
                    return Err(MetricError::InvalidMixture(format!(
                        "{} weights for {} metrics",
                        weights.len(),
                        others.len() + 1
                    )));
                }
                if weights.iter().any(|w| w.is_negative_tol(0.0)) {
                    return Err(MetricError::InvalidMixture("negative weight".into()));
                }
                let total: Num = weights.iter().sum();
                if (total - Num::one()).abs().is_positive_tol(1e-9) {
                    return Err(MetricError::InvalidMixture("weights do not sum to 1".into()));
                }
            }
            Transform::Bounded | Transform::Max(_) | Transform::Sum(_) => {}
        }
        Ok(Metric::Transformed(Box::new(self), t))
    }

    /// Evaluates `d(row, col)` on an ordered pair's joint distribution.
    pub fn evaluate(&self, m: &BivariateMarginal) -> Result<Num, MetricError> {
        match self {
            Metric::Order(ord) => order_distance(m, ord),
            Metric::Classification(part) => classification_distance(m, part),
            Metric::P { p, embed } => p_distance(m, embed, *p),
            Metric::CondEntropy { base } => Ok(conditional_entropy(m, *base)),
            Metric::Frechet { embed } => frechet_distance(m, embed),
            Metric::Separation { embed, u } => separation_distance_independent(m, embed, u),
            Metric::ExpectedGround(g) => expected_ground(m, g),
            Metric::Transformed(base, t) => {
                let d = base.evaluate(m)?;
                match t {
                    Transform::Power(q) => Ok(d.powf(*q)),
                    Transform::Bounded => Ok(&d / &(&Num::one() + &d)),
                    Transform::Max(other) => Ok(d.max(other.evaluate(m)?)),
                    Transform::Sum(other) => Ok(d + other.evaluate(m)?),
                    Transform::Mixture { others, weights } => {
                        let mut acc = &weights[0] * &d;
                        for (w, o) in weights[1..].iter().zip(others) {
                            acc = acc + w * &o.evaluate(m)?;
                        }
                        Ok(acc)
                    }
                }
            }
        }
    }

    /// Short description for reports.
    pub fn describe(&self) -> String {
        match self {
            Metric::Order(_) => "order".into(),
            Metric::Classification(_) => "classification".into(),
            Metric::P { p, .. } => format!("p({p})"),
            Metric::CondEntropy { base } => format!("entropy(base {base})"),
            Metric::Frechet { .. } => "frechet".into(),
            Metric::Separation { .. } => "separation".into(),
            Metric::ExpectedGround(_) => "expected_ground".into(),
            Metric::Transformed(base, t) => {
                let b = base.describe();
                match t {
                    Transform::Power(q) => format!("({b})^{q}"),
                    Transform::Bounded => format!("bounded({b})"),
                    Transform::Max(o) => format!("max({b}, {})", o.describe()),
                    Transform::Sum(o) => format!("{b} + {}", o.describe()),
                    Transform::Mixture { others, .. } => format!(
                        "mixture({b}{})",
                        others.iter().map(|o| format!(", {}", o.describe())).collect::<String>()
                    ),
                }
            }
        }
    }
}
