//! JSON metric configuration.
//!
//! ```json
//! {"kind": "order", "ranks": {"by_input": {"1": {"a": 1, "b": 2}, "2": {"c": 1, "d": 2}}}}
//! {"kind": "classification", "cells": [["lo"], ["mid", "hi"]]}
//! {"kind": "p", "p": 2, "embed": {"lo": 0, "hi": 1}}
//! {"kind": "p", "p": "inf", "embed": {"lo": 0, "hi": 1}}
//! {"kind": "entropy", "base": 2}
//! {"kind": "frechet", "embed": {"lo": 0, "hi": 1}}
//! {"kind": "separation", "embed": {...}, "u": [{"value": 0.5, "p": 1}]}
//! {"kind": "expected_ground", "labels": ["a", "b"], "matrix": [[0, 1], [1, 0]]}
//! ```
//!
//! Per-variable parameters (`ranks`, `cells`, `embed`) are either a single
//! value used for every variable or an object with `global`, `by_input`
//! and `by_point` (input name, then input value) layers. Any metric may
//! carry a `"transform"` list applied in order, e.g.
//! `[{"op": "power", "q": 0.5}, {"op": "bounded"}]`.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::num::{Arithmetic, Num, RawNum};

use super::{
    Embedding, GroundMetric, Layers, Metric, MetricError, OrderSpec, PExponent, Partition, SeparationPoints,
    Transform, DEFAULT_LOG_BASE,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredForm<L> {
    #[serde(default = "Option::default")]
    global: Option<L>,
    #[serde(default = "BTreeMap::new")]
    by_input: BTreeMap<String, L>,
    #[serde(default = "BTreeMap::new")]
    by_point: BTreeMap<String, BTreeMap<String, L>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LayersConfig<L> {
    Layered(LayeredForm<L>),
    Single(L),
}

impl<L: Clone> LayersConfig<L> {
    fn resolve<M>(&self, mut f: impl FnMut(&L) -> Result<M, MetricError>) -> Result<Layers<M>, MetricError> {
        match self {
            LayersConfig::Single(l) => Ok(Layers::global(f(l)?)),
            LayersConfig::Layered(form) => {
                let mut out = Layers {
                    global: form.global.as_ref().map(&mut f).transpose()?,
                    ..Layers::default()
                };
                for (k, v) in &form.by_input {
                    out.by_input.insert(k.clone(), f(v)?);
                }
                for (input, per_value) in &form.by_point {
                    for (value, v) in per_value {
                        out.by_point.insert((input.clone(), value.clone()), f(v)?);
                    }
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PConfig {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UPoint {
    pub value: RawNum,
    pub p: RawNum,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKindConfig {
    Order {
        ranks: LayersConfig<BTreeMap<String, u32>>,
    },
    Classification {
        cells: LayersConfig<Vec<Vec<String>>>,
    },
    P {
        p: PConfig,
        embed: LayersConfig<BTreeMap<String, RawNum>>,
    },
    Entropy {
        #[serde(default)]
        base: Option<f64>,
    },
    Frechet {
        embed: LayersConfig<BTreeMap<String, RawNum>>,
    },
    Separation {
        embed: LayersConfig<BTreeMap<String, RawNum>>,
        u: Vec<UPoint>,
    },
    ExpectedGround {
        labels: Vec<String>,
        matrix: Vec<Vec<RawNum>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformConfig {
    Power { q: f64 },
    Bounded,
    Max { other: Box<MetricConfig> },
    Sum { other: Box<MetricConfig> },
    Mixture { weights: Vec<RawNum>, others: Vec<MetricConfig> },
}

/// A metric as written in JSON: a kind, its parameters, an optional name
/// used in reports and an optional transform chain.
#[derive(Debug, Clone, Deserialize)]
pub struct MetricConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: MetricKindConfig,
    #[serde(default)]
    pub transform: Vec<TransformConfig>,
}

fn num(raw: &RawNum, mode: Arithmetic) -> Result<Num, MetricError> {
    raw.to_num(mode).map_err(|e| MetricError::Config(e.to_string()))
}

fn embedding(cfg: &LayersConfig<BTreeMap<String, RawNum>>, mode: Arithmetic) -> Result<Embedding, MetricError> {
    cfg.resolve(|m| {
        m.iter()
            .map(|(k, v)| Ok((k.clone(), num(v, mode)?)))
            .collect::<Result<BTreeMap<_, _>, MetricError>>()
    })
    .map(Embedding::new)
}

impl MetricConfig {
    pub fn from_json(text: &str) -> Result<MetricConfig, MetricError> {
        serde_json::from_str(text).map_err(|e| MetricError::Config(e.to_string()))
    }

    /// A JSON document holding either one metric or a list of metrics.
    pub fn list_from_json(text: &str) -> Result<Vec<MetricConfig>, MetricError> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum OneOrMany {
            Many(Vec<MetricConfig>),
            One(Box<MetricConfig>),
        }
        match serde_json::from_str::<OneOrMany>(text) {
            Ok(OneOrMany::Many(v)) => Ok(v),
            Ok(OneOrMany::One(m)) => Ok(vec![*m]),
            Err(_) => {
                // Re-parse as a single metric for a more useful message.
                MetricConfig::from_json(text).map(|m| vec![m])
            }
        }
    }

    pub fn label(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Builds the metric, parsing numbers under `mode`.
    pub fn build(&self, mode: Arithmetic) -> Result<Metric, MetricError> {
        let base = match &self.kind {
            MetricKindConfig::Order { ranks } => Metric::Order(OrderSpec::new(ranks.resolve(|m| Ok(m.clone()))?)?),
            MetricKindConfig::Classification { cells } => {
                Metric::Classification(Partition::new(cells.resolve(|c| Ok(c.clone()))?)?)
            }
            MetricKindConfig::P { p, embed } => {
                let p = match p {
                    PConfig::Number(x) => PExponent::finite(*x)?,
                    PConfig::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => PExponent::Infinity,
                    PConfig::Text(s) => PExponent::finite(
                        s.parse()
                            .map_err(|_| MetricError::Config(format!("cannot parse p = `{s}`")))?,
                    )?,
                };
                Metric::P {
                    p,
                    embed: embedding(embed, mode)?,
                }
            }
            MetricKindConfig::Entropy { base } => Metric::cond_entropy(base.unwrap_or(DEFAULT_LOG_BASE))?,
            MetricKindConfig::Frechet { embed } => Metric::Frechet {
                embed: embedding(embed, mode)?,
            },
            MetricKindConfig::Separation { embed, u } => Metric::Separation {
                embed: embedding(embed, mode)?,
                u: SeparationPoints::new(
                    u.iter()
                        .map(|pt| Ok((num(&pt.value, mode)?, num(&pt.p, mode)?)))
                        .collect::<Result<_, MetricError>>()?,
                )?,
            },
            MetricKindConfig::ExpectedGround { labels, matrix } => {
                if matrix.len() != labels.len() || matrix.iter().any(|r| r.len() != labels.len()) {
                    return Err(MetricError::GroundAxiomViolation("matrix must be square over labels".into()));
                }
                let dist = matrix
                    .iter()
                    .flatten()
                    .map(|x| num(x, mode))
                    .collect::<Result<Vec<_>, _>>()?;
                Metric::ExpectedGround(GroundMetric::new(labels.clone(), dist)?)
            }
        };
        self.transform.iter().try_fold(base, |metric, t| {
            let t = match t {
                TransformConfig::Power { q } => Transform::Power(*q),
                TransformConfig::Bounded => Transform::Bounded,
                TransformConfig::Max { other } => Transform::Max(Box::new(other.build(mode)?)),
                TransformConfig::Sum { other } => Transform::Sum(Box::new(other.build(mode)?)),
                TransformConfig::Mixture { weights, others } => Transform::Mixture {
                    weights: weights.iter().map(|w| num(w, mode)).collect::<Result<_, _>>()?,
                    others: others.iter().map(|o| o.build(mode)).collect::<Result<_, _>>()?,
                },
            };
            metric.transform(t)
        })
    }
}
