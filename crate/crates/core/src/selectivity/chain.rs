//! Chain inequality tests over irreducible sequences.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::metrics::{Layers, Metric, OrderSpec};
use crate::num::{Num, Regime};
use crate::probspace::{InputPoint, PointLabel, System, Treatment};

use super::sequences::{CoverMap, EnumerationOptions, SequenceEnumerator, SequenceKind, SequenceWitness};
use super::{check_marginal_selectivity, MarginalSelectivityReport, SelectivityError};

pub const DEFAULT_EPS_TEST: f64 = 1e-9;

/// A metric with the name it is reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedMetric {
    pub name: String,
    pub metric: Metric,
}

impl NamedMetric {
    pub fn new(name: impl Into<String>, metric: Metric) -> Self {
        NamedMetric {
            name: name.into(),
            metric,
        }
    }
}

/// One evaluated chain inequality `d(x_1,x_l) <= Σ d(x_{i-1},x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub metric: String,
    pub sequence: Vec<PointLabel>,
    pub covers: Vec<Vec<String>>,
    pub lhs: Num,
    pub rhs: Vec<Num>,
    /// `Σ rhs - lhs`; negative means the inequality fails.
    pub residual: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_exact: Option<String>,
    pub violated: bool,
}

fn pair_distance(
    system: &System,
    metric: &Metric,
    x: InputPoint,
    y: InputPoint,
    cover: &Treatment,
) -> Result<Num, SelectivityError> {
    let design = system.design();
    if !cover.contains(x) || !cover.contains(y) {
        return Err(SelectivityError::NotRealizable);
    }
    let table = system.table(cover).ok_or(SelectivityError::NotRealizable)?;
    let m = if x.input == y.input {
        table.diagonal(design, x.input)
    } else {
        table.bivariate(design, x.input, y.input)?
    };
    Ok(metric.evaluate(&m)?)
}

fn is_violation(residual: &Num, eps_test: f64) -> bool {
    if residual.is_exact() {
        residual.is_negative_tol(0.0)
    } else {
        residual.is_negative_tol(eps_test)
    }
}

fn report(
    system: &System,
    name: &str,
    witness: &SequenceWitness,
    lhs: Num,
    rhs: Vec<Num>,
    eps_test: f64,
) -> ChainReport {
    let design = system.design();
    let total: Num = rhs.iter().sum();
    let residual = total - &lhs;
    ChainReport {
        metric: name.to_string(),
        sequence: witness.points.iter().map(|&p| design.point_label(p)).collect(),
        covers: witness.covers.iter().map(|t| design.treatment_labels(t)).collect(),
        lhs,
        rhs,
        violated: is_violation(&residual, eps_test),
        residual_exact: residual.as_exact().map(|r| r.to_string()),
        residual,
    }
}

/// Evaluates one chain inequality for a realizable sequence.
pub fn chain_test(
    system: &System,
    metric: &NamedMetric,
    witness: &SequenceWitness,
    eps_test: f64,
) -> Result<ChainReport, SelectivityError> {
    if !witness.is_valid_for(system.design()) {
        return Err(SelectivityError::NotRealizable);
    }
    let mut pairs = witness.pairs();
    let (x, y, t) = pairs.next().expect("nonempty");
    let lhs = pair_distance(system, &metric.metric, x, y, t)?;
    let rhs = pairs
        .map(|(a, b, t)| pair_distance(system, &metric.metric, a, b, t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(report(system, &metric.name, witness, lhs, rhs, eps_test))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub enumeration: EnumerationOptions,
    pub eps_test: f64,
    pub eps_marginal: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            enumeration: EnumerationOptions::default(),
            eps_test: DEFAULT_EPS_TEST,
            eps_marginal: crate::probspace::DEFAULT_EPS_SUM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub name: String,
    pub description: String,
    pub tests: usize,
    pub violations: usize,
    pub min_residual: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub regime: Regime,
    pub marginal_selectivity: MarginalSelectivityReport,
    pub max_len: usize,
    pub sequences_tested: usize,
    pub chain_tests: usize,
    pub metrics: Vec<MetricSummary>,
    pub violations: Vec<ChainReport>,
    /// Set when the sequence cap was hit or irreducible sequences longer
    /// than `max_len` exist.
    pub truncated: bool,
    pub truncation: Vec<String>,
}

impl SuiteReport {
    pub fn has_violations(&self) -> bool {
        !self.violations.is_empty()
    }

    /// No chain violations and marginal selectivity holds.
    pub fn passed(&self) -> bool {
        self.marginal_selectivity.passed && !self.has_violations()
    }
}

/// Checks marginal selectivity, then every chain inequality over the
/// irreducible sequences up to the length cap, for every metric. Chain
/// tests are skipped when marginal selectivity fails.
pub fn run_suite(system: &System, metrics: &[NamedMetric], opts: SuiteOptions) -> Result<SuiteReport, SelectivityError> {
    let design = system.design();
    let ms = check_marginal_selectivity(system, opts.eps_marginal);
    let mut summaries: Vec<MetricSummary> = metrics
        .iter()
        .map(|m| MetricSummary {
            name: m.name.clone(),
            description: m.metric.describe(),
            tests: 0,
            violations: 0,
            min_residual: None,
        })
        .collect();
    let mut out = SuiteReport {
        regime: system.regime(),
        marginal_selectivity: ms,
        max_len: opts.enumeration.max_len,
        sequences_tested: 0,
        chain_tests: 0,
        metrics: Vec::new(),
        violations: Vec::new(),
        truncated: false,
        truncation: Vec::new(),
    };
    if !out.marginal_selectivity.passed {
        out.truncation.push("chain tests skipped: marginal selectivity fails".into());
        out.metrics = summaries;
        return Ok(out);
    }

    let map = CoverMap::new(design);
    let mut caches: Vec<HashMap<(usize, usize), Num>> = vec![HashMap::new(); metrics.len()];
    let seqs = SequenceEnumerator::new(design, Some(&map), SequenceKind::Irreducible, opts.enumeration)?;
    for item in seqs {
        let witness = match item {
            Ok(w) => w,
            Err(SelectivityError::CapExceeded(n)) => {
                out.truncated = true;
                out.truncation.push(format!("stopped after {n} sequences"));
                break;
            }
            Err(e) => return Err(e),
        };
        if witness.points[0] == witness.points[witness.len() - 1] {
            continue;
        }
        out.sequences_tested += 1;
        for (k, nm) in metrics.iter().enumerate() {
            let mut dist = |x: InputPoint, y: InputPoint, t: &Treatment| -> Result<Num, SelectivityError> {
                let key = (map.id(x), map.id(y));
                if let Some(d) = caches[k].get(&key) {
                    return Ok(d.clone());
                }
                let d = pair_distance(system, &nm.metric, x, y, t)?;
                caches[k].insert(key, d.clone());
                Ok(d)
            };
            let mut pairs = witness.pairs();
            let (x, y, t) = pairs.next().expect("nonempty");
            let lhs = dist(x, y, t)?;
            let mut rhs = Vec::with_capacity(witness.len());
            for (a, b, t) in pairs {
                rhs.push(dist(a, b, t)?);
            }
            let r = report(system, &nm.name, &witness, lhs, rhs, opts.eps_test);
            out.chain_tests += 1;
            let s = &mut summaries[k];
            s.tests += 1;
            if s.min_residual.as_ref().is_none_or(|m| r.residual < *m) {
                s.min_residual = Some(r.residual.clone());
            }
            if r.violated {
                s.violations += 1;
                out.violations.push(r);
            }
        }
    }

    let max_len = opts.enumeration.max_len;
    if max_len < super::MAX_LEN_LIMIT {
        let probe = EnumerationOptions {
            min_len: max_len + 1,
            max_len: max_len + 1,
            max_sequences: 1,
        };
        let longer = SequenceEnumerator::new(design, Some(&map), SequenceKind::Irreducible, probe)?
            .next()
            .is_some();
        if longer {
            out.truncated = true;
            out.truncation
                .push(format!("irreducible sequences longer than {max_len} exist and were not tested"));
        }
    }
    out.metrics = summaries;
    Ok(out)
}

/// Order-distances for every choice of natural or reversed output order
/// per input, ranking each point's declared output values. Capped at 64
/// combinations.
pub fn default_order_metrics(system: &System) -> Vec<NamedMetric> {
    let design = system.design();
    let n = design.num_inputs();
    let combos: u64 = if n >= 6 { 64 } else { 1 << n };
    let mut out = Vec::new();
    for mask in 0..combos {
        let mut layers: Layers<BTreeMap<String, u32>> = Layers::default();
        let mut tags = Vec::new();
        for (i, input) in design.inputs().iter().enumerate() {
            let reversed = mask & (1 << i) != 0;
            tags.push(format!("{}:{}", input.name, if reversed { "desc" } else { "asc" }));
            for v in 0..input.values.len() {
                let vals = system.outcomes().values(InputPoint::new(i, v));
                let k = vals.len() as u32;
                let ranks = vals
                    .iter()
                    .enumerate()
                    .map(|(j, o)| (o.clone(), if reversed { k - j as u32 } else { j as u32 + 1 }))
                    .collect();
                layers = layers.with_point(input.name.clone(), input.values[v].clone(), ranks);
            }
        }
        let spec = OrderSpec::new(layers).expect("ranks are a permutation");
        out.push(NamedMetric::new(format!("order[{}]", tags.join(",")), Metric::Order(spec)));
    }
    out
}
