//! Marginal selectivity, treatment-realizable sequences and the chain
//! inequality test suite.

mod chain;
mod sequences;

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::metrics::MetricError;
use crate::num::Num;
use crate::probspace::{Design, InputPoint, JointTable, OutcomeSpace, PointLabel, ProbError, System, TreatmentTable};

pub use chain::{
    chain_test, default_order_metrics, run_suite, ChainReport, MetricSummary, NamedMetric, SuiteOptions, SuiteReport,
    DEFAULT_EPS_TEST,
};
pub use sequences::{
    enumerate_irreducible, enumerate_realizable, pair_coverable, tetrads, CoverMap, EnumerationOptions,
    SequenceEnumerator, SequenceKind, SequenceWitness, DEFAULT_MAX_LEN, DEFAULT_MAX_SEQUENCES, MAX_LEN_LIMIT,
};

/// Above this many inputs only singletons and pairs are compared.
pub const EXHAUSTIVE_SUBSET_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SelectivityError {
    #[error("sequence enumeration exceeded {0} sequences")]
    CapExceeded(usize),
    #[error("sequence length bounds {min}..={max} invalid (need 3 <= min <= max <= 8)")]
    InvalidLength { min: usize, max: usize },
    #[error("sequence is not treatment-realizable")]
    NotRealizable,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// Where the largest marginal discrepancy was found.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalWitness {
    pub inputs: Vec<String>,
    pub values: Vec<String>,
    pub treatments: [Vec<String>; 2],
    pub outcome: Vec<String>,
    pub discrepancy: Num,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalSelectivityReport {
    pub passed: bool,
    pub max_discrepancy: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_discrepancy_exact: Option<String>,
    pub worst: Option<MarginalWitness>,
    pub subsets_checked: usize,
    pub exhaustive: bool,
}

fn subsets(n: usize) -> (Vec<Vec<usize>>, bool) {
    if n <= EXHAUSTIVE_SUBSET_LIMIT {
        let all = (1u32..(1 << n) - 1)
            .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
            .collect();
        (all, true)
    } else {
        let mut out: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for i in 0..n {
            for j in i + 1..n {
                out.push(vec![i, j]);
            }
        }
        (out, false)
    }
}

/// Compares, for every proper subset of inputs, the marginal of those
/// inputs' outputs across all treatments agreeing on them. Exact systems
/// must agree exactly; float systems within `eps`.
pub fn check_marginal_selectivity(system: &System, eps: f64) -> MarginalSelectivityReport {
    let design = system.design();
    let (subs, exhaustive) = subsets(design.num_inputs());
    let mut worst: Option<MarginalWitness> = None;
    let mut max = Num::zero();
    if !system.is_exact() {
        max = max.to_float();
    }
    for sub in &subs {
        let mut groups: BTreeMap<Vec<usize>, Vec<(&TreatmentTable, JointTable)>> = BTreeMap::new();
        for t in system.tables() {
            let key: Vec<usize> = sub.iter().map(|&i| t.treatment.value_of(i)).collect();
            groups.entry(key).or_default().push((t, t.table.marginalize(sub)));
        }
        for (key, members) in &groups {
            if members.len() < 2 {
                continue;
            }
            let cells = members[0].1.probs().len();
            for c in 0..cells {
                let (mut hi, mut lo) = (0usize, 0usize);
                for (k, (_, m)) in members.iter().enumerate() {
                    if m.probs()[c] > members[hi].1.probs()[c] {
                        hi = k;
                    }
                    if m.probs()[c] < members[lo].1.probs()[c] {
                        lo = k;
                    }
                }
                let d = &members[hi].1.probs()[c] - &members[lo].1.probs()[c];
                if d > max {
                    max = d.clone();
                    let outcome_idx = members[0].1.unflatten(c);
                    let axes = members[0].1.axes();
                    worst = Some(MarginalWitness {
                        inputs: sub.iter().map(|&i| design.inputs()[i].name.clone()).collect(),
                        values: sub
                            .iter()
                            .zip(key)
                            .map(|(&i, &v)| design.inputs()[i].values[v].clone())
                            .collect(),
                        treatments: [
                            design.treatment_labels(&members[hi].0.treatment),
                            design.treatment_labels(&members[lo].0.treatment),
                        ],
                        outcome: outcome_idx.iter().enumerate().map(|(a, &o)| axes[a][o].clone()).collect(),
                        discrepancy: d,
                    });
                }
            }
        }
    }
    let passed = if max.is_exact() { max.is_zero() } else { max.to_f64() <= eps };
    MarginalSelectivityReport {
        passed,
        max_discrepancy_exact: max.as_exact().map(|r| r.to_string()),
        max_discrepancy: max,
        worst,
        subsets_checked: subs.len(),
        exhaustive,
    }
}

/// Push-forward of every output through a relabeling `f(point, value)`.
/// Output value sets become the images, in order of first appearance.
pub fn transform_outputs(system: &System, f: impl Fn(&PointLabel, &str) -> String) -> Result<System, ProbError> {
    let design: &Design = system.design();
    let mut new_values: Vec<Vec<Vec<String>>> = Vec::new();
    let mut maps: Vec<Vec<Vec<usize>>> = Vec::new();
    for (i, input) in design.inputs().iter().enumerate() {
        let mut vals_i = Vec::new();
        let mut maps_i = Vec::new();
        for v in 0..input.values.len() {
            let p = InputPoint::new(i, v);
            let label = design.point_label(p);
            let mut image: Vec<String> = Vec::new();
            let mut index: HashMap<String, usize> = HashMap::new();
            let mut map = Vec::new();
            for o in system.outcomes().values(p) {
                let y = f(&label, o);
                let k = *index.entry(y.clone()).or_insert_with(|| {
                    image.push(y);
                    image.len() - 1
                });
                map.push(k);
            }
            vals_i.push(image);
            maps_i.push(map);
        }
        new_values.push(vals_i);
        maps.push(maps_i);
    }
    let outcomes = OutcomeSpace::per_point(design, new_values)?;
    let mut tables = Vec::with_capacity(system.tables().len());
    for t in system.tables() {
        let axes = outcomes.axes_for(&t.treatment);
        let dims: Vec<usize> = axes.iter().map(Vec::len).collect();
        let size: usize = dims.iter().product();
        let zero = if t.table.is_exact() { Num::zero() } else { Num::float(0.0) };
        let mut probs = vec![zero; size];
        for (flat, p) in t.table.probs().iter().enumerate() {
            let idx = t.table.unflatten(flat);
            let mut target = 0;
            for (a, &o) in idx.iter().enumerate() {
                target = target * dims[a] + maps[a][t.treatment.value_of(a)][o];
            }
            probs[target] = &probs[target] + p;
        }
        tables.push(TreatmentTable::new(t.treatment.clone(), JointTable::new(axes, probs)?));
    }
    System::new(design.clone(), outcomes, tables, f64::INFINITY)
}
