//! Finite designs, treatments and per-treatment joint output tables.
//!
//! A [`Design`] names the inputs, their value sets, and the allowable
//! treatments. Each treatment carries a [`TreatmentTable`]: the joint
//! distribution of one output per input, observed under that treatment.
//! Everything here is immutable once built.

mod json;
mod table;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::num::{Num, Regime};

pub use json::{load_system, load_system_str, LoadError, LoadOptions, SystemFile};
pub use table::{BivariateMarginal, JointTable};

/// Largest explicit treatment list accepted.
pub const MAX_EXPLICIT_TREATMENTS: usize = 100_000;

/// Default tolerance on `|sum - 1|` for float tables.
pub const DEFAULT_EPS_SUM: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("design has no inputs")]
    NoInputs,
    #[error("input `{0}` has an empty value set")]
    EmptyValueSet(String),
    #[error("duplicate input name `{0}`")]
    DuplicateInput(String),
    #[error("input `{input}` lists value `{value}` twice")]
    DuplicateValue { input: String, value: String },
    #[error("treatment set is empty")]
    NoTreatments,
    #[error("treatment {0} appears twice")]
    DuplicateTreatment(String),
    #[error("treatment {0} does not assign exactly one value per input")]
    MalformedTreatment(String),
    #[error("explicit treatment list has {0} entries (cap {MAX_EXPLICIT_TREATMENTS})")]
    TooManyTreatments(usize),
    #[error("unknown input `{0}`")]
    UnknownInput(String),
    #[error("both arguments name input `{0}`")]
    SameInput(String),
    #[error("input point ({input}, {value}) has an empty output value set")]
    EmptyOutcomeSet { input: String, value: String },
    #[error("table shape does not match its axes: expected {expected} cells, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("probabilities sum to {sum} (off by {delta})")]
    SumNotOne { sum: f64, delta: f64 },
    #[error("negative probability {0}")]
    NegativeProbability(String),
    #[error("invalid system: {0}")]
    Invalid(String),
}

/// An input point `(input, value)` by index into the design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InputPoint {
    pub input: usize,
    pub value: usize,
}

impl InputPoint {
    pub fn new(input: usize, value: usize) -> Self {
        InputPoint { input, value }
    }
}

/// Human-readable identity of an input point, used to key per-variable
/// parameters (ranks, embeddings) and in reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PointLabel {
    pub input: String,
    pub value: String,
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.input, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Input {
    pub name: String,
    pub values: Vec<String>,
}

impl Input {
    pub fn new<S: Into<String>>(name: S, values: impl IntoIterator<Item = S>) -> Self {
        Input {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }
}

/// One value index per input, in design input order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Treatment(pub Vec<usize>);

impl Treatment {
    pub fn value_of(&self, input: usize) -> usize {
        self.0[input]
    }

    pub fn contains(&self, point: InputPoint) -> bool {
        self.0.get(point.input) == Some(&point.value)
    }

    pub fn points(&self) -> impl Iterator<Item = InputPoint> + '_ {
        self.0.iter().enumerate().map(|(i, &v)| InputPoint::new(i, v))
    }
}

#[derive(Debug, Clone)]
enum TreatmentSet {
    Full,
    Explicit {
        sorted: Vec<Treatment>,
        index: HashMap<Treatment, usize>,
    },
}

#[derive(Debug, Clone)]
pub struct Design {
    inputs: Vec<Input>,
    treatments: TreatmentSet,
}

impl Design {
    /// A design whose treatment set is the full product of value sets.
    pub fn full(inputs: Vec<Input>) -> Result<Self, ProbError> {
        check_inputs(&inputs)?;
        Ok(Design {
            inputs,
            treatments: TreatmentSet::Full,
        })
    }

    /// A design with an explicit treatment list. Order of `treatments` is
    /// irrelevant; they are kept sorted lexicographically.
    pub fn explicit(inputs: Vec<Input>, treatments: Vec<Treatment>) -> Result<Self, ProbError> {
        check_inputs(&inputs)?;
        if treatments.is_empty() {
            return Err(ProbError::NoTreatments);
        }
        if treatments.len() > MAX_EXPLICIT_TREATMENTS {
            return Err(ProbError::TooManyTreatments(treatments.len()));
        }
        for t in &treatments {
            let ok = t.0.len() == inputs.len()
                && t.0.iter().zip(&inputs).all(|(&v, inp)| v < inp.values.len());
            if !ok {
                return Err(ProbError::MalformedTreatment(format!("{:?}", t.0)));
            }
        }
        let mut sorted = treatments;
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(ProbError::DuplicateTreatment(format!("{:?}", pair[0].0)));
            }
        }
        let index = sorted.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect();
        Ok(Design {
            inputs,
            treatments: TreatmentSet::Explicit { sorted, index },
        })
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_full(&self) -> bool {
        matches!(self.treatments, TreatmentSet::Full)
    }

    pub fn input_index(&self, name: &str) -> Option<usize> {
        self.inputs.iter().position(|i| i.name == name)
    }

    pub fn value_index(&self, input: usize, value: &str) -> Option<usize> {
        self.inputs[input].values.iter().position(|v| v == value)
    }

    /// Number of treatments; saturates for astronomically large full designs.
    pub fn treatment_count(&self) -> usize {
        match &self.treatments {
            TreatmentSet::Full => self
                .inputs
                .iter()
                .try_fold(1usize, |acc, i| acc.checked_mul(i.values.len()))
                .unwrap_or(usize::MAX),
            TreatmentSet::Explicit { sorted, .. } => sorted.len(),
        }
    }

    /// Treatments in lexicographic order of value indices. Full designs are
    /// enumerated lazily.
    pub fn treatments(&self) -> Box<dyn Iterator<Item = Treatment> + '_> {
        match &self.treatments {
            TreatmentSet::Full => Box::new(FullProduct::new(
                self.inputs.iter().map(|i| i.values.len()).collect(),
            )),
            TreatmentSet::Explicit { sorted, .. } => Box::new(sorted.iter().cloned()),
        }
    }

    pub fn contains_treatment(&self, t: &Treatment) -> bool {
        if t.0.len() != self.inputs.len() {
            return false;
        }
        match &self.treatments {
            TreatmentSet::Full => t.0.iter().zip(&self.inputs).all(|(&v, i)| v < i.values.len()),
            TreatmentSet::Explicit { index, .. } => index.contains_key(t),
        }
    }

    /// All input points, ordered by input then value.
    pub fn points(&self) -> Vec<InputPoint> {
        self.inputs
            .iter()
            .enumerate()
            .flat_map(|(i, inp)| (0..inp.values.len()).map(move |v| InputPoint::new(i, v)))
            .collect()
    }

    pub fn point_label(&self, p: InputPoint) -> PointLabel {
        PointLabel {
            input: self.inputs[p.input].name.clone(),
            value: self.inputs[p.input].values[p.value].clone(),
        }
    }

    pub fn treatment_labels(&self, t: &Treatment) -> Vec<String> {
        t.0.iter()
            .zip(&self.inputs)
            .map(|(&v, i)| i.values[v].clone())
            .collect()
    }

    pub fn treatment_from_labels(&self, labels: &[String]) -> Option<Treatment> {
        if labels.len() != self.inputs.len() {
            return None;
        }
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| self.value_index(i, l))
            .collect::<Option<Vec<_>>>()
            .map(Treatment)
    }

    /// The lexicographically smallest allowable treatment containing every
    /// point in `points`, if any.
    pub fn covering_treatment(&self, points: &[InputPoint]) -> Option<Treatment> {
        let mut fixed: Vec<Option<usize>> = vec![None; self.inputs.len()];
        for p in points {
            match fixed[p.input] {
                Some(v) if v != p.value => return None,
                _ => fixed[p.input] = Some(p.value),
            }
        }
        match &self.treatments {
            TreatmentSet::Full => Some(Treatment(fixed.iter().map(|v| v.unwrap_or(0)).collect())),
            TreatmentSet::Explicit { sorted, .. } => sorted
                .iter()
                .find(|t| {
                    fixed
                        .iter()
                        .zip(&t.0)
                        .all(|(f, &v)| f.is_none_or(|f| f == v))
                })
                .cloned(),
        }
    }
}

fn check_inputs(inputs: &[Input]) -> Result<(), ProbError> {
    if inputs.is_empty() {
        return Err(ProbError::NoInputs);
    }
    for (i, inp) in inputs.iter().enumerate() {
        if inputs[..i].iter().any(|o| o.name == inp.name) {
            return Err(ProbError::DuplicateInput(inp.name.clone()));
        }
        if inp.values.is_empty() {
            return Err(ProbError::EmptyValueSet(inp.name.clone()));
        }
        for (j, v) in inp.values.iter().enumerate() {
            if inp.values[..j].contains(v) {
                return Err(ProbError::DuplicateValue {
                    input: inp.name.clone(),
                    value: v.clone(),
                });
            }
        }
    }
    Ok(())
}

struct FullProduct {
    radix: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl FullProduct {
    fn new(radix: Vec<usize>) -> Self {
        let next = if radix.iter().all(|&r| r > 0) {
            Some(vec![0; radix.len()])
        } else {
            None
        };
        FullProduct { radix, next }
    }
}

impl Iterator for FullProduct {
    type Item = Treatment;

    fn next(&mut self) -> Option<Treatment> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] < self.radix[i] {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
        }
        Some(Treatment(current))
    }
}

/// Output value labels per input point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    values: Vec<Vec<Vec<String>>>,
}

impl OutcomeSpace {
    /// The same output value set for every value of an input.
    pub fn per_input(design: &Design, per_input: Vec<Vec<String>>) -> Result<Self, ProbError> {
        if per_input.len() != design.num_inputs() {
            return Err(ProbError::Invalid(format!(
                "{} output sets for {} inputs",
                per_input.len(),
                design.num_inputs()
            )));
        }
        let values = design
            .inputs()
            .iter()
            .zip(per_input)
            .map(|(inp, outs)| vec![outs; inp.values.len()])
            .collect();
        OutcomeSpace::per_point(design, values)
    }

    /// Output value sets indexed `[input][value]`.
    pub fn per_point(design: &Design, values: Vec<Vec<Vec<String>>>) -> Result<Self, ProbError> {
        let shape_ok = values.len() == design.num_inputs()
            && values
                .iter()
                .zip(design.inputs())
                .all(|(v, inp)| v.len() == inp.values.len());
        if !shape_ok {
            return Err(ProbError::Invalid("output sets do not match the design shape".into()));
        }
        for (i, per_value) in values.iter().enumerate() {
            for (w, outs) in per_value.iter().enumerate() {
                if outs.is_empty() {
                    return Err(ProbError::EmptyOutcomeSet {
                        input: design.inputs()[i].name.clone(),
                        value: design.inputs()[i].values[w].clone(),
                    });
                }
                for (k, o) in outs.iter().enumerate() {
                    if outs[..k].contains(o) {
                        return Err(ProbError::Invalid(format!(
                            "output value `{o}` listed twice for ({}, {})",
                            design.inputs()[i].name,
                            design.inputs()[i].values[w]
                        )));
                    }
                }
            }
        }
        Ok(OutcomeSpace { values })
    }

    pub fn values(&self, p: InputPoint) -> &[String] {
        &self.values[p.input][p.value]
    }

    pub fn size(&self, p: InputPoint) -> usize {
        self.values[p.input][p.value].len()
    }

    /// Axes of the joint table observed under treatment `t`.
    pub fn axes_for(&self, t: &Treatment) -> Vec<Vec<String>> {
        t.points().map(|p| self.values(p).to_vec()).collect()
    }

    /// Whether every input uses one output set regardless of its value.
    pub fn is_per_input(&self) -> bool {
        self.values.iter().all(|per| per.windows(2).all(|w| w[0] == w[1]))
    }
}

/// The joint output distribution observed under one treatment. Axes follow
/// design input order.
#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentTable {
    pub treatment: Treatment,
    pub table: JointTable,
}

impl TreatmentTable {
    pub fn new(treatment: Treatment, table: JointTable) -> Self {
        TreatmentTable { treatment, table }
    }

    /// Marginal over the inputs in `subset`, in the order given.
    pub fn marginalize(&self, subset: &[usize]) -> Result<JointTable, ProbError> {
        for &s in subset {
            if s >= self.table.num_axes() {
                return Err(ProbError::UnknownInput(s.to_string()));
            }
        }
        Ok(self.table.marginalize(subset))
    }

    /// Ordered pair marginal of the outputs for inputs `first` and
    /// `second`, tagged with the input points they belong to.
    pub fn bivariate(
        &self,
        design: &Design,
        first: usize,
        second: usize,
    ) -> Result<BivariateMarginal, ProbError> {
        let n = self.table.num_axes();
        if first >= n {
            return Err(ProbError::UnknownInput(first.to_string()));
        }
        if second >= n {
            return Err(ProbError::UnknownInput(second.to_string()));
        }
        if first == second {
            return Err(ProbError::SameInput(design.inputs()[first].name.clone()));
        }
        let joint = self.table.marginalize(&[first, second]);
        let row = design.point_label(InputPoint::new(first, self.treatment.value_of(first)));
        let col = design.point_label(InputPoint::new(second, self.treatment.value_of(second)));
        Ok(BivariateMarginal::from_joint(joint).with_vars(Some(row), Some(col)))
    }

    /// Marginal of a single input point's output paired with itself.
    pub fn diagonal(&self, design: &Design, input: usize) -> BivariateMarginal {
        let single = self.table.marginalize(&[input]);
        let label = design.point_label(InputPoint::new(input, self.treatment.value_of(input)));
        BivariateMarginal::diagonal(single.axes()[0].clone(), single.probs().to_vec())
            .with_vars(Some(label.clone()), Some(label))
    }
}

/// A validated design with one table per allowable treatment.
#[derive(Debug, Clone)]
pub struct System {
    design: Design,
    outcomes: OutcomeSpace,
    tables: Vec<TreatmentTable>,
    index: HashMap<Treatment, usize>,
    regime: Regime,
}

impl System {
    /// Builds a system, failing on the first validation issue.
    pub fn new(
        design: Design,
        outcomes: OutcomeSpace,
        tables: Vec<TreatmentTable>,
        eps_sum: f64,
    ) -> Result<Self, ProbError> {
        let report = validate_system(&design, &outcomes, &tables, eps_sum);
        if let Some(issue) = report.issues.first() {
            return Err(issue.to_error());
        }
        Ok(System::assemble(design, outcomes, tables))
    }

    pub(crate) fn assemble(design: Design, outcomes: OutcomeSpace, mut tables: Vec<TreatmentTable>) -> Self {
        tables.sort_by(|a, b| a.treatment.cmp(&b.treatment));
        let index = tables
            .iter()
            .enumerate()
            .map(|(i, t)| (t.treatment.clone(), i))
            .collect();
        let exact = tables.iter().all(|t| t.table.is_exact());
        System {
            design,
            outcomes,
            tables,
            index,
            regime: if exact { Regime::Rational } else { Regime::Float },
        }
    }

    pub fn design(&self) -> &Design {
        &self.design
    }

    pub fn outcomes(&self) -> &OutcomeSpace {
        &self.outcomes
    }

    /// Tables in lexicographic treatment order.
    pub fn tables(&self) -> &[TreatmentTable] {
        &self.tables
    }

    pub fn table(&self, t: &Treatment) -> Option<&TreatmentTable> {
        self.index.get(t).map(|&i| &self.tables[i])
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn is_exact(&self) -> bool {
        self.regime == Regime::Rational
    }

    /// A copy with every probability converted to float.
    pub fn to_float(&self) -> System {
        let tables = self
            .tables
            .iter()
            .map(|t| TreatmentTable::new(t.treatment.clone(), t.table.to_float()))
            .collect();
        System::assemble(self.design.clone(), self.outcomes.clone(), tables)
    }
}

/// One problem found while validating a system.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationIssue {
    MissingTreatment { treatment: Vec<String> },
    ExtraTreatment { treatment: Vec<String> },
    DuplicateTable { treatment: Vec<String> },
    ValueSetMismatch { treatment: Vec<String>, detail: String },
    NegativeProbability { treatment: Vec<String>, outcome: Vec<String>, p: f64 },
    SumNotOne { treatment: Vec<String>, sum: f64, delta: f64 },
}

impl ValidationIssue {
    pub fn to_error(&self) -> ProbError {
        match self {
            ValidationIssue::SumNotOne { sum, delta, .. } => ProbError::SumNotOne { sum: *sum, delta: *delta },
            ValidationIssue::NegativeProbability { p, .. } => ProbError::NegativeProbability(p.to_string()),
            other => ProbError::Invalid(other.to_string()),
        }
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::MissingTreatment { treatment } => {
                write!(f, "no table for treatment {treatment:?}")
            }
            ValidationIssue::ExtraTreatment { treatment } => {
                write!(f, "table for treatment {treatment:?} which is not allowable")
            }
            ValidationIssue::DuplicateTable { treatment } => {
                write!(f, "more than one table for treatment {treatment:?}")
            }
            ValidationIssue::ValueSetMismatch { treatment, detail } => {
                write!(f, "table for {treatment:?}: {detail}")
            }
            ValidationIssue::NegativeProbability { treatment, outcome, p } => {
                write!(f, "table for {treatment:?}: P{outcome:?} = {p} < 0")
            }
            ValidationIssue::SumNotOne { treatment, sum, delta } => {
                write!(f, "table for {treatment:?}: probabilities sum to {sum} (off by {delta})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks that there is exactly one well-formed table per allowable
/// treatment. Exact tables must sum to one exactly; float tables within
/// `eps_sum`.
pub fn validate_system(
    design: &Design,
    outcomes: &OutcomeSpace,
    tables: &[TreatmentTable],
    eps_sum: f64,
) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen: BTreeMap<&Treatment, usize> = BTreeMap::new();
    for t in tables {
        let labels = || treatment_labels_lossy(design, &t.treatment);
        if !design.contains_treatment(&t.treatment) {
            issues.push(ValidationIssue::ExtraTreatment { treatment: labels() });
            continue;
        }
        *seen.entry(&t.treatment).or_default() += 1;
        if seen[&t.treatment] == 2 {
            issues.push(ValidationIssue::DuplicateTable { treatment: labels() });
        }
        let expected = outcomes.axes_for(&t.treatment);
        if t.table.axes() != expected.as_slice() {
            issues.push(ValidationIssue::ValueSetMismatch {
                treatment: labels(),
                detail: format!("axes {:?} differ from output sets {:?}", t.table.axes(), expected),
            });
            continue;
        }
        for (outcome, p) in t.table.cells() {
            if p.is_negative_tol(0.0) {
                issues.push(ValidationIssue::NegativeProbability {
                    treatment: labels(),
                    outcome,
                    p: p.to_f64(),
                });
            }
        }
        let total = t.table.total();
        let off = (&total - &Num::one()).abs();
        let bad = if total.is_exact() { !off.is_zero() } else { off.to_f64() > eps_sum };
        if bad {
            issues.push(ValidationIssue::SumNotOne {
                treatment: labels(),
                sum: total.to_f64(),
                delta: off.to_f64(),
            });
        }
    }
    for t in design.treatments() {
        if !seen.contains_key(&t) {
            issues.push(ValidationIssue::MissingTreatment {
                treatment: design.treatment_labels(&t),
            });
        }
    }
    ValidationReport { issues }
}

fn treatment_labels_lossy(design: &Design, t: &Treatment) -> Vec<String> {
    t.0.iter()
        .enumerate()
        .map(|(i, &v)| {
            design
                .inputs()
                .get(i)
                .and_then(|inp| inp.values.get(v))
                .cloned()
                .unwrap_or_else(|| format!("#{v}"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn two_by_two() -> (Design, OutcomeSpace) {
        let d = Design::full(vec![Input::new("1", ["x", "x'"]), Input::new("2", ["y", "y'"])]).unwrap();
        let o = OutcomeSpace::per_input(&d, vec![labels(&["a", "b"]), labels(&["c", "d"])]).unwrap();
        (d, o)
    }

    fn uniform(o: &OutcomeSpace, t: &Treatment) -> TreatmentTable {
        let table = JointTable::new(o.axes_for(t), vec![Num::ratio(1, 4); 4]).unwrap();
        TreatmentTable::new(t.clone(), table)
    }

    #[test]
    fn full_design_enumerates_in_lexicographic_order() {
        let (d, _) = two_by_two();
        let ts: Vec<_> = d.treatments().map(|t| t.0).collect();
        assert_eq!(ts, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(d.treatment_count(), 4);
    }

    #[test]
    fn explicit_design_rejects_duplicates_and_empty() {
        let inputs = vec![Input::new("1", ["x"]), Input::new("2", ["y"])];
        assert_eq!(Design::explicit(inputs.clone(), vec![]).unwrap_err(), ProbError::NoTreatments);
        let err = Design::explicit(inputs.clone(), vec![Treatment(vec![0, 0]), Treatment(vec![0, 0])]);
        assert!(matches!(err, Err(ProbError::DuplicateTreatment(_))));
        let err = Design::explicit(inputs, vec![Treatment(vec![0])]);
        assert!(matches!(err, Err(ProbError::MalformedTreatment(_))));
    }

    #[test]
    fn well_formed_system_validates() {
        let (d, o) = two_by_two();
        let tables: Vec<_> = d.treatments().map(|t| uniform(&o, &t)).collect();
        assert!(validate_system(&d, &o, &tables, DEFAULT_EPS_SUM).is_ok());
        assert!(System::new(d, o, tables, DEFAULT_EPS_SUM).unwrap().is_exact());
    }

    #[test]
    fn short_sum_is_reported_with_its_delta() {
        let (d, o) = two_by_two();
        let mut tables: Vec<_> = d.treatments().map(|t| uniform(&o, &t)).collect();
        tables[0] = TreatmentTable::new(
            tables[0].treatment.clone(),
            JointTable::new(
                o.axes_for(&tables[0].treatment),
                vec![Num::float(0.3), Num::float(0.2), Num::float(0.2), Num::float(0.2)],
            )
            .unwrap(),
        );
        let report = validate_system(&d, &o, &tables, DEFAULT_EPS_SUM);
        match &report.issues[..] {
            [ValidationIssue::SumNotOne { delta, .. }] => assert!((delta - 0.1).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_table_is_reported() {
        let (d, o) = two_by_two();
        let tables: Vec<_> = d.treatments().skip(1).map(|t| uniform(&o, &t)).collect();
        let report = validate_system(&d, &o, &tables, DEFAULT_EPS_SUM);
        assert_eq!(
            report.issues,
            vec![ValidationIssue::MissingTreatment { treatment: labels(&["x", "y"]) }]
        );
    }

    #[test]
    fn negative_probability_is_reported() {
        let (d, o) = two_by_two();
        let mut tables: Vec<_> = d.treatments().map(|t| uniform(&o, &t)).collect();
        tables[3].table = JointTable::new(
            o.axes_for(&tables[3].treatment),
            vec![Num::ratio(-1, 4), Num::ratio(1, 2), Num::ratio(1, 2), Num::ratio(1, 4)],
        )
        .unwrap();
        let report = validate_system(&d, &o, &tables, DEFAULT_EPS_SUM);
        assert!(matches!(report.issues[..], [ValidationIssue::NegativeProbability { .. }]));
    }

    #[test]
    fn covering_treatment_picks_smallest() {
        let inputs = vec![Input::new("1", ["x", "x'"]), Input::new("2", ["y", "y'"])];
        let d = Design::explicit(inputs, vec![Treatment(vec![1, 1]), Treatment(vec![0, 0]), Treatment(vec![1, 0])])
            .unwrap();
        assert_eq!(d.covering_treatment(&[InputPoint::new(0, 1)]), Some(Treatment(vec![1, 0])));
        assert_eq!(d.covering_treatment(&[InputPoint::new(0, 0), InputPoint::new(1, 1)]), None);
        assert_eq!(d.covering_treatment(&[InputPoint::new(0, 0), InputPoint::new(0, 1)]), None);
    }
}
