//! The JSON system file format.
//!
//! ```json
//! {
//!   "inputs": [{"name": "1", "values": ["x", "x'"]}, {"name": "2", "values": ["y", "y'"]}],
//!   "treatments": "full",
//!   "outputs": {"1": ["bullet", "circ"], "2": ["cup", "cap"]},
//!   "tables": [
//!     {"treatment": ["x", "y"], "probs": [{"outcome": ["bullet", "cup"], "p": "1/4"}, ...]}
//!   ]
//! }
//! ```
//!
//! `treatments` is `"full"` or an explicit list of value vectors. `outputs`
//! is optional; each entry is either one list for the whole input or an
//! object keyed by input value. Without it, output value sets are the
//! labels seen in the tables for that input, in order of first appearance.
//! Outcomes not listed in a table have probability zero.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::num::{Arithmetic, Num, NumError, RawNum};

use super::{
    validate_system, Design, Input, JointTable, OutcomeSpace, ProbError, System, Treatment, TreatmentTable,
    ValidationReport, DEFAULT_EPS_SUM,
};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed system JSON at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{context}: {source}")]
    Number {
        context: String,
        #[source]
        source: NumError,
    },
    #[error(transparent)]
    Design(#[from] ProbError),
    #[error("{0}")]
    Structure(String),
    #[error("system failed validation: {}", .0.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
}

impl LoadError {
    fn from_json(e: serde_json::Error) -> Self {
        let full = e.to_string();
        let suffix = format!(" at line {} column {}", e.line(), e.column());
        LoadError::Parse {
            line: e.line(),
            column: e.column(),
            message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub arithmetic: Arithmetic,
    pub eps_sum: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            arithmetic: Arithmetic::Auto,
            eps_sum: DEFAULT_EPS_SUM,
        }
    }
}

/// A label in JSON may be written as a string, number or boolean.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Label(pub String);

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::String(s) => Ok(Label(s)),
            serde_json::Value::Number(n) => Ok(Label(n.to_string())),
            serde_json::Value::Bool(b) => Ok(Label(b.to_string())),
            other => Err(serde::de::Error::custom(format!("expected a label, found {other}"))),
        }
    }
}

fn strings(labels: &[Label]) -> Vec<String> {
    labels.iter().map(|l| l.0.clone()).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub inputs: Vec<InputDecl>,
    pub treatments: TreatmentsDecl,
    #[serde(default)]
    pub outputs: Option<BTreeMap<String, OutputsDecl>>,
    pub tables: Vec<TableDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputDecl {
    pub name: String,
    pub values: Vec<Label>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TreatmentsDecl {
    Keyword(String),
    List(Vec<Vec<Label>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OutputsDecl {
    PerInput(Vec<Label>),
    PerValue(BTreeMap<String, Vec<Label>>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDecl {
    pub treatment: Vec<Label>,
    pub probs: Vec<CellDecl>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDecl {
    pub outcome: Vec<Label>,
    pub p: RawNum,
}

pub fn load_system(path: &Path, opts: LoadOptions) -> Result<System, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_system_str(&text, opts)
}

/// Parses, builds and validates a system. Validation problems are returned
/// as [`LoadError::Invalid`] with the full report.
pub fn load_system_str(text: &str, opts: LoadOptions) -> Result<System, LoadError> {
    let file: SystemFile = serde_json::from_str(text).map_err(LoadError::from_json)?;
    build_system(&file, opts)
}

fn build_system(file: &SystemFile, opts: LoadOptions) -> Result<System, LoadError> {
    let inputs: Vec<Input> = file
        .inputs
        .iter()
        .map(|i| Input {
            name: i.name.clone(),
            values: strings(&i.values),
        })
        .collect();
    let lookup_treatment = |inputs: &[Input], labels: &[Label], ctx: &str| -> Result<Treatment, LoadError> {
        if labels.len() != inputs.len() {
            return Err(LoadError::Structure(format!(
                "{ctx}: treatment {:?} has {} values for {} inputs",
                strings(labels),
                labels.len(),
                inputs.len()
            )));
        }
        labels
            .iter()
            .zip(inputs)
            .map(|(l, inp)| {
                inp.values.iter().position(|v| *v == l.0).ok_or_else(|| {
                    LoadError::Structure(format!("{ctx}: `{}` is not a value of input `{}`", l.0, inp.name))
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Treatment)
    };

    let design = match &file.treatments {
        TreatmentsDecl::Keyword(k) if k == "full" => Design::full(inputs)?,
        TreatmentsDecl::Keyword(k) => {
            return Err(LoadError::Structure(format!(
                "`treatments` must be \"full\" or a list, found \"{k}\""
            )))
        }
        TreatmentsDecl::List(list) => {
            let ts = list
                .iter()
                .enumerate()
                .map(|(i, t)| lookup_treatment(&inputs, t, &format!("treatments[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Design::explicit(inputs, ts)?
        }
    };

    let mut treatments = Vec::with_capacity(file.tables.len());
    for (i, t) in file.tables.iter().enumerate() {
        let ctx = format!("tables[{i}]");
        let tr = lookup_treatment(design.inputs(), &t.treatment, &ctx)?;
        for (k, cell) in t.probs.iter().enumerate() {
            if cell.outcome.len() != design.num_inputs() {
                return Err(LoadError::Structure(format!(
                    "{ctx}.probs[{k}]: outcome has {} values for {} inputs",
                    cell.outcome.len(),
                    design.num_inputs()
                )));
            }
        }
        treatments.push(tr);
    }

    let outcomes = outcome_space(file, &design, &treatments)?;

    let exact_auto = file.tables.iter().flat_map(|t| &t.probs).all(|c| c.p.is_auto_exact());
    let mode = match opts.arithmetic {
        Arithmetic::Auto if exact_auto => Arithmetic::Rational,
        Arithmetic::Auto => Arithmetic::Float,
        other => other,
    };

    let mut tables = Vec::with_capacity(file.tables.len());
    for (i, (decl, tr)) in file.tables.iter().zip(treatments).enumerate() {
        let axes = outcomes.axes_for(&tr);
        let size = axes.iter().map(Vec::len).product::<usize>();
        let zero = if mode == Arithmetic::Float { Num::float(0.0) } else { Num::zero() };
        let mut probs = vec![zero; size];
        let mut filled = vec![false; size];
        for (k, cell) in decl.probs.iter().enumerate() {
            let ctx = format!("tables[{i}].probs[{k}]");
            let mut flat = 0;
            for (axis, label) in axes.iter().zip(&cell.outcome) {
                let pos = axis.iter().position(|v| *v == label.0).ok_or_else(|| {
                    LoadError::Structure(format!("{ctx}: `{}` is not a declared output value", label.0))
                })?;
                flat = flat * axis.len() + pos;
            }
            if filled[flat] {
                return Err(LoadError::Structure(format!(
                    "{ctx}: outcome {:?} listed twice",
                    strings(&cell.outcome)
                )));
            }
            filled[flat] = true;
            probs[flat] = cell.p.to_num(mode).map_err(|source| LoadError::Number { context: ctx, source })?;
        }
        tables.push(TreatmentTable::new(tr, JointTable::new(axes, probs)?));
    }

    let report = validate_system(&design, &outcomes, &tables, opts.eps_sum);
    if !report.is_ok() {
        return Err(LoadError::Invalid(report));
    }
    Ok(System::assemble(design, outcomes, tables))
}

fn outcome_space(file: &SystemFile, design: &Design, treatments: &[Treatment]) -> Result<OutcomeSpace, LoadError> {
    let mut per_point: Vec<Vec<Option<Vec<String>>>> = design
        .inputs()
        .iter()
        .map(|i| vec![None; i.values.len()])
        .collect();
    if let Some(outputs) = &file.outputs {
        for (name, decl) in outputs {
            let i = design
                .input_index(name)
                .ok_or_else(|| LoadError::Structure(format!("outputs: unknown input `{name}`")))?;
            match decl {
                OutputsDecl::PerInput(vals) => {
                    per_point[i].iter_mut().for_each(|slot| *slot = Some(strings(vals)));
                }
                OutputsDecl::PerValue(map) => {
                    for (w, vals) in map {
                        let v = design.value_index(i, w).ok_or_else(|| {
                            LoadError::Structure(format!("outputs: `{w}` is not a value of input `{name}`"))
                        })?;
                        per_point[i][v] = Some(strings(vals));
                    }
                }
            }
        }
    }
    // Inputs without a declaration get the labels seen in the tables.
    let mut seen: Vec<Vec<String>> = vec![Vec::new(); design.num_inputs()];
    for (decl, tr) in file.tables.iter().zip(treatments) {
        for cell in &decl.probs {
            for (i, label) in cell.outcome.iter().enumerate() {
                if per_point[i][tr.value_of(i)].is_none() && !seen[i].contains(&label.0) {
                    seen[i].push(label.0.clone());
                }
            }
        }
    }
    let values = per_point
        .into_iter()
        .enumerate()
        .map(|(i, slots)| {
            slots
                .into_iter()
                .map(|s| s.unwrap_or_else(|| seen[i].clone()))
                .collect()
        })
        .collect();
    Ok(OutcomeSpace::per_point(design, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Regime;

    const TWO_BY_TWO: &str = r#"{
      "inputs": [{"name": "1", "values": ["x", "x'"]}, {"name": "2", "values": ["y", "y'"]}],
      "treatments": "full",
      "tables": [
        {"treatment": ["x", "y"], "probs": [
          {"outcome": ["a", "c"], "p": "1/2"}, {"outcome": ["b", "d"], "p": 0.5}]},
        {"treatment": ["x", "y'"], "probs": [
          {"outcome": ["a", "c"], "p": "1/2"}, {"outcome": ["b", "d"], "p": 0.5}]},
        {"treatment": ["x'", "y"], "probs": [
          {"outcome": ["a", "c"], "p": "1/2"}, {"outcome": ["b", "d"], "p": 0.5}]},
        {"treatment": ["x'", "y'"], "probs": [
          {"outcome": ["a", "d"], "p": "1/2"}, {"outcome": ["b", "c"], "p": 0.5}]}
      ]
    }"#;

    #[test]
    fn loads_pr_box_exactly_with_inferred_outputs() {
        let sys = load_system_str(TWO_BY_TWO, LoadOptions::default()).unwrap();
        assert_eq!(sys.regime(), Regime::Rational);
        assert_eq!(sys.outcomes().values(crate::probspace::InputPoint::new(1, 0)), ["c", "d"]);
        let t = sys.table(&Treatment(vec![1, 1])).unwrap();
        assert_eq!(t.table.get(&[0, 1]), &Num::ratio(1, 2));
        assert_eq!(t.table.get(&[0, 0]), &Num::zero());
    }

    #[test]
    fn float_mode_is_honoured() {
        let opts = LoadOptions {
            arithmetic: Arithmetic::Float,
            ..LoadOptions::default()
        };
        let sys = load_system_str(TWO_BY_TWO, opts).unwrap();
        assert_eq!(sys.regime(), Regime::Float);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = load_system_str("{\n \"inputs\": [", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, LoadError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn missing_table_fails_validation() {
        let text = r#"{"inputs": [{"name": "1", "values": ["x", "x'"]}], "treatments": "full",
          "tables": [{"treatment": ["x"], "probs": [{"outcome": ["a"], "p": 1}]}]}"#;
        match load_system_str(text, LoadOptions::default()) {
            Err(LoadError::Invalid(r)) => assert_eq!(r.issues.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn per_value_outputs_are_supported() {
        let text = r#"{"inputs": [{"name": "1", "values": ["x", "x'"]}], "treatments": [["x"], ["x'"]],
          "outputs": {"1": {"x": ["lo", "hi"], "x'": ["only"]}},
          "tables": [{"treatment": ["x"], "probs": [{"outcome": ["hi"], "p": 1}]},
                     {"treatment": ["x'"], "probs": [{"outcome": ["only"], "p": 1}]}]}"#;
        let sys = load_system_str(text, LoadOptions::default()).unwrap();
        assert!(!sys.outcomes().is_per_input());
        assert_eq!(sys.tables()[0].table.probs(), &[Num::zero(), Num::one()]);
    }

    #[test]
    fn duplicate_outcome_is_rejected() {
        let text = r#"{"inputs": [{"name": "1", "values": ["x"]}], "treatments": "full",
          "tables": [{"treatment": ["x"], "probs": [{"outcome": ["a"], "p": 0.5}, {"outcome": ["a"], "p": 0.5}]}]}"#;
        assert!(matches!(load_system_str(text, LoadOptions::default()), Err(LoadError::Structure(_))));
    }
}
