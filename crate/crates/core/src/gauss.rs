//! Standard bivariate normal outputs on the unit square of treatments.
//!
//! Inputs `1` and `2` take values in `[0, 1]`; under treatment `(v, w)` the
//! outputs are standard normal with correlation `ρ(v, w)`. With the order
//! `A ≺ B` iff `A < 0 <= B`, the order-distance has the closed form
//! `arccos(ρ) / 2π`.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::num::Num;
use crate::probspace::{Design, Input, JointTable, OutcomeSpace, PointLabel, System, Treatment, TreatmentTable};
use crate::selectivity::ChainReport;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussError {
    #[error("correlation {0} is outside [-1, 1]")]
    InvalidCorrelation(f64),
    #[error("input value {0} is outside [0, 1]")]
    InvalidValue(f64),
    #[error("a chain needs at least three points alternating between the two inputs")]
    InvalidSequence,
}

/// `Pr[A < 0, B >= 0]` for standard bivariate normal `(A, B)` with
/// correlation `rho`.
pub fn binormal_order_distance(rho: f64) -> Result<f64, GaussError> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(GaussError::InvalidCorrelation(rho));
    }
    Ok(rho.acos() / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Correlation {
    /// `min(1, v + w)`.
    Saturating,
    /// `v * w`.
    Product,
    Constant { rho: f64 },
}

impl Correlation {
    pub fn rho(&self, v: f64, w: f64) -> f64 {
        match *self {
            Correlation::Saturating => (v + w).min(1.0),
            Correlation::Product => v * w,
            Correlation::Constant { rho } => rho,
        }
    }

    fn describe(&self) -> String {
        match self {
            Correlation::Saturating => "min(1, v+w)".into(),
            Correlation::Product => "v*w".into(),
            Correlation::Constant { rho } => format!("{rho}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinormalSystem {
    pub correlation: Correlation,
}

impl Default for BinormalSystem {
    fn default() -> Self {
        BinormalSystem {
            correlation: Correlation::Saturating,
        }
    }
}

/// One point `(input, value)` with input 1 or 2.
pub type BinormalPoint = (u8, f64);

impl BinormalSystem {
    pub fn new(correlation: Correlation) -> Self {
        BinormalSystem { correlation }
    }

    pub fn rho(&self, v: f64, w: f64) -> Result<f64, GaussError> {
        for x in [v, w] {
            if !(0.0..=1.0).contains(&x) {
                return Err(GaussError::InvalidValue(x));
            }
        }
        let r = self.correlation.rho(v, w);
        if !(-1.0..=1.0).contains(&r) {
            return Err(GaussError::InvalidCorrelation(r));
        }
        Ok(r)
    }

    /// Order-distance between the two outputs under treatment `(v, w)`.
    pub fn order_distance(&self, v: f64, w: f64) -> Result<f64, GaussError> {
        binormal_order_distance(self.rho(v, w)?)
    }

    fn pair(&self, x: BinormalPoint, y: BinormalPoint) -> Result<(f64, Vec<String>), GaussError> {
        let (v, w) = match (x.0, y.0) {
            (1, 2) => (x.1, y.1),
            (2, 1) => (y.1, x.1),
            _ => return Err(GaussError::InvalidSequence),
        };
        Ok((self.order_distance(v, w)?, vec![fmt_value(v), fmt_value(w)]))
    }

    /// Chain inequality for a sequence alternating between the inputs.
    pub fn chain(&self, seq: &[BinormalPoint]) -> Result<ChainReport, GaussError> {
        let l = seq.len();
        if l < 3 {
            return Err(GaussError::InvalidSequence);
        }
        let (lhs, closing) = self.pair(seq[0], seq[l - 1])?;
        let mut covers = vec![closing];
        let mut rhs = Vec::with_capacity(l - 1);
        for i in 1..l {
            let (d, t) = self.pair(seq[i - 1], seq[i])?;
            rhs.push(Num::float(d));
            covers.push(t);
        }
        let residual = rhs.iter().map(Num::to_f64).sum::<f64>() - lhs;
        Ok(ChainReport {
            metric: format!("binormal order, rho = {}", self.correlation.describe()),
            sequence: seq
                .iter()
                .map(|&(i, v)| PointLabel {
                    input: i.to_string(),
                    value: fmt_value(v),
                })
                .collect(),
            covers,
            lhs: Num::float(lhs),
            rhs,
            residual: Num::float(residual),
            residual_exact: None,
            violated: residual < 0.0,
        })
    }

    /// The 2x2 system obtained by recording only the sign of each output
    /// at input values 0 and 1. Exact when every correlation is one of
    /// `-1, -1/2, 0, 1/2, 1`.
    pub fn discretize_by_sign(&self) -> Result<System, GaussError> {
        let design = Design::full(vec![Input::new("1", ["0", "1"]), Input::new("2", ["0", "1"])])
            .expect("valid design");
        let signs = || vec!["neg".to_string(), "nonneg".to_string()];
        let outcomes = OutcomeSpace::per_input(&design, vec![signs(), signs()]).expect("valid outcomes");
        let mut tables = Vec::new();
        for v in 0..2 {
            for w in 0..2 {
                let rho = self.rho(v as f64, w as f64)?;
                // Pr[A < 0, B >= 0] = Pr[A >= 0, B < 0] = d; the diagonal
                // cells share the rest.
                let d = exact_quadrant(rho).unwrap_or_else(|| Num::float(binormal_order_distance(rho).unwrap()));
                let same = &(Num::ratio(1, 2)) - &d;
                let probs = vec![same.clone(), d.clone(), d, same];
                tables.push(TreatmentTable::new(
                    Treatment(vec![v, w]),
                    JointTable::new(vec![signs(), signs()], probs).expect("shape"),
                ));
            }
        }
        let tables = if tables.iter().all(|t| t.table.is_exact()) {
            tables
        } else {
            tables
                .into_iter()
                .map(|t| TreatmentTable::new(t.treatment, t.table.to_float()))
                .collect()
        };
        Ok(System::new(design, outcomes, tables, 1e-12).expect("valid tables"))
    }
}

fn exact_quadrant(rho: f64) -> Option<Num> {
    [(-1.0, (1, 2)), (-0.5, (1, 3)), (0.0, (1, 4)), (0.5, (1, 6)), (1.0, (0, 1))]
        .iter()
        .find(|(r, _)| *r == rho)
        .map(|(_, (n, d))| Num::ratio(*n, *d))
}

fn fmt_value(v: f64) -> String {
    format!("{v}")
}

/// The sequence `(1,0), (2,1), (1,1), (2,0)`.
pub fn demo_sequence() -> [BinormalPoint; 4] {
    [(1, 0.0), (2, 1.0), (1, 1.0), (2, 0.0)]
}

/// The chain test on [`demo_sequence`] for `ρ(v, w) = min(1, v + w)`:
/// `1/4 <= 0 + 0 + 0` fails.
pub fn demo_chain_violation() -> ChainReport {
    BinormalSystem::default()
        .chain(&demo_sequence())
        .expect("demo sequence is valid")
}
