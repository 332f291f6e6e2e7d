//! Joint distribution criterion: is there one hidden distribution over
//! every input point's output whose treatment-wise marginals reproduce the
//! observed tables?
//!
//! Variables are the probabilities of hidden assignments (one output per
//! input point); there is one equality per treatment and joint outcome.
//! Rational systems are decided exactly. Float systems use a tolerance
//! and report [`JdcError::NumericalInstability`] rather than guess.

mod fine;
pub mod simplex;

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::num::{Num, Regime};
use crate::probspace::{Design, InputPoint, JointTable, OutcomeSpace, PointLabel, ProbError, System, Treatment, TreatmentTable};
use crate::selectivity::SelectivityError;

use simplex::{phase_one, product, transpose_product, LpFailure, LpOutcome, LpScalar, SparseColumns};

pub use fine::{
    d1_d2_chain_residuals, fine_inequalities, order_chain_sequences, verify_order_chain_identity, FineReport,
    FineSystem,
};

pub const DEFAULT_HIDDEN_CAP: usize = 1_000_000;
pub const DEFAULT_EPS_LP: f64 = 1e-9;
/// Largest dense tableau (rows times columns) the solver will allocate.
pub const MAX_TABLEAU_CELLS: usize = 20_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JdcError {
    #[error("hidden space has {size} assignments, above the cap of {cap}")]
    HiddenSpaceTooLarge { size: String, cap: usize },
    #[error("linear program needs a {rows}x{cols} tableau, too large to solve densely")]
    ProblemTooLarge { rows: usize, cols: usize },
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("not a 2x2 binary system: {0}")]
    NotTwoByTwo(String),
    #[error("marginal selectivity violated (discrepancy {0})")]
    MarginalSelectivityViolated(f64),
    #[error("hidden distribution has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Selectivity(#[from] SelectivityError),
}

/// Product of the output sets of every input point, in design point order
/// with the last point varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenSpace {
    points: Vec<InputPoint>,
    sizes: Vec<usize>,
    size: usize,
}

impl HiddenSpace {
    pub fn new(design: &Design, outcomes: &OutcomeSpace, cap: usize) -> Result<Self, JdcError> {
        let points = design.points();
        let sizes: Vec<usize> = points.iter().map(|&p| outcomes.size(p)).collect();
        let mut size: usize = 1;
        for &k in &sizes {
            match size.checked_mul(k) {
                Some(s) if s <= cap => size = s,
                _ => {
                    let exact = sizes
                        .iter()
                        .fold(num_bigint::BigUint::from(1u8), |acc, &k| acc * num_bigint::BigUint::from(k));
                    return Err(JdcError::HiddenSpaceTooLarge {
                        size: exact.to_string(),
                        cap,
                    });
                }
            }
        }
        Ok(HiddenSpace { points, sizes, size })
    }

    pub fn points(&self) -> &[InputPoint] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Output index of every point under assignment `index`.
    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (slot, &k) in out.iter_mut().zip(&self.sizes).rev() {
            *slot = index % k;
            index /= k;
        }
        out
    }

    pub fn index(&self, assignment: &[usize]) -> usize {
        assignment.iter().zip(&self.sizes).fold(0, |acc, (&v, &k)| acc * k + v)
    }
}

/// The equality system `A q = b` for a design and outcome space.
#[derive(Debug, Clone)]
pub struct JdcProblem {
    pub hidden: HiddenSpace,
    /// `(treatment, outcome indices)` per row.
    pub rows: Vec<(Treatment, Vec<usize>)>,
    /// Column `j` lists the rows hidden assignment `j` contributes to.
    pub columns: Vec<Vec<usize>>,
}

impl JdcProblem {
    pub fn new(design: &Design, outcomes: &OutcomeSpace, hidden_cap: usize) -> Result<Self, JdcError> {
        let hidden = HiddenSpace::new(design, outcomes, hidden_cap)?;
        let point_id = |p: InputPoint| hidden.points.binary_search(&p).expect("design point");
        let mut rows = Vec::new();
        let mut layout = Vec::new();
        for t in design.treatments() {
            let ids: Vec<usize> = t.points().map(point_id).collect();
            let dims: Vec<usize> = ids.iter().map(|&i| hidden.sizes[i]).collect();
            let cells: usize = dims.iter().product();
            let offset = rows.len();
            for c in 0..cells {
                let mut o = vec![0; dims.len()];
                let mut rem = c;
                for (slot, &k) in o.iter_mut().zip(&dims).rev() {
                    *slot = rem % k;
                    rem /= k;
                }
                rows.push((t.clone(), o));
            }
            layout.push((offset, ids, dims));
        }
        let columns = (0..hidden.size)
            .map(|j| {
                let v = hidden.assignment(j);
                layout
                    .iter()
                    .map(|(offset, ids, dims)| offset + ids.iter().zip(dims).fold(0, |acc, (&i, &k)| acc * k + v[i]))
                    .collect()
            })
            .collect();
        Ok(JdcProblem { hidden, rows, columns })
    }

    pub fn for_system(system: &System, hidden_cap: usize) -> Result<Self, JdcError> {
        Self::new(system.design(), system.outcomes(), hidden_cap)
    }

    /// Observed probabilities in row order.
    pub fn rhs(&self, system: &System) -> Result<Vec<Num>, JdcError> {
        let mut b = Vec::with_capacity(self.rows.len());
        for (t, o) in &self.rows {
            let table = system
                .table(t)
                .ok_or_else(|| ProbError::Invalid(format!("no table for treatment {:?}", t.0)))?;
            b.push(table.table.get(o).clone());
        }
        Ok(b)
    }

    fn matrix<T: LpScalar>(&self) -> SparseColumns<T> {
        SparseColumns {
            rows: self.rows.len(),
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|&i| (i, T::one())).collect())
                .collect(),
        }
    }

    /// Treatment tables implied by a hidden distribution.
    pub fn project(&self, q: &[Num]) -> Result<Vec<Num>, JdcError> {
        if q.len() != self.hidden.size {
            return Err(JdcError::WrongLength {
                expected: self.hidden.size,
                got: q.len(),
            });
        }
        let exact = q.iter().all(Num::is_exact);
        let mut out = vec![if exact { Num::zero() } else { Num::float(0.0) }; self.rows.len()];
        for (col, qj) in self.columns.iter().zip(q) {
            if qj.is_zero() {
                continue;
            }
            for &i in col {
                out[i] = &out[i] + qj;
            }
        }
        Ok(out)
    }
}

/// Builds the system whose tables are the marginals of hidden
/// distribution `q` (indexed as in [`HiddenSpace`]). Such a system
/// satisfies the criterion by construction.
pub fn system_from_hidden(
    design: &Design,
    outcomes: &OutcomeSpace,
    q: &[Num],
    hidden_cap: usize,
) -> Result<System, JdcError> {
    let problem = JdcProblem::new(design, outcomes, hidden_cap)?;
    let b = problem.project(q)?;
    let mut tables = Vec::new();
    let mut start = 0;
    for t in design.treatments() {
        let axes = outcomes.axes_for(&t);
        let cells: usize = axes.iter().map(Vec::len).product();
        let probs = b[start..start + cells].to_vec();
        start += cells;
        tables.push(TreatmentTable::new(t, JointTable::new(axes, probs)?));
    }
    let eps = if q.iter().all(Num::is_exact) { 0.0 } else { 1e-9 };
    Ok(System::new(design.clone(), outcomes.clone(), tables, eps)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JdcOptions {
    pub hidden_cap: usize,
    pub eps_lp: f64,
    /// Pivot limit for the float solver; `None` picks one from the size.
    pub max_pivots: Option<usize>,
}

impl Default for JdcOptions {
    fn default() -> Self {
        JdcOptions {
            hidden_cap: DEFAULT_HIDDEN_CAP,
            eps_lp: DEFAULT_EPS_LP,
            max_pivots: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JdcResult {
    pub regime: Regime,
    pub feasible: bool,
    /// Hidden distribution reproducing every table, when feasible.
    pub witness: Option<Vec<Num>>,
    /// `y` with `yᵀA >= 0` and `yᵀb < 0`, when infeasible.
    pub certificate: Option<Vec<Num>>,
    pub pivots: usize,
}

fn to_rational(n: &Num) -> BigRational {
    n.as_exact().cloned().expect("exact value")
}

/// Decides the criterion and verifies whichever certificate comes back.
pub fn jdc_feasible(system: &System, opts: JdcOptions) -> Result<(JdcProblem, JdcResult), JdcError> {
    let problem = JdcProblem::for_system(system, opts.hidden_cap)?;
    let m = problem.rows.len();
    let n = problem.hidden.size;
    if m.saturating_mul(n + m) > MAX_TABLEAU_CELLS {
        return Err(JdcError::ProblemTooLarge { rows: m, cols: n + m });
    }
    let b = problem.rhs(system)?;
    let result = if system.is_exact() {
        solve_exact(&problem, &b)?
    } else {
        solve_float(&problem, &b, opts)?
    };
    Ok((problem, result))
}

fn solve_exact(problem: &JdcProblem, b: &[Num]) -> Result<JdcResult, JdcError> {
    let a = problem.matrix::<BigRational>();
    let b: Vec<BigRational> = b.iter().map(to_rational).collect();
    let sol = phase_one(&a, &b, 0.0, usize::MAX)
        .map_err(|e| JdcError::NumericalInstability(format!("exact solver failed: {e:?}")))?;
    match sol.outcome {
        LpOutcome::Feasible(x) => {
            let ok = x.iter().all(|v| v.sign(0.0) != Ordering::Less) && product(&a, &x) == b;
            if !ok {
                return Err(JdcError::NumericalInstability("exact witness failed verification".into()));
            }
            Ok(JdcResult {
                regime: Regime::Rational,
                feasible: true,
                witness: Some(x.into_iter().map(Num::Exact).collect()),
                certificate: None,
                pivots: sol.pivots,
            })
        }
        LpOutcome::Infeasible(y) => {
            let ya = transpose_product(&a, &y);
            let yb = y.iter().zip(&b).fold(<BigRational as Zero>::zero(), |acc, (u, v)| acc + u * v);
            if ya.iter().any(|v| v.sign(0.0) == Ordering::Less) || yb.sign(0.0) != Ordering::Less {
                return Err(JdcError::NumericalInstability("exact certificate failed verification".into()));
            }
            Ok(JdcResult {
                regime: Regime::Rational,
                feasible: false,
                witness: None,
                certificate: Some(y.into_iter().map(Num::Exact).collect()),
                pivots: sol.pivots,
            })
        }
    }
}

fn solve_float(problem: &JdcProblem, b: &[Num], opts: JdcOptions) -> Result<JdcResult, JdcError> {
    let a = problem.matrix::<f64>();
    let b: Vec<f64> = b.iter().map(Num::to_f64).collect();
    let eps = opts.eps_lp;
    let limit = opts
        .max_pivots
        .unwrap_or_else(|| 50 * (a.rows + a.columns.len()).max(100));
    let sol = phase_one(&a, &b, eps, limit).map_err(|e| match e {
        LpFailure::IterationLimit(k) => JdcError::NumericalInstability(format!("no convergence within {k} pivots")),
        LpFailure::NotFinite => JdcError::NumericalInstability("tableau lost finiteness".into()),
    })?;
    let check_tol = (eps * 1e3).max(1e-7);
    match sol.outcome {
        LpOutcome::Feasible(x) => {
            let x: Vec<f64> = x.into_iter().map(|v| if v < 0.0 && v >= -eps { 0.0 } else { v }).collect();
            let residual = product(&a, &x)
                .iter()
                .zip(&b)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            if x.iter().any(|&v| v < 0.0) || residual > check_tol {
                return Err(JdcError::NumericalInstability(format!(
                    "float witness residual {residual:e} exceeds {check_tol:e}"
                )));
            }
            Ok(JdcResult {
                regime: Regime::Float,
                feasible: true,
                witness: Some(x.into_iter().map(Num::float).collect()),
                certificate: None,
                pivots: sol.pivots,
            })
        }
        LpOutcome::Infeasible(y) => {
            let ya = transpose_product(&a, &y);
            let yb: f64 = y.iter().zip(&b).map(|(u, v)| u * v).sum();
            let worst = ya.iter().cloned().fold(f64::INFINITY, f64::min);
            if worst < -check_tol || yb >= -eps {
                return Err(JdcError::NumericalInstability(format!(
                    "float certificate inconclusive (min yA = {worst:e}, yb = {yb:e})"
                )));
            }
            Ok(JdcResult {
                regime: Regime::Float,
                feasible: false,
                witness: None,
                certificate: Some(y.into_iter().map(Num::float).collect()),
                pivots: sol.pivots,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HiddenAtom {
    pub assignment: Vec<String>,
    pub p: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateRow {
    pub treatment: Vec<String>,
    pub outcome: Vec<String>,
    pub y: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JdcReport {
    pub feasible: bool,
    pub regime: Regime,
    pub hidden_points: Vec<PointLabel>,
    pub hidden_size: usize,
    pub constraints: usize,
    pub pivots: usize,
    /// Nonzero atoms of the hidden distribution.
    pub witness: Option<Vec<HiddenAtom>>,
    /// Nonzero entries of the infeasibility certificate.
    pub certificate: Option<Vec<CertificateRow>>,
    pub fine: Option<FineReport>,
    pub chain_identity_max_discrepancy: Option<Num>,
}

impl JdcReport {
    pub fn new(system: &System, problem: &JdcProblem, result: &JdcResult) -> Self {
        let design = system.design();
        let outcomes = system.outcomes();
        let hidden = &problem.hidden;
        let witness = result.witness.as_ref().map(|q| {
            q.iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero() && p.to_f64() != 0.0)
                .map(|(j, p)| HiddenAtom {
                    assignment: hidden
                        .assignment(j)
                        .iter()
                        .zip(hidden.points())
                        .map(|(&o, &pt)| outcomes.values(pt)[o].clone())
                        .collect(),
                    p: p.clone(),
                    p_exact: p.as_exact().map(|r| r.to_string()),
                })
                .collect()
        });
        let certificate = result.certificate.as_ref().map(|y| {
            y.iter()
                .zip(&problem.rows)
                .filter(|(v, _)| !v.is_zero() && v.to_f64() != 0.0)
                .map(|(v, (t, o))| CertificateRow {
                    treatment: design.treatment_labels(t),
                    outcome: o
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| outcomes.values(InputPoint::new(i, t.value_of(i)))[k].clone())
                        .collect(),
                    y: v.clone(),
                    y_exact: v.as_exact().map(|r| r.to_string()),
                })
                .collect()
        });
        JdcReport {
            feasible: result.feasible,
            regime: result.regime,
            hidden_points: hidden.points().iter().map(|&p| design.point_label(p)).collect(),
            hidden_size: hidden.size(),
            constraints: problem.rows.len(),
            pivots: result.pivots,
            witness,
            certificate,
            fine: None,
            chain_identity_max_discrepancy: None,
        }
    }
}
