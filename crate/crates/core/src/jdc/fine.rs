//! The 2x2 binary case: two inputs with two values each, every output
//! binary. Here the criterion reduces to four linear inequalities, and
//! those coincide with chain inequalities for two order-distances.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::metrics::{Layers, Metric, OrderSpec};
use crate::num::Num;
use crate::probspace::{Design, Input, InputPoint, JointTable, OutcomeSpace, System, Treatment, TreatmentTable};
use crate::selectivity::{chain_test, check_marginal_selectivity, CoverMap, NamedMetric, SequenceWitness};

use super::JdcError;

/// Parameters of a marginally selective 2x2 binary system. Tables are
/// `p` for `(x, y)`, `q` for `(x, y')`, `r` for `(x', y)`, `s` for
/// `(x', y')`; `p11` is the probability both outputs take their first
/// value. `a`, `a'` are first-value probabilities for the first input at
/// `x`, `x'`; `b`, `b'` likewise for the second input at `y`, `y'`.
#[derive(Debug, Clone, PartialEq)]
pub struct FineSystem {
    pub a: Num,
    pub a_prime: Num,
    pub b: Num,
    pub b_prime: Num,
    pub p11: Num,
    pub q11: Num,
    pub r11: Num,
    pub s11: Num,
}

fn check_shape(system: &System) -> Result<(), JdcError> {
    let d = system.design();
    if d.num_inputs() != 2 || d.inputs().iter().any(|i| i.values.len() != 2) {
        return Err(JdcError::NotTwoByTwo("need two inputs with two values each".into()));
    }
    if d.treatment_count() != 4 {
        return Err(JdcError::NotTwoByTwo("need all four treatments".into()));
    }
    for p in d.points() {
        if system.outcomes().size(p) != 2 {
            return Err(JdcError::NotTwoByTwo(format!("output of {} is not binary", d.point_label(p))));
        }
    }
    Ok(())
}

impl FineSystem {
    pub fn from_system(system: &System, eps: f64) -> Result<Self, JdcError> {
        check_shape(system)?;
        let ms = check_marginal_selectivity(system, eps);
        if !ms.passed {
            return Err(JdcError::MarginalSelectivityViolated(ms.max_discrepancy.to_f64()));
        }
        let table = |x: usize, y: usize| &system.table(&Treatment(vec![x, y])).expect("full design").table;
        let first_row = |t: &JointTable| t.get(&[0, 0]) + t.get(&[0, 1]);
        let first_col = |t: &JointTable| t.get(&[0, 0]) + t.get(&[1, 0]);
        Ok(FineSystem {
            a: first_row(table(0, 0)),
            a_prime: first_row(table(1, 0)),
            b: first_col(table(0, 0)),
            b_prime: first_col(table(0, 1)),
            p11: table(0, 0).get(&[0, 0]).clone(),
            q11: table(0, 1).get(&[0, 0]).clone(),
            r11: table(1, 0).get(&[0, 0]).clone(),
            s11: table(1, 1).get(&[0, 0]).clone(),
        })
    }

    /// The maximally nonlocal box: perfect agreement under three
    /// treatments, perfect disagreement under `(x', y')`.
    pub fn pr_box() -> Self {
        let h = Num::ratio(1, 2);
        FineSystem {
            a: h.clone(),
            a_prime: h.clone(),
            b: h.clone(),
            b_prime: h.clone(),
            p11: h.clone(),
            q11: h.clone(),
            r11: h,
            s11: Num::zero(),
        }
    }

    /// Builds the system with inputs `1` (`x`, `x'`), `2` (`y`, `y'`) and
    /// outputs `0`, `1`.
    pub fn to_system(&self) -> Result<System, JdcError> {
        let design = Design::full(vec![Input::new("1", ["x", "x'"]), Input::new("2", ["y", "y'"])])?;
        let bin = || vec!["0".to_string(), "1".to_string()];
        let outcomes = OutcomeSpace::per_input(&design, vec![bin(), bin()])?;
        let cell = |m11: &Num, a: &Num, b: &Num| {
            vec![
                m11.clone(),
                a - m11,
                b - m11,
                &(&(Num::one() - a) - b) + m11,
            ]
        };
        let specs = [
            (vec![0, 0], cell(&self.p11, &self.a, &self.b)),
            (vec![0, 1], cell(&self.q11, &self.a, &self.b_prime)),
            (vec![1, 0], cell(&self.r11, &self.a_prime, &self.b)),
            (vec![1, 1], cell(&self.s11, &self.a_prime, &self.b_prime)),
        ];
        let tables = specs
            .into_iter()
            .map(|(t, probs)| Ok(TreatmentTable::new(Treatment(t), JointTable::new(vec![bin(), bin()], probs)?)))
            .collect::<Result<Vec<_>, JdcError>>()?;
        let eps = if self.p11.is_exact() { 0.0 } else { 1e-9 };
        Ok(System::new(design, outcomes, tables, eps)?)
    }

    /// `e_1..e_4`; the criterion holds iff each lies in `[-1, 0]`.
    pub fn values(&self) -> [Num; 4] {
        let sum3 = |u: &Num, v: &Num, w: &Num, z: &Num| &(&(u + v) + w) - z;
        [
            &sum3(&self.p11, &self.r11, &self.s11, &self.q11) - &(&self.a_prime + &self.b),
            &sum3(&self.q11, &self.s11, &self.r11, &self.p11) - &(&self.a_prime + &self.b_prime),
            &sum3(&self.r11, &self.p11, &self.q11, &self.s11) - &(&self.a + &self.b),
            &sum3(&self.s11, &self.q11, &self.p11, &self.r11) - &(&self.a + &self.b_prime),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FineReport {
    pub values: Vec<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values_exact: Option<Vec<String>>,
    pub satisfied: Vec<bool>,
    pub all_satisfied: bool,
}

/// Evaluates the four inequalities. Fails unless the system is 2x2 binary
/// and marginally selective.
pub fn fine_inequalities(system: &System, eps: f64) -> Result<FineReport, JdcError> {
    let values = FineSystem::from_system(system, eps)?.values();
    let tol = if system.is_exact() { 0.0 } else { eps };
    let satisfied: Vec<bool> = values
        .iter()
        .map(|e| !e.is_positive_tol(tol) && !(e + &Num::one()).is_negative_tol(tol))
        .collect();
    let values_exact = values
        .iter()
        .map(|v| v.as_exact().map(|r| r.to_string()))
        .collect::<Option<Vec<_>>>();
    Ok(FineReport {
        all_satisfied: satisfied.iter().all(|&s| s),
        values: values.to_vec(),
        values_exact,
        satisfied,
    })
}

/// The four tetrads `k = 1..4`, as input points:
/// `x y x' y'`, `x y' x' y`, `x' y x y'`, `x' y' x y`.
pub fn order_chain_sequences() -> [[InputPoint; 4]; 4] {
    let p = InputPoint::new;
    [
        [p(0, 0), p(1, 0), p(0, 1), p(1, 1)],
        [p(0, 0), p(1, 1), p(0, 1), p(1, 0)],
        [p(0, 1), p(1, 0), p(0, 0), p(1, 1)],
        [p(0, 1), p(1, 1), p(0, 0), p(1, 0)],
    ]
}

/// Order-distance ranking every output by its declared position, with the
/// second input reversed when `reverse_second`.
fn binary_order(system: &System, reverse_second: bool) -> Metric {
    let d = system.design();
    let mut layers: Layers<BTreeMap<String, u32>> = Layers::default();
    for p in d.points() {
        let vals = system.outcomes().values(p);
        let rev = reverse_second && p.input == 1;
        let ranks = vals
            .iter()
            .enumerate()
            .map(|(j, o)| (o.clone(), if rev { 2 - j as u32 } else { j as u32 + 1 }))
            .collect();
        let label = d.point_label(p);
        layers = layers.with_point(label.input, label.value, ranks);
    }
    Metric::Order(OrderSpec::new(layers).expect("binary ranks"))
}

/// Chain residuals `Σ rhs - lhs` of the four tetrads under the natural
/// order-distance (`D1`) and the one reversing the second input (`D2`).
pub fn d1_d2_chain_residuals(system: &System) -> Result<([Num; 4], [Num; 4]), JdcError> {
    check_shape(system)?;
    let map = CoverMap::new(system.design());
    let d1 = NamedMetric::new("D1", binary_order(system, false));
    let d2 = NamedMetric::new("D2", binary_order(system, true));
    let mut r1: [Num; 4] = Default::default();
    let mut r2: [Num; 4] = Default::default();
    for (k, seq) in order_chain_sequences().iter().enumerate() {
        let covers = std::iter::once((seq[0], seq[3]))
            .chain((1..4).map(|i| (seq[i - 1], seq[i])))
            .map(|(x, y)| map.cover(x, y).cloned().expect("full design covers"))
            .collect();
        let w = SequenceWitness {
            points: seq.to_vec(),
            covers,
        };
        r1[k] = chain_test(system, &d1, &w, 0.0)?.residual;
        r2[k] = chain_test(system, &d2, &w, 0.0)?.residual;
    }
    Ok((r1, r2))
}

/// Largest deviation from `D1_k = -e_k` and `D2_k = e_k + 1` over `k`.
/// Zero in exact arithmetic for every marginally selective 2x2 system.
pub fn verify_order_chain_identity(system: &System, eps: f64) -> Result<Num, JdcError> {
    let e = FineSystem::from_system(system, eps)?.values();
    let (r1, r2) = d1_d2_chain_residuals(system)?;
    let mut worst = if system.is_exact() { Num::zero() } else { Num::float(0.0) };
    for k in 0..4 {
        let dev1 = (&r1[k] + &e[k]).abs();
        let dev2 = (&(&r2[k] - &e[k]) - &Num::one()).abs();
        worst = worst.max(dev1).max(dev2);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn independent() -> FineSystem {
        let h = Num::ratio(1, 2);
        let q = Num::ratio(1, 4);
        FineSystem {
            a: h.clone(),
            a_prime: h.clone(),
            b: h.clone(),
            b_prime: h,
            p11: q.clone(),
            q11: q.clone(),
            r11: q.clone(),
            s11: q,
        }
    }

    #[test]
    fn pr_box_violates_third_inequality() {
        let s = FineSystem::pr_box().to_system().unwrap();
        let r = fine_inequalities(&s, 1e-9).unwrap();
        assert_eq!(r.values[2], Num::ratio(1, 2));
        assert_eq!(r.satisfied, vec![true, true, false, true]);
        let (d1, _) = d1_d2_chain_residuals(&s).unwrap();
        assert_eq!(d1[2], Num::ratio(-1, 2));
    }

    #[test]
    fn independent_outputs_satisfy_all() {
        let s = independent().to_system().unwrap();
        assert!(fine_inequalities(&s, 1e-9).unwrap().all_satisfied);
        assert!(verify_order_chain_identity(&s, 1e-9).unwrap().is_zero());
    }

    #[test]
    fn identity_holds_on_pr_box() {
        let s = FineSystem::pr_box().to_system().unwrap();
        assert!(verify_order_chain_identity(&s, 1e-9).unwrap().is_zero());
    }

    #[test]
    fn roundtrip_parameters() {
        let f = FineSystem::pr_box();
        let s = f.to_system().unwrap();
        assert_eq!(FineSystem::from_system(&s, 1e-9).unwrap(), f);
    }

    #[test]
    fn non_selective_system_is_rejected() {
        // First-input marginal at x is 2/3 under (x, y') but 1/2 under (x, y).
        let mut s = independent().to_system().unwrap();
        let tables: Vec<_> = s
            .tables()
            .iter()
            .map(|t| {
                if t.treatment == Treatment(vec![0, 1]) {
                    let p = vec![Num::ratio(1, 3), Num::ratio(1, 3), Num::ratio(1, 6), Num::ratio(1, 6)];
                    TreatmentTable::new(t.treatment.clone(), JointTable::new(t.table.axes().to_vec(), p).unwrap())
                } else {
                    t.clone()
                }
            })
            .collect();
        s = System::new(s.design().clone(), s.outcomes().clone(), tables, 0.0).unwrap();
        assert!(matches!(
            fine_inequalities(&s, 1e-9),
            Err(JdcError::MarginalSelectivityViolated(_))
        ));
    }
}
