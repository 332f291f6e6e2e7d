use crate::num::Num;
use crate::probspace::{BivariateMarginal, JointTable};

use super::{Embedding, GroundMetric, MetricError, OrderSpec, PExponent, Partition, SeparationPoints};

pub const DEFAULT_LOG_BASE: f64 = 2.0;

/// Float cells at or below this mass are outside the support for `p = ∞`.
pub const EPS_SUPPORT: f64 = 1e-12;

fn zero_like(m: &BivariateMarginal) -> Num {
    if m.is_exact() {
        Num::zero()
    } else {
        Num::float(0.0)
    }
}

/// `Pr[row ≺ col]`: the mass of cells whose row value has strictly smaller
/// rank than the column value. Ties contribute nothing.
pub fn order_distance(m: &BivariateMarginal, ord: &OrderSpec) -> Result<Num, MetricError> {
    let row_ranks = m
        .row_values
        .iter()
        .map(|v| ord.rank(m.row_var.as_ref(), v))
        .collect::<Result<Vec<_>, _>>()?;
    let col_ranks = m
        .col_values
        .iter()
        .map(|v| ord.rank(m.col_var.as_ref(), v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(strict_mass(m, &row_ranks, &col_ranks))
}

/// Order-distance whose ranks are the (1-based) indices of partition cells.
pub fn classification_distance(m: &BivariateMarginal, part: &Partition) -> Result<Num, MetricError> {
    let row_ranks = m
        .row_values
        .iter()
        .map(|v| part.cell_rank(m.row_var.as_ref(), v))
        .collect::<Result<Vec<_>, _>>()?;
    let col_ranks = m
        .col_values
        .iter()
        .map(|v| part.cell_rank(m.col_var.as_ref(), v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(strict_mass(m, &row_ranks, &col_ranks))
}

fn strict_mass(m: &BivariateMarginal, row_ranks: &[u32], col_ranks: &[u32]) -> Num {
    m.cells()
        .filter(|&(i, j, _)| row_ranks[i] < col_ranks[j])
        .fold(zero_like(m), |acc, (_, _, p)| acc + p)
}

/// `d(A,X) + d(X,B) - d(A,B)` for three distances taken from one trivariate
/// distribution. For order-distances it lies in `[0, 1]`.
pub fn triangle_defect(d_ax: &Num, d_xb: &Num, d_ab: &Num) -> Num {
    d_ax + d_xb - d_ab
}

fn embedded(m: &BivariateMarginal, embed: &Embedding) -> Result<(Vec<Num>, Vec<Num>), MetricError> {
    let rows = m
        .row_values
        .iter()
        .map(|v| embed.value(m.row_var.as_ref(), v).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    let cols = m
        .col_values
        .iter()
        .map(|v| embed.value(m.col_var.as_ref(), v).cloned())
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rows, cols))
}

/// `(E|A-B|^p)^(1/p)`, or the essential supremum of `|A-B|` for `p = ∞`.
///
/// Exact for rational inputs when `p` is 1 or ∞; other exponents involve
/// a real root and give a float.
pub fn p_distance(m: &BivariateMarginal, embed: &Embedding, p: PExponent) -> Result<Num, MetricError> {
    let (rows, cols) = embedded(m, embed)?;
    match p {
        PExponent::Infinity => {
            let mut sup = zero_like(m);
            for (i, j, mass) in m.cells() {
                let in_support = match mass {
                    Num::Exact(_) => !mass.is_zero(),
                    Num::Float(x) => *x > EPS_SUPPORT,
                };
                if in_support {
                    sup = sup.max((&rows[i] - &cols[j]).abs());
                }
            }
            Ok(sup)
        }
        PExponent::Finite(p) => {
            if p.is_nan() || p < 1.0 {
                return Err(MetricError::InvalidP(p));
            }
            let integer = p.fract() == 0.0 && p <= u32::MAX as f64;
            let moment = m.cells().fold(zero_like(m), |acc, (i, j, mass)| {
                let diff = (&rows[i] - &cols[j]).abs();
                let powered = if integer { diff.powi(p as u32) } else { diff.powf(p) };
                acc + mass * &powered
            });
            Ok(moment.powf(1.0 / p))
        }
    }
}

/// `E[|A-B| / (1 + |A-B|)]`.
pub fn frechet_distance(m: &BivariateMarginal, embed: &Embedding) -> Result<Num, MetricError> {
    let (rows, cols) = embedded(m, embed)?;
    Ok(m.cells().fold(zero_like(m), |acc, (i, j, mass)| {
        let diff = (&rows[i] - &cols[j]).abs();
        let bounded = &diff / &(&Num::one() + &diff);
        acc + mass * &bounded
    }))
}

/// `h(row | col) = -Σ p(a,b) log(p(a,b) / p_col(b))` with `0 log 0 = 0`.
/// Always a float.
pub fn conditional_entropy(m: &BivariateMarginal, base: f64) -> Num {
    let col = m.col_marginal();
    let ln_base = base.ln();
    let mut h = 0.0;
    for (_, j, mass) in m.cells() {
        let p = mass.to_f64();
        let pb = col[j].to_f64();
        if p > 0.0 && pb > 0.0 {
            h += (-p * (p / pb).ln() / ln_base).max(0.0);
        }
    }
    Num::float(h)
}

/// `Pr[e(A) <= e(U) < e(B)]` from a joint table over `(A, U, B)`.
pub fn separation_distance(t: &JointTable, embed: &Embedding) -> Result<Num, MetricError> {
    if t.num_axes() != 3 {
        return Err(MetricError::WrongArity {
            expected: 3,
            found: t.num_axes(),
        });
    }
    let axis_values = |k: usize| {
        t.axes()[k]
            .iter()
            .map(|v| embed.value(None, v).cloned())
            .collect::<Result<Vec<_>, _>>()
    };
    let (a, u, b) = (axis_values(0)?, axis_values(1)?, axis_values(2)?);
    let zero = if t.is_exact() { Num::zero() } else { Num::float(0.0) };
    Ok(t.probs().iter().enumerate().fold(zero, |acc, (flat, p)| {
        let idx = t.unflatten(flat);
        if a[idx[0]] <= u[idx[1]] && u[idx[1]] < b[idx[2]] {
            acc + p
        } else {
            acc
        }
    }))
}

/// Separation distance with `U` independent of the pair.
pub fn separation_distance_independent(
    m: &BivariateMarginal,
    embed: &Embedding,
    u: &SeparationPoints,
) -> Result<Num, MetricError> {
    let (rows, cols) = embedded(m, embed)?;
    let mut total = zero_like(m);
    for (point, weight) in u.points() {
        let mass = m
            .cells()
            .filter(|&(i, j, _)| rows[i] <= *point && *point < cols[j])
            .fold(zero_like(m), |acc, (_, _, p)| acc + p);
        total = total + weight * &mass;
    }
    Ok(total)
}

/// `E[g(A, B)]` for a ground p.q.-metric `g` on output labels.
pub fn expected_ground(m: &BivariateMarginal, ground: &GroundMetric) -> Result<Num, MetricError> {
    let mut acc = zero_like(m);
    for (i, j, mass) in m.cells() {
        acc = acc + mass * ground.distance(&m.row_values[i], &m.col_values[j])?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn m(rows: &[&str], cols: &[&str], probs: &[(i64, i64)]) -> BivariateMarginal {
        BivariateMarginal::new(labels(rows), labels(cols), probs.iter().map(|&(n, d)| Num::ratio(n, d)).collect())
            .unwrap()
    }

    fn bits() -> Embedding {
        Embedding::parse_labels(["0", "1"])
    }

    fn independent_bits() -> BivariateMarginal {
        m(&["0", "1"], &["0", "1"], &[(1, 4); 4])
    }

    fn correlated_bits() -> BivariateMarginal {
        m(&["0", "1"], &["0", "1"], &[(1, 2), (0, 1), (0, 1), (1, 2)])
    }

    #[test]
    fn order_distance_sums_strictly_increasing_cells() {
        let ord = OrderSpec::global([("0", 1), ("1", 2)]).unwrap();
        let x = m(&["0", "1"], &["0", "1"], &[(1, 10), (3, 10), (4, 10), (2, 10)]);
        assert_eq!(order_distance(&x, &ord).unwrap(), Num::ratio(3, 10));
    }

    #[test]
    fn order_distance_reads_q12_under_d1_labeling() {
        // bullet = cup = 1, circ = cap = 2 on the (x, y') table.
        let ord = OrderSpec::global([("bullet", 1), ("cup", 1), ("circ", 2), ("cap", 2)]).unwrap();
        let q = m(&["bullet", "circ"], &["cup", "cap"], &[(1, 8), (1, 4), (1, 2), (1, 8)]);
        assert_eq!(order_distance(&q, &ord).unwrap(), Num::ratio(1, 4));
    }

    #[test]
    fn diagonal_coupling_is_at_zero_distance() {
        let d = BivariateMarginal::diagonal(labels(&["0", "1", "2"]), vec![Num::ratio(1, 3); 3]);
        let ord = OrderSpec::global([("0", 1), ("1", 2), ("2", 3)]).unwrap();
        assert_eq!(order_distance(&d, &ord).unwrap(), Num::zero());
        let embed = Embedding::parse_labels(["0", "1", "2"]);
        assert_eq!(p_distance(&d, &embed, PExponent::Infinity).unwrap(), Num::zero());
        assert_eq!(frechet_distance(&d, &embed).unwrap(), Num::zero());
        assert_eq!(conditional_entropy(&d, 2.0).to_f64(), 0.0);
    }

    #[test]
    fn unranked_value_is_an_error() {
        let ord = OrderSpec::global([("0", 1)]).unwrap();
        assert!(matches!(
            order_distance(&independent_bits(), &ord),
            Err(MetricError::UnrankedValue { .. })
        ));
    }

    #[test]
    fn classification_on_uniform_three_by_three() {
        let part = Partition::global(vec![labels(&["a"]), labels(&["b"]), labels(&["c"])]).unwrap();
        let x = m(&["a", "b", "c"], &["a", "b", "c"], &[(1, 9); 9]);
        assert_eq!(classification_distance(&x, &part).unwrap(), Num::ratio(1, 3));
        let missing = Partition::global(vec![labels(&["a"]), labels(&["b"])]).unwrap();
        assert!(matches!(
            classification_distance(&x, &missing),
            Err(MetricError::ValueNotInPartition { .. })
        ));
    }

    #[test]
    fn classification_on_diagonal_with_shared_binary_partition() {
        let part = Partition::global(vec![labels(&["neg"]), labels(&["pos"])]).unwrap();
        let x = m(&["neg", "pos"], &["neg", "pos"], &[(1, 2), (0, 1), (0, 1), (1, 2)]);
        assert_eq!(classification_distance(&x, &part).unwrap(), Num::zero());
    }

    #[test]
    fn p_distance_on_bits() {
        let p1 = PExponent::finite(1.0).unwrap();
        assert_eq!(p_distance(&independent_bits(), &bits(), p1).unwrap(), Num::ratio(1, 2));
        assert_eq!(p_distance(&independent_bits(), &bits(), PExponent::Infinity).unwrap(), Num::one());
        for p in [PExponent::Finite(1.0), PExponent::Finite(2.5), PExponent::Infinity] {
            assert_eq!(p_distance(&correlated_bits(), &bits(), p).unwrap().to_f64(), 0.0);
        }
        assert_eq!(PExponent::finite(0.5), Err(MetricError::InvalidP(0.5)));
    }

    #[test]
    fn p_infinity_ignores_float_dust() {
        let x = BivariateMarginal::new(
            labels(&["0", "1"]),
            labels(&["0", "1"]),
            vec![Num::float(0.5), Num::float(1e-15), Num::float(0.0), Num::float(0.5 - 1e-15)],
        )
        .unwrap();
        assert_eq!(p_distance(&x, &bits(), PExponent::Infinity).unwrap().to_f64(), 0.0);
    }

    #[test]
    fn entropy_of_independent_fair_bits_is_one_bit() {
        let h = conditional_entropy(&independent_bits(), 2.0).to_f64();
        assert!((h - 1.0).abs() < 1e-15);
        let nats = conditional_entropy(&independent_bits(), std::f64::consts::E).to_f64();
        assert!((nats - h * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn frechet_single_cell() {
        let x = m(&["0"], &["1"], &[(1, 1)]);
        assert_eq!(frechet_distance(&x, &bits()).unwrap(), Num::ratio(1, 2));
    }

    #[test]
    fn separation_cases() {
        let embed = Embedding::global([
            ("0", Num::int(0)),
            ("1", Num::int(1)),
            ("half", Num::ratio(1, 2)),
            ("-1", Num::int(-1)),
            ("2", Num::int(2)),
        ]);
        let det = JointTable::new(vec![labels(&["0"]), labels(&["half"]), labels(&["1"])], vec![Num::one()]).unwrap();
        assert_eq!(separation_distance(&det, &embed).unwrap(), Num::one());
        let same = JointTable::new(vec![labels(&["1"]), labels(&["half"]), labels(&["1"])], vec![Num::one()]).unwrap();
        assert_eq!(separation_distance(&same, &embed).unwrap(), Num::zero());
        let spread = JointTable::new(
            vec![labels(&["0"]), labels(&["-1", "half", "2"]), labels(&["1"])],
            vec![Num::ratio(1, 3); 3],
        )
        .unwrap();
        assert_eq!(separation_distance(&spread, &embed).unwrap(), Num::ratio(1, 3));
        let flat = JointTable::new(vec![labels(&["0"]), labels(&["1"])], vec![Num::one()]).unwrap();
        assert!(matches!(separation_distance(&flat, &embed), Err(MetricError::WrongArity { .. })));

        let u = SeparationPoints::new(vec![
            (Num::int(-1), Num::ratio(1, 3)),
            (Num::ratio(1, 2), Num::ratio(1, 3)),
            (Num::int(2), Num::ratio(1, 3)),
        ])
        .unwrap();
        let x = m(&["0"], &["1"], &[(1, 1)]);
        assert_eq!(separation_distance_independent(&x, &embed, &u).unwrap(), Num::ratio(1, 3));
    }

    #[test]
    fn expected_ground_cases() {
        let abs = GroundMetric::absolute_difference([("0", Num::int(0)), ("1", Num::int(1))]).unwrap();
        let p1 = p_distance(&independent_bits(), &bits(), PExponent::Finite(1.0)).unwrap();
        assert_eq!(expected_ground(&independent_bits(), &abs).unwrap(), p1);
        let discrete = GroundMetric::discrete(["0", "1"]);
        assert_eq!(expected_ground(&independent_bits(), &discrete).unwrap(), Num::ratio(1, 2));
        let zero = GroundMetric::new(labels(&["0", "1"]), vec![Num::zero(); 4]).unwrap();
        assert_eq!(expected_ground(&independent_bits(), &zero).unwrap(), Num::zero());
    }

    #[test]
    fn triangle_defect_identity() {
        let z = Num::zero();
        assert_eq!(triangle_defect(&z, &z, &z), Num::zero());
    }
}
