//! Phase-1 simplex for `A x = b, x >= 0` with Bland's rule.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scalar field the tableau works over. `sign` ignores `eps` for exact
/// types.
pub trait LpScalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn sign(&self, eps: f64) -> Ordering;
    fn is_finite(&self) -> bool;
    fn exact() -> bool;
}

impl LpScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self, _eps: f64) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
    fn is_finite(&self) -> bool {
        true
    }
    fn exact() -> bool {
        true
    }
}

impl LpScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self, eps: f64) -> Ordering {
        if *self > eps {
            Ordering::Greater
        } else if *self < -eps {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn exact() -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<T>),
    /// `y` with `yᵀA >= 0` and `yᵀb < 0`.
    Infeasible(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T> {
    pub outcome: LpOutcome<T>,
    pub pivots: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpFailure {
    IterationLimit(usize),
    NotFinite,
}

/// Constraint matrix stored by column as `(row, coefficient)` lists.
#[derive(Debug, Clone)]
pub struct SparseColumns<T> {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, T)>>,
}

/// Decides feasibility of `A x = b, x >= 0`. For floats, values within
/// `eps` of zero are treated as zero and at most `max_pivots` pivots run.
pub fn phase_one<T: LpScalar>(
    a: &SparseColumns<T>,
    b: &[T],
    eps: f64,
    max_pivots: usize,
) -> Result<LpSolution<T>, LpFailure> {
    let m = a.rows;
    let n = a.columns.len();
    let width = n + m;
    // Flip rows so that b >= 0.
    let flip: Vec<bool> = b.iter().map(|v| v.sign(0.0) == Ordering::Less).collect();
    let mut t: Vec<Vec<T>> = vec![vec![T::zero(); width]; m];
    let mut rhs: Vec<T> = b.iter().zip(&flip).map(|(v, &f)| if f { v.neg() } else { v.clone() }).collect();
    for (j, col) in a.columns.iter().enumerate() {
        for (i, v) in col {
            t[*i][j] = if flip[*i] { v.neg() } else { v.clone() };
        }
    }
    for (i, row) in t.iter_mut().enumerate() {
        row[n + i] = T::one();
    }
    let mut basis: Vec<usize> = (n..width).collect();
    // Reduced costs for minimizing the sum of artificials.
    let mut cost: Vec<T> = vec![T::zero(); width];
    for (j, c) in cost.iter_mut().enumerate().take(n) {
        let mut s = T::zero();
        for row in &t {
            s = s.sub(&row[j]);
        }
        *c = s;
    }

    let mut pivots = 0;
    while let Some(enter) = (0..width).find(|&j| cost[j].sign(eps) == Ordering::Less) {
        let mut leave: Option<(usize, T)> = None;
        for i in 0..m {
            if t[i][enter].sign(eps) != Ordering::Greater {
                continue;
            }
            let ratio = rhs[i].div(&t[i][enter]);
            leave = match leave {
                None => Some((i, ratio)),
                Some((k, best)) => match ratio.sub(&best).sign(if T::exact() { 0.0 } else { eps }) {
                    Ordering::Less => Some((i, ratio)),
                    Ordering::Equal if basis[i] < basis[k] => Some((i, ratio)),
                    _ => Some((k, best)),
                },
            };
        }
        // Phase 1 is bounded below by zero, so an entering column always
        // has a positive entry unless rounding has destroyed the tableau.
        let Some((r, _)) = leave else {
            return Err(LpFailure::NotFinite);
        };
        pivots += 1;
        if pivots > max_pivots {
            return Err(LpFailure::IterationLimit(max_pivots));
        }
        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v = v.div(&piv);
        }
        rhs[r] = rhs[r].div(&piv);
        let prow = t[r].clone();
        let prhs = rhs[r].clone();
        for i in 0..m {
            if i == r {
                continue;
            }
            let f = t[i][enter].clone();
            if f.sign(0.0) == Ordering::Equal {
                continue;
            }
            for (v, p) in t[i].iter_mut().zip(&prow) {
                *v = v.sub(&f.mul(p));
            }
            rhs[i] = rhs[i].sub(&f.mul(&prhs));
        }
        let f = cost[enter].clone();
        for (v, p) in cost.iter_mut().zip(&prow) {
            *v = v.sub(&f.mul(p));
        }
        basis[r] = enter;
        if !rhs.iter().all(LpScalar::is_finite) {
            return Err(LpFailure::NotFinite);
        }
    }

    // Remaining sum of artificials.
    let mut w = T::zero();
    for (i, &j) in basis.iter().enumerate() {
        if j >= n {
            w = w.add(&rhs[i]);
        }
    }
    if w.sign(eps) == Ordering::Equal {
        let mut x = vec![T::zero(); n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = rhs[i].clone();
            }
        }
        return Ok(LpSolution {
            outcome: LpOutcome::Feasible(x),
            pivots,
        });
    }
    // Phase-1 duals: y_k = 1 - (reduced cost of artificial k). They give
    // yᵀA <= 0 and yᵀb = w > 0 on the flipped system; negate and unflip.
    let y: Vec<T> = (0..m)
        .map(|k| {
            let yk = T::one().sub(&cost[n + k]);
            let yk = if flip[k] { yk.neg() } else { yk };
            yk.neg()
        })
        .collect();
    Ok(LpSolution {
        outcome: LpOutcome::Infeasible(y),
        pivots,
    })
}

/// `Σ_i y_i A_ij` for every column.
pub fn transpose_product<T: LpScalar>(a: &SparseColumns<T>, y: &[T]) -> Vec<T> {
    a.columns
        .iter()
        .map(|col| col.iter().fold(T::zero(), |acc, (i, v)| acc.add(&y[*i].mul(v))))
        .collect()
}

/// `A x` as a row vector.
pub fn product<T: LpScalar>(a: &SparseColumns<T>, x: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.rows];
    for (col, xj) in a.columns.iter().zip(x) {
        if xj.sign(0.0) == Ordering::Equal {
            continue;
        }
        for (i, v) in col {
            out[*i] = out[*i].add(&v.mul(xj));
        }
    }
    out
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols<T>(dense: &[Vec<T>]) -> SparseColumns<T>
    where
        T: LpScalar,
    {
        let rows = dense.len();
        let n = dense[0].len();
        let columns = (0..n)
            .map(|j| {
                (0..rows)
                    .filter(|&i| dense[i][j].sign(0.0) != Ordering::Equal)
                    .map(|i| (i, dense[i][j].clone()))
                    .collect()
            })
            .collect();
        SparseColumns { rows, columns }
    }

    #[test]
    fn feasible_rational_system() {
        // x + y = 1, x - y = 1/2
        let a = cols(&[vec![rational(1, 1), rational(1, 1)], vec![rational(1, 1), rational(-1, 1)]]);
        let b = vec![rational(1, 1), rational(1, 2)];
        let s = phase_one(&a, &b, 0.0, 1000).unwrap();
        match s.outcome {
            LpOutcome::Feasible(x) => {
                assert_eq!(x, vec![rational(3, 4), rational(1, 4)]);
                assert_eq!(product(&a, &x), b);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_rational_system_has_certificate() {
        // x + y = 1, x + y = 2
        let a = cols(&[vec![rational(1, 1), rational(1, 1)], vec![rational(1, 1), rational(1, 1)]]);
        let b = vec![rational(1, 1), rational(2, 1)];
        let s = phase_one(&a, &b, 0.0, 1000).unwrap();
        let LpOutcome::Infeasible(y) = s.outcome else { panic!() };
        assert!(transpose_product(&a, &y).iter().all(|v| !v.is_negative()));
        let yb = y.iter().zip(&b).fold(rational(0, 1), |acc, (u, v)| acc + u * v);
        assert!(yb.is_negative());
    }

    #[test]
    fn negative_rhs_needs_negative_x() {
        // x = -1
        let a = cols(&[vec![1.0_f64]]);
        let s = phase_one(&a, &[-1.0], 1e-9, 100).unwrap();
        let LpOutcome::Infeasible(y) = s.outcome else { panic!() };
        assert!(transpose_product(&a, &y)[0] >= 0.0);
        assert!(-y[0] < 0.0);
    }

    #[test]
    fn float_feasible_with_degenerate_rows() {
        let a = cols(&[vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let s = phase_one(&a, &[0.5, 0.5, 0.0], 1e-9, 100).unwrap();
        let LpOutcome::Feasible(x) = s.outcome else { panic!() };
        let ax = product(&a, &x);
        assert!((ax[0] - 0.5).abs() < 1e-12 && ax[2].abs() < 1e-12);
    }
}
