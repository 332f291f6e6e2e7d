use crate::num::Num;

use super::{PointLabel, ProbError};

/// A dense joint probability table over labelled axes, stored row-major
/// (last axis varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    axes: Vec<Vec<String>>,
    probs: Vec<Num>,
}

impl JointTable {
    pub fn new(axes: Vec<Vec<String>>, probs: Vec<Num>) -> Result<Self, ProbError> {
        let expected = axes.iter().map(Vec::len).product::<usize>();
        if expected != probs.len() {
            return Err(ProbError::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        Ok(JointTable { axes, probs })
    }

    pub fn axes(&self) -> &[Vec<String>] {
        &self.axes
    }

    pub fn num_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn probs(&self) -> &[Num] {
        &self.probs
    }

    pub fn is_exact(&self) -> bool {
        self.probs.iter().all(Num::is_exact)
    }

    pub fn total(&self) -> Num {
        self.probs.iter().sum()
    }

    pub fn to_float(&self) -> JointTable {
        JointTable {
            axes: self.axes.clone(),
            probs: self.probs.iter().map(Num::to_float).collect(),
        }
    }

    /// Flat index of an outcome given per-axis indices.
    pub fn flat_index(&self, outcome: &[usize]) -> usize {
        outcome
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&o, axis)| acc * axis.len() + o)
    }

    pub fn get(&self, outcome: &[usize]) -> &Num {
        &self.probs[self.flat_index(outcome)]
    }

    /// Per-axis indices of the cell at `flat`.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes.len()];
        for (slot, axis) in out.iter_mut().zip(&self.axes).rev() {
            *slot = flat % axis.len();
            flat /= axis.len();
        }
        out
    }

    /// Labelled cells in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<String>, &Num)> + '_ {
        self.probs.iter().enumerate().map(move |(i, p)| {
            let idx = self.unflatten(i);
            let labels = idx
                .iter()
                .zip(&self.axes)
                .map(|(&k, axis)| axis[k].clone())
                .collect();
            (labels, p)
        })
    }

    /// Sums out every axis not listed in `keep`; the result's axes follow
    /// the order of `keep`. Panics if an index is out of range.
    pub fn marginalize(&self, keep: &[usize]) -> JointTable {
        let axes: Vec<Vec<String>> = keep.iter().map(|&k| self.axes[k].clone()).collect();
        let size = axes.iter().map(Vec::len).product::<usize>();
        let mut probs = vec![Num::zero(); size];
        if !self.is_exact() {
            probs.iter_mut().for_each(|p| *p = Num::float(0.0));
        }
        let mut idx = vec![0usize; self.axes.len()];
        for p in &self.probs {
            let target = keep
                .iter()
                .fold(0, |acc, &k| acc * self.axes[k].len() + idx[k]);
            probs[target] = &probs[target] + p;
            for d in (0..idx.len()).rev() {
                idx[d] += 1;
                if idx[d] < self.axes[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
        JointTable { axes, probs }
    }
}

/// Joint distribution of an ordered pair of variables `(row, col)`.
///
/// The optional variable tags identify which input points the pair came
/// from so that per-variable parameters (ranks, embeddings) can be looked
/// up. Order matters: most metrics here are asymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateMarginal {
    pub row_var: Option<PointLabel>,
    pub col_var: Option<PointLabel>,
    pub row_values: Vec<String>,
    pub col_values: Vec<String>,
    probs: Vec<Num>,
}

impl BivariateMarginal {
    pub fn new(row_values: Vec<String>, col_values: Vec<String>, probs: Vec<Num>) -> Result<Self, ProbError> {
        let expected = row_values.len() * col_values.len();
        if probs.len() != expected {
            return Err(ProbError::ShapeMismatch {
                expected,
                got: probs.len(),
            });
        }
        if let Some(p) = probs.iter().find(|p| p.is_negative_tol(0.0)) {
            return Err(ProbError::NegativeProbability(p.to_string()));
        }
        Ok(BivariateMarginal {
            row_var: None,
            col_var: None,
            row_values,
            col_values,
            probs,
        })
    }

    /// Checked constructor that also requires the mass to sum to one
    /// (exactly for rationals, within `eps_sum` for floats).
    pub fn new_normalized(
        row_values: Vec<String>,
        col_values: Vec<String>,
        probs: Vec<Num>,
        eps_sum: f64,
    ) -> Result<Self, ProbError> {
        let m = BivariateMarginal::new(row_values, col_values, probs)?;
        let total: Num = m.probs.iter().sum();
        let off = (&total - &Num::one()).abs();
        let bad = if off.is_exact() { !off.is_zero() } else { off.to_f64() > eps_sum };
        if bad {
            return Err(ProbError::SumNotOne {
                sum: total.to_f64(),
                delta: off.to_f64(),
            });
        }
        Ok(m)
    }

    pub(crate) fn from_joint(joint: JointTable) -> Self {
        debug_assert_eq!(joint.num_axes(), 2);
        let mut axes = joint.axes.into_iter();
        BivariateMarginal {
            row_var: None,
            col_var: None,
            row_values: axes.next().unwrap_or_default(),
            col_values: axes.next().unwrap_or_default(),
            probs: joint.probs,
        }
    }

    /// The coupling of a variable with itself: all mass on the diagonal.
    pub fn diagonal(values: Vec<String>, marginal: Vec<Num>) -> Self {
        let n = values.len();
        let zero = if marginal.iter().all(Num::is_exact) { Num::zero() } else { Num::float(0.0) };
        let mut probs = vec![zero; n * n];
        for (i, p) in marginal.into_iter().enumerate() {
            probs[i * n + i] = p;
        }
        BivariateMarginal {
            row_var: None,
            col_var: None,
            row_values: values.clone(),
            col_values: values,
            probs,
        }
    }

    /// Independent coupling of two marginals.
    pub fn product(row_values: Vec<String>, row: &[Num], col_values: Vec<String>, col: &[Num]) -> Self {
        let probs = row.iter().flat_map(|r| col.iter().map(move |c| r * c)).collect();
        BivariateMarginal {
            row_var: None,
            col_var: None,
            row_values,
            col_values,
            probs,
        }
    }

    pub fn with_vars(mut self, row: Option<PointLabel>, col: Option<PointLabel>) -> Self {
        self.row_var = row;
        self.col_var = col;
        self
    }

    pub fn rows(&self) -> usize {
        self.row_values.len()
    }

    pub fn cols(&self) -> usize {
        self.col_values.len()
    }

    pub fn get(&self, row: usize, col: usize) -> &Num {
        &self.probs[row * self.col_values.len() + col]
    }

    pub fn probs(&self) -> &[Num] {
        &self.probs
    }

    pub fn is_exact(&self) -> bool {
        self.probs.iter().all(Num::is_exact)
    }

    /// `(row index, col index, probability)` for every cell.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, &Num)> + '_ {
        let c = self.col_values.len();
        self.probs.iter().enumerate().map(move |(i, p)| (i / c, i % c, p))
    }

    pub fn transpose(&self) -> BivariateMarginal {
        let (r, c) = (self.rows(), self.cols());
        let probs = (0..c)
            .flat_map(|j| (0..r).map(move |i| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        BivariateMarginal {
            row_var: self.col_var.clone(),
            col_var: self.row_var.clone(),
            row_values: self.col_values.clone(),
            col_values: self.row_values.clone(),
            probs,
        }
    }

    pub fn row_marginal(&self) -> Vec<Num> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn col_marginal(&self) -> Vec<Num> {
        (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.get(i, j)).sum())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn nums(xs: &[(i64, i64)]) -> Vec<Num> {
        xs.iter().map(|&(n, d)| Num::ratio(n, d)).collect()
    }

    #[test]
    fn row_sum_of_first_table_is_a1() {
        // p11 = 1/8, p12 = 3/8 -> a1. = 1/2
        let t = JointTable::new(
            vec![labels(&["bullet", "circ"]), labels(&["cup", "cap"])],
            nums(&[(1, 8), (3, 8), (1, 4), (1, 4)]),
        )
        .unwrap();
        let m = t.marginalize(&[0]);
        assert_eq!(m.probs(), &nums(&[(1, 2), (1, 2)])[..]);
        assert_eq!(t.marginalize(&[0, 1]), t);
    }

    #[test]
    fn uniform_marginalizes_to_halves() {
        let t = JointTable::new(vec![labels(&["0", "1"]), labels(&["0", "1"])], nums(&[(1, 4); 4])).unwrap();
        assert_eq!(t.marginalize(&[0]).probs(), &nums(&[(1, 2), (1, 2)])[..]);
    }

    #[test]
    fn marginalize_reorders_axes() {
        let t = JointTable::new(
            vec![labels(&["a", "b"]), labels(&["c", "d", "e"])],
            nums(&[(1, 6), (1, 6), (1, 12), (1, 12), (1, 4), (1, 4)]),
        )
        .unwrap();
        let swapped = t.marginalize(&[1, 0]);
        assert_eq!(swapped.axes()[0], labels(&["c", "d", "e"]));
        assert_eq!(swapped.get(&[2, 1]), t.get(&[1, 2]));
        assert_eq!(t.unflatten(4), vec![1, 1]);
        assert_eq!(t.flat_index(&[1, 1]), 4);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let err = JointTable::new(vec![labels(&["a", "b"])], nums(&[(1, 1)])).unwrap_err();
        assert_eq!(err, ProbError::ShapeMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn product_is_outer_product() {
        let m = BivariateMarginal::product(
            labels(&["a", "b"]),
            &nums(&[(1, 3), (2, 3)]),
            labels(&["c", "d"]),
            &nums(&[(1, 4), (3, 4)]),
        );
        assert_eq!(m.get(1, 1), &Num::ratio(1, 2));
        assert_eq!(m.row_marginal(), nums(&[(1, 3), (2, 3)]));
        assert_eq!(m.col_marginal(), nums(&[(1, 4), (3, 4)]));
        assert_eq!(m.transpose().get(1, 0), m.get(0, 1));
    }

    #[test]
    fn normalized_constructor_checks_mass() {
        let err = BivariateMarginal::new_normalized(
            labels(&["a"]),
            labels(&["b", "c"]),
            vec![Num::float(0.5), Num::float(0.4)],
            1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, ProbError::SumNotOne { .. }));
    }
}
