//! Treatment-realizable and irreducible sequences of input points.

use std::collections::HashMap;

use crate::probspace::{Design, InputPoint, Treatment};

use super::SelectivityError;

pub const DEFAULT_MAX_LEN: usize = 6;
pub const MAX_LEN_LIMIT: usize = 8;
pub const DEFAULT_MAX_SEQUENCES: usize = 1_000_000;

/// A sequence `x_1..x_l` with the treatments realizing it: `covers[0]`
/// contains `{x_1, x_l}` and `covers[i]` contains `{x_i, x_{i+1}}`
/// (0-based) for `i >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceWitness {
    pub points: Vec<InputPoint>,
    pub covers: Vec<Treatment>,
}

impl SequenceWitness {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The `(first, second, treatment)` triple for the closing pair
    /// followed by each consecutive pair.
    pub fn pairs(&self) -> impl Iterator<Item = (InputPoint, InputPoint, &Treatment)> + '_ {
        let l = self.points.len();
        std::iter::once((self.points[0], self.points[l - 1], &self.covers[0])).chain(
            (1..l).map(move |i| (self.points[i - 1], self.points[i], &self.covers[i])),
        )
    }

    /// Whether every cover is allowable and contains its pair.
    pub fn is_valid_for(&self, design: &Design) -> bool {
        self.points.len() >= 3
            && self.covers.len() == self.points.len()
            && self.pairs().all(|(x, y, t)| design.contains_treatment(t) && t.contains(x) && t.contains(y))
    }
}

/// Some allowable treatment containing both points, lexicographically
/// smallest. For full designs any two points of distinct inputs (or a
/// point with itself) are covered.
pub fn pair_coverable(design: &Design, x: InputPoint, y: InputPoint) -> Option<Treatment> {
    design.covering_treatment(&[x, y])
}

/// Precomputed lexicographically-first cover for every ordered pair of
/// input points.
#[derive(Debug, Clone)]
pub struct CoverMap {
    points: Vec<InputPoint>,
    id: HashMap<InputPoint, usize>,
    covers: Vec<Option<Treatment>>,
}

impl CoverMap {
    pub fn new(design: &Design) -> Self {
        let points = design.points();
        let n = points.len();
        let id: HashMap<InputPoint, usize> = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut covers: Vec<Option<Treatment>> = vec![None; n * n];
        if design.is_full() {
            for (i, &x) in points.iter().enumerate() {
                for (j, &y) in points.iter().enumerate() {
                    covers[i * n + j] = design.covering_treatment(&[x, y]);
                }
            }
        } else {
            // Treatments arrive in lexicographic order, so the first hit wins.
            for t in design.treatments() {
                let ids: Vec<usize> = t.points().map(|p| id[&p]).collect();
                for &a in &ids {
                    for &b in &ids {
                        covers[a * n + b].get_or_insert_with(|| t.clone());
                    }
                }
            }
        }
        CoverMap { points, id, covers }
    }

    pub fn points(&self) -> &[InputPoint] {
        &self.points
    }

    pub fn point(&self, id: usize) -> InputPoint {
        self.points[id]
    }

    pub fn id(&self, p: InputPoint) -> usize {
        self.id[&p]
    }

    pub fn cover_ids(&self, a: usize, b: usize) -> Option<&Treatment> {
        self.covers[a * self.points.len() + b].as_ref()
    }

    pub fn coverable_ids(&self, a: usize, b: usize) -> bool {
        self.covers[a * self.points.len() + b].is_some()
    }

    pub fn cover(&self, x: InputPoint, y: InputPoint) -> Option<&Treatment> {
        self.cover_ids(self.id(x), self.id(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SequenceKind {
    Realizable,
    Irreducible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationOptions {
    pub min_len: usize,
    pub max_len: usize,
    pub max_sequences: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions {
            min_len: 3,
            max_len: DEFAULT_MAX_LEN,
            max_sequences: DEFAULT_MAX_SEQUENCES,
        }
    }
}

impl EnumerationOptions {
    pub fn with_max_len(max_len: usize) -> Self {
        EnumerationOptions {
            max_len,
            ..EnumerationOptions::default()
        }
    }

    fn check(&self) -> Result<(), SelectivityError> {
        if self.min_len < 3 || self.max_len < self.min_len || self.max_len > MAX_LEN_LIMIT {
            return Err(SelectivityError::InvalidLength {
                min: self.min_len,
                max: self.max_len,
            });
        }
        Ok(())
    }
}

/// Streams sequences by increasing length, lexicographically within a
/// length (points ordered by input, then value).
pub struct SequenceEnumerator<'a> {
    design: &'a Design,
    map: std::borrow::Cow<'a, CoverMap>,
    kind: SequenceKind,
    opts: EnumerationOptions,
    len: usize,
    seq: Vec<usize>,
    cursors: Vec<usize>,
    emitted: usize,
    finished: bool,
}

/// Every treatment-realizable sequence with `3 <= l <= max_len`, including
/// sequences that revisit points.
pub fn enumerate_realizable(design: &Design, opts: EnumerationOptions) -> Result<SequenceEnumerator<'_>, SelectivityError> {
    SequenceEnumerator::new(design, None, SequenceKind::Realizable, opts)
}

/// Irreducible sequences only: `x_1 != x_l` and no sub-collection of the
/// points other than the closing and consecutive pairs lies in a
/// treatment.
pub fn enumerate_irreducible(design: &Design, opts: EnumerationOptions) -> Result<SequenceEnumerator<'_>, SelectivityError> {
    SequenceEnumerator::new(design, None, SequenceKind::Irreducible, opts)
}

impl<'a> SequenceEnumerator<'a> {
    pub fn new(
        design: &'a Design,
        map: Option<&'a CoverMap>,
        kind: SequenceKind,
        opts: EnumerationOptions,
    ) -> Result<Self, SelectivityError> {
        opts.check()?;
        let map = match map {
            Some(m) => std::borrow::Cow::Borrowed(m),
            None => std::borrow::Cow::Owned(CoverMap::new(design)),
        };
        Ok(SequenceEnumerator {
            design,
            map,
            kind,
            opts,
            len: opts.min_len,
            seq: Vec::with_capacity(opts.max_len),
            cursors: vec![0; opts.max_len + 1],
            emitted: 0,
            finished: false,
        })
    }

    fn admissible(&self, depth: usize, cand: usize) -> bool {
        let map = &self.map;
        if depth == 0 {
            return map.coverable_ids(cand, cand);
        }
        if !map.coverable_ids(self.seq[depth - 1], cand) {
            return false;
        }
        if self.kind == SequenceKind::Irreducible {
            let last = depth + 1 == self.len;
            // Non-adjacent pairs not involving x_1 must not be coverable.
            if (1..depth.saturating_sub(1)).any(|j| map.coverable_ids(self.seq[j], cand)) {
                return false;
            }
            // {x_1, x_j} may be coverable only as the closing pair.
            if depth >= 2 && !last && map.coverable_ids(self.seq[0], cand) {
                return false;
            }
        }
        true
    }

    fn complete(&self) -> bool {
        let first = self.seq[0];
        let last = self.seq[self.seq.len() - 1];
        if !self.map.coverable_ids(first, last) {
            return false;
        }
        match self.kind {
            SequenceKind::Realizable => true,
            SequenceKind::Irreducible => first != last && self.only_allowed_subsets_covered(),
        }
    }

    /// Exhaustive check over all index subsets of size >= 2.
    fn only_allowed_subsets_covered(&self) -> bool {
        let l = self.seq.len();
        let allowed = |mask: u32| {
            let closing = 1 | (1 << (l - 1));
            mask == closing || (1..l).any(|i| mask == (1 << (i - 1)) | (1 << i))
        };
        for mask in 1u32..(1 << l) {
            if mask.count_ones() < 2 || allowed(mask) {
                continue;
            }
            let idx: Vec<usize> = (0..l).filter(|&i| mask & (1 << i) != 0).collect();
            let pairwise = idx
                .iter()
                .all(|&a| idx.iter().all(|&b| self.map.coverable_ids(self.seq[a], self.seq[b])));
            if !pairwise {
                continue;
            }
            let pts: Vec<InputPoint> = idx.iter().map(|&i| self.map.point(self.seq[i])).collect();
            if self.design.covering_treatment(&pts).is_some() {
                return false;
            }
        }
        true
    }

    fn witness(&self) -> SequenceWitness {
        let l = self.seq.len();
        let points: Vec<InputPoint> = self.seq.iter().map(|&i| self.map.point(i)).collect();
        let mut covers = Vec::with_capacity(l);
        covers.push(self.map.cover_ids(self.seq[0], self.seq[l - 1]).cloned().expect("closing pair covered"));
        for i in 1..l {
            covers.push(
                self.map
                    .cover_ids(self.seq[i - 1], self.seq[i])
                    .cloned()
                    .expect("consecutive pair covered"),
            );
        }
        SequenceWitness { points, covers }
    }

    /// Next sequence as point ids, without building a witness.
    fn advance(&mut self) -> Option<()> {
        let n = self.map.points().len();
        loop {
            if self.len > self.opts.max_len {
                return None;
            }
            let depth = self.seq.len();
            let mut found = None;
            while self.cursors[depth] < n {
                let cand = self.cursors[depth];
                self.cursors[depth] += 1;
                if self.admissible(depth, cand) {
                    found = Some(cand);
                    break;
                }
            }
            match found {
                Some(cand) => {
                    self.seq.push(cand);
                    if self.seq.len() == self.len {
                        if self.complete() {
                            return Some(());
                        }
                        self.seq.pop();
                    } else {
                        self.cursors[depth + 1] = 0;
                    }
                }
                None if depth == 0 => {
                    self.len += 1;
                    self.cursors[0] = 0;
                }
                None => {
                    self.seq.pop();
                }
            }
        }
    }
}

impl Iterator for SequenceEnumerator<'_> {
    type Item = Result<SequenceWitness, SelectivityError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.finished {
            return None;
        }
        match self.advance() {
            None => {
                self.finished = true;
                None
            }
            Some(()) => {
                let w = self.witness();
                self.seq.pop();
                self.emitted += 1;
                if self.emitted > self.opts.max_sequences {
                    self.finished = true;
                    return Some(Err(SelectivityError::CapExceeded(self.opts.max_sequences)));
                }
                Some(Ok(w))
            }
        }
    }
}

/// The tetrads `x, y, s, t` with `x, s` on one input, `y, t` on another,
/// `x != s` and `y != t`: the irreducible sequences of a full design.
pub fn tetrads(design: &Design) -> Vec<Vec<InputPoint>> {
    let points = design.points();
    let mut out = Vec::new();
    for &x in &points {
        for &y in &points {
            if y.input == x.input {
                continue;
            }
            for &s in &points {
                if s.input != x.input || s == x {
                    continue;
                }
                for &t in &points {
                    if t.input == y.input && t != y {
                        out.push(vec![x, y, s, t]);
                    }
                }
            }
        }
    }
    out.sort();
    out
}
