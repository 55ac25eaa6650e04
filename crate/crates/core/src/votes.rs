//! Vote vectors, vote matrices and exact weight recovery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RowBasis};

const SUM_TOL: f64 = 1e-9;

/// A classifier's per-class scores, normalized to sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteVector(Vec<f64>);

impl VoteVector {
    /// Wraps scores that are already normalized.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::validation(
                "vote vector must have at least one class",
            ));
        }
        if scores.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::validation(
                "vote scores must be finite and non-negative",
            ));
        }
        let sum: f64 = scores.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::validation(format!(
                "vote scores sum to {sum}, not 1"
            )));
        }
        Ok(Self(scores))
    }

    pub fn uniform(m: usize) -> Self {
        Self(vec![1.0 / m as f64; m])
    }

    pub fn one_hot(m: usize, class: usize) -> Self {
        let mut v = vec![0.0; m];
        v[class] = 1.0;
        Self(v)
    }

    /// Normalizes raw scores, falling back to the uniform vote when there is
    /// no usable mass.
    pub fn normalize_or_uniform(raw: &[f64]) -> Self {
        normalize_vote(raw).unwrap_or_else(|_| Self::uniform(raw.len().max(1)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

impl AsRef<[f64]> for VoteVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Scales non-negative raw scores to sum to one.
pub fn normalize_vote(raw: &[f64]) -> Result<VoteVector> {
    if raw.len() < 2 {
        return Err(Error::validation("a vote needs at least 2 classes"));
    }
    if raw.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::validation(
            "raw scores must be finite and non-negative",
        ));
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::DegenerateVote { m: raw.len() });
    }
    Ok(VoteVector(raw.iter().map(|v| v / sum).collect()))
}

/// One instance's votes: `n` rows (classifiers) of width `m` (classes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteMatrix {
    m: usize,
    data: Vec<f64>,
}

impl VoteMatrix {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(m: usize, rows: usize) -> Self {
        Self {
            m,
            data: Vec::with_capacity(m * rows),
        }
    }

    pub fn from_votes(votes: Vec<VoteVector>) -> Result<Self> {
        let m = votes
            .first()
            .map(VoteVector::len)
            .ok_or_else(|| Error::validation("vote matrix needs at least one row"))?;
        let mut matrix = Self::with_capacity(m, votes.len());
        for v in &votes {
            matrix.push(v)?;
        }
        Ok(matrix)
    }

    pub fn push(&mut self, vote: &VoteVector) -> Result<()> {
        if vote.len() != self.m {
            return Err(Error::validation(format!(
                "vote of width {} pushed into a matrix of width {}",
                vote.len(),
                self.m
            )));
        }
        self.data.extend_from_slice(vote.as_slice());
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_rows(&self) -> usize {
        self.data.len() / self.m.max(1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.m)
    }

    pub fn rank(&self, tol: f64) -> usize {
        let rows: Vec<&[f64]> = self.rows().collect();
        linalg::matrix_rank(&rows, tol)
    }

    /// Copy with rows reordered by `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let mut out = Self::with_capacity(self.m, order.len());
        for &i in order {
            out.data.extend_from_slice(self.row(i));
        }
        out
    }
}

/// One-hot target vector for the true class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealVector {
    class: usize,
    m: usize,
}

impl IdealVector {
    pub fn new(class: usize, m: usize) -> Result<Self> {
        if class >= m {
            return Err(Error::validation(format!(
                "class {class} out of range for m = {m}"
            )));
        }
        Ok(Self { class, m })
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn component(&self, j: usize) -> f64 {
        if j == self.class {
            1.0
        } else {
            0.0
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.m).map(|j| self.component(j)).collect()
    }
}

/// Per-classifier combination weights. Entries may be negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n.max(1) as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|w| w * c).collect())
    }
}

/// Finds weights with `Σ W_i S_i = o` from the first `m` linearly
/// independent rows; every other row gets weight zero.
///
/// Because each vote sums to one, the weights of an exact solution also sum
/// to one.
pub fn exact_weights(matrix: &VoteMatrix, ideal: &IdealVector, tol: f64) -> Result<WeightVector> {
    let m = matrix.m();
    if ideal.m() != m {
        return Err(Error::validation(format!(
            "ideal vector has {} classes, votes have {m}",
            ideal.m()
        )));
    }
    let mut basis = RowBasis::new(m, tol);
    let mut chosen = Vec::with_capacity(m);
    for (i, row) in matrix.rows().enumerate() {
        if basis.insert(row) {
            chosen.push(i);
            if chosen.len() == m {
                break;
            }
        }
    }
    if chosen.len() < m {
        return Err(Error::RepresentationalDeficiency {
            rank: chosen.len(),
            m,
        });
    }

    // Column c of the system is the c-th chosen vote.
    let mut a = vec![0.0; m * m];
    for (c, &i) in chosen.iter().enumerate() {
        for (j, &s) in matrix.row(i).iter().enumerate() {
            a[j * m + c] = s;
        }
    }
    let solution = linalg::solve_dense(a, ideal.to_vec(), 1e-14)
        .ok_or_else(|| Error::Numerical("independent votes produced a singular system".into()))?;

    let mut weights = vec![0.0; matrix.n_rows()];
    for (&i, w) in chosen.iter().zip(solution) {
        weights[i] = w;
    }
    Ok(WeightVector(weights))
}

/// Weighted sum of the rows and its arg-max class.
pub fn combine_votes(matrix: &VoteMatrix, weights: &WeightVector) -> Result<(Vec<f64>, usize)> {
    if weights.len() != matrix.n_rows() {
        return Err(Error::validation(format!(
            "{} weights for {} votes",
            weights.len(),
            matrix.n_rows()
        )));
    }
    let mut aggregate = vec![0.0; matrix.m()];
    for (row, &w) in matrix.rows().zip(weights.as_slice()) {
        for (a, s) in aggregate.iter_mut().zip(row) {
            *a += w * s;
        }
    }
    let class = argmax(&aggregate);
    Ok((aggregate, class))
}
