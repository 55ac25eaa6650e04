//! Empirical estimation of dependence probabilities from vote matrices.
//!
//! For every instance the votes are added to a growing span one classifier
//! at a time. Each insertion made while the span has dimension `d`
//! (`1 ≤ d < m`) is an attempt at dimension `d`; it is a dependence event
//! when the rank does not grow. `p_d` is estimated as events / attempts.
//! The first vote of an instance is never counted: it always spans one
//! dimension.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RowBasis;
use crate::pli::DependenceProfile;
use crate::votes::VoteMatrix;

/// Dependence and attempt counts per span dimension.
///
/// Index `d - 1` holds the counts for span dimension `d`, so the arrays
/// line up with `p_1 … p_{m−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCounters {
    m: usize,
    dependent: Vec<u64>,
    total: Vec<u64>,
}

impl RankCounters {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::validation(format!(
                "class count m = {m} must be at least 2"
            )));
        }
        Ok(Self {
            m,
            dependent: vec![0; m - 1],
            total: vec![0; m - 1],
        })
    }

    pub fn from_counts(m: usize, dependent: Vec<u64>, total: Vec<u64>) -> Result<Self> {
        if m < 2 || dependent.len() != m - 1 || total.len() != m - 1 {
            return Err(Error::validation(format!(
                "counter arrays must have m - 1 = {} entries",
                m.saturating_sub(1)
            )));
        }
        if dependent.iter().zip(&total).any(|(d, t)| d > t) {
            return Err(Error::validation("dependent count exceeds total count"));
        }
        Ok(Self {
            m,
            dependent,
            total,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dependent(&self) -> &[u64] {
        &self.dependent
    }

    pub fn total(&self) -> &[u64] {
        &self.total
    }

    /// Replays one instance's votes through an incremental span. Returns
    /// true if the votes reached rank `m`.
    pub fn update(&mut self, matrix: &VoteMatrix, tol: f64) -> Result<bool> {
        let mut basis = RowBasis::new(self.m, tol);
        self.update_with(matrix, &mut basis)
    }

    fn update_with(&mut self, matrix: &VoteMatrix, basis: &mut RowBasis) -> Result<bool> {
        if matrix.m() != self.m {
            return Err(Error::validation(format!(
                "vote matrix has {} classes, counters expect {}",
                matrix.m(),
                self.m
            )));
        }
        basis.clear();
        for row in matrix.rows() {
            let dim = basis.rank();
            let grew = basis.insert(row);
            if dim >= 1 {
                self.total[dim - 1] += 1;
                if !grew {
                    self.dependent[dim - 1] += 1;
                }
            }
            if basis.is_full() {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Adds another shard's counts.
    pub fn merge(&mut self, other: &RankCounters) -> Result<()> {
        if other.m != self.m {
            return Err(Error::validation("cannot merge counters with different m"));
        }
        for (a, b) in self.dependent.iter_mut().zip(&other.dependent) {
            *a += b;
        }
        for (a, b) in self.total.iter_mut().zip(&other.total) {
            *a += b;
        }
        Ok(())
    }

    /// Ratio estimates. Dimensions that were never attempted are reported as
    /// 1.0, the conservative reading that they cannot be exceeded.
    pub fn finalize(&self) -> DependenceProfile {
        let p = self
            .dependent
            .iter()
            .zip(&self.total)
            .map(|(&d, &t)| if t > 0 { d as f64 / t as f64 } else { 1.0 })
            .collect();
        DependenceProfile::new(self.m, p).expect("counter ratios are probabilities")
    }
}

/// Estimated profile together with the evidence behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub profile: DependenceProfile,
    pub counters: RankCounters,
    pub instances_seen: u64,
    pub full_rank_instances: u64,
}

impl EstimationReport {
    /// Fraction of instances whose votes reached rank `m`: the empirical PLI
    /// at the observed ensemble size.
    pub fn full_rank_fraction(&self) -> f64 {
        if self.instances_seen == 0 {
            0.0
        } else {
            self.full_rank_instances as f64 / self.instances_seen as f64
        }
    }

    /// Binomial standard error of [`full_rank_fraction`](Self::full_rank_fraction).
    pub fn full_rank_stderr(&self) -> f64 {
        let f = self.full_rank_fraction();
        (f * (1.0 - f) / self.instances_seen.max(1) as f64).sqrt()
    }
}

/// Streaming accumulator for [`estimate_p`].
#[derive(Debug, Clone)]
pub struct DependenceEstimator {
    counters: RankCounters,
    tol: f64,
    basis: RowBasis,
    shuffle: Option<ChaCha8Rng>,
    order: Vec<usize>,
    instances_seen: u64,
    full_rank_instances: u64,
}

impl DependenceEstimator {
    pub fn new(m: usize, tol: f64) -> Result<Self> {
        Ok(Self {
            counters: RankCounters::new(m)?,
            tol,
            basis: RowBasis::new(m, tol),
            shuffle: None,
            order: Vec::new(),
            instances_seen: 0,
            full_rank_instances: 0,
        })
    }

    /// Shuffles classifier order independently for every instance.
    pub fn with_shuffle(mut self, seed: u64) -> Self {
        self.shuffle = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    pub fn m(&self) -> usize {
        self.counters.m
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn observe(&mut self, matrix: &VoteMatrix) -> Result<bool> {
        let full = match self.shuffle.as_mut() {
            Some(rng) => {
                self.order.clear();
                self.order.extend(0..matrix.n_rows());
                self.order.shuffle(rng);
                let shuffled = matrix.permuted(&self.order);
                self.counters.update_with(&shuffled, &mut self.basis)?
            }
            None => self.counters.update_with(matrix, &mut self.basis)?,
        };
        self.instances_seen += 1;
        if full {
            self.full_rank_instances += 1;
        }
        Ok(full)
    }

    pub fn counters(&self) -> &RankCounters {
        &self.counters
    }

    pub fn instances_seen(&self) -> u64 {
        self.instances_seen
    }

    /// Merges an independent shard.
    pub fn merge(&mut self, other: &DependenceEstimator) -> Result<()> {
        self.counters.merge(&other.counters)?;
        self.instances_seen += other.instances_seen;
        self.full_rank_instances += other.full_rank_instances;
        Ok(())
    }

    pub fn report(&self) -> Result<EstimationReport> {
        if self.instances_seen == 0 {
            return Err(Error::validation("no vote matrices were observed"));
        }
        Ok(EstimationReport {
            profile: self.counters.finalize(),
            counters: self.counters.clone(),
            instances_seen: self.instances_seen,
            full_rank_instances: self.full_rank_instances,
        })
    }
}

/// Estimates the dependence profile from a stream of vote matrices.
pub fn estimate_p<'a, I>(votes: I, tol: f64) -> Result<EstimationReport>
where
    I: IntoIterator<Item = &'a VoteMatrix>,
{
    let mut iter = votes.into_iter().peekable();
    let m = iter
        .peek()
        .map(|v| v.m())
        .ok_or_else(|| Error::validation("vote stream is empty"))?;
    let mut est = DependenceEstimator::new(m, tol)?;
    for matrix in iter {
        est.observe(matrix)?;
    }
    est.report()
}
