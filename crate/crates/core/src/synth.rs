//! Vote matrices drawn from the dependence branching process.
//!
//! Each instance picks a random class order. The span after `d`
//! independent votes is the span of the first `d` one-hot directions in
//! that order. A dependent vote is a random convex mix of those directions;
//! an independent vote adds weight on the next direction. All votes are
//! valid normalized score vectors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pli::DependenceProfile;
use crate::votes::{VoteMatrix, VoteVector};

#[derive(Debug, Clone)]
pub struct BranchingVotes {
    profile: DependenceProfile,
    n: usize,
    rng: ChaCha8Rng,
    order: Vec<usize>,
}

impl BranchingVotes {
    /// Source of `n`-row vote matrices for the given profile.
    pub fn new(profile: DependenceProfile, n: usize, seed: u64) -> Self {
        let m = profile.m();
        Self {
            profile,
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: (0..m).collect(),
        }
    }

    pub fn profile(&self) -> &DependenceProfile {
        &self.profile
    }

    fn mix(&mut self, dims: usize, lead: Option<usize>) -> VoteVector {
        let m = self.profile.m();
        let mut scores = vec![0.0; m];
        for &c in &self.order[..dims] {
            scores[c] = self.rng.random_range(0.05..1.0);
        }
        let sum: f64 = scores.iter().sum();
        if let Some(next) = lead {
            let share = if dims == 0 {
                1.0
            } else {
                self.rng.random_range(0.2..1.0)
            };
            scores
                .iter_mut()
                .for_each(|s| *s *= (1.0 - share) / sum.max(f64::MIN_POSITIVE));
            scores[next] = share;
        } else {
            scores.iter_mut().for_each(|s| *s /= sum);
        }
        VoteVector::normalize_or_uniform(&scores)
    }

    /// Draws one instance's vote matrix.
    pub fn next_matrix(&mut self) -> VoteMatrix {
        let m = self.profile.m();
        let mut matrix = VoteMatrix::with_capacity(m, self.n);
        self.order.shuffle(&mut self.rng);
        let mut dim = 0;
        for _ in 0..self.n {
            let dependent = dim == m || self.rng.random::<f64>() < self.profile.at(dim);
            let vote = if dependent {
                self.mix(dim, None)
            } else {
                let next = self.order[dim];
                dim += 1;
                self.mix(dim - 1, Some(next))
            };
            matrix.push(&vote).expect("vote width matches");
        }
        matrix
    }
}

impl Iterator for BranchingVotes {
    type Item = VoteMatrix;

    fn next(&mut self) -> Option<VoteMatrix> {
        Some(self.next_matrix())
    }
}
