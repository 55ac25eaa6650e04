//! Probability of linear independence (PLI) of classifier votes.
//!
//! Votes arrive one classifier at a time. A vote that lands inside the span
//! of the current `l` independent votes is wasted with probability `p_l`;
//! otherwise the span grows by one dimension. The PLI for an ensemble of
//! `n` classifiers over `m` classes is the probability that the span has
//! reached dimension `m` after `n` votes.
//!
//! Three evaluators are provided:
//!
//! * [`pli_exact`] walks the span-dimension Markov chain in `O(n·m)`.
//! * [`pli_enumeration_oracle`] sums the explicit composition formula term
//!   by term. It costs `C(n−1, m−1)` products and is kept as a reference.
//! * [`pli_uniform`] is the single-`p` closed form, a negative-binomial sum.
//!
//! [`pli_monte_carlo`] simulates the same branching process stochastically.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default search cap for [`solve_inc`] and [`solve_sinc`].
pub const DEFAULT_MAX_N: usize = 4096;

/// Default PLI threshold used when sizing an ensemble.
pub const DEFAULT_THRESHOLD: f64 = 0.9999;

/// Largest number of product terms the enumeration oracle will evaluate.
pub const ENUMERATION_TERM_BUDGET: u128 = 10_000_000;

/// Linear-dependence probabilities `p_1 … p_{m−1}` for an `m`-class problem.
///
/// `p[l - 1]` is the chance that a new vote falls inside an `l`-dimensional
/// span of earlier votes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceProfile {
    m: usize,
    p: Vec<f64>,
}

impl DependenceProfile {
    pub fn new(m: usize, p: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::validation(format!(
                "class count m = {m} must be at least 2"
            )));
        }
        if p.len() != m - 1 {
            return Err(Error::validation(format!(
                "dependence profile for m = {m} needs {} entries, got {}",
                m - 1,
                p.len()
            )));
        }
        if let Some((l, v)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::validation(format!(
                "p_{} = {v} is outside [0, 1]",
                l + 1
            )));
        }
        Ok(Self { m, p })
    }

    /// Profile with every `p_l` equal to `p`.
    pub fn uniform(m: usize, p: f64) -> Result<Self> {
        Self::new(m, vec![p; m.saturating_sub(1)])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Entries `p_1 … p_{m−1}`.
    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Dependence probability against an `l`-dimensional span. `p_0` is 0:
    /// a normalized vote is never the zero vector.
    pub fn at(&self, l: usize) -> f64 {
        match l {
            0 => 0.0,
            l if l < self.m => self.p[l - 1],
            _ => 1.0,
        }
    }

    /// Arithmetic mean of the entries, the single `p` used for SINC.
    pub fn mean(&self) -> f64 {
        self.p.iter().sum::<f64>() / self.p.len() as f64
    }

    /// True when some dimension can never be exceeded (`p_l = 1`).
    pub fn is_impassable(&self) -> bool {
        self.p.iter().any(|&v| v >= 1.0)
    }
}

/// Ordered `(n, pli)` pairs for one profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PliCurve {
    entries: Vec<(usize, f64)>,
}

impl PliCurve {
    /// Evaluates the profile at every size in `sizes` with a single pass of
    /// the dimension chain. Sizes must be strictly increasing.
    pub fn evaluate(profile: &DependenceProfile, sizes: &[usize]) -> Result<Self> {
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::validation("curve sizes must be strictly increasing"));
        }
        let mut chain = DimensionChain::new(profile);
        let mut entries = Vec::with_capacity(sizes.len());
        for &n in sizes {
            chain.advance_to(n);
            entries.push((n, chain.full_rank()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Threshold and search cap for ensemble sizing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizingRequest {
    threshold: f64,
    max_n: usize,
}

impl SizingRequest {
    pub fn new(threshold: f64, max_n: usize) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::validation(format!(
                "threshold T = {threshold} must satisfy 0 < T < 1"
            )));
        }
        if max_n == 0 {
            return Err(Error::validation("max_n must be positive"));
        }
        Ok(Self { threshold, max_n })
    }

    pub fn with_threshold(threshold: f64) -> Result<Self> {
        Self::new(threshold, DEFAULT_MAX_N)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }
}

impl Default for SizingRequest {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            max_n: DEFAULT_MAX_N,
        }
    }
}

/// Result of an ensemble sizing search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleSize {
    Size(usize),
    /// No size up to the cap reaches the threshold.
    Unreachable,
}

impl EnsembleSize {
    pub fn size(self) -> Option<usize> {
        match self {
            EnsembleSize::Size(n) => Some(n),
            EnsembleSize::Unreachable => None,
        }
    }
}

impl fmt::Display for EnsembleSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSize::Size(n) => write!(f, "{n}"),
            EnsembleSize::Unreachable => f.write_str("--"),
        }
    }
}

/// Distribution over span dimensions `0..=m` after `t` votes.
struct DimensionChain<'a> {
    profile: &'a DependenceProfile,
    q: Vec<f64>,
    scratch: Vec<f64>,
    t: usize,
}

impl<'a> DimensionChain<'a> {
    fn new(profile: &'a DependenceProfile) -> Self {
        let mut q = vec![0.0; profile.m + 1];
        q[0] = 1.0;
        Self {
            profile,
            scratch: q.clone(),
            q,
            t: 0,
        }
    }

    fn step(&mut self) {
        let m = self.profile.m;
        self.scratch.iter_mut().for_each(|v| *v = 0.0);
        // Dimension m is absorbing.
        self.scratch[m] = self.q[m];
        for d in 0..m {
            let mass = self.q[d];
            if mass == 0.0 {
                continue;
            }
            let stay = self.profile.at(d);
            self.scratch[d] += mass * stay;
            self.scratch[d + 1] += mass * (1.0 - stay);
        }
        std::mem::swap(&mut self.q, &mut self.scratch);
        self.t += 1;
    }

    fn advance_to(&mut self, n: usize) {
        while self.t < n {
            self.step();
        }
    }

    fn full_rank(&self) -> f64 {
        self.q[self.profile.m].clamp(0.0, 1.0)
    }
}

/// Probability that `n` votes span all `m` class dimensions.
pub fn pli_exact(profile: &DependenceProfile, n: usize) -> f64 {
    if n < profile.m {
        return 0.0;
    }
    let mut chain = DimensionChain::new(profile);
    chain.advance_to(n);
    chain.full_rank()
}

/// Output of [`pli_enumeration_oracle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Enumeration {
    pub probability: f64,
    /// Number of `∏ p_j^{x_j}` products evaluated.
    pub term_count: u128,
}

/// `C(n, k)` or `None` once it exceeds `cap`.
fn binomial_capped(n: u128, k: u128, cap: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul(n - i)? / (i + 1);
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

/// Sums the composition formula directly:
/// `∏(1 − p_i) · Σ_{k=0}^{n−m} Σ_{x ∈ χ_k} ∏ p_j^{x_j}`.
///
/// Every composition of every `k` into `m − 1` non-negative parts is
/// visited, so the cost is `C(n−1, m−1)` products; inputs above
/// [`ENUMERATION_TERM_BUDGET`] are rejected.
pub fn pli_enumeration_oracle(profile: &DependenceProfile, n: usize) -> Result<Enumeration> {
    let m = profile.m;
    if n < m {
        return Err(Error::validation(format!(
            "enumeration needs n >= m (n = {n}, m = {m})"
        )));
    }
    let expected = binomial_capped((n - 1) as u128, (m - 1) as u128, ENUMERATION_TERM_BUDGET)
        .ok_or_else(|| {
            Error::Resource(format!(
                "C({}, {}) terms exceeds the enumeration budget of {ENUMERATION_TERM_BUDGET}",
                n - 1,
                m - 1
            ))
        })?;

    let p = profile.as_slice();
    let mut total = 0.0;
    let mut terms: u128 = 0;
    let mut parts = vec![0usize; m - 1];
    for k in 0..=(n - m) {
        visit_compositions(&mut parts, 0, k, &mut |x| {
            let term: f64 = x
                .iter()
                .zip(p)
                .map(|(&xj, &pj)| pj.powi(xj as i32))
                .product();
            total += term;
            terms += 1;
        });
    }
    let base: f64 = p.iter().map(|&pi| 1.0 - pi).product();
    debug_assert_eq!(terms, expected);
    Ok(Enumeration {
        probability: base * total,
        term_count: terms,
    })
}

fn visit_compositions(
    parts: &mut [usize],
    idx: usize,
    remaining: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if idx + 1 == parts.len() {
        parts[idx] = remaining;
        f(parts);
        return;
    }
    for x in 0..=remaining {
        parts[idx] = x;
        visit_compositions(parts, idx + 1, remaining - x, f);
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::validation(format!(
            "probability p = {p} is outside [0, 1]"
        )))
    }
}

/// Running sum of the uniform-`p` series
/// `(1−p)^{m−1} Σ_k C(k+m−2, m−2) p^k`.
///
/// Each term is a negative-binomial mass, so the terms stay in `[0, 1]`
/// and the binomial factor is carried as a ratio update.
struct UniformSeries {
    p: f64,
    m: usize,
    k: usize,
    term: f64,
    sum: f64,
}

impl UniformSeries {
    fn new(p: f64, m: usize) -> Self {
        let term = (1.0 - p).powi((m - 1) as i32);
        Self {
            p,
            m,
            k: 0,
            term,
            sum: term,
        }
    }

    /// Adds the `k + 1` term.
    fn push(&mut self) {
        let k = self.k as f64;
        let m = self.m as f64;
        self.term *= self.p * (k + m - 1.0) / (k + 1.0);
        self.sum += self.term;
        self.k += 1;
    }
}

/// `1 − p^{n−1}`, the binary series summed in closed form.
fn binary_closed_form(p: f64, n: usize) -> f64 {
    let e = n - 1;
    let tail = match i32::try_from(e) {
        Ok(e) => p.powi(e),
        Err(_) => p.powf(e as f64),
    };
    1.0 - tail
}

/// PLI under a uniform dependence probability `p` for every dimension.
pub fn pli_uniform(p: f64, m: usize, n: usize) -> Result<f64> {
    check_probability(p)?;
    if m < 2 {
        return Err(Error::validation(format!(
            "class count m = {m} must be at least 2"
        )));
    }
    if n < m {
        return Ok(0.0);
    }
    if m == 2 {
        return Ok(binary_closed_form(p, n));
    }
    let mut series = UniformSeries::new(p, m);
    for _ in 0..(n - m) {
        series.push();
    }
    Ok(series.sum.clamp(0.0, 1.0))
}

/// Monte-Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
}

/// Simulates the vote branching process `trials` times and reports the
/// fraction of runs that reach dimension `m` within `n` votes.
pub fn pli_monte_carlo(
    profile: &DependenceProfile,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::validation("trials must be at least 1"));
    }
    let m = profile.m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits: u64 = 0;
    for _ in 0..trials {
        let mut dim = 0;
        for _ in 0..n {
            if dim == m {
                break;
            }
            let p = profile.at(dim);
            if p < 1.0 && rng.random::<f64>() >= p {
                dim += 1;
            }
        }
        if dim == m {
            hits += 1;
        }
    }
    let estimate = hits as f64 / trials as f64;
    Ok(MonteCarloEstimate {
        estimate,
        stderr: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        trials,
    })
}

/// Smallest `n` whose exact PLI meets the threshold (INC).
pub fn solve_inc(profile: &DependenceProfile, req: &SizingRequest) -> EnsembleSize {
    if profile.is_impassable() || req.max_n < profile.m {
        return EnsembleSize::Unreachable;
    }
    let mut chain = DimensionChain::new(profile);
    chain.advance_to(profile.m);
    for n in profile.m..=req.max_n {
        chain.advance_to(n);
        if chain.full_rank() >= req.threshold {
            return EnsembleSize::Size(n);
        }
    }
    EnsembleSize::Unreachable
}

/// Smallest `n` whose uniform-`p` PLI meets the threshold (SINC).
pub fn solve_sinc(p: f64, m: usize, req: &SizingRequest) -> Result<EnsembleSize> {
    check_probability(p)?;
    if m < 2 {
        return Err(Error::validation(format!(
            "class count m = {m} must be at least 2"
        )));
    }
    if p >= 1.0 || req.max_n < m {
        return Ok(EnsembleSize::Unreachable);
    }
    if m == 2 {
        let n = (2..=req.max_n).find(|&n| binary_closed_form(p, n) >= req.threshold);
        return Ok(n.map_or(EnsembleSize::Unreachable, EnsembleSize::Size));
    }
    let mut series = UniformSeries::new(p, m);
    for n in m..=req.max_n {
        if n > m {
            series.push();
        }
        if series.sum >= req.threshold {
            return Ok(EnsembleSize::Size(n));
        }
    }
    Ok(EnsembleSize::Unreachable)
}
