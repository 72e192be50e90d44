//! Laws on {0,1}^n and their multi-affine generating polynomials
//! Q(z) = Σ_A μ(A) Π_{i∈A} z_i.
//!
//! Subsets are bitmasks with site k on bit k. The diagonal Q*(w) = Q(w,…,w)
//! is the generating function of the particle count.

mod roots;
mod stability;
pub mod sturm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};

pub use roots::{bernoulli_decomposition, real_rooted, BernoulliVector, RootReport};
pub use stability::{pair_stability, PairCoefficients, StabilityReport};

pub const DEFAULT_SITE_CAP: usize = 20;

/// Probability vector over the 2^n occupancy subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRecord", into = "DistributionRecord")]
pub struct SubsetDistribution {
    n: usize,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRecord {
    n: usize,
    weights: Vec<f64>,
}

impl TryFrom<DistributionRecord> for SubsetDistribution {
    type Error = SepError;
    fn try_from(r: DistributionRecord) -> Result<Self> {
        SubsetDistribution::new(r.n, r.weights)
    }
}

impl From<SubsetDistribution> for DistributionRecord {
    fn from(d: SubsetDistribution) -> Self {
        DistributionRecord {
            n: d.n,
            weights: d.weights,
        }
    }
}

impl SubsetDistribution {
    pub fn new(n: usize, weights: Vec<f64>) -> Result<Self> {
        Self::with_cap(n, weights, DEFAULT_SITE_CAP)
    }

    pub fn with_cap(n: usize, weights: Vec<f64>, cap: usize) -> Result<Self> {
        if n > cap {
            return Err(SepError::TooManySites { n, cap });
        }
        if weights.len() != 1 << n {
            return Err(SepError::invalid(format!(
                "{} weights given for n = {n}; expected {}",
                weights.len(),
                1usize << n
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(SepError::invalid(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SepError::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(SubsetDistribution { n, weights })
    }

    /// Skips validation; for operators known to map laws to laws.
    pub(crate) fn from_raw(n: usize, weights: Vec<f64>) -> Self {
        debug_assert_eq!(weights.len(), 1 << n);
        SubsetDistribution { n, weights }
    }

    /// ν_α: independent occupancies with P(η(i) = 1) = α_i.
    pub fn from_product(alphas: &[f64]) -> Result<Self> {
        let n = alphas.len();
        if n > DEFAULT_SITE_CAP {
            return Err(SepError::TooManySites {
                n,
                cap: DEFAULT_SITE_CAP,
            });
        }
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(SepError::invalid(format!("marginal {a} is outside [0,1]")));
        }
        let mut w = vec![1.0];
        for &a in alphas {
            let mut next = vec![0.0; 2 * w.len()];
            let (lo, hi) = next.split_at_mut(w.len());
            for (i, &v) in w.iter().enumerate() {
                lo[i] = v * (1.0 - a);
                hi[i] = v * a;
            }
            w = next;
        }
        Ok(SubsetDistribution { n, weights: w })
    }

    pub fn point_mass(n: usize, mask: usize) -> Result<Self> {
        if mask >= 1 << n {
            return Err(SepError::invalid(format!("mask {mask:#b} has bits beyond n = {n}")));
        }
        let mut w = vec![0.0; 1 << n];
        w[mask] = 1.0;
        Self::new(n, w)
    }

    /// Uniform over the listed configurations (duplicates count once).
    pub fn uniform_over(n: usize, masks: &[usize]) -> Result<Self> {
        let mut masks = masks.to_vec();
        masks.sort_unstable();
        masks.dedup();
        if masks.is_empty() {
            return Err(SepError::invalid("empty support"));
        }
        let mut w = vec![0.0; 1 << n];
        for &m in &masks {
            if m >= w.len() {
                return Err(SepError::invalid(format!("mask {m:#b} has bits beyond n = {n}")));
            }
            w[m] = 1.0 / masks.len() as f64;
        }
        Self::new(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, mask: usize) -> f64 {
        self.weights[mask]
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn check_site(&self, i: usize) -> Result<()> {
        if i >= self.n {
            Err(SepError::invalid(format!("site {i} out of range for n = {}", self.n)))
        } else {
            Ok(())
        }
    }

    pub fn marginal_mean(&self, i: usize) -> Result<f64> {
        self.check_site(i)?;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .filter(|(m, _)| m >> i & 1 == 1)
            .map(|(_, w)| w)
            .sum())
    }

    /// E η(i)η(j) − E η(i) E η(j).
    pub fn pairwise_covariance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_site(i)?;
        self.check_site(j)?;
        let both = (1usize << i) | (1 << j);
        let joint: f64 = self
            .weights
            .iter()
            .enumerate()
            .filter(|(m, _)| m & both == both)
            .map(|(_, w)| w)
            .sum();
        Ok(joint - self.marginal_mean(i)? * self.marginal_mean(j)?)
    }

    /// Largest covariance over distinct pairs.
    pub fn max_pairwise_covariance(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.n {
            for j in i + 1..self.n {
                worst = worst.max(self.pairwise_covariance(i, j).expect("in range"));
            }
        }
        worst
    }

    /// Law of Σ_i η(i).
    pub fn diagonalize(&self) -> UnivariatePoly {
        let mut c = vec![0.0; self.n + 1];
        for (m, &w) in self.weights.iter().enumerate() {
            c[m.count_ones() as usize] += w;
        }
        UnivariatePoly { coeffs: c }
    }

    /// Q_p = p·Q + (1−p)·Q∘(i j): with probability 1−p the contents of i
    /// and j are exchanged.
    pub fn transposition_mix(&self, i: usize, j: usize, p: f64) -> Result<Self> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(SepError::invalid("transposition needs two distinct sites"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(SepError::invalid(format!("mixing weight {p} is outside [0,1]")));
        }
        let mut out = self.weights.clone();
        mix_in_place(&mut out, i, j, p);
        Ok(SubsetDistribution::from_raw(self.n, out))
    }

    /// Total variation distance to another law on the same sites.
    pub fn total_variation(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        crate::numeric::total_variation(&self.weights, &other.weights)
    }
}

/// Applies the transposition mix to a raw weight vector. Only configurations
/// that differ at i and j move.
pub(crate) fn mix_in_place(w: &mut [f64], i: usize, j: usize, p: f64) {
    let (bi, bj) = (1usize << i, 1usize << j);
    for m in 0..w.len() {
        // Visit each discordant pair once, from the side with i occupied.
        if m & bi != 0 && m & bj == 0 {
            let s = m ^ bi ^ bj;
            let (a, b) = (w[m], w[s]);
            w[m] = p * a + (1.0 - p) * b;
            w[s] = p * b + (1.0 - p) * a;
        }
    }
}

/// Coefficients c_0..c_n of Q*(w) = Σ_k c_k w^k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariatePoly {
    pub coeffs: Vec<f64>,
}

impl UnivariatePoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        UnivariatePoly { coeffs }
    }

    /// Nominal degree (length − 1), including leading zeros.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * w + c)
    }

    /// Expands Π_i (p_i w + 1 − p_i).
    pub fn from_bernoulli(p: &[f64]) -> Self {
        let mut c = vec![1.0];
        for &pi in p {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &v) in c.iter().enumerate() {
                next[k] += v * (1.0 - pi);
                next[k + 1] += v * pi;
            }
            c = next;
        }
        UnivariatePoly { coeffs: c }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(0.0);
                let b = other.coeffs.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Outcome of a sampled Rayleigh check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RayleighReport {
    pub passed: bool,
    /// Smallest ∂_iQ·∂_jQ − Q·∂_ijQ seen.
    pub min_value: f64,
    pub worst_point: usize,
    pub worst_pair: (usize, usize),
    pub evaluations: usize,
}

/// 100 points uniform in [−3,3]^n followed by the all-ones vector.
pub fn default_rayleigh_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts: Vec<Vec<f64>> = (0..100)
        .map(|_| (0..n).map(|_| rng.random_range(-3.0..=3.0)).collect())
        .collect();
    pts.push(vec![1.0; n]);
    pts
}

/// All unordered pairs i < j.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Evaluates ∂_iQ(z)·∂_jQ(z) − Q(z)·∂_ijQ(z) at each real point and pair.
///
/// Writing Q = A + B z_i + C z_j + D z_i z_j with A..D free of z_i, z_j,
/// the expression equals BC − AD. A nonnegative minimum is a sampled
/// necessary condition for the strong Rayleigh property, not a proof of it.
pub fn rayleigh_check(
    dist: &SubsetDistribution,
    points: &[Vec<f64>],
    pairs: &[(usize, usize)],
    tol: f64,
) -> Result<RayleighReport> {
    let n = dist.n();
    for &(i, j) in pairs {
        if i >= n || j >= n || i == j {
            return Err(SepError::invalid(format!("bad pair ({i},{j}) for n = {n}")));
        }
    }
    let mut report = RayleighReport {
        passed: true,
        min_value: f64::INFINITY,
        worst_point: 0,
        worst_pair: (0, 0),
        evaluations: 0,
    };
    let mut mono = vec![0.0; 1 << n];
    for (pi, z) in points.iter().enumerate() {
        if z.len() != n || z.iter().any(|v| !v.is_finite()) {
            return Err(SepError::invalid(format!(
                "point {pi} is not a finite vector of length {n}"
            )));
        }
        // mono[m] = Π_{k∈m} z_k
        mono[0] = 1.0;
        for m in 1..mono.len() {
            let low = m.trailing_zeros() as usize;
            mono[m] = mono[m & (m - 1)] * z[low];
        }
        for &(i, j) in pairs {
            let (bi, bj) = (1usize << i, 1usize << j);
            let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
            for (m, &w) in dist.weights().iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let rest = mono[m & !(bi | bj)] * w;
                match (m & bi != 0, m & bj != 0) {
                    (false, false) => a += rest,
                    (true, false) => b += rest,
                    (false, true) => c += rest,
                    (true, true) => d += rest,
                }
            }
            let v = b * c - a * d;
            report.evaluations += 1;
            if v < report.min_value {
                report.min_value = v;
                report.worst_point = pi;
                report.worst_pair = (i, j);
            }
        }
    }
    report.passed = report.min_value >= -tol;
    Ok(report)
}
