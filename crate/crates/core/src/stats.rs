//! Sample summaries and the limit-law constants for the one-dimensional
//! current W_t.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::numeric::{integrate, normal_cdf};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub mean_ci: [f64; 2],
    pub var_ci: [f64; 2],
    pub level: f64,
}

/// Mean and unbiased variance with normal-approximation 99% intervals.
pub fn empirical_moments(samples: &[f64]) -> Result<Moments> {
    let n = samples.len();
    if n < 2 {
        return Err(SepError::Degenerate(format!("{n} samples; need at least 2")));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(SepError::Degenerate("non-finite sample".into()));
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let m2 = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    let m4 = samples.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
    let var = m2 * nf / (nf - 1.0);
    let se_mean = (var / nf).sqrt();
    let se_var = ((m4 - m2 * m2).max(0.0) / nf).sqrt();
    Ok(Moments {
        n,
        mean,
        var,
        mean_ci: [mean - Z99 * se_mean, mean + Z99 * se_mean],
        var_ci: [var - Z99 * se_var, var + Z99 * se_var],
        level: 0.99,
    })
}

fn as_counts(samples: &[f64]) -> Result<Vec<u64>> {
    samples
        .iter()
        .map(|&x| {
            if x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
                Ok(x as u64)
            } else {
                Err(SepError::invalid(format!("sample {x} is not a nonnegative integer")))
            }
        })
        .collect()
}

/// Total variation between the empirical law and Poisson(λ). The empirical
/// law has no mass above the largest sample, so that whole Poisson tail
/// enters as one term.
pub fn tv_poisson(samples: &[f64], lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SepError::invalid(format!("lambda = {lambda} must be positive")));
    }
    if samples.is_empty() {
        return Err(SepError::Degenerate("no samples".into()));
    }
    let counts = as_counts(samples)?;
    let max = *counts.iter().max().expect("nonempty") as usize;
    let mut freq = vec![0.0; max + 1];
    for &c in &counts {
        freq[c as usize] += 1.0 / counts.len() as f64;
    }
    let mut pmf = (-lambda).exp();
    let mut below = 0.0;
    let mut tv = 0.0;
    for (k, f) in freq.iter().enumerate() {
        if k > 0 {
            pmf *= lambda / k as f64;
        }
        tv += (f - pmf).abs();
        below += pmf;
    }
    Ok(0.5 * (tv + (1.0 - below).max(0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityDistance {
    pub n: usize,
    /// sup |F_n − Φ| after standardizing by the sample mean and sd.
    pub ks: f64,
    /// For integer samples: max over integers k of |F_n(k) − Φ((k + ½ − m)/s)|.
    pub ks_continuity: Option<f64>,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn normality_distance(samples: &[f64]) -> Result<NormalityDistance> {
    let n = samples.len();
    if n < 50 {
        return Err(SepError::Degenerate(format!("{n} samples; need at least 50")));
    }
    let m = empirical_moments(samples)?;
    if m.var <= 0.0 {
        return Err(SepError::Degenerate("zero variance".into()));
    }
    let sd = m.var.sqrt();
    let nf = n as f64;
    let mut z: Vec<f64> = samples.iter().map(|x| (x - m.mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for (i, &zi) in z.iter().enumerate() {
        let f = normal_cdf(zi);
        ks = ks.max((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf);
    }
    let ks_continuity = as_counts(samples).ok().map(|counts| {
        let mut sorted = counts;
        sorted.sort_unstable();
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        let mut worst = 0.0f64;
        let mut idx = 0;
        for k in lo.saturating_sub(1)..=hi {
            while idx < n && sorted[idx] <= k {
                idx += 1;
            }
            let target = normal_cdf((k as f64 + 0.5 - m.mean) / sd);
            worst = worst.max((idx as f64 / nf - target).abs());
        }
        worst
    });
    let m3 = z.iter().map(|v| v.powi(3)).sum::<f64>() / nf;
    let m4 = z.iter().map(|v| v.powi(4)).sum::<f64>() / nf;
    let scale = (nf - 1.0) / nf;
    Ok(NormalityDistance {
        n,
        ks,
        ks_continuity,
        skewness: m3 / scale.powf(1.5),
        excess_kurtosis: m4 / (scale * scale) - 3.0,
    })
}

/// h(r) = P(N₂ ≤ cN₁, N₃ ≤ cN₁) + P(N₂ ≤ −cN₁, N₃ ≤ −cN₁) with
/// c = √(r/(2(1−r))), that is E[Φ(cN)² + Φ(−cN)²].
pub fn h_of_r(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(SepError::invalid(format!("h(r) needs r in [0,1), got {r}")));
    }
    let c = (r / (2.0 * (1.0 - r))).sqrt();
    // The integrand is even in z.
    let f = |z: f64| {
        let p = normal_cdf(c * z);
        let q = normal_cdf(-c * z);
        (-0.5 * z * z).exp() * (p * p + q * q)
    };
    let q = integrate(f, 0.0, 12.0, 1e-11, 2000)?;
    Ok(2.0 * q.value / (2.0 * PI).sqrt())
}

/// Monte Carlo estimate of h(r) from `triples` normal triples, with its
/// standard error.
pub fn h_monte_carlo<R: Rng + ?Sized>(r: f64, triples: usize, rng: &mut R) -> (f64, f64) {
    let c = (r / (2.0 * (1.0 - r))).sqrt();
    // Each triple scores 0, 1 or 2: the two events are nested, not disjoint.
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..triples {
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let n3: f64 = rng.sample(StandardNormal);
        let a = c * n1;
        let score = (n2 <= a && n3 <= a) as u8 + (n2 <= -a && n3 <= -a) as u8;
        sum += score as f64;
        sq += (score * score) as f64;
    }
    let n = triples as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean) * n / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HConstant {
    pub value: f64,
    /// The same integral at a looser tolerance.
    pub coarse: f64,
    pub error: f64,
}

fn h_integral(tol: f64) -> Result<(f64, f64)> {
    // r = u² removes the 1/√r endpoint.
    let mut failure = None;
    let q = integrate(
        |u| match h_of_r(u * u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        tol,
        4000,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let q = q?;
    Ok((q.value, q.error))
}

/// H = ∫₀¹ h(r)/(2√r) dr, computed once per process.
pub fn h_constant() -> Result<HConstant> {
    static CACHE: OnceLock<std::result::Result<HConstant, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            let (coarse, _) = h_integral(1e-7).map_err(|e| e.to_string())?;
            let (value, error) = h_integral(1e-10).map_err(|e| e.to_string())?;
            Ok(HConstant { value, coarse, error })
        })
        .clone()
        .map_err(SepError::NoConvergence)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub sigma: f64,
    /// lim E W_t / √t.
    pub mean_coeff: f64,
    /// Bounds on lim inf and lim sup of Var(W_t)/√t.
    pub var_lower: f64,
    pub var_upper: f64,
    pub h: f64,
}

pub fn thm3_envelope(sigma: f64) -> Result<Envelope> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SepError::invalid(format!("sigma = {sigma} must be positive")));
    }
    let h = h_constant()?.value;
    Ok(Envelope {
        sigma,
        mean_coeff: sigma / (2.0 * PI).sqrt(),
        var_lower: (1.0 - h) * sigma / (2.0 * PI.sqrt()),
        var_upper: sigma / (2.0 * PI.sqrt()),
        h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Target {
    Poisson { lambda: f64 },
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tv: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CiRecord {
    pub mean: [f64; 2],
    pub var: [f64; 2],
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub statistic: String,
    pub n_samples: usize,
    pub mean: f64,
    pub var: f64,
    pub ci: CiRecord,
    pub target: Target,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Distance of the samples from the target law and the pass/fail verdict
/// against the given tolerances. The continuity-corrected KS distance is
/// reported for lattice samples but the verdict uses the plain one.
pub fn verdict(statistic: &str, samples: &[f64], target: &Target, tolerances: &Tolerances) -> Result<LimitReport> {
    let m = empirical_moments(samples)?;
    let mut metrics = BTreeMap::new();
    let mut error = None;
    let pass = match target {
        Target::Poisson { lambda } => {
            let tv = tv_poisson(samples, *lambda)?;
            metrics.insert("tv".into(), tv);
            tolerances.tv.is_none_or(|t| tv <= t)
        }
        Target::Normal => match normality_distance(samples) {
            Ok(d) => {
                metrics.insert("ks".into(), d.ks);
                if let Some(k) = d.ks_continuity {
                    metrics.insert("ks_continuity".into(), k);
                }
                metrics.insert("skewness".into(), d.skewness);
                metrics.insert("excess_kurtosis".into(), d.excess_kurtosis);
                tolerances.ks.is_none_or(|t| d.ks <= t)
            }
            Err(e) => {
                error = Some(e.to_string());
                false
            }
        },
    };
    Ok(LimitReport {
        statistic: statistic.to_string(),
        n_samples: m.n,
        mean: m.mean,
        var: m.var,
        ci: CiRecord {
            mean: m.mean_ci,
            var: m.var_ci,
            level: m.level,
        },
        target: target.clone(),
        metrics,
        pass,
        tolerances: tolerances.clone(),
        error,
    })
}
