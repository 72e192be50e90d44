//! Small numerical building blocks shared by the evolution and quadrature code:
//! truncated Poisson weights for uniformization, adaptive Gauss-Kronrod
//! quadrature, and the standard normal distribution function.

use libm::{erfc, lgamma};

use crate::error::{Result, SepError};

/// Poisson(mean) probabilities on `first..first + weights.len()`, with the
/// mass outside that range below `tol` (split evenly between the two tails).
#[derive(Debug, Clone)]
pub struct PoissonWeights {
    pub first: usize,
    pub weights: Vec<f64>,
    /// Bound on the mass discarded on both sides.
    pub tail: f64,
}

impl PoissonWeights {
    pub fn new(mean: f64, tol: f64) -> Self {
        assert!(mean >= 0.0 && mean.is_finite(), "Poisson mean must be finite and >= 0");
        if mean == 0.0 {
            return Self {
                first: 0,
                weights: vec![1.0],
                tail: 0.0,
            };
        }
        let tol = tol.max(1e-300);
        let mode = mean.floor() as usize;
        let log_pmf = |k: usize| -> f64 { k as f64 * mean.ln() - mean - lgamma(k as f64 + 1.0) };
        let at_mode = log_pmf(mode).exp();

        // Walk left and right from the mode with the pmf recurrence.
        let mut tail = 0.0;
        let mut left = vec![at_mode];
        let mut k = mode;
        let mut p = at_mode;
        while k > 0 {
            p *= k as f64 / mean;
            k -= 1;
            left.push(p);
            // Remaining left tail is bounded by a geometric series once k < mean.
            let ratio = k as f64 / mean;
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < 0.5 * tol {
                tail += p * ratio / (1.0 - ratio);
                break;
            }
        }
        let first = k;
        left.reverse();

        let mut right = Vec::new();
        let mut k = mode;
        let mut p = at_mode;
        loop {
            p *= mean / (k as f64 + 1.0);
            k += 1;
            right.push(p);
            let ratio = mean / (k as f64 + 1.0);
            if ratio < 1.0 && p * ratio / (1.0 - ratio) < 0.5 * tol {
                tail += p * ratio / (1.0 - ratio);
                break;
            }
        }
        let mut weights = left;
        weights.extend(right);
        // The mode value carries the relative error of ln Γ; rescale so the
        // kept and discarded masses add to one.
        let kept: f64 = weights.iter().sum();
        let scale = (1.0 - tail) / kept;
        weights.iter_mut().for_each(|w| *w *= scale);
        Self { first, weights, tail }
    }

    /// Largest power index needed.
    pub fn last(&self) -> usize {
        self.first + self.weights.len() - 1
    }

    pub fn weight(&self, k: usize) -> f64 {
        if k < self.first {
            0.0
        } else {
            self.weights.get(k - self.first).copied().unwrap_or(0.0)
        }
    }
}

/// Standard normal distribution function, accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Inverse of [`normal_cdf`] by bracketing Newton iterations.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile level must lie in (0,1)");
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut x = 0.0;
    for _ in 0..200 {
        let f = normal_cdf(x) - p;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = normal_pdf(x);
        let mut next = if d > 0.0 { x - f / d } else { 0.5 * (lo + hi) };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`
/// to absolute tolerance `abs_tol`.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let mut intervals = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    let mut evaluations = 15;
    loop {
        let (value, error) = intervals.iter().fold((0.0, 0.0), |(v, e), iv| (v + iv.2, e + iv.3));
        if error <= abs_tol {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if intervals.len() >= max_intervals {
            return Err(SepError::NoConvergence(format!(
                "quadrature on [{a}, {b}] stalled at error {error:e} after {} intervals",
                intervals.len()
            )));
        }
        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("nonempty interval list");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Total variation distance between two probability vectors of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "total variation needs equal supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_weights_sum_to_one() {
        for &mean in &[0.0, 0.3, 1.0, 17.5, 400.0, 5000.0] {
            let w = PoissonWeights::new(mean, 1e-14);
            let s: f64 = w.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "mean {mean}: sum {s}");
            assert!(w.tail < 1e-13);
        }
    }

    #[test]
    fn poisson_weights_match_pmf() {
        let w = PoissonWeights::new(2.5, 1e-15);
        let exact = (-2.5f64).exp() * 2.5f64.powi(3) / 6.0;
        assert!((w.weight(3) - exact).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!(
            (normal_cdf(1.959963984540054) - 0.975).abs() < 1e-14,
            "{:e}",
            normal_cdf(1.959963984540054) - 0.975
        );
        assert!((normal_quantile(0.995) - 2.5758293035489004).abs() < 1e-12);
    }

    #[test]
    fn gauss_kronrod_polynomial_and_singular() {
        let q = integrate(|x| x * x * x + 1.0, 0.0, 2.0, 1e-13, 100).unwrap();
        assert!((q.value - 6.0).abs() < 1e-12);
        let q = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-11, 2000).unwrap();
        assert!((q.value - 2.0 / 3.0).abs() < 1e-10);
    }
}
