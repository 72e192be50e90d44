//! Two-particle duals. U moves two independent walkers; V moves them as an
//! exclusion pair (a jump onto the partner is replaced by a swap of the
//! edge's contents, at rate p(x,y)). Walkers die at the kernel's deficit, so
//! on a killed truncation with reservoirs the stationary covariance is
//!
//! −Cov(η(x),η(y)) = ∫₀^∞ [V(s)Δ](x,y) ds,  Δ(x,y) = p(x,y)[α(x) − α(y)]²,
//!
//! exactly, with α the stationary one-point function.

mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::kernels::{dirichlet_sum, green_solve, heat_apply, Kernel, SiteWindow};
use crate::numeric::{integrate, PoissonWeights};

pub use tree::{tree_refined_constant, RefinedConstant, TreePairChain, TreeWindowVariance};

/// Both walkers together jump at total rate ≤ 2.
const PAIR_RATE: f64 = 2.0;
/// Horizons beyond this are treated as a monitor failure.
const MAX_HORIZON: f64 = 1e6;

/// Real values on ordered site pairs, row-major, diagonal included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairField {
    pub n: usize,
    pub values: Vec<f64>,
}

impl PairField {
    pub fn zeros(n: usize) -> Self {
        PairField {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(n);
        for x in 0..n {
            for y in 0..n {
                out.values[x * n + y] = f(x, y);
            }
        }
        out
    }

    /// f(x,y) = α(x)α(y).
    pub fn product(alpha: &[f64]) -> Self {
        Self::from_fn(alpha.len(), |x, y| alpha[x] * alpha[y])
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.n + y]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.values[x * self.n + y] = v;
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn off_diagonal_sum(&self) -> f64 {
        self.sum() - (0..self.n).map(|x| self.get(x, x)).sum::<f64>()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Δ(x,y) = p(x,y)[α(x) − α(y)]², zero on the diagonal and off the edges.
pub fn delta_field(kernel: &Kernel, alpha: &[f64]) -> PairField {
    assert_eq!(alpha.len(), kernel.len());
    let mut f = PairField::zeros(kernel.len());
    for x in 0..kernel.len() {
        for (y, p) in kernel.neighbors(x) {
            let d = alpha[x] - alpha[y];
            f.set(x, y, p * d * d);
        }
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairVariant {
    /// U: independent walkers on all ordered pairs, diagonal included.
    Independent,
    /// V: exclusion pair on distinct sites.
    Exclusion,
}

#[derive(Debug, Clone, Copy)]
pub struct TwoParticleGenerator<'a> {
    pub kernel: &'a Kernel,
    pub variant: PairVariant,
}

impl<'a> TwoParticleGenerator<'a> {
    pub fn new(kernel: &'a Kernel, variant: PairVariant) -> Self {
        TwoParticleGenerator { kernel, variant }
    }

    /// out = f + (G f)/Λ with Λ = 2.
    fn step(&self, f: &PairField, out: &mut PairField) {
        let k = self.kernel;
        let n = k.len();
        let exclusion = self.variant == PairVariant::Exclusion;
        for x in 0..n {
            for y in 0..n {
                if exclusion && x == y {
                    out.set(x, y, 0.0);
                    continue;
                }
                let here = f.get(x, y);
                let mut g = -(k.deficit(x) + k.deficit(y)) * here;
                for (z, p) in k.neighbors(x) {
                    if exclusion && z == y {
                        g += p * (f.get(y, x) - here);
                    } else {
                        g += p * (f.get(z, y) - here);
                    }
                }
                for (z, p) in k.neighbors(y) {
                    if exclusion && z == x {
                        // The edge swap was counted from x's side.
                        continue;
                    }
                    g += p * (f.get(x, z) - here);
                }
                out.set(x, y, here + g / PAIR_RATE);
            }
        }
    }
}

/// U(t)f or V(t)f by uniformization at rate 2.
pub fn pair_semigroup_apply(gen: &TwoParticleGenerator, field: &PairField, t: f64, tol: f64) -> PairField {
    assert_eq!(field.n, gen.kernel.len());
    let pw = PoissonWeights::new(PAIR_RATE * t, tol);
    let mut cur = field.clone();
    let mut next = PairField::zeros(field.n);
    let mut out = PairField::zeros(field.n);
    if gen.variant == PairVariant::Exclusion {
        for x in 0..field.n {
            cur.set(x, x, 0.0);
        }
    }
    for k in 0..=pw.last() {
        let w = pw.weight(k);
        if w > 0.0 {
            for (o, c) in out.values.iter_mut().zip(&cur.values) {
                *o += w * c;
            }
        }
        if k < pw.last() {
            gen.step(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    out
}

/// ∫₀^T V(s)Δ ds together with the horizon monitor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualIntegral {
    pub field: PairField,
    pub horizon: f64,
    /// max over pairs of [V(T)Δ].
    pub integrand: f64,
    /// Killed kernels: largest probability that the pair is still alive at
    /// T. Closed kernels: largest probability that a walker sits on a
    /// truncation-boundary site at T.
    pub boundary_leak: f64,
    pub tol: f64,
}

struct HorizonPass {
    integral: PairField,
    integrand: f64,
    occupation: f64,
}

fn horizon_pass(gen: &TwoParticleGenerator, delta: &PairField, occ: &PairField, t: f64, tol: f64) -> HorizonPass {
    let n = delta.n;
    let pw = PoissonWeights::new(PAIR_RATE * t, tol * 1e-3);
    // q_k = P(Poisson(Λt) > k), so ∫₀^t Pois(Λs; k) ds = q_k / Λ.
    let mut q = vec![0.0; pw.last() + 1];
    let mut acc = 0.0;
    for k in (0..=pw.last()).rev() {
        q[k] = acc;
        acc += pw.weight(k);
    }
    let lower_tail = 1.0 - acc;
    for qk in q.iter_mut().take(pw.first) {
        *qk += lower_tail.max(0.0);
    }
    let mut v = delta.clone();
    let mut o = occ.clone();
    let mut scratch = PairField::zeros(n);
    let mut integral = PairField::zeros(n);
    let mut at_t = PairField::zeros(n);
    let mut occ_t = PairField::zeros(n);
    for (k, &tail) in q.iter().enumerate() {
        let (qk, wk) = (tail / PAIR_RATE, pw.weight(k));
        for i in 0..n * n {
            integral.values[i] += qk * v.values[i];
            at_t.values[i] += wk * v.values[i];
            occ_t.values[i] += wk * o.values[i];
        }
        // Terms with k < first still feed the integral.
        if k < pw.last() {
            gen.step(&v, &mut scratch);
            std::mem::swap(&mut v, &mut scratch);
            gen.step(&o, &mut scratch);
            std::mem::swap(&mut o, &mut scratch);
        }
    }
    HorizonPass {
        integral,
        integrand: at_t.max_abs(),
        occupation: occ_t.values.iter().copied().fold(0.0, f64::max),
    }
}

/// All pairs at once: ∫₀^T V(s)Δ ds with T doubled from 1 until the
/// integrand is below `tol` and the boundary occupation below 10·tol.
pub fn dual_integral(kernel: &Kernel, alpha: &[f64], tol: f64) -> Result<DualIntegral> {
    let delta = delta_field(kernel, alpha);
    let gen = TwoParticleGenerator::new(kernel, PairVariant::Exclusion);
    let n = kernel.len();
    let killed = !kernel.is_stochastic();
    let occ = PairField::from_fn(n, |x, y| {
        if x == y {
            0.0
        } else if killed || !kernel.is_interior(x) || !kernel.is_interior(y) {
            1.0
        } else {
            0.0
        }
    });
    if delta.max_abs() == 0.0 {
        return Ok(DualIntegral {
            field: PairField::zeros(n),
            horizon: 0.0,
            integrand: 0.0,
            boundary_leak: 0.0,
            tol,
        });
    }
    let mut t = 1.0;
    loop {
        let pass = horizon_pass(&gen, &delta, &occ, t, tol);
        if pass.integrand < tol && pass.occupation < 10.0 * tol {
            return Ok(DualIntegral {
                field: pass.integral,
                horizon: t,
                integrand: pass.integrand,
                boundary_leak: pass.occupation,
                tol,
            });
        }
        if t >= MAX_HORIZON || (pass.integrand < tol && !killed) {
            return Err(SepError::HorizonMonitor {
                horizon: t,
                integrand: pass.integrand,
                boundary: pass.occupation,
            });
        }
        t *= 2.0;
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairCovariance {
    pub pair: (usize, usize),
    /// −Cov(η(x), η(y)).
    pub value: f64,
    pub horizon_t: f64,
    pub boundary_leak: f64,
    pub tol: f64,
}

/// −Cov_μ(η(x), η(y)) from the dual integral.
pub fn stationary_neg_covariance(
    kernel: &Kernel,
    alpha: &[f64],
    x: usize,
    y: usize,
    tol: f64,
) -> Result<PairCovariance> {
    if x == y || x >= kernel.len() || y >= kernel.len() {
        return Err(SepError::invalid(format!("need two distinct sites, got ({x},{y})")));
    }
    let d = dual_integral(kernel, alpha, tol)?;
    Ok(PairCovariance {
        pair: (x, y),
        value: d.field.get(x, y),
        horizon_t: d.horizon,
        boundary_leak: d.boundary_leak,
        tol,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceBound {
    pub window: String,
    /// Σ_{x,y} Δ(x,y) ∫₀^∞ P^x(X_s∈W) P^y(X_s∈W) ds.
    pub value: f64,
    /// Φ(α) · sup_x Σ_{u∈W} G(x,u).
    pub coarse: f64,
    pub phi: f64,
    pub green_sup: f64,
    pub horizon_t: f64,
    pub quadrature_error: f64,
}

/// The Green-function bound on Σ_{x,y∈W} −Cov(η(x),η(y)), from single-walk
/// heat kernels of the killed kernel, and its coarse form.
pub fn covariance_sum_bound(kernel: &Kernel, alpha: &[f64], window: &SiteWindow, tol: f64) -> Result<CovarianceBound> {
    let ind = window.indicator(kernel);
    let green = green_solve(kernel, &ind, tol * 1e-2)?;
    let green_sup = green.values.iter().copied().fold(0.0, f64::max);
    let phi = dirichlet_sum(kernel, alpha).value;
    let delta = delta_field(kernel, alpha);
    let edges: Vec<(usize, usize, f64)> = (0..kernel.len())
        .flat_map(|x| kernel.neighbors(x).map(move |(y, _)| (x, y)))
        .map(|(x, y)| (x, y, delta.get(x, y)))
        .filter(|e| e.2 > 0.0)
        .collect();
    let integrand = |s: f64| -> f64 {
        let u = heat_apply(kernel, &ind, s, tol * 1e-3);
        edges.iter().map(|&(x, y, d)| d * u[x] * u[y]).sum()
    };
    let (mut value, mut error, mut a, mut b) = (0.0, 0.0, 0.0, 1.0);
    loop {
        let q = integrate(&integrand, a, b, tol * 1e-2, 400)?;
        value += q.value;
        error += q.error;
        if integrand(b) < tol * 1e-2 && q.value < tol * 1e-2 {
            break;
        }
        if b >= MAX_HORIZON {
            return Err(SepError::HorizonMonitor {
                horizon: b,
                integrand: integrand(b),
                boundary: f64::NAN,
            });
        }
        a = b;
        b *= 2.0;
    }
    Ok(CovarianceBound {
        window: window.to_string(),
        value,
        coarse: phi * green_sup,
        phi,
        green_sup,
        horizon_t: b,
        quadrature_error: error,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarianceRatio {
    pub window: String,
    pub ratio: f64,
    /// Var(Σ_{x∈W} η(x)).
    pub variance: f64,
    /// Σ_{x∈W} α(x)(1 − α(x)).
    pub independent: f64,
    /// Σ_{x≠y∈W} −Cov(η(x), η(y)).
    pub neg_covariance: f64,
}

/// Var(Σ_W η) / Σ_W α(1−α); at most one by negative correlation.
pub fn variance_ratio(kernel: &Kernel, alpha: &[f64], window: &SiteWindow, tol: f64) -> Result<VarianceRatio> {
    let members = window.members(kernel);
    let independent: f64 = members.iter().map(|&x| alpha[x] * (1.0 - alpha[x])).sum();
    if independent == 0.0 {
        return Err(SepError::invalid("α is 0 or 1 throughout the window"));
    }
    let d = dual_integral(kernel, alpha, tol)?;
    let mut neg = 0.0;
    for &x in &members {
        for &y in &members {
            if x != y {
                neg += d.field.get(x, y);
            }
        }
    }
    Ok(VarianceRatio {
        window: window.to_string(),
        ratio: (independent - neg) / independent,
        variance: independent - neg,
        independent,
        neg_covariance: neg,
    })
}
