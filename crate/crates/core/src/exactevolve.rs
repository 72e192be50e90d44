//! Master-equation evolution of the full 2^n law under the exclusion
//! generator, by uniformization, and the stirring-product (Trotter)
//! alternative built from single-edge transposition mixes.
//!
//! A generator may carry particle reservoirs: at rate κ(x) the occupancy of
//! x is redrawn from Bernoulli(β(x)). Reservoirs let a finite truncation have
//! a non-constant stationary density profile.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};
use crate::genpoly::{
    all_pairs, default_rayleigh_points, mix_in_place, rayleigh_check, real_rooted, SubsetDistribution, DEFAULT_SITE_CAP,
};
use crate::kernels::{Kernel, OpenBoundary};
use crate::numeric::PoissonWeights;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    pub site: usize,
    pub rate: f64,
    pub density: f64,
}

/// L f(η) = Σ_{x<y} p(x,y)[f(η^{xy}) − f(η)] + Σ_x κ(x)[β(x) f(η^{x,1}) + (1−β(x)) f(η^{x,0}) − f(η)].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusionGenerator {
    pub n: usize,
    /// (x, y, rate) with x < y, lexicographic. Also the Trotter order.
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reservoirs: Vec<Reservoir>,
}

/// One edge per unordered pair with p(x,y) > 0; holding is ignored.
pub fn build_generator(kernel: &Kernel) -> Result<ExclusionGenerator> {
    build_generator_with_cap(kernel, DEFAULT_SITE_CAP)
}

pub fn build_generator_with_cap(kernel: &Kernel, cap: usize) -> Result<ExclusionGenerator> {
    if kernel.len() > cap {
        return Err(SepError::TooManySites { n: kernel.len(), cap });
    }
    Ok(ExclusionGenerator {
        n: kernel.len(),
        edges: kernel.edges(),
        reservoirs: Vec::new(),
    })
}

/// Exclusion on a killed truncation with a reservoir wherever the walk is
/// killed.
pub fn build_open_generator(kernel: &Kernel, boundary: &OpenBoundary) -> Result<ExclusionGenerator> {
    let mut g = build_generator(kernel)?;
    if boundary.rate.len() != kernel.len() || boundary.density.len() != kernel.len() {
        return Err(SepError::invalid("boundary vectors do not match the kernel"));
    }
    for (site, rate, density) in boundary.sites() {
        if !(0.0..=1.0).contains(&density) {
            return Err(SepError::invalid(format!("reservoir density {density} at {site}")));
        }
        g.reservoirs.push(Reservoir { site, rate, density });
    }
    Ok(g)
}

impl ExclusionGenerator {
    /// Uniformization rate: total edge and reservoir rate.
    pub fn total_rate(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum::<f64>() + self.reservoirs.iter().map(|r| r.rate).sum::<f64>()
    }

    /// out = (I + L*/Λ) w, the uniformized one-step operator on laws.
    fn step(&self, w: &[f64], out: &mut [f64], lambda: f64) {
        out.copy_from_slice(w);
        for &(x, y, r) in &self.edges {
            let q = r / lambda;
            let (bx, by) = (1usize << x, 1usize << y);
            for m in 0..w.len() {
                if m & bx != 0 && m & by == 0 {
                    let s = m ^ bx ^ by;
                    let flow = q * (w[m] - w[s]);
                    out[m] -= flow;
                    out[s] += flow;
                }
            }
        }
        for res in &self.reservoirs {
            let q = res.rate / lambda;
            let b = 1usize << res.site;
            for m in 0..w.len() {
                if m & b == 0 {
                    let pair = w[m] + w[m | b];
                    out[m] += q * ((1.0 - res.density) * pair - w[m]);
                    out[m | b] += q * (res.density * pair - w[m | b]);
                }
            }
        }
    }

    fn check(&self, dist: &SubsetDistribution) -> Result<()> {
        if dist.n() != self.n {
            return Err(SepError::invalid(format!(
                "law on {} sites, generator on {}",
                dist.n(),
                self.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evolved {
    pub dist: SubsetDistribution,
    /// |1 − Σ weights| before renormalization.
    pub renormalization: f64,
    /// Most negative weight seen before renormalization (≥ −1e−15 expected).
    pub min_weight: f64,
    pub poisson_terms: usize,
}

/// exp(tL) applied to `dist` by uniformization; the Poisson series stops
/// once the remaining tail is below `tol`.
pub fn evolve(dist: &SubsetDistribution, gen: &ExclusionGenerator, t: f64, tol: f64) -> Result<Evolved> {
    gen.check(dist)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(SepError::invalid(format!("time {t} must be finite and >= 0")));
    }
    let lambda = gen.total_rate();
    if t == 0.0 || lambda == 0.0 {
        return Ok(Evolved {
            dist: dist.clone(),
            renormalization: 0.0,
            min_weight: dist.weights().iter().copied().fold(f64::INFINITY, f64::min),
            poisson_terms: 0,
        });
    }
    let pw = PoissonWeights::new(lambda * t, tol);
    let mut cur = dist.weights().to_vec();
    let mut next = vec![0.0; cur.len()];
    let mut acc = vec![0.0; cur.len()];
    let mut min_weight = f64::INFINITY;
    for k in 0..=pw.last() {
        let wk = pw.weight(k);
        if wk > 0.0 {
            for (a, c) in acc.iter_mut().zip(&cur) {
                *a += wk * c;
            }
        }
        if k < pw.last() {
            gen.step(&cur, &mut next, lambda);
            std::mem::swap(&mut cur, &mut next);
            min_weight = min_weight.min(cur.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    let total: f64 = acc.iter().sum();
    min_weight = min_weight.min(acc.iter().copied().fold(f64::INFINITY, f64::min));
    for a in acc.iter_mut() {
        *a = (*a / total).max(0.0);
    }
    Ok(Evolved {
        dist: SubsetDistribution::from_raw(dist.n(), acc),
        renormalization: (1.0 - total).abs(),
        min_weight,
        poisson_terms: pw.last() + 1,
    })
}

/// Probability that one edge of rate r has swapped an even number of times
/// during δ: (1 + e^{−2rδ})/2.
pub fn no_swap_probability(rate: f64, dt: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * rate * dt).exp())
}

/// Trotter splitting: `steps` sweeps over the edges in lexicographic order,
/// each applying the exact single-edge law over δ = t/steps. Reservoirs, if
/// any, are applied exactly after each edge sweep.
pub fn evolve_stirring_products(
    dist: &SubsetDistribution,
    gen: &ExclusionGenerator,
    t: f64,
    steps: usize,
) -> Result<SubsetDistribution> {
    gen.check(dist)?;
    if steps == 0 {
        return Err(SepError::invalid("steps must be at least 1"));
    }
    let dt = t / steps as f64;
    let mut w = dist.weights().to_vec();
    for _ in 0..steps {
        for &(x, y, r) in &gen.edges {
            mix_in_place(&mut w, x, y, no_swap_probability(r, dt));
        }
        for res in &gen.reservoirs {
            let keep = (-res.rate * dt).exp();
            let b = 1usize << res.site;
            for m in 0..w.len() {
                if m & b == 0 {
                    let pair = w[m] + w[m | b];
                    w[m] = keep * w[m] + (1.0 - keep) * (1.0 - res.density) * pair;
                    w[m | b] = keep * w[m | b] + (1.0 - keep) * res.density * pair;
                }
            }
        }
    }
    Ok(SubsetDistribution::from_raw(dist.n(), w))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryLimit {
    pub dist: SubsetDistribution,
    /// Time reached.
    pub horizon: f64,
    /// Total variation between the last two horizons.
    pub tv_change: f64,
}

/// Evolves with doubling horizon from t = 1 until the total variation
/// between successive horizons is below `tol`. On a closed finite system the
/// limit is exchangeable within each particle-count sector.
pub fn stationary_limit(dist: &SubsetDistribution, gen: &ExclusionGenerator, tol: f64) -> Result<StationaryLimit> {
    let inner = (tol * 1e-3).max(1e-15);
    let mut horizon = 1.0;
    let mut prev = evolve(dist, gen, horizon, inner)?.dist;
    for _ in 0..40 {
        let next = evolve(&prev, gen, horizon, inner)?.dist;
        horizon *= 2.0;
        let tv = prev.total_variation(&next);
        if tv < tol {
            return Ok(StationaryLimit {
                dist: next,
                horizon,
                tv_change: tv,
            });
        }
        prev = next;
    }
    Err(SepError::NoConvergence(format!(
        "stationary limit not reached by t = {horizon}"
    )))
}

/// Per-step diagnostics of a traced evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub t: f64,
    pub tv_change: f64,
    pub rayleigh_min: f64,
    pub realroot_margin: f64,
}

/// Evolves to `t` in `steps` equal increments, recording the total
/// variation moved, the sampled Rayleigh minimum (default point set for
/// `seed`) and the real-rootedness margin of the particle count after each.
pub fn evolve_traced(
    dist: &SubsetDistribution,
    gen: &ExclusionGenerator,
    t: f64,
    steps: usize,
    tol: f64,
    seed: u64,
) -> Result<(SubsetDistribution, Vec<TraceRecord>)> {
    if steps == 0 {
        return Err(SepError::invalid("steps must be at least 1"));
    }
    let points = default_rayleigh_points(dist.n(), seed);
    let pairs = all_pairs(dist.n());
    let mut cur = dist.clone();
    let mut trace = Vec::with_capacity(steps);
    for step in 1..=steps {
        let next = evolve(&cur, gen, t / steps as f64, tol)?.dist;
        let rayleigh_min = if pairs.is_empty() {
            0.0
        } else {
            rayleigh_check(&next, &points, &pairs, 0.0)?.min_value
        };
        trace.push(TraceRecord {
            step,
            t: t * step as f64 / steps as f64,
            tv_change: cur.total_variation(&next),
            rayleigh_min,
            realroot_margin: real_rooted(&next.diagonalize(), 1e-8)?.margin,
        });
        cur = next;
    }
    Ok((cur, trace))
}

/// P(η(x) = 1) for every site.
pub fn one_point_function(dist: &SubsetDistribution) -> Vec<f64> {
    (0..dist.n())
        .map(|i| dist.marginal_mean(i).expect("in range"))
        .collect()
}
