use nalgebra::DMatrix;
use serde::Serialize;

use super::{Kernel, SiteWindow};
use crate::error::{Result, SepError};
use crate::numeric::PoissonWeights;

/// Suprema over sites are taken at interior sites at least this far from the
/// truncation boundary.
pub const SUP_MARGIN: u32 = 5;

/// p_t = e^{-t} Σ_n tⁿ/n! P⁽ⁿ⁾ as a dense matrix, truncated once the Poisson
/// tail drops below `tol`. Intended for small kernels.
pub fn heat_kernel(kernel: &Kernel, t: f64, tol: f64) -> DMatrix<f64> {
    assert!(t >= 0.0, "heat kernel needs t >= 0");
    let n = kernel.len();
    let weights = PoissonWeights::new(t, tol);
    let mut out = DMatrix::zeros(n, n);
    // Column y of P^k is P^k e_y; P symmetric so rows and columns agree.
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut col = vec![0.0; n];
    let mut next = vec![0.0; n];
    for k in 0..=weights.last() {
        let w = weights.weight(k);
        if w > 0.0 {
            out += &power * w;
        }
        if k == weights.last() {
            break;
        }
        for y in 0..n {
            col.copy_from_slice(power.column(y).as_slice());
            kernel.apply(&col, &mut next);
            power.column_mut(y).copy_from_slice(&next);
        }
    }
    out
}

/// x ↦ Σ_y p_t(x,y) v(y) without forming p_t.
pub fn heat_apply(kernel: &Kernel, v: &[f64], t: f64, tol: f64) -> Vec<f64> {
    assert_eq!(v.len(), kernel.len());
    let weights = PoissonWeights::new(t, tol);
    let mut out = vec![0.0; v.len()];
    let mut cur = v.to_vec();
    let mut next = vec![0.0; v.len()];
    for k in 0..=weights.last() {
        let w = weights.weight(k);
        if w > 0.0 {
            for (o, c) in out.iter_mut().zip(&cur) {
                *o += w * c;
            }
        }
        if k < weights.last() {
            kernel.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenSolve {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves (I − P) u = b by conjugate gradients. Requires killing somewhere;
/// a stochastic kernel is recurrent and the Green series diverges.
pub fn green_solve(kernel: &Kernel, rhs: &[f64], tol: f64) -> Result<GreenSolve> {
    if kernel.is_stochastic() {
        return Err(SepError::Recurrent);
    }
    let n = kernel.len();
    assert_eq!(rhs.len(), n);
    let apply_a = |v: &[f64], out: &mut [f64]| {
        kernel.apply(v, out);
        for (o, x) in out.iter_mut().zip(v) {
            *o = x - *o;
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    let mut u = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let stop = (tol * 1e-2).powi(2);
    let max_iter = (10 * n).max(10_000);
    let mut iterations = 0;
    while rr > stop {
        if iterations >= max_iter {
            return Err(SepError::NoConvergence(format!(
                "conjugate gradients: residual {:e} after {iterations} iterations",
                rr.sqrt()
            )));
        }
        apply_a(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SepError::NoConvergence(
                "I - P is not positive definite on this kernel".into(),
            ));
        }
        let a = rr / pap;
        for i in 0..n {
            u[i] += a * p[i];
            r[i] -= a * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
        iterations += 1;
    }
    Ok(GreenSolve {
        values: u,
        iterations,
        residual: rr.sqrt(),
    })
}

/// G(x,y) = Σ_n p⁽ⁿ⁾(x,y) on a killed kernel.
pub fn green_function(kernel: &Kernel, x: usize, y: usize, tol: f64) -> Result<f64> {
    if x >= kernel.len() || y >= kernel.len() {
        return Err(SepError::invalid("site index out of range"));
    }
    let mut e = vec![0.0; kernel.len()];
    e[y] = 1.0;
    Ok(green_solve(kernel, &e, tol)?.values[x])
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenSup {
    pub value: f64,
    /// Site attaining the supremum.
    pub site: usize,
    /// Number of sites the supremum ranged over.
    pub candidates: usize,
    pub iterations: usize,
}

/// sup over interior x (at distance ≥ [`SUP_MARGIN`] from the boundary) of
/// Σ_{y∈window} G(x,y).
pub fn green_window_sup(kernel: &Kernel, window: &SiteWindow, tol: f64) -> Result<GreenSup> {
    let solve = green_solve(kernel, &window.indicator(kernel), tol)?;
    let bd = kernel.boundary_distance();
    let mut best: Option<(usize, f64)> = None;
    let mut candidates = 0;
    for (x, &u) in solve.values.iter().enumerate() {
        if bd[x] < SUP_MARGIN {
            continue;
        }
        candidates += 1;
        if best.is_none_or(|(_, b)| u > b) {
            best = Some((x, u));
        }
    }
    let (site, value) = best.ok_or_else(|| {
        SepError::invalid(format!(
            "no site lies {SUP_MARGIN} or more steps from the truncation boundary"
        ))
    })?;
    Ok(GreenSup {
        value,
        site,
        candidates,
        iterations: solve.iterations,
    })
}
