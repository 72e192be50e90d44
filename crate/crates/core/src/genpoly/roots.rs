use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SubsetDistribution, UnivariatePoly};
use crate::error::{Result, SepError};

/// Slack factor on the rounding-error bound used to accept a multiple root.
const MULTIPLICITY_SLACK: f64 = 1e3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootReport {
    pub real_rooted: bool,
    /// Finite roots, zeros included, as [re, im].
    pub roots: Vec<Complex64>,
    /// Degree deficit: roots at infinity.
    pub infinite: usize,
    /// Largest |Im| over the finite roots.
    pub margin: f64,
    /// max(1, largest |root|); the verdict compares `margin` to `tol·scale`.
    pub scale: f64,
}

/// Independent Bernoulli parameters, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliVector {
    pub p: Vec<f64>,
}

impl BernoulliVector {
    pub fn product_poly(&self) -> UnivariatePoly {
        UnivariatePoly::from_bernoulli(&self.p)
    }
}

/// Taylor coefficients t_j = Q^{(j)}(x)/j! of `c` at real x, with the
/// rounding bound Σ_i |c_i| C(i,j) |x|^{i−j} for each.
fn taylor(c: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut t = c.to_vec();
    let mut b: Vec<f64> = c.iter().map(|v| v.abs()).collect();
    let n = c.len();
    let ax = x.abs();
    // Repeated synthetic division; pass j fixes t[j].
    for j in 0..n {
        for i in (j + 1..n).rev() {
            t[i - 1] += x * t[i];
            b[i - 1] += ax * b[i];
        }
    }
    (t, b)
}

/// Newton on the (k−1)-th derivative from a real seed.
fn newton_derivative(c: &[f64], k: usize, seed: f64) -> f64 {
    let mut x = seed;
    for _ in 0..60 {
        let (t, _) = taylor(c, x);
        let f = t[k - 1];
        let df = k as f64 * t.get(k).copied().unwrap_or(0.0);
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-16 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Whether x is a root of multiplicity ≥ k up to rounding.
fn is_multiple_root(c: &[f64], x: f64, k: usize) -> bool {
    let (t, b) = taylor(c, x);
    let tol = MULTIPLICITY_SLACK * f64::EPSILON * c.len() as f64;
    (0..k).all(|j| t[j].abs() <= tol * b[j])
}

fn eigen_roots(monic_tail: &[f64]) -> Result<Vec<Complex64>> {
    // Companion matrix of w^m + a_{m−1} w^{m−1} + … + a_0.
    let m = monic_tail.len();
    if m == 1 {
        return Ok(vec![Complex64::new(-monic_tail[0], 0.0)]);
    }
    let mut comp = DMatrix::<f64>::zeros(m, m);
    for i in 1..m {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..m {
        comp[(i, m - 1)] = -monic_tail[i];
    }
    balance_parlett_reinsch(&mut comp);
    let schur = Schur::try_new(comp, f64::EPSILON, 10_000)
        .ok_or_else(|| SepError::NoConvergence("companion eigenvalues".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Replaces eigenvalue clusters that are multiple real roots up to rounding
/// by the refined root. Eigenvalues of an m-fold root scatter by ~ε^{1/m}.
fn refine_clusters(c: &[f64], roots: &mut [Complex64]) {
    let m = roots.len();
    let mut visited = vec![false; m];
    for s in 0..m {
        if visited[s] {
            continue;
        }
        // Single-linkage cluster around s.
        let mut cluster = vec![s];
        visited[s] = true;
        let mut i = 0;
        while i < cluster.len() {
            let z = roots[cluster[i]];
            for (j, v) in visited.iter_mut().enumerate() {
                if !*v && (roots[j] - z).norm() <= 0.05 * z.norm().max(1.0) {
                    *v = true;
                    cluster.push(j);
                }
            }
            i += 1;
        }
        let mut free = cluster;
        while free.len() >= 2 {
            let mut found = None;
            'search: for k in (2..=free.len()).rev() {
                for &seed in &free {
                    let r = newton_derivative(c, k, roots[seed].re);
                    if r.is_finite() && is_multiple_root(c, r, k) {
                        found = Some((k, r));
                        break 'search;
                    }
                }
            }
            let Some((k, r)) = found else { break };
            free.sort_by(|&a, &b| {
                let da = (roots[a] - r).norm();
                let db = (roots[b] - r).norm();
                da.total_cmp(&db)
            });
            for &idx in &free[..k] {
                roots[idx] = Complex64::new(r, 0.0);
            }
            free.drain(..k);
        }
    }
}

/// Roots of Q*(w) and the verdict |Im| ≤ tol·scale for every root.
///
/// Leading zero coefficients are recorded as roots at infinity, trailing
/// ones (c_0 = c_1 = … = 0) as exact roots at zero. The remaining roots
/// come from the balanced companion matrix; clusters that are multiple real
/// roots up to rounding are collapsed onto the refined real root.
pub fn real_rooted(q: &UnivariatePoly, tol: f64) -> Result<RootReport> {
    let c = &q.coeffs;
    let Some(hi) = c.iter().rposition(|&v| v != 0.0) else {
        return Err(SepError::ZeroPolynomial);
    };
    let lo = c.iter().position(|&v| v != 0.0).expect("nonzero");
    let infinite = q.degree() - hi;
    let mut roots = vec![Complex64::new(0.0, 0.0); lo];
    let core = &c[lo..=hi];
    if core.len() > 1 {
        let lead = core[core.len() - 1];
        let monic: Vec<f64> = core[..core.len() - 1].iter().map(|v| v / lead).collect();
        let mut found = eigen_roots(&monic)?;
        refine_clusters(core, &mut found);
        roots.extend(found);
    }
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let margin = roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    Ok(RootReport {
        real_rooted: margin <= tol * scale,
        roots,
        infinite,
        margin,
        scale,
    })
}

/// Parameters p_i with Q*(w) = Π_i (p_i w + 1 − p_i), read off the roots:
/// a root at −w_i gives p_i = 1/(1 + w_i); roots at infinity give p_i = 0.
pub fn bernoulli_decomposition(dist: &SubsetDistribution, tol: f64) -> Result<BernoulliVector> {
    let q = dist.diagonalize();
    let report = real_rooted(&q, tol)?;
    if !report.real_rooted {
        let worst = report
            .roots
            .iter()
            .max_by(|a, b| a.im.abs().total_cmp(&b.im.abs()))
            .expect("a complex root exists");
        return Err(SepError::NotRealRooted {
            re: worst.re,
            im: worst.im,
        });
    }
    let mut p: Vec<f64> = report.roots.iter().map(|z| 1.0 / (1.0 + (-z.re).max(0.0))).collect();
    p.extend(std::iter::repeat_n(0.0, report.infinite));
    p.sort_by(|a, b| b.total_cmp(a));
    let out = BernoulliVector { p };
    let gap = out.product_poly().max_abs_diff(&q);
    if gap > tol.max(1e-9) {
        return Err(SepError::NoConvergence(format!(
            "Bernoulli product differs from the particle-count law by {gap:e}"
        )));
    }
    Ok(out)
}
