use serde::Serialize;

use super::{Kernel, Side, SiteWindow, SUP_MARGIN};
use crate::error::{Result, SepError};

/// The tree walk lumped onto its (side, level) classes.
///
/// Functions of the form u(x) = F(side(x), l(x)) are mapped to such functions
/// by P, so Green and window sums against class-invariant right-hand sides
/// can be computed on the 2(D+1) classes instead of the 2^{D+2} sites. The
/// classes form a path
///
/// ```text
/// (L,D) .. (L,1) (L,0) | (R,0) (R,1) .. (R,D)
/// ```
///
/// with rate 1/3 toward the basis edge and 2/3 away from it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeQuotient {
    depth: u32,
    killed: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassSup {
    pub value: f64,
    pub side: Side,
    pub level: u32,
    /// Number of classes the supremum ranged over.
    pub candidates: usize,
}

impl TreeQuotient {
    pub fn new(depth: u32, killed: bool) -> Self {
        TreeQuotient { depth, killed }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        2 * (self.depth as usize + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, side: Side, level: u32) -> usize {
        assert!(level <= self.depth);
        let d = self.depth as usize;
        match side {
            Side::L => d - level as usize,
            Side::R => d + 1 + level as usize,
        }
    }

    pub fn class(&self, i: usize) -> (Side, u32) {
        let d = self.depth as usize;
        if i <= d {
            (Side::L, (d - i) as u32)
        } else {
            (Side::R, (i - d - 1) as u32)
        }
    }

    /// Number of sites in each class.
    pub fn class_size(level: u32) -> f64 {
        2f64.powi(level as i32)
    }

    /// Rows of I − P: (coefficient of u_{i−1}, diagonal, coefficient of u_{i+1}).
    fn system(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.len();
        let (mut lo, mut di, mut hi) = (vec![0.0; n], vec![1.0; n], vec![0.0; n]);
        for i in 0..n {
            let (side, level) = self.class(i);
            let (up, down) = (1.0 / 3.0, 2.0 / 3.0);
            // Toward the basis edge is i+1 on the left, i−1 on the right.
            let (toward, away) = match side {
                Side::L => (&mut hi, &mut lo),
                Side::R => (&mut lo, &mut hi),
            };
            toward[i] = -up;
            if level < self.depth {
                away[i] = -down;
            } else if !self.killed {
                di[i] -= down;
            }
        }
        (lo, di, hi)
    }

    /// Solves (I − P) u = b on the classes (Thomas algorithm).
    pub fn green_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if !self.killed {
            return Err(SepError::Recurrent);
        }
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let (lo, di, hi) = self.system();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = hi[0] / di[0];
        d[0] = rhs[0] / di[0];
        for i in 1..n {
            let m = di[i] - lo[i] * c[i - 1];
            c[i] = hi[i] / m;
            d[i] = (rhs[i] - lo[i] * d[i - 1]) / m;
        }
        let mut u = vec![0.0; n];
        u[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            u[i] = d[i] - c[i] * u[i + 1];
        }
        Ok(u)
    }

    /// Class indicator of a level window.
    pub fn window_rhs(&self, window: &SiteWindow) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| {
                let (s, l) = self.class(i);
                window
                    .contains_class(s, l)
                    .map(|b| if b { 1.0 } else { 0.0 })
                    .ok_or_else(|| SepError::invalid("quotient needs a level-defined window"))
            })
            .collect()
    }

    /// x ↦ Σ_{y∈window} G(x,y), one value per class.
    pub fn green_window(&self, window: &SiteWindow) -> Result<Vec<f64>> {
        self.green_solve(&self.window_rhs(window)?)
    }

    /// x ↦ G(x, l0) per class, where l0 is the left basis endpoint.
    pub fn green_to_left_endpoint(&self) -> Result<Vec<f64>> {
        let mut rhs = vec![0.0; self.len()];
        rhs[self.index(Side::L, 0)] = 1.0;
        self.green_solve(&rhs)
    }

    /// Supremum of the window Green sum over classes at least
    /// [`SUP_MARGIN`] levels inside the truncation.
    pub fn green_window_sup(&self, window: &SiteWindow) -> Result<ClassSup> {
        let u = self.green_window(window)?;
        let mut best: Option<ClassSup> = None;
        let mut candidates = 0;
        for (i, &v) in u.iter().enumerate() {
            let (side, level) = self.class(i);
            if level + SUP_MARGIN > self.depth {
                continue;
            }
            candidates += 1;
            if best.is_none_or(|b| v > b.value) {
                best = Some(ClassSup {
                    value: v,
                    side,
                    level,
                    candidates: 0,
                });
            }
        }
        let mut best = best.ok_or_else(|| {
            SepError::invalid(format!(
                "depth {} leaves no class {SUP_MARGIN} levels inside",
                self.depth
            ))
        })?;
        best.candidates = candidates;
        Ok(best)
    }

    /// Spreads class values onto the sites of a tree kernel of the same depth.
    pub fn lift(&self, kernel: &Kernel, values: &[f64]) -> Vec<f64> {
        (0..kernel.len())
            .map(|x| {
                let side = kernel.side(x).expect("lift needs a tree kernel");
                values[self.index(side, kernel.level(x))]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_binary_tree, green_solve, killed_truncation};

    #[test]
    fn quotient_matches_full_tree() {
        let depth = 7;
        let full = killed_truncation(&build_binary_tree(depth));
        let q = TreeQuotient::new(depth, true);
        for w in [
            SiteWindow::below_level(None, 3),
            SiteWindow::below_level(Some(Side::L), 4),
            SiteWindow::at_level(Some(Side::R), 2),
        ] {
            let direct = green_solve(&full, &w.indicator(&full), 1e-13).unwrap().values;
            let lumped = q.lift(&full, &q.green_window(&w).unwrap());
            for x in 0..full.len() {
                assert!((direct[x] - lumped[x]).abs() < 1e-10, "{w} at {x}");
            }
        }
    }

    #[test]
    fn stochastic_quotient_is_recurrent() {
        let q = TreeQuotient::new(4, false);
        assert!(matches!(q.green_to_left_endpoint(), Err(SepError::Recurrent)));
    }

    #[test]
    fn class_indexing_round_trips() {
        let q = TreeQuotient::new(5, true);
        for i in 0..q.len() {
            let (s, l) = q.class(i);
            assert_eq!(q.index(s, l), i);
        }
    }

    #[test]
    fn deep_green_to_endpoint() {
        let q = TreeQuotient::new(40, true);
        let g = q.green_to_left_endpoint().unwrap();
        for d in 0..=10u32 {
            let exact = 2f64.powi(1 - d as i32);
            assert!((g[q.index(Side::L, d)] - exact).abs() < 1e-9);
            if d >= 1 {
                assert!((g[q.index(Side::R, d - 1)] - exact).abs() < 1e-9);
            }
        }
    }
}
