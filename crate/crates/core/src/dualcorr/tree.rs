use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Result, SepError};
use crate::kernels::{HarmonicProfile, ProfileShape, Side, SiteWindow};

const UP: f64 = 1.0 / 3.0;
const DOWN: f64 = 2.0 / 3.0;

/// Orbit of an ordered pair of distinct tree sites under the automorphisms
/// that fix the basis edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum PairClass {
    /// Both on `side`; `meet` is the level of their closest common ancestor.
    Same { side: Side, lx: u32, ly: u32, meet: u32 },
    /// x on `sx`, y on the other side.
    Cross { sx: Side, lx: u32, ly: u32 },
}

impl PairClass {
    /// log₂ of the number of ordered pairs in the class.
    fn log_size(self) -> u32 {
        match self {
            PairClass::Same { lx, ly, meet, .. } if meet < lx && meet < ly => lx + ly - meet - 1,
            PairClass::Same { lx, ly, .. } => lx.max(ly),
            PairClass::Cross { lx, ly, .. } => lx + ly,
        }
    }

    fn sides(self) -> (Side, Side) {
        match self {
            PairClass::Same { side, .. } => (side, side),
            PairClass::Cross { sx, .. } => (sx, sx.other()),
        }
    }

    fn levels(self) -> (u32, u32) {
        match self {
            PairClass::Same { lx, ly, .. } | PairClass::Cross { lx, ly, .. } => (lx, ly),
        }
    }

    fn adjacent(self) -> bool {
        match self {
            PairClass::Same { lx, ly, meet, .. } => lx.abs_diff(ly) == 1 && meet == lx.min(ly),
            PairClass::Cross { lx, ly, .. } => lx == 0 && ly == 0,
        }
    }

    /// Exclusion-pair moves out of the class; `None` is death at the leaves.
    /// A jump onto the partner is an edge swap, counted once from x's side.
    fn moves(self, depth: u32) -> Vec<(Option<PairClass>, f64)> {
        use PairClass::*;
        let mut out = Vec::with_capacity(6);
        let down = |l: u32, c: PairClass| if l < depth { Some(c) } else { None };
        match self {
            Same { side, lx, ly, meet } if meet < lx && meet < ly => {
                let m = meet;
                out.push((
                    Some(Same {
                        side,
                        lx: lx - 1,
                        ly,
                        meet: m,
                    }),
                    UP,
                ));
                out.push((
                    down(
                        lx,
                        Same {
                            side,
                            lx: lx + 1,
                            ly,
                            meet: m,
                        },
                    ),
                    DOWN,
                ));
                out.push((
                    Some(Same {
                        side,
                        lx,
                        ly: ly - 1,
                        meet: m,
                    }),
                    UP,
                ));
                out.push((
                    down(
                        ly,
                        Same {
                            side,
                            lx,
                            ly: ly + 1,
                            meet: m,
                        },
                    ),
                    DOWN,
                ));
            }
            Same { side, lx, ly, meet } if meet == lx => {
                // x is an ancestor of y.
                let up = if lx >= 1 {
                    Same {
                        side,
                        lx: lx - 1,
                        ly,
                        meet: lx - 1,
                    }
                } else {
                    Cross {
                        sx: side.other(),
                        lx: 0,
                        ly,
                    }
                };
                out.push((Some(up), UP));
                let toward = if ly == lx + 1 {
                    Same {
                        side,
                        lx: ly,
                        ly: lx,
                        meet: lx,
                    }
                } else {
                    Same {
                        side,
                        lx: lx + 1,
                        ly,
                        meet: lx + 1,
                    }
                };
                out.push((Some(toward), UP));
                out.push((
                    Some(Same {
                        side,
                        lx: lx + 1,
                        ly,
                        meet: lx,
                    }),
                    UP,
                ));
                if ly > lx + 1 {
                    out.push((
                        Some(Same {
                            side,
                            lx,
                            ly: ly - 1,
                            meet: lx,
                        }),
                        UP,
                    ));
                }
                out.push((
                    down(
                        ly,
                        Same {
                            side,
                            lx,
                            ly: ly + 1,
                            meet: lx,
                        },
                    ),
                    DOWN,
                ));
            }
            Same { side, lx, ly, .. } => {
                // y is an ancestor of x.
                let up = if ly >= 1 {
                    Same {
                        side,
                        lx,
                        ly: ly - 1,
                        meet: ly - 1,
                    }
                } else {
                    Cross { sx: side, lx, ly: 0 }
                };
                out.push((Some(up), UP));
                if lx > ly + 1 {
                    out.push((
                        Some(Same {
                            side,
                            lx,
                            ly: ly + 1,
                            meet: ly + 1,
                        }),
                        UP,
                    ));
                }
                out.push((
                    Some(Same {
                        side,
                        lx,
                        ly: ly + 1,
                        meet: ly,
                    }),
                    UP,
                ));
                let x_up = if lx == ly + 1 {
                    Same {
                        side,
                        lx: ly,
                        ly: lx,
                        meet: ly,
                    }
                } else {
                    Same {
                        side,
                        lx: lx - 1,
                        ly,
                        meet: ly,
                    }
                };
                out.push((Some(x_up), UP));
                out.push((
                    down(
                        lx,
                        Same {
                            side,
                            lx: lx + 1,
                            ly,
                            meet: ly,
                        },
                    ),
                    DOWN,
                ));
            }
            Cross { sx, lx, ly } => {
                let sy = sx.other();
                let x_up = if lx >= 1 {
                    Cross { sx, lx: lx - 1, ly }
                } else if ly == 0 {
                    Cross { sx: sy, lx: 0, ly: 0 }
                } else {
                    Same {
                        side: sy,
                        lx: 0,
                        ly,
                        meet: 0,
                    }
                };
                out.push((Some(x_up), UP));
                out.push((down(lx, Cross { sx, lx: lx + 1, ly }), DOWN));
                if ly >= 1 {
                    out.push((Some(Cross { sx, lx, ly: ly - 1 }), UP));
                } else if lx > 0 {
                    out.push((
                        Some(Same {
                            side: sx,
                            lx,
                            ly: 0,
                            meet: 0,
                        }),
                        UP,
                    ));
                }
                out.push((down(ly, Cross { sx, lx, ly: ly + 1 }), DOWN));
            }
        }
        out
    }
}

/// The killed exclusion pair on a depth-D binary tree, lumped onto pair
/// orbits. Class-invariant pair functions stay class-invariant under V, so
/// Green sums against window indicators reduce to O(D³) states.
#[derive(Debug, Clone)]
pub struct TreePairChain {
    depth: u32,
    classes: Vec<PairClass>,
    /// Symmetrized −V: rows of (column, value), diagonal first.
    rows: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeWindowVariance {
    pub window: String,
    pub depth: u32,
    pub sites: f64,
    /// Σ_{x∈W} α(x)(1 − α(x)).
    pub independent: f64,
    /// Σ_{x≠y∈W} −Cov(η(x), η(y)).
    pub neg_covariance: f64,
    pub variance: f64,
    pub ratio: f64,
    pub cg_iterations: usize,
    pub cg_residual: f64,
}

impl TreePairChain {
    pub fn new(depth: u32) -> Self {
        let mut classes = Vec::new();
        for side in [Side::L, Side::R] {
            for lx in 0..=depth {
                for ly in 0..=depth {
                    classes.push(PairClass::Cross { sx: side, lx, ly });
                    for meet in 0..=lx.min(ly) {
                        if meet == lx && meet == ly {
                            continue;
                        }
                        classes.push(PairClass::Same { side, lx, ly, meet });
                    }
                }
            }
        }
        let index: HashMap<PairClass, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let half = |c: PairClass| 2f64.powf(c.log_size() as f64 / 2.0);
        let rows = classes
            .iter()
            .map(|&c| {
                let moves = c.moves(depth);
                let exit: f64 = moves.iter().map(|m| m.1).sum();
                let mut row = vec![(index[&c], exit)];
                for (to, rate) in moves {
                    let Some(to) = to else { continue };
                    let j = index[&to];
                    let v = -rate * half(c) / half(to);
                    match row.iter_mut().find(|e| e.0 == j) {
                        Some(e) => e.1 += v,
                        None => row.push((j, v)),
                    }
                }
                row
            })
            .collect();
        TreePairChain { depth, classes, rows }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, a)| a * v[j]).sum();
        }
    }

    /// Solves the symmetrized system by conjugate gradients.
    fn solve(&self, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, usize, f64)> {
        let n = self.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut u = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut ap = vec![0.0; n];
        let mut rr = dot(&r, &r);
        let stop = (tol * dot(rhs, rhs).sqrt()).powi(2);
        let mut it = 0;
        while rr > stop {
            if it >= 20 * n {
                return Err(SepError::NoConvergence(format!(
                    "pair chain CG: residual {:e} after {it} iterations",
                    rr.sqrt()
                )));
            }
            self.apply(&p, &mut ap);
            let a = rr / dot(&p, &ap);
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
            it += 1;
        }
        Ok((u, it, rr.sqrt()))
    }

    /// Var(Σ_{x∈W} η(x)) under the stationary measure of the open tree whose
    /// one-point function is the tree profile, for a level-defined window.
    pub fn window_variance(
        &self,
        profile: &HarmonicProfile,
        window: &SiteWindow,
        tol: f64,
    ) -> Result<TreeWindowVariance> {
        if profile.shape != ProfileShape::Tree {
            return Err(SepError::invalid("pair chain needs a tree profile"));
        }
        let inside = |s: Side, l: u32| -> Result<bool> {
            window
                .contains_class(s, l)
                .ok_or_else(|| SepError::invalid("pair chain needs a level-defined window"))
        };
        let (mut sites, mut independent) = (0.0, 0.0);
        for s in [Side::L, Side::R] {
            for l in 0..=self.depth {
                if inside(s, l)? {
                    let a = profile.tree_value(s, l);
                    sites += 2f64.powi(l as i32);
                    independent += 2f64.powi(l as i32) * a * (1.0 - a);
                }
            }
        }
        if independent == 0.0 {
            return Err(SepError::invalid("α is 0 or 1 throughout the window"));
        }
        let half: Vec<f64> = self
            .classes
            .iter()
            .map(|c| 2f64.powf(c.log_size() as f64 / 2.0))
            .collect();
        let mut rhs = vec![0.0; self.len()];
        for (i, c) in self.classes.iter().enumerate() {
            let (sx, sy) = c.sides();
            let (lx, ly) = c.levels();
            if inside(sx, lx)? && inside(sy, ly)? {
                rhs[i] = half[i];
            }
        }
        let (h, iterations, residual) = self.solve(&rhs, tol)?;
        let mut neg = 0.0;
        for (i, c) in self.classes.iter().enumerate() {
            if !c.adjacent() {
                continue;
            }
            let (sx, sy) = c.sides();
            let (lx, ly) = c.levels();
            let d = profile.tree_value(sx, lx) - profile.tree_value(sy, ly);
            neg += half[i] * UP * d * d * h[i];
        }
        Ok(TreeWindowVariance {
            window: window.to_string(),
            depth: self.depth,
            sites,
            independent,
            neg_covariance: neg,
            variance: independent - neg,
            ratio: (independent - neg) / independent,
            cg_iterations: iterations,
            cg_residual: residual,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinedConstant {
    pub value: f64,
    /// Geometric estimate of the levels beyond the cap, included in `value`.
    pub tail: f64,
    pub levels: u32,
}

/// Σ over ordered neighbours [α(x) − α(y)]²[1 − α(x)][1 − α(y)] for the
/// tree profile, summed level by level.
pub fn tree_refined_constant(lambda: f64, rho: f64, level_cap: u32) -> RefinedConstant {
    let a = |s: Side, l: u32| -> f64 {
        let decay = 1.0 / (3.0 * 2f64.powi(l as i32));
        match s {
            Side::L => lambda + (rho - lambda) * decay,
            Side::R => rho + (lambda - rho) * decay,
        }
    };
    let edge = |u: f64, v: f64| (u - v).powi(2) * (1.0 - u) * (1.0 - v);
    let mut sum = edge(a(Side::L, 0), a(Side::R, 0));
    let mut last = 0.0;
    for n in 1..=level_cap {
        last = 2f64.powi(n as i32) * (edge(a(Side::L, n), a(Side::L, n - 1)) + edge(a(Side::R, n), a(Side::R, n - 1)));
        sum += last;
    }
    // Level terms shrink by a factor 2 once 2^{-n} is small.
    let tail = if level_cap >= 1 { last } else { 0.0 };
    RefinedConstant {
        value: 2.0 * (sum + tail),
        tail: 2.0 * tail,
        levels: level_cap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dualcorr::{dual_integral, PairField};
    use crate::kernels::{build_binary_tree, killed_truncation, tree_alpha};

    #[test]
    fn class_sizes_cover_all_pairs() {
        for depth in 0..6u32 {
            let chain = TreePairChain::new(depth);
            let total: f64 = chain.classes.iter().map(|c| 2f64.powi(c.log_size() as i32)).sum();
            let n = 2f64.powi(depth as i32 + 2) - 2.0;
            assert_eq!(total, n * (n - 1.0), "depth {depth}");
        }
    }

    #[test]
    fn lumped_chain_is_reversible_for_counting_measure() {
        let chain = TreePairChain::new(5);
        for (i, row) in chain.rows.iter().enumerate() {
            for &(j, v) in &row[1..] {
                let back = chain.rows[j].iter().find(|e| e.0 == i).map(|e| e.1);
                assert_eq!(back.map(|b| (b - v).abs() < 1e-14), Some(true), "{i}->{j}");
            }
        }
    }

    #[test]
    fn lumped_matches_explicit_pair_space() {
        let depth = 4;
        let kernel = killed_truncation(&build_binary_tree(depth));
        let prof = tree_alpha(0.0, 1.0).unwrap();
        let alpha = prof.values(&kernel);
        let field: PairField = dual_integral(&kernel, &alpha, 1e-12).unwrap().field;
        let chain = TreePairChain::new(depth);
        for w in [
            SiteWindow::below_level(Some(Side::L), 3),
            SiteWindow::below_level(None, 2),
            SiteWindow::at_level(Some(Side::R), 1),
        ] {
            let members = w.members(&kernel);
            let mut direct = 0.0;
            for &x in &members {
                for &y in &members {
                    if x != y {
                        direct += field.get(x, y);
                    }
                }
            }
            let lumped = chain.window_variance(&prof, &w, 1e-13).unwrap();
            assert!(
                (lumped.neg_covariance - direct).abs() < 1e-9,
                "{w}: {} vs {direct}",
                lumped.neg_covariance
            );
        }
    }

    #[test]
    fn refined_constant_values() {
        let r = tree_refined_constant(0.0, 1.0, 30);
        assert!((r.value - 40.0 / 189.0).abs() < 1e-8);
        assert!(r.value < 1.0 / 3.0);
        assert_eq!(tree_refined_constant(0.6, 0.6, 30).value, 0.0);
    }
}
