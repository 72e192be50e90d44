use serde::{Deserialize, Serialize};

use super::{green_solve, Geometry, Kernel, Side};
use crate::error::{Result, SepError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProfileShape {
    /// α(x) = λ + (ρ−λ)/(3·2^{l(x)}) on L, ρ + (λ−ρ)/(3·2^{l(x)}) on R.
    Tree,
    /// Linear interpolation from λ at −(radius+1) to ρ at radius+1, clamped
    /// outside. Harmonic for every symmetric jump law away from the ends.
    Linear { radius: u32 },
}

/// A harmonic profile α: S → [0,1] parametrized by its two limiting values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicProfile {
    pub lambda: f64,
    pub rho: f64,
    pub shape: ProfileShape,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SepError::invalid(format!("{name} = {v} is outside [0,1]")))
    }
}

/// The two-parameter harmonic family on the binary tree.
pub fn tree_alpha(lambda: f64, rho: f64) -> Result<HarmonicProfile> {
    check_unit("lambda", lambda)?;
    check_unit("rho", rho)?;
    Ok(HarmonicProfile {
        lambda,
        rho,
        shape: ProfileShape::Tree,
    })
}

/// Linear profile on a line of the given radius.
pub fn line_alpha(lambda: f64, rho: f64, radius: u32) -> Result<HarmonicProfile> {
    check_unit("lambda", lambda)?;
    check_unit("rho", rho)?;
    Ok(HarmonicProfile {
        lambda,
        rho,
        shape: ProfileShape::Linear { radius },
    })
}

impl HarmonicProfile {
    pub fn tree_value(&self, side: Side, level: u32) -> f64 {
        let decay = 1.0 / (3.0 * 2f64.powi(level as i32));
        match side {
            Side::L => self.lambda + (self.rho - self.lambda) * decay,
            Side::R => self.rho + (self.lambda - self.rho) * decay,
        }
    }

    pub fn line_value(&self, coord: i64) -> f64 {
        let ProfileShape::Linear { radius } = self.shape else {
            panic!("line_value on a tree profile");
        };
        let span = 2.0 * (radius as f64 + 1.0);
        let s = ((coord as f64 + radius as f64 + 1.0) / span).clamp(0.0, 1.0);
        self.lambda + (self.rho - self.lambda) * s
    }

    /// α at site `x` of `kernel`.
    pub fn at(&self, kernel: &Kernel, x: usize) -> f64 {
        match self.shape {
            ProfileShape::Tree => self.tree_value(
                kernel.side(x).expect("tree profile needs tree metadata"),
                kernel.level(x),
            ),
            ProfileShape::Linear { .. } => self.line_value(kernel.coord(x).expect("line profile needs coordinates")),
        }
    }

    pub fn values(&self, kernel: &Kernel) -> Vec<f64> {
        (0..kernel.len()).map(|x| self.at(kernel, x)).collect()
    }

    /// Reservoirs that make α exactly stationary for the open system on a
    /// killed truncation: rate = killed mass, density = α averaged over the
    /// sites the walker would have jumped to.
    ///
    /// A linear profile is clamped to [λ, ρ] beyond ±(radius + 1), so on a
    /// line whose law reaches further than one step past the truncation the
    /// result is not exactly stationary; build α with `harmonic_extension`
    /// there instead.
    pub fn open_boundary(&self, kernel: &Kernel) -> OpenBoundary {
        let n = kernel.len();
        let mut density = vec![0.0; n];
        for (x, d) in density.iter_mut().enumerate() {
            let e = kernel.escape(x);
            if e == 0.0 {
                continue;
            }
            *d = match (self.shape, kernel.geometry()) {
                (ProfileShape::Tree, _) => self.tree_value(kernel.side(x).expect("tree metadata"), kernel.level(x) + 1),
                (ProfileShape::Linear { .. }, Geometry::Line { radius, law }) => {
                    let c = kernel.coord(x).expect("line metadata");
                    let r = *radius as i64;
                    let mut acc = 0.0;
                    for (step, p) in law.steps() {
                        if (c + step).abs() > r {
                            acc += p * self.line_value(c + step);
                        }
                    }
                    acc / e
                }
                _ => panic!("linear profile on a non-line kernel"),
            };
        }
        OpenBoundary {
            rate: (0..n).map(|x| kernel.escape(x)).collect(),
            density,
        }
    }
}

/// Particle reservoirs attached to boundary sites: at rate `rate[x]` the
/// occupancy of x is resampled from Bernoulli(`density[x]`). Dual walkers are
/// killed at the same rate and read the reservoir density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenBoundary {
    pub rate: Vec<f64>,
    pub density: Vec<f64>,
}

impl OpenBoundary {
    /// No reservoirs.
    pub fn closed(n: usize) -> Self {
        OpenBoundary {
            rate: vec![0.0; n],
            density: vec![0.0; n],
        }
    }

    /// Reservoir sites with positive rate.
    pub fn sites(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.rate
            .iter()
            .zip(&self.density)
            .enumerate()
            .filter(|(_, (r, _))| **r > 0.0)
            .map(|(x, (&r, &d))| (x, r, d))
    }

    pub fn is_closed(&self) -> bool {
        self.rate.iter().all(|&r| r == 0.0)
    }

    pub fn total_rate(&self) -> f64 {
        self.rate.iter().sum()
    }
}

/// Solves (I − P) α = κ·β on a killed kernel: the profile that is harmonic
/// at every site once the killed mass is read as jumping to a reservoir of
/// density β.
pub fn harmonic_extension(kernel: &Kernel, boundary: &OpenBoundary, tol: f64) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = (0..kernel.len())
        .map(|x| kernel.deficit(x) * boundary.density[x])
        .collect();
    Ok(green_solve(kernel, &rhs, tol)?.values)
}

/// max over interior x of |Σ_y p(x,y)α(y) − α(x)|.
pub fn harmonicity_residual(kernel: &Kernel, alpha: &[f64]) -> f64 {
    assert_eq!(alpha.len(), kernel.len());
    let mut worst = 0.0f64;
    for x in 0..kernel.len() {
        if !kernel.is_interior(x) {
            continue;
        }
        let mut acc = kernel.holding(x) * alpha[x];
        for (y, p) in kernel.neighbors(x) {
            acc += p * alpha[y];
        }
        worst = worst.max((acc - alpha[x]).abs());
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct DirichletSum {
    pub value: f64,
    /// Contribution of edges whose lower endpoint sits at each level.
    pub per_level: Vec<f64>,
    /// First level from which every per-level contribution is below 1e-12.
    pub tail_level: Option<u32>,
}

/// Φ(α) = Σ_{x,y} p(x,y)[α(y) − α(x)]² over ordered pairs of the truncation.
pub fn dirichlet_sum(kernel: &Kernel, alpha: &[f64]) -> DirichletSum {
    assert_eq!(alpha.len(), kernel.len());
    let mut per_level: Vec<f64> = Vec::new();
    let mut value = 0.0;
    for x in 0..kernel.len() {
        for (y, p) in kernel.neighbors(x) {
            let d = alpha[y] - alpha[x];
            let c = p * d * d;
            value += c;
            let l = kernel.level(x).min(kernel.level(y)) as usize;
            if per_level.len() <= l {
                per_level.resize(l + 1, 0.0);
            }
            per_level[l] += c;
        }
    }
    let tail_level = (0..per_level.len())
        .find(|&l| per_level[l..].iter().all(|&c| c < 1e-12))
        .map(|l| l as u32);
    DirichletSum {
        value,
        per_level,
        tail_level,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_binary_tree, build_line, killed_truncation, JumpLaw};

    #[test]
    fn tree_alpha_at_left_endpoint() {
        let a = tree_alpha(0.0, 1.0).unwrap();
        assert!((a.tree_value(Side::L, 0) - 1.0 / 3.0).abs() < 1e-16);
        // Neighbours of the left endpoint: right endpoint 2/3, two children 1/6.
        let avg = (a.tree_value(Side::R, 0) + 2.0 * a.tree_value(Side::L, 1)) / 3.0;
        assert!((avg - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn constant_profile() {
        let a = tree_alpha(0.4, 0.4).unwrap();
        let k = build_binary_tree(4);
        let v = a.values(&k);
        assert!(v.iter().all(|&x| x == 0.4));
        assert_eq!(harmonicity_residual(&k, &v), 0.0);
        assert_eq!(dirichlet_sum(&k, &v).value, 0.0);
    }

    #[test]
    fn tree_alpha_is_harmonic_inside() {
        let k = build_binary_tree(8);
        let v = tree_alpha(0.2, 0.9).unwrap().values(&k);
        assert!(harmonicity_residual(&k, &v) <= 1e-12);
    }

    #[test]
    fn indicator_is_far_from_harmonic() {
        let k = build_binary_tree(4);
        let mut v = vec![0.0; k.len()];
        let x = 2; // a level-1 vertex; its neighbour 0 is interior
        v[x] = 1.0;
        let r = harmonicity_residual(&k, &v);
        assert!(r >= 1.0 / 3.0);
    }

    #[test]
    fn dirichlet_sum_tree_and_mirror() {
        let k = build_binary_tree(22);
        let a = tree_alpha(0.0, 1.0).unwrap().values(&k);
        let d = dirichlet_sum(&k, &a);
        assert!((d.value - 2.0 / 9.0).abs() < 1e-6);
        assert!(d.tail_level.is_none(), "depth 22 contributions stay above 1e-12");
        let b = tree_alpha(1.0, 0.0).unwrap().values(&k);
        assert!((dirichlet_sum(&k, &b).value - d.value).abs() < 1e-15);
    }

    #[test]
    fn harmonic_extension_reproduces_tree_alpha() {
        let k = killed_truncation(&build_binary_tree(7));
        let prof = tree_alpha(0.1, 0.8).unwrap();
        let ob = prof.open_boundary(&k);
        let ext = harmonic_extension(&k, &ob, 1e-13).unwrap();
        let direct = prof.values(&k);
        for x in 0..k.len() {
            assert!((ext[x] - direct[x]).abs() < 1e-11);
        }
    }

    #[test]
    fn harmonic_extension_on_line_is_linear() {
        let k = killed_truncation(&build_line(4, &JumpLaw::simple()).unwrap());
        let prof = line_alpha(0.0, 1.0, 4).unwrap();
        let ob = prof.open_boundary(&k);
        assert_eq!(ob.density[0], 0.0);
        assert_eq!(ob.density[8], 1.0);
        let ext = harmonic_extension(&k, &ob, 1e-13).unwrap();
        for (x, v) in ext.iter().enumerate() {
            assert!((v - prof.at(&k, x)).abs() < 1e-11);
        }
    }
}
