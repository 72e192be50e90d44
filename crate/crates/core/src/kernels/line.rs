use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Geometry, Kernel, KernelParts};
use crate::error::{Result, SepError};

/// Symmetric jump law p(n) = p(−n) on the integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpLaw {
    /// Nonzero steps only; the zero step lives in `stay`.
    steps: BTreeMap<i64, f64>,
    stay: f64,
    /// Mass of steps beyond the truncation radius folded into `stay`.
    tail_mass: f64,
}

impl JumpLaw {
    /// Validates symmetry and normalization of an explicit finite law.
    pub fn new(law: &BTreeMap<i64, f64>) -> Result<Self> {
        let mut steps = BTreeMap::new();
        let mut stay = 0.0;
        let mut total = 0.0;
        for (&n, &p) in law {
            if !(p >= 0.0 && p.is_finite()) {
                return Err(SepError::invalid(format!("p({n}) = {p} is not a probability")));
            }
            total += p;
            if n == 0 {
                stay += p;
            } else if p > 0.0 {
                let mirror = law.get(&-n).copied().unwrap_or(0.0);
                if mirror != p {
                    return Err(SepError::invalid(format!(
                        "jump law is asymmetric: p({n}) = {p} but p({}) = {mirror}",
                        -n
                    )));
                }
                steps.insert(n, p);
            }
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(SepError::invalid(format!("jump law sums to {total}, not 1")));
        }
        Ok(JumpLaw {
            steps,
            stay,
            tail_mass: 0.0,
        })
    }

    /// Nearest-neighbour simple random walk, p(±1) = 1/2.
    pub fn simple() -> Self {
        JumpLaw {
            steps: BTreeMap::from([(-1, 0.5), (1, 0.5)]),
            stay: 0.0,
            tail_mass: 0.0,
        }
    }

    /// Truncates an infinite-support law `p(n)` (evaluated for n ≥ 1 and
    /// mirrored) at `max_step`; the mass beyond is converted to holding and
    /// reported as `tail_mass`.
    pub fn truncated(p: impl Fn(u64) -> f64, max_step: u64) -> Result<Self> {
        let mut steps = BTreeMap::new();
        let mut kept = 0.0;
        for n in 1..=max_step {
            let q = p(n);
            if !(q >= 0.0 && q.is_finite()) {
                return Err(SepError::invalid(format!("p({n}) = {q} is not a probability")));
            }
            if q > 0.0 {
                steps.insert(n as i64, q);
                steps.insert(-(n as i64), q);
                kept += 2.0 * q;
            }
        }
        let stay0 = p(0);
        if kept + stay0 > 1.0 + 1e-12 {
            return Err(SepError::invalid("truncated law already exceeds total mass 1"));
        }
        let tail_mass = (1.0 - kept - stay0).max(0.0);
        Ok(JumpLaw {
            steps,
            stay: stay0 + tail_mass,
            tail_mass,
        })
    }

    pub fn p(&self, n: i64) -> f64 {
        if n == 0 {
            self.stay
        } else {
            self.steps.get(&n).copied().unwrap_or(0.0)
        }
    }

    pub fn steps(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.steps.iter().map(|(&n, &p)| (n, p))
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// σ² = Σ n² p(n) of the law actually simulated (after truncation).
    pub fn sigma2(&self) -> f64 {
        self.steps.iter().map(|(&n, &p)| (n * n) as f64 * p).sum()
    }

    pub fn max_step(&self) -> i64 {
        self.steps.keys().next_back().copied().unwrap_or(0)
    }
}

/// Integer line on −radius..=radius with translation-invariant jumps;
/// mass that would leave the window is held at the departure site.
pub fn build_line(radius: u32, law: &JumpLaw) -> Result<Kernel> {
    if radius == 0 {
        return Err(SepError::invalid("line radius must be positive"));
    }
    let r = radius as i64;
    let n = (2 * r + 1) as usize;
    let mut rows = vec![Vec::new(); n];
    let mut holding = vec![law.stay; n];
    let mut escape = vec![0.0; n];
    for (i, row) in rows.iter_mut().enumerate() {
        let x = i as i64 - r;
        for (step, p) in law.steps() {
            let y = x + step;
            if y.abs() <= r {
                row.push(((y + r) as u32, p));
            } else {
                holding[i] += p;
                escape[i] += p;
            }
        }
    }
    Ok(Kernel::from_parts(KernelParts {
        geometry: Geometry::Line {
            radius,
            law: law.clone(),
        },
        levels: (0..n).map(|i| (i as i64 - r).unsigned_abs() as u32).collect(),
        sides: Vec::new(),
        coords: (-r..=r).collect(),
        parents: Vec::new(),
        rows,
        holding,
        escape,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_one_simple_walk() {
        let k = build_line(1, &JumpLaw::simple()).unwrap();
        assert_eq!(k.len(), 3);
        assert_eq!(k.p(1, 0), 0.5);
        assert_eq!(k.p(1, 2), 0.5);
        assert_eq!(k.holding(0), 0.5);
        assert_eq!(k.holding(2), 0.5);
        assert_eq!(k.holding(1), 0.0);
    }

    #[test]
    fn interior_rows_of_simple_walk() {
        let k = build_line(5, &JumpLaw::simple()).unwrap();
        let mid = k.site_at_coord(0).unwrap();
        let row: Vec<f64> = (0..k.len()).map(|y| k.p(mid, y)).collect();
        let mut expected = vec![0.0; 11];
        expected[4] = 0.5;
        expected[6] = 0.5;
        assert_eq!(row, expected);
    }

    #[test]
    fn two_step_law() {
        let law = JumpLaw::new(&BTreeMap::from([(-2, 0.25), (-1, 0.25), (1, 0.25), (2, 0.25)])).unwrap();
        let k = build_line(2, &law).unwrap();
        let row: Vec<f64> = (0..5).map(|y| k.p(2, y)).collect();
        assert_eq!(row, vec![0.25, 0.25, 0.0, 0.25, 0.25]);
        assert!((law.sigma2() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_law_rejected() {
        let law = BTreeMap::from([(-1, 0.4), (1, 0.6)]);
        assert!(JumpLaw::new(&law).is_err());
    }

    #[test]
    fn truncated_law_reports_tail() {
        // p(n) ∝ 2^{-n} on each side: Σ_{n≥1} 2·(1/2)·2^{-n} = 1.
        let law = JumpLaw::truncated(|n| if n == 0 { 0.0 } else { 0.5f64.powi(n as i32 + 1) }, 10).unwrap();
        assert!((law.tail_mass() - 0.5f64.powi(10)).abs() < 1e-15);
        assert!((law.p(0) - law.tail_mass()).abs() < 1e-15);
    }
}
