use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SepError};

/// h(z,w) = a + b z + c w + d z w.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficients {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl PairCoefficients {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        PairCoefficients { a, b, c, d }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        let r = |x| Complex64::new(x, 0.0);
        Self::new(r(a), r(b), r(c), r(d))
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.a + self.b * z + self.c * w + self.d * z * w
    }

    pub fn is_zero(&self) -> bool {
        [self.a, self.b, self.c, self.d]
            .iter()
            .all(|v| *v == Complex64::new(0.0, 0.0))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Smallest slack lies within `margin_tol` of zero; the floating verdict
    /// is sign-unstable there.
    pub boundary: bool,
    /// [Re(b c̄ − a d̄) − |bc − ad|, Im(a b̄), Im(a c̄), Im(b d̄), Im(c d̄)].
    pub slacks: [f64; 5],
}

impl StabilityReport {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Exact stability criterion for a two-variable multi-affine polynomial:
/// h has no zero with both Im z > 0 and Im w > 0 iff all five slacks are
/// nonnegative.
pub fn pair_stability(pc: &PairCoefficients, margin_tol: f64) -> Result<StabilityReport> {
    if pc.is_zero() {
        return Err(SepError::invalid("all four coefficients are zero"));
    }
    let PairCoefficients { a, b, c, d } = *pc;
    let slacks = [
        (b * c.conj() - a * d.conj()).re - (b * c - a * d).norm(),
        (a * b.conj()).im,
        (a * c.conj()).im,
        (b * d.conj()).im,
        (c * d.conj()).im,
    ];
    let min = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(StabilityReport {
        stable: min >= -margin_tol,
        boundary: min.abs() <= margin_tol,
        slacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = pair_stability(&PairCoefficients::real(0.0, 0.0, 0.0, 1.0), 1e-12).unwrap();
        assert!(r.stable);
        assert_eq!(r.slacks, [0.0; 5]);
        let r = pair_stability(&PairCoefficients::real(0.0, 1.0, -1.0, 0.0), 1e-12).unwrap();
        assert!(!r.stable);
        assert_eq!(r.slacks[0], -2.0);
        let r = pair_stability(&PairCoefficients::real(1.0, 0.0, 0.0, 1.0), 1e-12).unwrap();
        assert!(!r.stable);
        assert_eq!(r.slacks[0], -2.0);
        assert!(pair_stability(&PairCoefficients::real(0.0, 0.0, 0.0, 0.0), 1e-12).is_err());
    }

    #[test]
    fn real_stable_product() {
        // (z + 1)(w + 2) = 2 + 2z + w + zw
        let r = pair_stability(&PairCoefficients::real(2.0, 2.0, 1.0, 1.0), 1e-12).unwrap();
        assert!(r.stable);
        assert!(r.boundary, "real coefficients sit on the Im = 0 faces");
    }
}
