//! Exact real-root counting over the rationals. Slow; used to cross-check
//! the floating verdict of [`super::real_rooted`] on exactly representable
//! inputs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Result, SepError};

type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn derivative(p: &Poly) -> Poly {
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
            .collect(),
    )
}

/// (quotient, remainder) of a / b, b nonzero.
fn div_rem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() <= db {
        return (Vec::new(), trim(r));
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let f = &r[k + db] / &lead;
        if !f.is_zero() {
            for (i, bc) in b.iter().enumerate() {
                r[k + i] -= &f * bc;
            }
        }
        q[k] = f;
    }
    r.truncate(db);
    (trim(q), trim(r))
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_empty() {
        let (_, r) = div_rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut prev = 0i8;
    let mut n = 0;
    for s in signs.filter(|&s| s != 0) {
        if prev != 0 && s != prev {
            n += 1;
        }
        prev = s;
    }
    n
}

fn sgn(c: &BigRational) -> i8 {
    if c.is_positive() {
        1
    } else if c.is_negative() {
        -1
    } else {
        0
    }
}

/// Number of distinct real roots of a nonzero polynomial (low-to-high
/// coefficients).
pub fn distinct_real_roots(p: &[BigRational]) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let mut seq = vec![p.clone(), derivative(&p)];
    loop {
        let k = seq.len();
        if seq[k - 1].is_empty() {
            seq.pop();
            break;
        }
        let (_, r) = div_rem(&seq[k - 2], &seq[k - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    let at_pos = seq.iter().map(|s| sgn(s.last().expect("nonempty")));
    let at_neg = seq.iter().map(|s| {
        let l = sgn(s.last().expect("nonempty"));
        if (s.len() - 1) % 2 == 1 {
            -l
        } else {
            l
        }
    });
    sign_changes(at_neg) - sign_changes(at_pos)
}

/// Exact real-rootedness of the polynomial whose coefficients are the given
/// doubles read as exact binary rationals.
pub fn is_real_rooted_exact(coeffs: &[f64]) -> Result<bool> {
    let p: Poly = coeffs
        .iter()
        .map(|&c| BigRational::from_float(c).ok_or_else(|| SepError::invalid("non-finite coefficient")))
        .collect::<Result<_>>()?;
    let p = trim(p);
    if p.is_empty() {
        return Err(SepError::ZeroPolynomial);
    }
    let g = gcd(&p, &derivative(&p));
    let square_free = if g.len() <= 1 { p } else { div_rem(&p, &g).0 };
    Ok(distinct_real_roots(&square_free) == square_free.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_examples() {
        assert!(is_real_rooted_exact(&[0.25, 0.5, 0.25]).unwrap());
        assert!(!is_real_rooted_exact(&[0.5, 0.0, 0.5]).unwrap());
        assert!(!is_real_rooted_exact(&[0.3, 0.4, 0.3]).unwrap());
        assert!(is_real_rooted_exact(&[0.0, 1.0, 0.0]).unwrap());
        // (1+w)^3 (1+w^2)
        assert!(!is_real_rooted_exact(&[1.0, 3.0, 4.0, 4.0, 3.0, 1.0]).unwrap());
        // (w − 1)^2 (w + 2)
        assert!(is_real_rooted_exact(&[2.0, -3.0, 0.0, 1.0]).unwrap());
    }

    #[test]
    fn counts_distinct_roots() {
        let q = |v: &[i64]| -> Vec<BigRational> { v.iter().map(|&c| BigRational::from_integer(c.into())).collect() };
        // (w−1)(w−2)(w−3)
        assert_eq!(distinct_real_roots(&q(&[-6, 11, -6, 1])), 3);
        assert_eq!(distinct_real_roots(&q(&[1, 0, 1])), 0);
    }
}
