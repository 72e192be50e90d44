//! Stability of a + bz + cw + dzw for a few coefficient sets.
use num_complex::Complex64;
use sepkit::genpoly::{pair_stability, PairCoefficients};

fn main() -> sepkit::Result<()> {
    let i = Complex64::new(0.0, 1.0);
    let cases = [
        ("1 + z + w", PairCoefficients::real(1.0, 1.0, 1.0, 0.0)),
        ("1 - zw", PairCoefficients::real(1.0, 0.0, 0.0, -1.0)),
        ("1 + zw", PairCoefficients::real(1.0, 0.0, 0.0, 1.0)),
        (
            "i + z + w",
            PairCoefficients::new(i, 1.0.into(), 1.0.into(), 0.0.into()),
        ),
        (
            "-i + z + w",
            PairCoefficients::new(-i, 1.0.into(), 1.0.into(), 0.0.into()),
        ),
    ];
    for (name, q) in cases {
        let r = pair_stability(&q, 1e-12)?;
        println!(
            "{name:<12} stable={:<5} boundary={:<5} min slack {:+.3}",
            r.stable,
            r.boundary,
            r.min_slack()
        );
    }
    Ok(())
}
