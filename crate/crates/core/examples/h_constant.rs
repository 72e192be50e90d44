//! The constant H in the lower variance bound, with a Monte Carlo check of
//! the integrand h(r).
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sepkit::stats::{h_constant, h_monte_carlo, h_of_r};

fn main() -> sepkit::Result<()> {
    let h = h_constant()?;
    println!(
        "H = {:.10} (coarse {:.10}, error estimate {:.1e})",
        h.value, h.coarse, h.error
    );
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for r in [0.1, 0.5, 0.9] {
        let (mc, se) = h_monte_carlo(r, 200_000, &mut rng);
        println!("h({r}) = {:.5}, Monte Carlo {mc:.5} +/- {se:.5}", h_of_r(r)?);
    }
    Ok(())
}
