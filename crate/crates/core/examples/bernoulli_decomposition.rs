//! A product law mixed by a transposition keeps a real-rooted particle-count
//! polynomial; its roots give an equivalent sum of independent Bernoullis.
use sepkit::genpoly::{bernoulli_decomposition, real_rooted, SubsetDistribution};

fn main() -> sepkit::Result<()> {
    let dist = SubsetDistribution::from_product(&[0.9, 0.2, 0.6, 0.4])?
        .transposition_mix(0, 1, 0.3)?
        .transposition_mix(1, 3, 0.5)?;
    let q = dist.diagonalize();
    println!("Q*(w) coefficients {:?}", q.coeffs);
    let roots = real_rooted(&q, 1e-10)?;
    println!("real rooted: {} (largest |Im| {:.1e})", roots.real_rooted, roots.margin);
    let b = bernoulli_decomposition(&dist, 1e-10)?;
    println!("Bernoulli parameters {:?}", b.p);
    println!("max pairwise covariance {:.3e}", dist.max_pairwise_covariance());
    Ok(())
}
