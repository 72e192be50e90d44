//! Master-equation evolution on a 6-site path from a product law.
use sepkit::exactevolve::{build_generator, evolve, one_point_function};
use sepkit::genpoly::SubsetDistribution;
use sepkit::kernels::Kernel;

fn main() -> sepkit::Result<()> {
    let edges: Vec<_> = (0..5).map(|i| (i, i + 1, 0.5)).collect();
    let kernel = Kernel::from_edges(6, &edges)?;
    let gen = build_generator(&kernel)?;
    let start = SubsetDistribution::from_product(&[0.9, 0.9, 0.9, 0.1, 0.1, 0.1])?;
    for t in [0.0, 0.5, 2.0, 8.0] {
        let ev = evolve(&start, &gen, t, 1e-13)?;
        let rho: Vec<String> = one_point_function(&ev.dist).iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "t={t:<4} density [{}]  max covariance {:+.2e}",
            rho.join(", "),
            ev.dist.max_pairwise_covariance()
        );
    }
    Ok(())
}
