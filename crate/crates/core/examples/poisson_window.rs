//! Occupation of a deep tree level under the open stationary measure,
//! compared with a Poisson law of the same mean.
use sepkit::kernels::{Side, SiteWindow};
use sepkit::simulate::{run_experiment, BoundarySpec, Engine, ExperimentSpec, InitialLaw, KernelSpec, Statistic};
use sepkit::stats::tv_poisson;

fn main() -> sepkit::Result<()> {
    for n in [4u32, 6, 8] {
        let spec = ExperimentSpec {
            kernel: KernelSpec::Tree { depth: n + 4 },
            boundary: BoundarySpec::Reservoirs { lambda: 0.0, rho: 1.0 },
            initial: InitialLaw::Harmonic { lambda: 0.0, rho: 1.0 },
            t: 100.0,
            statistic: Statistic::WindowSum {
                window: SiteWindow::at_level(Some(Side::L), n),
            },
            replicas: 4000,
            master_seed: 3,
            engine: Engine::DualTracer,
        };
        let x = run_experiment(&spec, 4)?.samples_f64();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        println!(
            "level {n}: mean {mean:.4}, TV to Poisson(1/3) {:.4}",
            tv_poisson(&x, 1.0 / 3.0)?
        );
    }
    Ok(())
}
