//! Net flux across the origin on the line from a step initial condition.
use sepkit::simulate::{run_experiment, BoundarySpec, Engine, ExperimentSpec, InitialLaw, KernelSpec, Statistic};
use sepkit::stats::{empirical_moments, normality_distance, thm3_envelope};

fn main() -> sepkit::Result<()> {
    let env = thm3_envelope(1.0)?;
    for t in [16.0f64, 64.0, 256.0] {
        let spec = ExperimentSpec {
            kernel: KernelSpec::Line {
                radius: (10.0 * t.sqrt()).ceil() as u32,
                law: None,
            },
            boundary: BoundarySpec::Closed,
            initial: InitialLaw::Step,
            t,
            statistic: Statistic::WPlus,
            replicas: 1000,
            master_seed: 1,
            engine: Engine::Forward,
        };
        let set = run_experiment(&spec, 4)?;
        let x = set.samples_f64();
        let m = empirical_moments(&x)?;
        let nd = normality_distance(&x)?;
        println!(
            "t={t:<5} mean/sqrt(t) {:.4} (limit {:.4})  Var/sqrt(t) {:.4} (band {:.4}..{:.4})  KS {:.3}",
            m.mean / t.sqrt(),
            env.mean_coeff,
            m.var / t.sqrt(),
            env.var_lower,
            env.var_upper,
            nd.ks
        );
    }
    Ok(())
}
