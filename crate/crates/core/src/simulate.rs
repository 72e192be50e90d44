//! Stirring Monte Carlo. Each unordered edge {x,y} rings at rate p(x,y) and
//! swaps the two occupancies; reservoir sites resample their occupancy at
//! the killed rate. Window sums on open trees can also be drawn from the
//! backward dual: tracers started on the window move as an exclusion
//! process, are absorbed by the reservoirs, and read the initial product
//! law where they end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SepError};
use crate::kernels::{
    build_binary_tree, build_line, killed_truncation, line_alpha, tree_alpha, Geometry, HarmonicProfile, JumpLaw,
    Kernel, OpenBoundary, SiteWindow,
};

/// Stirring events within this many sites of the truncation edge are
/// watched by the truncation monitor.
pub const MONITOR_MARGIN: u32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    bits: Vec<bool>,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Configuration { bits: vec![false; n] }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Configuration { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, x: usize) -> bool {
        self.bits[x]
    }

    pub fn set(&mut self, x: usize, v: bool) {
        self.bits[x] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn particles(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Occupied sites as a bitmask, bit x for site x.
    pub fn mask(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(
            self.bits
                .iter()
                .enumerate()
                .filter(|e| *e.1)
                .map(|(x, _)| 1u64 << x)
                .sum(),
        )
    }
}

/// Independent Bernoulli(α(x)) occupancies.
pub fn sample_product<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Configuration {
    Configuration {
        bits: alpha.iter().map(|&a| rng.random::<f64>() < a).collect(),
    }
}

/// Occupied exactly at coordinates ≤ 0.
pub fn step_initial(kernel: &Kernel) -> Result<Configuration> {
    if !matches!(kernel.geometry(), Geometry::Line { .. }) {
        return Err(SepError::invalid("step initial condition needs a line kernel"));
    }
    Ok(Configuration {
        bits: (0..kernel.len())
            .map(|x| kernel.coord(x).is_some_and(|c| c <= 0))
            .collect(),
    })
}

pub fn window_sum(config: &Configuration, members: &[usize]) -> u64 {
    members.iter().filter(|&&x| config.get(x)).count() as u64
}

/// W = number of particles at positive coordinates.
pub fn w_plus(config: &Configuration, kernel: &Kernel) -> Result<u64> {
    if !matches!(kernel.geometry(), Geometry::Line { .. }) {
        return Err(SepError::invalid("w_plus needs a line kernel"));
    }
    Ok((0..kernel.len())
        .filter(|&x| config.get(x) && kernel.coord(x).is_some_and(|c| c > 0))
        .count() as u64)
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Swap(u32, u32),
    Resample { site: u32, density: f64 },
}

/// Event table for exact stirring: one entry per edge and reservoir, drawn
/// in proportion to its rate through an alias table.
#[derive(Debug, Clone)]
pub struct StirringDynamics {
    events: Vec<Event>,
    near_boundary: Vec<bool>,
    alias: Option<WeightedAliasIndex<f64>>,
    total_rate: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StirringRun {
    pub events: u64,
    /// Events near the truncation edge that changed the configuration.
    pub boundary_changes: u64,
}

impl StirringDynamics {
    pub fn new(kernel: &Kernel, boundary: &OpenBoundary) -> Result<Self> {
        let dist = kernel.boundary_distance();
        let near = |x: usize| dist[x] < MONITOR_MARGIN;
        let mut events = Vec::new();
        let mut rates = Vec::new();
        let mut near_boundary = Vec::new();
        for (x, y, p) in kernel.edges() {
            events.push(Event::Swap(x as u32, y as u32));
            rates.push(p);
            near_boundary.push(near(x) || near(y));
        }
        for (x, rate, density) in boundary.sites() {
            events.push(Event::Resample {
                site: x as u32,
                density,
            });
            rates.push(rate);
            near_boundary.push(true);
        }
        let total_rate = rates.iter().sum();
        let alias = if events.is_empty() {
            None
        } else {
            Some(WeightedAliasIndex::new(rates).map_err(|e| SepError::invalid(format!("event rates: {e}")))?)
        };
        Ok(StirringDynamics {
            events,
            near_boundary,
            alias,
            total_rate,
        })
    }

    pub fn closed(kernel: &Kernel) -> Result<Self> {
        Self::new(kernel, &OpenBoundary::closed(kernel.len()))
    }

    pub fn total_rate(&self) -> f64 {
        self.total_rate
    }
}

/// Runs the stirring dynamics for time t in place. The number of events in
/// [0,t] is Poisson(Rt) and, given the count, events are i.i.d. draws from
/// the rate-weighted table; the order of arrival times is irrelevant.
pub fn evolve_stirring<R: Rng + ?Sized>(
    config: &mut Configuration,
    dynamics: &StirringDynamics,
    t: f64,
    rng: &mut R,
) -> StirringRun {
    let mut run = StirringRun::default();
    let Some(alias) = &dynamics.alias else {
        return run;
    };
    let mean = dynamics.total_rate * t;
    if mean <= 0.0 {
        return run;
    }
    let count = Poisson::new(mean).expect("finite positive mean").sample(rng) as u64;
    run.events = count;
    for _ in 0..count {
        let i = alias.sample(rng);
        let changed = match dynamics.events[i] {
            Event::Swap(x, y) => {
                let (x, y) = (x as usize, y as usize);
                let (a, b) = (config.bits[x], config.bits[y]);
                config.bits[x] = b;
                config.bits[y] = a;
                a != b
            }
            Event::Resample { site, density } => {
                let v = rng.random::<f64>() < density;
                let old = std::mem::replace(&mut config.bits[site as usize], v);
                old != v
            }
        };
        if changed && dynamics.near_boundary[i] {
            run.boundary_changes += 1;
        }
    }
    run
}

/// One draw of Σ_{x∈members} η_t(x) for the open system started from the
/// product law `alpha0`, via the backward tracer set. Tracers jump at the
/// kernel rates (blocked by other tracers), are absorbed at the deficit rate
/// and then read Bernoulli(density). `occupied` is scratch of kernel size
/// and is left cleared.
pub fn dual_window_sample<R: Rng + ?Sized>(
    kernel: &Kernel,
    boundary: &OpenBoundary,
    alpha0: &[f64],
    members: &[usize],
    t: f64,
    rng: &mut R,
    occupied: &mut [bool],
) -> u64 {
    let mut pos: Vec<usize> = members.to_vec();
    for &x in &pos {
        occupied[x] = true;
    }
    let mut total = 0u64;
    let mut time = 0.0;
    while !pos.is_empty() {
        let e: f64 = rng.sample(Exp1);
        time += e / pos.len() as f64;
        if time > t {
            break;
        }
        let i = rng.random_range(0..pos.len());
        let x = pos[i];
        let mut u = rng.random::<f64>();
        let mut target = None;
        for (z, p) in kernel.neighbors(x) {
            if u < p {
                target = Some(z);
                break;
            }
            u -= p;
        }
        match target {
            Some(z) => {
                if !occupied[z] {
                    occupied[x] = false;
                    occupied[z] = true;
                    pos[i] = z;
                }
            }
            None if u < kernel.deficit(x) => {
                occupied[x] = false;
                pos.swap_remove(i);
                if rng.random::<f64>() < boundary.density[x] {
                    total += 1;
                }
            }
            None => {}
        }
    }
    for &x in &pos {
        occupied[x] = false;
        if rng.random::<f64>() < alpha0[x] {
            total += 1;
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `law` maps positive steps to probabilities; simple walk when absent.
    Line {
        radius: u32,
        #[serde(default)]
        law: Option<BTreeMap<i64, f64>>,
    },
    Tree {
        depth: u32,
    },
    Edges {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
    },
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel> {
        match self {
            KernelSpec::Line { radius, law } => {
                let law = match law {
                    Some(l) => JumpLaw::new(l)?,
                    None => JumpLaw::simple(),
                };
                build_line(*radius, &law)
            }
            KernelSpec::Tree { depth } => {
                if *depth > 24 {
                    return Err(SepError::invalid(format!("tree depth {depth} is above 24")));
                }
                Ok(build_binary_tree(*depth))
            }
            KernelSpec::Edges { n, edges } => Kernel::from_edges(*n, edges),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundarySpec {
    /// Escape mass held in place; particles are conserved.
    #[default]
    Closed,
    /// Killed truncation with reservoirs that keep the harmonic profile
    /// with limits (λ, ρ) stationary.
    Reservoirs { lambda: f64, rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialLaw {
    Step,
    Occupied {
        sites: Vec<usize>,
    },
    Product {
        alpha: Vec<f64>,
    },
    Constant {
        density: f64,
    },
    /// Product law with the harmonic profile of the kernel's geometry.
    Harmonic {
        lambda: f64,
        rho: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statistic {
    WindowSum {
        window: SiteWindow,
    },
    WPlus,
    /// The whole configuration as a bitmask (at most 64 sites).
    Occupancy,
}

impl Statistic {
    pub fn name(&self) -> String {
        match self {
            Statistic::WindowSum { window } => format!("window_sum[{window}]"),
            Statistic::WPlus => "w_plus".into(),
            Statistic::Occupancy => "occupancy".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    #[default]
    Forward,
    DualTracer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kernel: KernelSpec,
    #[serde(default)]
    pub boundary: BoundarySpec,
    pub initial: InitialLaw,
    pub t: f64,
    pub statistic: Statistic,
    pub replicas: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub engine: Engine,
}

/// Kernel, reservoirs and resolved initial law for an experiment.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub kernel: Kernel,
    pub boundary: OpenBoundary,
    /// Product-law densities, when the initial law is a product law.
    pub alpha0: Option<Vec<f64>>,
    pub fixed: Option<Configuration>,
    pub members: Vec<usize>,
}

impl ExperimentSpec {
    fn profile(&self, lambda: f64, rho: f64) -> Result<HarmonicProfile> {
        match self.kernel {
            KernelSpec::Line { radius, .. } => line_alpha(lambda, rho, radius),
            KernelSpec::Tree { .. } => tree_alpha(lambda, rho),
            KernelSpec::Edges { .. } => Err(SepError::invalid("harmonic profiles need a line or tree kernel")),
        }
    }

    pub fn prepare(&self) -> Result<Prepared> {
        if self.replicas == 0 {
            return Err(SepError::invalid("replicas must be at least 1"));
        }
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(SepError::invalid(format!("t = {} must be finite and >= 0", self.t)));
        }
        let base = self.kernel.build()?;
        let (kernel, boundary) = match self.boundary {
            BoundarySpec::Closed => {
                let n = base.len();
                (base, OpenBoundary::closed(n))
            }
            BoundarySpec::Reservoirs { lambda, rho } => {
                let killed = killed_truncation(&base).kernel().clone();
                let ob = self.profile(lambda, rho)?.open_boundary(&killed);
                (killed, ob)
            }
        };
        let n = kernel.len();
        let (alpha0, fixed) = match &self.initial {
            InitialLaw::Step => (None, Some(step_initial(&kernel)?)),
            InitialLaw::Occupied { sites } => {
                let mut c = Configuration::empty(n);
                for &x in sites {
                    if x >= n {
                        return Err(SepError::invalid(format!("site {x} out of range")));
                    }
                    c.set(x, true);
                }
                (None, Some(c))
            }
            InitialLaw::Product { alpha } => {
                if alpha.len() != n || alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
                    return Err(SepError::invalid("product law needs one density in [0,1] per site"));
                }
                (Some(alpha.clone()), None)
            }
            InitialLaw::Constant { density } => {
                if !(0.0..=1.0).contains(density) {
                    return Err(SepError::invalid("density outside [0,1]"));
                }
                (Some(vec![*density; n]), None)
            }
            InitialLaw::Harmonic { lambda, rho } => (Some(self.profile(*lambda, *rho)?.values(&kernel)), None),
        };
        let members = match &self.statistic {
            Statistic::WindowSum { window } => window.members(&kernel),
            Statistic::WPlus => {
                if !matches!(kernel.geometry(), Geometry::Line { .. }) {
                    return Err(SepError::invalid("w_plus needs a line kernel"));
                }
                (0..n).filter(|&x| kernel.coord(x).is_some_and(|c| c > 0)).collect()
            }
            Statistic::Occupancy => {
                if n > 64 {
                    return Err(SepError::invalid("occupancy statistic needs at most 64 sites"));
                }
                (0..n).collect()
            }
        };
        if self.engine == Engine::DualTracer {
            if alpha0.is_none() {
                return Err(SepError::invalid("the dual engine needs a product initial law"));
            }
            if self.statistic == Statistic::Occupancy {
                return Err(SepError::invalid("the dual engine draws window sums only"));
            }
        }
        Ok(Prepared {
            kernel,
            boundary,
            alpha0,
            fixed,
            members,
        })
    }

    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("spec serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Stream seed for replica i: two rounds of splitmix64 over the master seed
/// with the replica index mixed in.
pub fn replica_seed(master: u64, replica: u64) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix(splitmix(master) ^ replica.wrapping_mul(0xD605_BBB5_8C8A_BBFD))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationMonitor {
    pub margin: u32,
    /// Replicas with no configuration change near the truncation edge.
    pub clean_fraction: f64,
    pub required: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub spec: ExperimentSpec,
    pub spec_hash: String,
    pub kernel_hash: String,
    pub seeds: Vec<u64>,
    pub values: Vec<u64>,
    pub truncation_monitor: Option<TruncationMonitor>,
    pub wall_clock_seconds: f64,
}

impl SampleSet {
    pub fn samples_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }

    pub fn to_csv(&self) -> String {
        let name = self.spec.statistic.name();
        let mut out = String::from("replica,seed,statistic,value\n");
        for (i, (s, v)) in self.seeds.iter().zip(&self.values).enumerate() {
            out.push_str(&format!("{i},{s},\"{name}\",{v}\n"));
        }
        out
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "spec_hash": self.spec_hash,
            "master_seed": self.spec.master_seed,
            "kernel_hash": self.kernel_hash,
            "truncation_monitor": self.truncation_monitor,
            "wall_clock_seconds": self.wall_clock_seconds,
        })
    }

    /// Writes the CSV to `path` and the JSON sidecar next to it; returns the
    /// sidecar path.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        fs::write(path, self.to_csv())?;
        let side = path.with_extension("json");
        fs::write(&side, serde_json::to_string_pretty(&self.sidecar())?)?;
        Ok(side)
    }
}

fn one_replica(spec: &ExperimentSpec, prep: &Prepared, dynamics: Option<&StirringDynamics>, seed: u64) -> (u64, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.engine {
        Engine::DualTracer => {
            let mut scratch = vec![false; prep.kernel.len()];
            let alpha0 = prep.alpha0.as_deref().expect("validated");
            let v = dual_window_sample(
                &prep.kernel,
                &prep.boundary,
                alpha0,
                &prep.members,
                spec.t,
                &mut rng,
                &mut scratch,
            );
            (v, true)
        }
        Engine::Forward => {
            let mut config = match (&prep.fixed, &prep.alpha0) {
                (Some(c), _) => c.clone(),
                (None, Some(a)) => sample_product(a, &mut rng),
                (None, None) => unreachable!("validated initial law"),
            };
            let run = evolve_stirring(&mut config, dynamics.expect("forward dynamics"), spec.t, &mut rng);
            let v = match spec.statistic {
                Statistic::Occupancy => config.mask().expect("validated size"),
                _ => window_sum(&config, &prep.members),
            };
            (v, run.boundary_changes == 0)
        }
    }
}

/// Runs the replicas on `jobs` worker threads. Replica i uses the stream
/// seeded by [`replica_seed`]`(master_seed, i)`, so the samples do not depend
/// on `jobs`.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<SampleSet> {
    let start = Instant::now();
    let prep = spec.prepare()?;
    let dynamics = match spec.engine {
        Engine::Forward => Some(StirringDynamics::new(&prep.kernel, &prep.boundary)?),
        Engine::DualTracer => None,
    };
    let seeds: Vec<u64> = (0..spec.replicas as u64)
        .map(|i| replica_seed(spec.master_seed, i))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SepError::invalid(format!("thread pool: {e}")))?;
    let results: Vec<(u64, bool)> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| one_replica(spec, &prep, dynamics.as_ref(), s))
            .collect()
    });
    let clean = results.iter().filter(|r| r.1).count();
    let has_edge = (0..prep.kernel.len()).any(|x| !prep.kernel.is_interior(x));
    let monitor = (spec.engine == Engine::Forward && has_edge).then(|| {
        let clean_fraction = clean as f64 / results.len() as f64;
        TruncationMonitor {
            margin: MONITOR_MARGIN,
            clean_fraction,
            required: 0.99,
            passed: clean_fraction >= 0.99,
        }
    });
    Ok(SampleSet {
        spec: spec.clone(),
        spec_hash: spec.hash(),
        kernel_hash: sha256_hex(prep.kernel.to_json()?.as_bytes()),
        seeds,
        values: results.into_iter().map(|r| r.0).collect(),
        truncation_monitor: monitor,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Side;

    fn srw_line(radius: u32) -> Kernel {
        build_line(radius, &JumpLaw::simple()).unwrap()
    }

    #[test]
    fn product_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_product(&[1.0; 5], &mut rng).particles(), 5);
        assert_eq!(sample_product(&[0.0; 5], &mut rng).particles(), 0);
    }

    #[test]
    fn step_initial_radius_two() {
        let k = srw_line(2);
        let c = step_initial(&k).unwrap();
        assert_eq!(c.bits(), &[true, true, true, false, false]);
        assert_eq!(w_plus(&c, &k).unwrap(), 0);
        assert!(step_initial(&build_binary_tree(2)).is_err());
    }

    #[test]
    fn stirring_conserves_particles() {
        let k = srw_line(10);
        let d = StirringDynamics::closed(&k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut c = sample_product(&vec![0.4; k.len()], &mut rng);
        let before = c.clone();
        assert_eq!(evolve_stirring(&mut c, &d, 0.0, &mut rng).events, 0);
        assert_eq!(c, before);
        for _ in 0..20 {
            evolve_stirring(&mut c, &d, 1.3, &mut rng);
            assert_eq!(c.particles(), before.particles());
        }
    }

    #[test]
    fn window_sums() {
        let c = Configuration::from_bits(vec![true; 6]);
        assert_eq!(window_sum(&c, &[]), 0);
        assert_eq!(window_sum(&c, &[0, 2, 5]), 3);
    }

    #[test]
    fn determinism_across_jobs() {
        let spec = ExperimentSpec {
            kernel: KernelSpec::Line { radius: 8, law: None },
            boundary: BoundarySpec::Closed,
            initial: InitialLaw::Step,
            t: 4.0,
            statistic: Statistic::WPlus,
            replicas: 50,
            master_seed: 9,
            engine: Engine::Forward,
        };
        let a = run_experiment(&spec, 1).unwrap();
        let b = run_experiment(&spec, 3).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.seeds, b.seeds);
        let zero = run_experiment(
            &ExperimentSpec {
                t: 0.0,
                replicas: 1,
                ..spec
            },
            1,
        )
        .unwrap();
        assert_eq!(zero.values, vec![0]);
    }

    #[test]
    fn dual_engine_agrees_with_forward_on_small_open_tree() {
        let base = ExperimentSpec {
            kernel: KernelSpec::Tree { depth: 3 },
            boundary: BoundarySpec::Reservoirs { lambda: 0.0, rho: 1.0 },
            initial: InitialLaw::Constant { density: 0.5 },
            t: 1.5,
            statistic: Statistic::WindowSum {
                window: SiteWindow::below_level(Some(Side::L), 2),
            },
            replicas: 40_000,
            master_seed: 5,
            engine: Engine::Forward,
        };
        let fwd = run_experiment(&base, 1).unwrap();
        let dual = run_experiment(
            &ExperimentSpec {
                engine: Engine::DualTracer,
                master_seed: 6,
                ..base
            },
            1,
        )
        .unwrap();
        let hist = |s: &SampleSet| {
            let mut h = [0f64; 4];
            for &v in &s.values {
                h[v as usize] += 1.0 / s.values.len() as f64;
            }
            h
        };
        let (a, b) = (hist(&fwd), hist(&dual));
        for k in 0..4 {
            assert!((a[k] - b[k]).abs() < 0.015, "{k}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn spec_validation() {
        let bad = ExperimentSpec {
            kernel: KernelSpec::Tree { depth: 3 },
            boundary: BoundarySpec::Closed,
            initial: InitialLaw::Step,
            t: 1.0,
            statistic: Statistic::WPlus,
            replicas: 1,
            master_seed: 0,
            engine: Engine::Forward,
        };
        assert!(run_experiment(&bad, 1).is_err());
        let zero = ExperimentSpec {
            kernel: KernelSpec::Line { radius: 2, law: None },
            replicas: 0,
            ..bad
        };
        assert!(run_experiment(&zero, 1).is_err());
    }
}
