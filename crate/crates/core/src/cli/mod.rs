//! Command-line front end. Every command writes its result together with a
//! [`RunManifest`]; exit codes are 0 pass, 1 verdict failure, 2 usage or
//! validation error, 3 numerical failure.

mod parse;
mod verify;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::dualcorr::{covariance_sum_bound, stationary_neg_covariance, variance_ratio, TreePairChain};
use crate::error::{Result, SepError};
use crate::exactevolve::{
    build_generator, build_open_generator, evolve, evolve_stirring_products, evolve_traced, one_point_function,
};
use crate::genpoly::{
    all_pairs, bernoulli_decomposition, default_rayleigh_points, pair_stability, rayleigh_check, real_rooted,
    SubsetDistribution, UnivariatePoly,
};
use crate::kernels::{green_function, green_window_sup, TreeQuotient};
use crate::simulate::{run_experiment, sha256_hex, Engine, ExperimentSpec};

pub use parse::{parse_boundary, parse_complex, parse_graph, parse_initial, parse_statistic, parse_window, GraphArg};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "sepkit",
    version,
    about = "Symmetric exclusion toolkit",
    allow_negative_numbers = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed for anything random.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stability and real-rootedness checks on generating polynomials.
    Stability {
        #[command(subcommand)]
        check: StabilityCmd,
        #[command(flatten)]
        common: Common,
    },
    /// Exact evolution of a distribution on {0,1}^S.
    Evolve(EvolveArgs),
    /// Green function values and window sums of a killed kernel.
    Green(GreenArgs),
    /// Stationary covariances from the two-particle dual.
    DualCov(DualCovArgs),
    /// Stirring Monte Carlo.
    Simulate(SimulateArgs),
    /// Canned end-to-end scenarios with pass/fail verdicts.
    Verify(verify::VerifyArgs),
}

#[derive(Debug, Subcommand, Serialize)]
pub enum StabilityCmd {
    /// a + b·z + c·w + d·zw, coefficients as `re` or `re,im`.
    Pair {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        c: String,
        #[arg(long, allow_hyphen_values = true)]
        d: String,
        #[arg(long, default_value_t = 1e-12)]
        margin_tol: f64,
        /// Exit 1 when the polynomial is not stable.
        #[arg(long)]
        assert: bool,
    },
    /// Sampled Rayleigh inequality for every pair of coordinates.
    Rayleigh {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = -1e-12)]
        tol: f64,
        #[arg(long)]
        assert: bool,
    },
    /// Real-rootedness of the particle-count polynomial or of given coefficients.
    RealRooted {
        #[arg(long, conflicts_with = "coeffs", required_unless_present = "coeffs")]
        dist: Option<PathBuf>,
        /// Ascending coefficients, comma separated.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        assert: bool,
    },
    /// Bernoulli parameters whose sum has the same law as the particle count.
    Decompose {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    /// line:R, tree:D, path:N, cycle:N or complete:N.
    #[arg(long)]
    pub graph: String,
    /// Product initial law: one density or one per site, comma separated.
    #[arg(long, conflicts_with = "dist", required_unless_present = "dist")]
    pub alpha: Option<String>,
    /// Initial distribution file.
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long)]
    pub t: f64,
    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,
    /// Reservoirs `lambda,rho` on the killed truncation.
    #[arg(long)]
    pub reservoirs: Option<String>,
    /// Record diagnostics after each of this many equal steps.
    #[arg(long)]
    pub trace: Option<usize>,
    /// Use the Trotter product of single-edge mixes with this many sweeps.
    #[arg(long)]
    pub stirring_steps: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct GreenArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, requires = "y")]
    pub x: Option<usize>,
    #[arg(long, requires = "x")]
    pub y: Option<usize>,
    /// L<n, R<n, <n, L=n, R=n, =n, coords:a..b or sites:1,2,3.
    #[arg(long, conflicts_with = "x")]
    pub window: Option<String>,
    /// Solve on the (side, level) quotient of a tree (any depth).
    #[arg(long)]
    pub quotient: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct DualCovArgs {
    #[arg(long)]
    pub graph: String,
    /// Limits `lambda,rho` of the harmonic profile; reservoirs hold it in place.
    #[arg(long)]
    pub profile: String,
    /// `x,y`.
    #[arg(long, conflicts_with = "window", required_unless_present = "window")]
    pub pair: Option<String>,
    #[arg(long)]
    pub window: Option<String>,
    /// Also evaluate the heat-kernel and coarse Green bounds for the window.
    #[arg(long)]
    pub bound: bool,
    /// Use the lumped pair chain (trees only, any depth up to 60).
    #[arg(long)]
    pub lumped: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Experiment spec in JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<String>,
    /// closed or reservoirs:lambda,rho.
    #[arg(long)]
    pub boundary: Option<String>,
    /// step, constant:p, harmonic:lambda,rho, product:a,b,.. or occupied:1,2.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    /// w_plus, occupancy or window:SPEC.
    #[arg(long)]
    pub statistic: Option<String>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum EngineArg {
    Forward,
    DualTracer,
}

/// Provenance record attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    /// The fully resolved parameters of the run.
    pub resolved: Value,
    pub seed: Option<u64>,
    pub build_id: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn build_id() -> String {
    option_env!("SEPKIT_BUILD_ID")
        .map(str::to_string)
        .unwrap_or_else(|| format!("sepkit-{}", env!("CARGO_PKG_VERSION")))
}

struct Run {
    manifest: RunManifest,
    common: Common,
}

impl Run {
    fn new(command: &str, argv: &[String], common: &Common, resolved: Value) -> Self {
        Run {
            manifest: RunManifest {
                command: command.to_string(),
                args: argv.to_vec(),
                resolved,
                seed: common.seed,
                build_id: build_id(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
            common: common.clone(),
        }
    }

    fn read_input(&mut self, path: &Path) -> Result<String> {
        let text = fs::read_to_string(path)?;
        self.manifest
            .inputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn write_file(&mut self, path: &Path, body: &str) -> Result<()> {
        fs::write(path, body)?;
        self.manifest
            .outputs
            .insert(path.display().to_string(), sha256_hex(body.as_bytes()));
        Ok(())
    }

    /// Writes `result` (JSON) or `csv`, then the manifest next to the output.
    fn emit(mut self, result: Value, csv: Option<String>) -> Result<()> {
        let body = match self.common.format {
            Format::Json => {
                let doc = json!({ "manifest": self.manifest, "result": result });
                serde_json::to_string_pretty(&doc)? + "\n"
            }
            Format::Csv => csv.ok_or_else(|| SepError::invalid("this command has no CSV output"))?,
        };
        match self.common.out.clone() {
            Some(path) => {
                self.write_file(&path, &body)?;
                let side = manifest_path(&path);
                fs::write(&side, serde_json::to_string_pretty(&self.manifest)? + "\n")?;
            }
            None => print!("{body}"),
        }
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn exit_code(e: &SepError) -> i32 {
    match e {
        SepError::HorizonMonitor { .. } | SepError::NoConvergence(_) => EXIT_NUMERIC,
        SepError::NotRealRooted { .. } => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, argv) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn dispatch(command: Command, argv: &[String]) -> Result<bool> {
    match command {
        Command::Stability { check, common } => cmd_stability(check, &common, argv),
        Command::Evolve(a) => cmd_evolve(a, argv),
        Command::Green(a) => cmd_green(a, argv),
        Command::DualCov(a) => cmd_dual_cov(a, argv),
        Command::Simulate(a) => cmd_simulate(a, argv),
        Command::Verify(a) => verify::cmd_verify(a, argv),
    }
}

fn read_dist(run: &mut Run, path: &Path) -> Result<SubsetDistribution> {
    SubsetDistribution::from_json(&run.read_input(path)?)
}

fn cmd_stability(check: StabilityCmd, common: &Common, argv: &[String]) -> Result<bool> {
    let mut run = Run::new("stability", argv, common, to_value(&check)?);
    let (result, pass, csv) = match &check {
        StabilityCmd::Pair {
            a,
            b,
            c,
            d,
            margin_tol,
            assert,
        } => {
            let pc = crate::genpoly::PairCoefficients::new(
                parse_complex(a)?,
                parse_complex(b)?,
                parse_complex(c)?,
                parse_complex(d)?,
            );
            let r = pair_stability(&pc, *margin_tol)?;
            let csv = format!(
                "stable,boundary,min_slack\n{},{},{}\n",
                r.stable,
                r.boundary,
                r.min_slack()
            );
            (to_value(&r)?, !assert || r.stable, csv)
        }
        StabilityCmd::Rayleigh { dist, tol, assert } => {
            let dist = read_dist(&mut run, dist)?;
            let seed = common.seed.unwrap_or(0);
            let r = rayleigh_check(
                &dist,
                &default_rayleigh_points(dist.n(), seed),
                &all_pairs(dist.n()),
                *tol,
            )?;
            let csv = format!(
                "passed,min_value,evaluations\n{},{},{}\n",
                r.passed, r.min_value, r.evaluations
            );
            (to_value(&r)?, !assert || r.passed, csv)
        }
        StabilityCmd::RealRooted {
            dist,
            coeffs,
            tol,
            assert,
        } => {
            let q = match (dist, coeffs) {
                (Some(p), _) => read_dist(&mut run, p)?.diagonalize(),
                (None, Some(c)) => UnivariatePoly::new(parse::parse_floats(c)?),
                (None, None) => return Err(SepError::invalid("give --dist or --coeffs")),
            };
            let r = real_rooted(&q, *tol)?;
            let mut csv = String::from("re,im\n");
            for z in &r.roots {
                csv.push_str(&format!("{},{}\n", z.re, z.im));
            }
            (to_value(&r)?, !assert || r.real_rooted, csv)
        }
        StabilityCmd::Decompose { dist, tol } => {
            let dist = read_dist(&mut run, dist)?;
            let b = bernoulli_decomposition(&dist, *tol)?;
            let csv = std::iter::once("p".to_string())
                .chain(b.p.iter().map(|p| p.to_string()))
                .collect::<Vec<_>>()
                .join("\n")
                + "\n";
            (to_value(&b)?, true, csv)
        }
    };
    run.emit(result, Some(csv))?;
    Ok(pass)
}

fn dist_csv(dist: &SubsetDistribution) -> String {
    let mut out = String::from("mask,weight\n");
    for (m, w) in dist.weights().iter().enumerate() {
        out.push_str(&format!("{m},{w}\n"));
    }
    out
}

fn cmd_evolve(a: EvolveArgs, argv: &[String]) -> Result<bool> {
    let mut run = Run::new("evolve", argv, &a.common, to_value(&a)?);
    let graph = parse_graph(&a.graph)?;
    let (kernel, gen) = match &a.reservoirs {
        Some(r) => {
            let (lambda, rho) = parse::parse_pair_f64(r)?;
            let (k, ob) = graph.open(lambda, rho)?;
            let g = build_open_generator(&k, &ob)?;
            (k, g)
        }
        None => {
            let k = graph.kernel()?;
            let g = build_generator(&k)?;
            (k, g)
        }
    };
    let start = match (&a.alpha, &a.dist) {
        (_, Some(p)) => read_dist(&mut run, p)?,
        (Some(s), None) => {
            let v = parse::parse_floats(s)?;
            let alpha = if v.len() == 1 { vec![v[0]; kernel.len()] } else { v };
            SubsetDistribution::from_product(&alpha)?
        }
        (None, None) => return Err(SepError::invalid("give --alpha or --dist")),
    };
    let mut result = serde_json::Map::new();
    let dist = if let Some(steps) = a.stirring_steps {
        evolve_stirring_products(&start, &gen, a.t, steps)?
    } else if let Some(steps) = a.trace {
        let (d, trace) = evolve_traced(&start, &gen, a.t, steps, a.tol, a.common.seed.unwrap_or(0))?;
        result.insert("trace".into(), to_value(&trace)?);
        d
    } else {
        let e = evolve(&start, &gen, a.t, a.tol)?;
        result.insert("renormalization".into(), json!(e.renormalization));
        result.insert("min_weight".into(), json!(e.min_weight));
        result.insert("poisson_terms".into(), json!(e.poisson_terms));
        e.dist
    };
    result.insert("one_point".into(), to_value(&one_point_function(&dist))?);
    result.insert("particle_count".into(), to_value(&dist.diagonalize().coeffs)?);
    result.insert("distribution".into(), to_value(&dist)?);
    run.emit(Value::Object(result), Some(dist_csv(&dist)))?;
    Ok(true)
}

fn cmd_green(a: GreenArgs, argv: &[String]) -> Result<bool> {
    let run = Run::new("green", argv, &a.common, to_value(&a)?);
    let graph = parse_graph(&a.graph)?;
    let (result, csv) = if a.quotient {
        let GraphArg::Tree(depth) = graph else {
            return Err(SepError::invalid("--quotient needs a tree graph"));
        };
        let q = TreeQuotient::new(depth, true);
        let w = parse_window(a.window.as_deref().unwrap_or("L<1"))?;
        let sums = q.green_window(&w)?;
        let sup = q.green_window_sup(&w)?;
        let mut csv = String::from("side,level,value\n");
        for (i, v) in sums.iter().enumerate() {
            let (s, l) = q.class(i);
            csv.push_str(&format!("{s:?},{l},{v}\n"));
        }
        (json!({ "window": w.to_string(), "class_sums": sums, "sup": sup }), csv)
    } else {
        let k = graph.killed()?;
        match (a.x, a.y, &a.window) {
            (Some(x), Some(y), _) => {
                let g = green_function(&k, x, y, a.tol)?;
                (
                    json!({ "x": x, "y": y, "value": g }),
                    format!("x,y,value\n{x},{y},{g}\n"),
                )
            }
            (_, _, Some(w)) => {
                let w = parse_window(w)?;
                let sup = green_window_sup(&k, &w, a.tol)?;
                let csv = format!("window,value,site\n\"{w}\",{},{}\n", sup.value, sup.site);
                (json!({ "window": w.to_string(), "sup": sup }), csv)
            }
            _ => return Err(SepError::invalid("give --x and --y, or --window")),
        }
    };
    run.emit(result, Some(csv))?;
    Ok(true)
}

fn cmd_dual_cov(a: DualCovArgs, argv: &[String]) -> Result<bool> {
    let run = Run::new("dual-cov", argv, &a.common, to_value(&a)?);
    let graph = parse_graph(&a.graph)?;
    let (lambda, rho) = parse::parse_pair_f64(&a.profile)?;
    let tolerances = json!({ "tol": a.tol });
    let (result, csv) = if a.lumped {
        let GraphArg::Tree(depth) = graph else {
            return Err(SepError::invalid("--lumped needs a tree graph"));
        };
        if depth > 60 {
            return Err(SepError::invalid("lumped depth is capped at 60"));
        }
        let w = parse_window(
            a.window
                .as_deref()
                .ok_or_else(|| SepError::invalid("--lumped needs --window"))?,
        )?;
        let profile = crate::kernels::tree_alpha(lambda, rho)?;
        let v = TreePairChain::new(depth).window_variance(&profile, &w, a.tol)?;
        let csv = format!(
            "window,neg_covariance,variance,ratio\n\"{}\",{},{},{}\n",
            v.window, v.neg_covariance, v.variance, v.ratio
        );
        (
            json!({ "window": v.window, "value": v.neg_covariance, "variance": v.variance, "ratio": v.ratio, "horizon_T": Value::Null, "boundary_leak": 0.0, "tolerances": tolerances, "detail": v }),
            csv,
        )
    } else {
        let k = graph.killed()?;
        let alpha = graph.profile(lambda, rho)?.values(&k);
        if let Some(p) = &a.pair {
            let (x, y) = parse::parse_pair_usize(p)?;
            let c = stationary_neg_covariance(&k, &alpha, x, y, a.tol)?;
            let csv = format!(
                "x,y,neg_covariance,horizon_T,boundary_leak\n{x},{y},{},{},{}\n",
                c.value, c.horizon_t, c.boundary_leak
            );
            (
                json!({ "pair": [x, y], "value": c.value, "horizon_T": c.horizon_t, "boundary_leak": c.boundary_leak, "tolerances": tolerances }),
                csv,
            )
        } else {
            let w = parse_window(a.window.as_deref().expect("clap requires pair or window"))?;
            let v = variance_ratio(&k, &alpha, &w, a.tol)?;
            let mut out = json!({ "window": v.window, "value": v.neg_covariance, "variance": v.variance, "ratio": v.ratio, "tolerances": tolerances });
            let mut csv = format!(
                "window,neg_covariance,variance,ratio\n\"{}\",{},{},{}\n",
                v.window, v.neg_covariance, v.variance, v.ratio
            );
            if a.bound {
                let b = covariance_sum_bound(&k, &alpha, &w, a.tol)?;
                csv = format!(
                    "window,neg_covariance,bound,coarse\n\"{}\",{},{},{}\n",
                    v.window, v.neg_covariance, b.value, b.coarse
                );
                out["bound"] = to_value(&b)?;
                out["horizon_T"] = json!(b.horizon_t);
            }
            (out, csv)
        }
    };
    run.emit(result, Some(csv))?;
    Ok(true)
}

fn cmd_simulate(a: SimulateArgs, argv: &[String]) -> Result<bool> {
    let mut run = Run::new("simulate", argv, &a.common, Value::Null);
    let mut spec: Option<ExperimentSpec> = match &a.config {
        Some(p) => Some(serde_json::from_str(&run.read_input(p)?)?),
        None => None,
    };
    let kernel = match (&a.graph, &spec) {
        (Some(g), _) => parse_graph(g)?.spec()?,
        (None, Some(s)) => s.kernel.clone(),
        (None, None) => return Err(SepError::invalid("missing kernel: give --graph or --config")),
    };
    let field = |name: &str| SepError::invalid(format!("missing {name}: give --{name} or --config"));
    let merged = ExperimentSpec {
        kernel,
        boundary: match (&a.boundary, &spec) {
            (Some(b), _) => parse_boundary(b)?,
            (None, Some(s)) => s.boundary.clone(),
            (None, None) => Default::default(),
        },
        initial: match (&a.initial, &spec) {
            (Some(i), _) => parse_initial(i)?,
            (None, Some(s)) => s.initial.clone(),
            (None, None) => return Err(field("initial")),
        },
        t: a.t.or(spec.as_ref().map(|s| s.t)).ok_or_else(|| field("t"))?,
        statistic: match (&a.statistic, &spec) {
            (Some(s), _) => parse_statistic(s)?,
            (None, Some(s)) => s.statistic.clone(),
            (None, None) => return Err(field("statistic")),
        },
        replicas: a
            .replicas
            .or(spec.as_ref().map(|s| s.replicas))
            .ok_or_else(|| field("replicas"))?,
        master_seed: a.common.seed.or(spec.as_ref().map(|s| s.master_seed)).unwrap_or(0),
        engine: match (a.engine, &spec) {
            (Some(EngineArg::Forward), _) => Engine::Forward,
            (Some(EngineArg::DualTracer), _) => Engine::DualTracer,
            (None, Some(s)) => s.engine,
            (None, None) => Engine::Forward,
        },
    };
    spec.take();
    run.manifest.resolved = to_value(&merged)?;
    run.manifest.seed = Some(merged.master_seed);
    let set = run_experiment(&merged, a.common.jobs)?;
    let monitor_ok = set.truncation_monitor.as_ref().is_none_or(|m| m.passed);
    let csv = set.to_csv();
    if let (Format::Csv, Some(out)) = (a.common.format, a.common.out.clone()) {
        // The sample-set sidecar travels with the CSV.
        let mut side = set.sidecar();
        side["manifest"] = to_value(&run.manifest)?;
        run.write_file(
            &out.with_extension("json"),
            &(serde_json::to_string_pretty(&side)? + "\n"),
        )?;
    }
    let mut result = to_value(&set)?;
    result["statistic_name"] = json!(merged.statistic.name());
    run.emit(result, Some(csv))?;
    Ok(monitor_ok)
}
