//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Every criterion compares library output against an oracle computed here
//! from scratch (geometry, dense linear algebra, direct sums) or against a
//! closed-form constant.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sepkit::dualcorr::{dual_integral, tree_refined_constant, TreePairChain};
use sepkit::exactevolve::{build_generator, build_open_generator, evolve, one_point_function, stationary_limit};
use sepkit::genpoly::sturm::is_real_rooted_exact;
use sepkit::genpoly::{
    all_pairs, default_rayleigh_points, pair_stability, rayleigh_check, real_rooted, PairCoefficients,
    SubsetDistribution,
};
use sepkit::kernels::{
    build_binary_tree, build_line, dirichlet_sum, harmonic_extension, killed_truncation, line_alpha, tree_alpha,
    JumpLaw, Kernel, OpenBoundary, Side, SiteWindow, TreeQuotient,
};
use sepkit::simulate::{run_experiment, BoundarySpec, Engine, ExperimentSpec, InitialLaw, KernelSpec, Statistic};
use sepkit::stats::{
    empirical_moments, h_constant, h_monte_carlo, h_of_r, normality_distance, thm3_envelope, tv_poisson,
};

type Outcome = Result<(bool, String), String>;
type Criterion = (u32, &'static str, fn() -> Outcome);
type ProfileFn = Box<dyn Fn(&Kernel) -> (Vec<f64>, OpenBoundary)>;
type SiteFilter<'a> = Box<dyn Fn(usize) -> bool + 'a>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        (1, "pair stability vs root-locus oracle", c1),
        (2, "products then mixes stay strongly Rayleigh", c2),
        (3, "stirring sampler vs master equation", c3),
        (4, "one-point duality", c4),
        (5, "particle-count law is invariant", c5),
        (6, "dual covariance vs master equation", c6),
        (7, "tree and Dirichlet constants", c7),
        (8, "tree window variance", c8),
        (9, "flux on the line", c9),
        (10, "constant H", c10),
        (11, "Poisson limit on the tree", c11),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {}  {name}: {detail} [{secs:.1}s]",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 11 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- criterion 1

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cgauss(rng: &mut ChaCha8Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Root locus of w(z) = −(a + bz)/(c + dz) over the upper half plane.
/// Returns whether it avoids the open upper half plane, together with a
/// brute-force confirmation: an explicit zero in the product of half planes
/// when unstable, a dense scan of z finding no such zero when stable.
fn locus_oracle(q: &PairCoefficients) -> (bool, bool) {
    let s = [q.a, q.b, q.c, q.d].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (a, b, cc, d) = (q.a / s, q.b / s, q.c / s, q.d / s);
    let m = |z: Complex64| -(a + b * z) / (cc + d * z);
    let det = a * d - b * cc;
    let stable = if cc.norm() == 0.0 && d.norm() == 0.0 {
        // No w dependence: a zero needs −a/b in the upper half plane.
        !(b.norm() > 0.0 && (-a / b).im > 0.0)
    } else if det.norm() < 1e-13 {
        // w(z) is constant; a common zero of a + bz and c + dz leaves w free.
        let w0 = if cc.norm() >= d.norm() { -a / cc } else { -b / d };
        let pole_up = d.norm() > 0.0 && (-cc / d).im > 0.0;
        !(w0.im > 0.0 || pole_up)
    } else if d.norm() > 0.0 && (-cc / d).im > 0.0 {
        // The pole is inside: the image contains a neighbourhood of infinity.
        false
    } else if d.norm() > 0.0 && (cc / d).im.abs() < 1e-12 {
        // Real pole: the image is a half plane bounded by a line through w(∞).
        let xp = (-cc / d).re;
        let inf = -b / d;
        let v = m(c(xp + 1.0, 0.0)) - inf;
        let horizontal = v.im.abs() <= 1e-12 * v.norm();
        let inside = m(c(xp, 1.0));
        horizontal && inside.im < inf.im && inf.im <= 0.0
    } else {
        // Bounded image: a disc through three boundary images.
        let (p1, p2, p3) = (m(c(-1.0, 0.0)), m(c(0.0, 0.0)), m(c(1.0, 0.0)));
        let (center, r) = circumcircle(p1, p2, p3);
        center.im + r <= 0.0
    };
    let confirmed = if stable {
        scan_finds_no_zero(&m)
    } else {
        witness(&a, &b, &cc, &d, &m)
    };
    (stable, confirmed)
}

fn circumcircle(p1: Complex64, p2: Complex64, p3: Complex64) -> (Complex64, f64) {
    let (ax, ay, bx, by, cx, cy) = (p1.re, p1.im, p2.re, p2.im, p3.re, p3.im);
    let den = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / den;
    let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / den;
    let center = c(ux, uy);
    (center, (p1 - center).norm())
}

fn scan_points() -> impl Iterator<Item = Complex64> {
    (0..80).flat_map(|i| {
        let r = 10f64.powf(-4.0 + 8.0 * i as f64 / 79.0);
        (1..80).map(move |j| Complex64::from_polar(r, std::f64::consts::PI * j as f64 / 80.0))
    })
}

fn scan_finds_no_zero(m: &dyn Fn(Complex64) -> Complex64) -> bool {
    scan_points().all(|z| {
        let w = m(z);
        !w.is_finite() || w.im <= 1e-9 * w.norm().max(1.0)
    })
}

fn witness(a: &Complex64, b: &Complex64, cc: &Complex64, d: &Complex64, m: &dyn Fn(Complex64) -> Complex64) -> bool {
    let f = |z: Complex64, w: Complex64| a + b * z + cc * w + d * z * w;
    let ok = |z: Complex64, w: Complex64| {
        z.im > 0.0 && w.im > 0.0 && f(z, w).norm() <= 1e-9 * (1.0 + z.norm()) * (1.0 + w.norm())
    };
    // Scan z first; fall back to inverting the locus at a point of its top.
    if scan_points().any(|z| ok(z, m(z))) {
        return true;
    }
    let det = a * d - b * cc;
    if cc.norm() == 0.0 && d.norm() == 0.0 {
        let z = -a / b;
        return ok(z, c(0.0, 1.0));
    }
    if det.norm() < 1e-13 && d.norm() > 0.0 {
        let z = -cc / d;
        return ok(z, c(0.0, 1.0)) || ok(c(0.0, 1.0), m(c(0.0, 1.0)));
    }
    let (p1, p2, p3) = (m(c(-1.0, 0.0)), m(c(0.0, 0.0)), m(c(1.0, 0.0)));
    let (center, r) = circumcircle(p1, p2, p3);
    let t = if center.im + 0.5 * r > 0.0 {
        0.5 * r
    } else {
        0.5 * (r - center.im)
    };
    let w = center + c(0.0, t);
    let z = -(a + cc * w) / (b + d * w);
    ok(z, w)
}

fn stable_quadruple(rng: &mut ChaCha8Rng) -> PairCoefficients {
    let g = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
    let (mut a, mut b, mut cc, mut d) = (g(rng), g(rng), g(rng), g(rng));
    if b * cc - a * d < 0.0 {
        // Swapping roles flips the sign of bc − ad.
        (a, b, cc, d) = (b, a, d, cc);
    }
    let (a, b, cc, d) = (c(a, 0.0), c(b, 0.0), c(cc, 0.0), c(d, 0.0));
    // z → z + iτ₁, w → w + iτ₂ moves every zero strictly into the closed lower half.
    let (t1, t2) = (rng.random_range(0.05..1.0), rng.random_range(0.05..1.0));
    let i = c(0.0, 1.0);
    let mut a2 = a + i * b * t1 + i * cc * t2 - d * t1 * t2;
    let mut b2 = b + i * d * t2;
    let mut c2 = cc + i * d * t1;
    let d2 = d;
    // Real shifts and a unit rotation preserve stability.
    let (s1, s2) = (g(rng), g(rng));
    a2 += b2 * s1;
    c2 += d2 * s1;
    a2 += c2 * s2;
    b2 += d2 * s2;
    let rot = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    PairCoefficients::new(a2 * rot, b2 * rot, c2 * rot, d2 * rot)
}

fn c1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut counted, mut agree, mut unconfirmed, mut stable_cases) = (0, 0, 0, 0);
    let mut skipped = 0;
    while counted < 500 {
        let q = match rng.random_range(0..10) {
            0..=3 => PairCoefficients::new(cgauss(&mut rng), cgauss(&mut rng), cgauss(&mut rng), cgauss(&mut rng)),
            4..=7 => stable_quadruple(&mut rng),
            _ => {
                let base = stable_quadruple(&mut rng);
                let eps = if rng.random_bool(0.5) { 0.05 } else { 0.3 };
                let mut p = || eps * cgauss(&mut rng);
                PairCoefficients::new(base.a + p(), base.b + p(), base.c + p(), base.d + p())
            }
        };
        let rep = pair_stability(&q, 1e-9).map_err(err)?;
        if rep.min_slack().abs() <= 1e-9 {
            skipped += 1;
            continue;
        }
        counted += 1;
        let (oracle, confirmed) = locus_oracle(&q);
        if !confirmed {
            unconfirmed += 1;
        }
        if oracle == rep.stable && confirmed {
            agree += 1;
        }
        stable_cases += oracle as usize;
    }
    // Near-boundary cases: stable real coefficients sit on the Im = 0 faces,
    // and a 1e-12 imaginary shift stays within reach of them. Reported, not counted.
    let (mut near_flagged, mut near_agree) = (0, 0);
    for k in 0..100 {
        let g = |rng: &mut ChaCha8Rng| -> f64 { rng.sample(StandardNormal) };
        let (mut a, mut b, mut cc, mut d) = (g(&mut rng), g(&mut rng), g(&mut rng), g(&mut rng));
        if b * cc - a * d < 0.0 {
            (a, b, cc, d) = (b, a, d, cc);
        }
        let base = PairCoefficients::real(a, b, cc, d);
        let q = if k % 2 == 0 {
            base
        } else {
            PairCoefficients::new(base.a + c(0.0, 1e-12) * base.b, base.b, base.c, base.d)
        };
        let rep = pair_stability(&q, 1e-9).map_err(err)?;
        near_flagged += rep.boundary as usize;
        near_agree += (rep.stable == locus_oracle(&q).0) as usize;
    }
    Ok((
        agree == 500,
        format!(
            "{agree}/500 agree ({stable_cases} stable, {unconfirmed} unconfirmed, {skipped} within 1e-9 skipped); \
             near-boundary: {near_flagged}/100 flagged, {near_agree}/100 agree (not counted)"
        ),
    ))
}

// ---------------------------------------------------------------- criterion 2

fn direct_max_covariance(d: &SubsetDistribution) -> f64 {
    let n = d.n();
    let w = d.weights();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            let (mut pi, mut pj, mut pij) = (0.0, 0.0, 0.0);
            for (m, &p) in w.iter().enumerate() {
                let (xi, xj) = ((m >> i) & 1 == 1, (m >> j) & 1 == 1);
                pi += p * xi as u8 as f64;
                pj += p * xj as u8 as f64;
                pij += p * (xi && xj) as u8 as f64;
            }
            worst = worst.max(pij - pi * pj);
        }
    }
    worst
}

fn c2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut ray_min, mut margin_max, mut cov_max) = (f64::INFINITY, 0.0f64, f64::NEG_INFINITY);
    let mut sturm_fail = 0;
    for case in 0..200 {
        let n = rng.random_range(2..=6usize);
        let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let mut d = SubsetDistribution::from_product(&alphas).map_err(err)?;
        for _ in 0..rng.random_range(1..=10) {
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            d = d.transposition_mix(i, j, rng.random_range(0.0..1.0)).map_err(err)?;
        }
        let mut pts = default_rayleigh_points(n, 1000 + case);
        pts.truncate(100);
        let ray = rayleigh_check(&d, &pts, &all_pairs(n), -1e-12).map_err(err)?;
        ray_min = ray_min.min(ray.min_value);
        let q = d.diagonalize();
        let rr = real_rooted(&q, 1e-8).map_err(err)?;
        margin_max = margin_max.max(if rr.real_rooted { rr.margin } else { f64::INFINITY });
        if !is_real_rooted_exact(&q.coeffs).map_err(err)? {
            sturm_fail += 1;
        }
        let lib = d.max_pairwise_covariance();
        let direct = direct_max_covariance(&d);
        if (lib - direct).abs() > 1e-14 {
            return Err(format!("covariance mismatch {lib} vs {direct}"));
        }
        cov_max = cov_max.max(direct);
    }
    let pass = ray_min >= -1e-12 && margin_max <= 1e-8 && cov_max <= 1e-10 && sturm_fail == 0;
    Ok((
        pass,
        format!(
            "200 laws: rayleigh min {ray_min:.3e}, root margin max {margin_max:.3e}, \
             max covariance {cov_max:.3e}, exact real-rootedness failures {sturm_fail}"
        ),
    ))
}

// ---------------------------------------------------------------- criterion 3

fn c3() -> Outcome {
    let edges: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i + 1, 0.5)).collect();
    let alpha = vec![0.1, 0.9, 0.3, 0.7, 0.5, 0.2];
    let kernel = Kernel::from_edges(6, &edges).map_err(err)?;
    let gen = build_generator(&kernel).map_err(err)?;
    let exact = evolve(
        &SubsetDistribution::from_product(&alpha).map_err(err)?,
        &gen,
        1.0,
        1e-14,
    )
    .map_err(err)?;
    let spec = ExperimentSpec {
        kernel: KernelSpec::Edges { n: 6, edges },
        boundary: BoundarySpec::Closed,
        initial: InitialLaw::Product { alpha },
        t: 1.0,
        statistic: Statistic::Occupancy,
        replicas: 100_000,
        master_seed: 303,
        engine: Engine::Forward,
    };
    let set = run_experiment(&spec, 1).map_err(err)?;
    let mut hist = vec![0.0; 64];
    for &v in &set.values {
        hist[v as usize] += 1.0 / set.values.len() as f64;
    }
    let tv = 0.5
        * hist
            .iter()
            .zip(exact.dist.weights())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();
    Ok((tv < 0.02, format!("TV(exact, empirical N=1e5) = {tv:.4} (< 0.02)")))
}

// ---------------------------------------------------------------- criterion 4

/// exp(t(P − I)) from the spectral decomposition of the symmetric kernel.
fn heat_by_eigen(kernel: &Kernel, t: f64) -> DMatrix<f64> {
    let n = kernel.len();
    let p = DMatrix::from_fn(n, n, |x, y| if x == y { kernel.holding(x) } else { kernel.p(x, y) });
    let eig = SymmetricEigen::new(p);
    let diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| ((l - 1.0) * t).exp()));
    &eig.eigenvectors * diag * eig.eigenvectors.transpose()
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    // An 8-site ring with random chords, row mass kept below 1.
    let mut edges: Vec<(usize, usize, f64)> = (0..8).map(|i| (i, (i + 1) % 8, rng.random_range(0.05..0.3))).collect();
    edges.push((0, 4, 0.2));
    edges.push((2, 7, 0.15));
    edges.push((1, 5, 0.1));
    let kernel = Kernel::from_edges(8, &edges).map_err(err)?;
    let gen = build_generator(&kernel).map_err(err)?;
    let mut worst = 0.0f64;
    for mask in [0b1011_0010usize, 0b0000_1111, 0b0101_0101] {
        let eta: Vec<f64> = (0..8).map(|y| ((mask >> y) & 1) as f64).collect();
        let start = SubsetDistribution::point_mass(8, mask).map_err(err)?;
        for t in [0.5, 1.0, 2.0] {
            let ev = evolve(&start, &gen, t, 1e-15).map_err(err)?;
            let one = one_point_function(&ev.dist);
            let pt = heat_by_eigen(&kernel, t);
            for x in 0..8 {
                let dual: f64 = (0..8).map(|y| pt[(x, y)] * eta[y]).sum();
                worst = worst.max((one[x] - dual).abs());
            }
        }
    }
    Ok((
        worst < 1e-8,
        format!("max |P(occupied) - sum p_t eta| = {worst:.2e} (< 1e-8)"),
    ))
}

// ---------------------------------------------------------------- criterion 5

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut systems: Vec<(Kernel, SubsetDistribution)> = Vec::new();
    let path: Vec<(usize, usize, f64)> = (0..5).map(|i| (i, i + 1, 0.5)).collect();
    systems.push((
        Kernel::from_edges(6, &path).map_err(err)?,
        SubsetDistribution::from_product(&[0.2, 0.8, 0.5, 0.1, 0.9, 0.4]).map_err(err)?,
    ));
    let random_edges: Vec<(usize, usize, f64)> = vec![
        (0, 1, 0.3),
        (1, 2, 0.2),
        (2, 3, 0.4),
        (3, 4, 0.1),
        (4, 5, 0.35),
        (5, 6, 0.25),
        (0, 6, 0.3),
        (1, 4, 0.2),
    ];
    let weights: Vec<f64> = (0..128).map(|_| rng.random_range(0.0..1.0)).collect();
    systems.push((
        Kernel::from_edges(7, &random_edges).map_err(err)?,
        SubsetDistribution::new(7, weights.iter().map(|w| w / weights.iter().sum::<f64>()).collect()).map_err(err)?,
    ));
    systems.push((
        build_line(3, &JumpLaw::simple()).map_err(err)?,
        SubsetDistribution::point_mass(7, 0b1100101).map_err(err)?,
    ));
    let mut worst = 0.0f64;
    for (kernel, dist) in &systems {
        let gen = build_generator(kernel).map_err(err)?;
        let before = dist.diagonalize();
        for t in [0.5, 2.0, 5.0] {
            let after = evolve(dist, &gen, t, 1e-15).map_err(err)?.dist.diagonalize();
            worst = worst.max(before.max_abs_diff(&after));
        }
    }
    Ok((
        worst <= 1e-12,
        format!("max coefficient change {worst:.2e} over 3 systems x 3 times (<= 1e-12)"),
    ))
}

// ---------------------------------------------------------------- criterion 6

fn c6() -> Outcome {
    let mut law = BTreeMap::new();
    for (k, v) in [(1, 0.3), (2, 0.2)] {
        law.insert(k, v);
        law.insert(-k, v);
    }
    let cases: Vec<(String, Kernel, ProfileFn)> = vec![
        (
            "line r=5".into(),
            build_line(5, &JumpLaw::simple()).map_err(err)?,
            Box::new(|k: &Kernel| {
                let p = line_alpha(0.1, 0.8, 5).unwrap();
                (p.values(k), p.open_boundary(k))
            }),
        ),
        (
            "line r=3 range 2".into(),
            build_line(3, &JumpLaw::new(&law).map_err(err)?).map_err(err)?,
            Box::new(|k: &Kernel| {
                // Reservoir densities 0.1 on the left, 0.9 on the right.
                let ob = OpenBoundary {
                    rate: (0..k.len()).map(|x| k.escape(x)).collect(),
                    density: (0..k.len())
                        .map(|x| if k.coord(x).unwrap() < 0 { 0.1 } else { 0.9 })
                        .collect(),
                };
                (harmonic_extension(k, &ob, 1e-14).unwrap(), ob)
            }),
        ),
        (
            "tree depth 1".into(),
            build_binary_tree(1),
            Box::new(|k: &Kernel| {
                let p = tree_alpha(0.0, 1.0).unwrap();
                (p.values(k), p.open_boundary(k))
            }),
        ),
        (
            "tree depth 1, 0.25..0.75".into(),
            build_binary_tree(1),
            Box::new(|k: &Kernel| {
                let p = tree_alpha(0.25, 0.75).unwrap();
                (p.values(k), p.open_boundary(k))
            }),
        ),
    ];
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (name, full, profile) in &cases {
        let k = killed_truncation(full);
        if k.len() > 12 {
            return Err(format!("{name} has {} sites", k.len()));
        }
        let (alpha, ob) = profile(&k);
        let gen = build_open_generator(&k, &ob).map_err(err)?;
        let lim =
            stationary_limit(&SubsetDistribution::from_product(&alpha).map_err(err)?, &gen, 1e-13).map_err(err)?;
        let dual = dual_integral(&k, &alpha, 1e-11).map_err(err)?;
        if dual.integrand >= dual.tol || dual.integrand.is_nan() {
            return Ok((false, format!("{name}: horizon monitor not satisfied")));
        }
        let mut case_worst = 0.0f64;
        for x in 0..k.len() {
            for y in 0..k.len() {
                if x != y {
                    let cov = lim.dist.pairwise_covariance(x, y).map_err(err)?;
                    case_worst = case_worst.max((dual.field.get(x, y) + cov).abs());
                }
            }
        }
        worst = worst.max(case_worst);
        notes.push(format!(
            "{name} ({} sites, T={}) {case_worst:.1e}",
            k.len(),
            dual.horizon
        ));
    }
    Ok((
        worst < 1e-5,
        format!("max |dual + Cov| = {worst:.2e} (< 1e-5); {}", notes.join("; ")),
    ))
}

// ---------------------------------------------------------------- criterion 7

fn c7() -> Outcome {
    let mut worst_g = 0.0f64;
    let q = TreeQuotient::new(20, true);
    let g = q.green_to_left_endpoint().map_err(err)?;
    for d in 0..=10u32 {
        let exact = 2f64.powi(1 - d as i32);
        worst_g = worst_g.max((g[q.index(Side::L, d)] - exact).abs());
        if d >= 1 {
            worst_g = worst_g.max((g[q.index(Side::R, d - 1)] - exact).abs());
        }
    }
    // Window sups: library (lumped, depth 48) against a direct sum of
    // 2^{1-d(x,y)} over an explicit tree, and against the stated constants.
    let deep = TreeQuotient::new(48, true);
    let (mut lib_vs_direct, mut worst_3n, mut worst_level) = (0.0f64, 0.0f64, 0.0f64);
    let mut two_n = Vec::new();
    for n in 1..=8u32 {
        let nf = n as f64;
        let explicit = build_binary_tree(n + 1);
        let direct = |keep: &dyn Fn(usize) -> bool| {
            (0..explicit.len())
                .map(|x| {
                    let dist = explicit.distances_from(x);
                    (0..explicit.len())
                        .filter(|&y| keep(y))
                        .map(|y| 2f64.powi(1 - dist[y] as i32))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        };
        let in_l = |y: usize| explicit.side(y) == Some(Side::L);
        let windows: [(SiteWindow, f64, SiteFilter); 3] = [
            (
                SiteWindow::below_level(None, n),
                3.0 * nf,
                Box::new(|y| explicit.level(y) < n),
            ),
            (
                SiteWindow::below_level(Some(Side::L), n),
                2.0 * nf,
                Box::new(|y| in_l(y) && explicit.level(y) < n),
            ),
            (
                SiteWindow::at_level(Some(Side::L), n),
                3.0 - 2f64.powi(-(n as i32)),
                Box::new(|y| in_l(y) && explicit.level(y) == n),
            ),
        ];
        for (i, (w, stated, keep)) in windows.iter().enumerate() {
            let lib = deep.green_window_sup(w).map_err(err)?.value;
            lib_vs_direct = lib_vs_direct.max((lib - direct(keep.as_ref())).abs());
            match i {
                0 => worst_3n = worst_3n.max((lib - stated).abs()),
                1 => two_n.push((n, lib, (lib - stated).abs())),
                _ => worst_level = worst_level.max((lib - stated).abs()),
            }
        }
    }
    let worst_2n = two_n.iter().map(|t| t.2).fold(0.0, f64::max);
    let off: Vec<String> = two_n
        .iter()
        .filter(|t| t.2 >= 1e-4)
        .map(|t| format!("n={} {:.4}", t.0, t.1))
        .collect();
    let k = build_binary_tree(22);
    let mut worst_phi = 0.0f64;
    for lambda in [0.0, 0.3, 0.7] {
        for rho in [0.1, 0.5, 1.0] {
            let phi = dirichlet_sum(&k, &tree_alpha(lambda, rho).map_err(err)?.values(&k)).value;
            worst_phi = worst_phi.max((phi - 2.0 * (rho - lambda) * (rho - lambda) / 9.0).abs());
        }
    }
    let refined = tree_refined_constant(0.0, 1.0, 30).value;
    let err_r = (refined - 40.0 / 189.0).abs();
    let pass =
        worst_g < 1e-6 && worst_3n < 1e-4 && worst_2n < 1e-4 && worst_level < 1e-4 && worst_phi < 1e-6 && err_r < 1e-8;
    let two_n_note = if off.is_empty() {
        String::new()
    } else {
        format!(
            " (sup over y in L, l<n exceeds 2n: {}; the direct sum peaks at level-1 sites with 2.5n - 1.5, \
             the value 2n is attained at the left endpoint)",
            off.join(", ")
        )
    };
    Ok((
        pass,
        format!(
            "errors: G {worst_g:.1e}, 3n {worst_3n:.1e}, 2n {worst_2n:.1e}{two_n_note}, 3-2^-n {worst_level:.1e}, \
             library vs direct sum {lib_vs_direct:.1e}, Phi {worst_phi:.1e}, refined constant {err_r:.1e}"
        ),
    ))
}

// ---------------------------------------------------------------- criterion 8

fn c8() -> Outcome {
    let profile = tree_alpha(0.0, 1.0).map_err(err)?;
    let (lo, hi) = (23.0 / 189.0 - 0.02, 1.0 / 3.0 + 0.02);
    let mut pass = true;
    let mut parts = Vec::new();
    for n in 6..=10u32 {
        let v = TreePairChain::new(n + 30)
            .window_variance(&profile, &SiteWindow::below_level(Some(Side::L), n), 1e-12)
            .map_err(err)?;
        let per = v.variance / n as f64;
        pass &= per >= lo && per <= hi && v.ratio <= 1.0 + 1e-10;
        parts.push(format!("n={n} Var/n={per:.4} ratio={:.4}", v.ratio));
    }
    Ok((pass, format!("{} (band [{lo:.4}, {hi:.4}])", parts.join(", "))))
}

// ---------------------------------------------------------------- criterion 9

fn c9() -> Outcome {
    let env = thm3_envelope(1.0).map_err(err)?;
    let mean_coeff = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let var_upper = 1.0 / (2.0 * std::f64::consts::PI.sqrt());
    if (env.mean_coeff - mean_coeff).abs() > 1e-15 || (env.var_upper - var_upper).abs() > 1e-15 {
        return Err("envelope disagrees with closed form".into());
    }
    let mut gaps = Vec::new();
    let mut var_ok = true;
    let mut parts = Vec::new();
    let mut last = None;
    for t in [64.0f64, 256.0, 1024.0] {
        let spec = ExperimentSpec {
            kernel: KernelSpec::Line {
                radius: (10.0 * t.sqrt()).ceil() as u32,
                law: None,
            },
            boundary: BoundarySpec::Closed,
            initial: InitialLaw::Step,
            t,
            statistic: Statistic::WPlus,
            replicas: 2000,
            master_seed: 7,
            engine: Engine::Forward,
        };
        let set = run_experiment(&spec, 1).map_err(err)?;
        if let Some(m) = &set.truncation_monitor {
            if !m.passed {
                return Ok((false, format!("t={t}: truncation monitor failed")));
            }
        }
        let x = set.samples_f64();
        let m = empirical_moments(&x).map_err(err)?;
        let (mr, vr) = (m.mean / t.sqrt(), m.var / t.sqrt());
        gaps.push((mr - mean_coeff).abs() / mean_coeff);
        var_ok &= vr >= env.var_lower - 0.05 && vr <= env.var_upper + 0.05;
        parts.push(format!("t={t}: mean/sqrt(t)={mr:.4} Var/sqrt(t)={vr:.4}"));
        last = Some(normality_distance(&x).map_err(err)?);
    }
    let nd = last.expect("three times");
    let mean_ok = gaps[2] <= 0.10 && gaps[0] > gaps[1] && gaps[1] > gaps[2];
    let ks_ok = nd.ks <= 0.05;
    Ok((
        mean_ok && var_ok && ks_ok,
        format!(
            "{}; relative mean gaps {:.4} > {:.4} > {:.4} [{}]; variance band [{:.4}, {:.4}] [{}]; \
             KS at t=1024 {:.4} vs 0.05 [{}] (continuity-corrected {:.4}; the unit lattice with sd near 1.9 \
             keeps plain KS near 0.1)",
            parts.join(", "),
            gaps[0],
            gaps[1],
            gaps[2],
            if mean_ok { "ok" } else { "fail" },
            env.var_lower - 0.05,
            env.var_upper + 0.05,
            if var_ok { "ok" } else { "fail" },
            nd.ks,
            if ks_ok { "ok" } else { "fail" },
            nd.ks_continuity.unwrap_or(f64::NAN),
        ),
    ))
}

// ---------------------------------------------------------------- criterion 10

fn c10() -> Outcome {
    let h = h_constant().map_err(err)?;
    let refine = (h.value - h.coarse).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut worst_z = 0.0f64;
    for i in 0..20 {
        let r = (i as f64 + 0.5) / 20.0;
        let exact = h_of_r(r).map_err(err)?;
        let (mc, se) = h_monte_carlo(r, 1_000_000, &mut rng);
        worst_z = worst_z.max((mc - exact).abs() / se);
    }
    let pass = refine <= 1e-6 && h.value > 0.5 && h.value < 1.0 && worst_z <= 3.0;
    Ok((
        pass,
        format!(
            "H = {:.10}, refinements differ by {refine:.1e}; worst Monte Carlo deviation {worst_z:.2} SE over 20 points",
            h.value
        ),
    ))
}

// ---------------------------------------------------------------- criterion 11

fn c11() -> Outcome {
    let mut tvs = Vec::new();
    for n in [6u32, 8, 10] {
        let spec = ExperimentSpec {
            kernel: KernelSpec::Tree { depth: 12 },
            boundary: BoundarySpec::Reservoirs { lambda: 0.0, rho: 1.0 },
            initial: InitialLaw::Harmonic { lambda: 0.0, rho: 1.0 },
            t: 200.0,
            statistic: Statistic::WindowSum {
                window: SiteWindow::at_level(Some(Side::L), n),
            },
            replicas: 10_000,
            master_seed: 11,
            engine: Engine::DualTracer,
        };
        let set = run_experiment(&spec, 1).map_err(err)?;
        tvs.push(tv_poisson(&set.samples_f64(), 1.0 / 3.0).map_err(err)?);
    }
    let pass = tvs[0] >= tvs[1] && tvs[1] >= tvs[2] && tvs[2] <= 0.05;
    Ok((
        pass,
        format!(
            "TV to Poisson(1/3) at n=6,8,10: {:.4}, {:.4}, {:.4} (nonincreasing, last <= 0.05)",
            tvs[0], tvs[1], tvs[2]
        ),
    ))
}
