//! Self-checks: numerical oracles and scaling experiments that exercise
//! every module, each with a measured value, a threshold and a time limit.
//!
//! ```
//! use hypegbms::validate::run_check;
//!
//! let outcome = run_check("distance-agreement", 42)?;
//! assert!(outcome.passed, "{outcome:?}");
//! # Ok::<(), hypegbms::Error>(())
//! ```

use std::fmt;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::clustering::{
    euclidean_limit_bandwidth, gbms_step, hypegbms_step, run_hypegbms, run_hypegbms_projected, RunConfig, StopReason,
    StoppingMonitor,
};
use crate::data::{make_hierarchical, HierarchySpec};
use crate::error::{Error, Result};
use crate::geometry::{
    dist, dist_cosh, dist_hyperboloid, exp_map, frechet_mean, log_map, mobius_add, mobius_weighted_mean,
    project_to_ball, raw, to_hyperboloid, BallPoint, Curvature, FrechetOptions, TangentVector,
};
use crate::kernel::{gaussian_weights, kde, kde_gradient, pairwise_sq_dist};
use crate::metrics::{ari, nmi};

/// Names of all checks, in the order [`run_all`] executes them.
pub const CHECKS: [&str; 10] = [
    "distance-agreement",
    "exp-log-roundtrip",
    "euclidean-limit",
    "mobius-frechet-scaling",
    "density-ascent",
    "kde-gradient",
    "metric-oracles",
    "end-to-end",
    "complexity-scaling",
    "stopping-criteria",
];

/// How a measured value is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    AtMost(f64),
    AtLeast(f64),
    Between(f64, f64),
}

impl Threshold {
    pub fn accepts(self, v: f64) -> bool {
        match self {
            Threshold::AtMost(t) => v <= t,
            Threshold::AtLeast(t) => v >= t,
            Threshold::Between(lo, hi) => v >= lo && v <= hi,
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::AtMost(t) => write!(f, "<= {t:e}"),
            Threshold::AtLeast(t) => write!(f, ">= {t}"),
            Threshold::Between(lo, hi) => write!(f, "in [{lo}, {hi}]"),
        }
    }
}

/// Result of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: Threshold,
    pub elapsed: Duration,
    pub time_limit: Duration,
    /// Measured value accepted and finished within the time limit.
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Run just this check.
    pub only: Option<String>,
    /// Corrupt every measurement so that all checks fail. For testing callers.
    pub inject_fault: bool,
}

type CheckFn = fn(u64) -> Result<Measurement>;

struct Measurement {
    value: f64,
    /// Extra pass conditions beyond the threshold; a message explains any failure.
    failure: Option<String>,
    detail: String,
}

impl Measurement {
    fn new(value: f64, detail: impl Into<String>) -> Self {
        Measurement {
            value,
            failure: None,
            detail: detail.into(),
        }
    }
}

/// Runs one check by name.
pub fn run_check(name: &str, seed: u64) -> Result<CheckOutcome> {
    run_inner(name, seed, false)
}

/// Runs every check, or only `opts.only`.
pub fn run_all(opts: &ValidateOptions) -> Result<Vec<CheckOutcome>> {
    match &opts.only {
        Some(name) => Ok(vec![run_inner(name, opts.seed, opts.inject_fault)?]),
        None => CHECKS
            .iter()
            .map(|name| run_inner(name, opts.seed, opts.inject_fault))
            .collect(),
    }
}

fn run_inner(name: &str, seed: u64, inject_fault: bool) -> Result<CheckOutcome> {
    let (name, threshold, limit, f): (&'static str, Threshold, u64, CheckFn) = match name {
        "distance-agreement" => ("distance-agreement", Threshold::AtMost(1e-9), 1, distance_agreement),
        "exp-log-roundtrip" => ("exp-log-roundtrip", Threshold::AtMost(1e-10), 1, exp_log_roundtrip),
        "euclidean-limit" => ("euclidean-limit", Threshold::AtMost(1e-4), 5, euclidean_limit),
        "mobius-frechet-scaling" => ("mobius-frechet-scaling", Threshold::AtLeast(2.5), 10, frechet_scaling),
        "density-ascent" => ("density-ascent", Threshold::AtMost(1e-3), 30, density_ascent),
        "kde-gradient" => ("kde-gradient", Threshold::AtMost(1e-5), 5, kde_gradient_check),
        "metric-oracles" => ("metric-oracles", Threshold::AtMost(1e-12), 10, metric_oracles),
        "end-to-end" => ("end-to-end", Threshold::AtLeast(0.9), 60, end_to_end),
        "complexity-scaling" => (
            "complexity-scaling",
            Threshold::Between(3.0, 6.0),
            60,
            complexity_scaling,
        ),
        "stopping-criteria" => ("stopping-criteria", Threshold::AtMost(0.0), 5, stopping_criteria),
        other => {
            return Err(Error::invalid(format!(
                "unknown check {other:?}; expected one of: {}",
                CHECKS.join(", ")
            )))
        }
    };
    let start = Instant::now();
    let mut m = f(seed).unwrap_or_else(|e| Measurement {
        value: f64::NAN,
        failure: Some(e.to_string()),
        detail: String::new(),
    });
    let elapsed = start.elapsed();
    if inject_fault {
        m.value = f64::NAN;
        m.failure = Some("fault injected".into());
    }
    let time_limit = Duration::from_secs(limit);
    let mut detail = m.detail;
    if let Some(why) = &m.failure {
        detail = if detail.is_empty() {
            why.clone()
        } else {
            format!("{detail}; {why}")
        };
    }
    if elapsed >= time_limit {
        detail = format!("{detail}; exceeded time limit")
            .trim_start_matches("; ")
            .to_string();
    }
    Ok(CheckOutcome {
        name,
        measured: m.value,
        threshold,
        elapsed,
        time_limit,
        passed: m.failure.is_none() && threshold.accepts(m.value) && elapsed < time_limit,
        detail,
    })
}

fn gaussian_vec(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

/// A point with Euclidean norm uniform in `[0, max_frac * radius)`.
fn random_point(rng: &mut ChaCha8Rng, dim: usize, curvature: Curvature, max_frac: f64) -> BallPoint {
    let v = gaussian_vec(rng, dim);
    let s = max_frac * curvature.radius() * rng.random::<f64>() / raw::norm(&v);
    BallPoint::new(v.iter().map(|x| x * s).collect(), curvature).expect("inside the ball")
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn distance_agreement(seed: u64) -> Result<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut longest = 0.0f64;
    for _ in 0..1000 {
        let dim = rng.random_range(2..=5);
        let x = random_point(&mut rng, dim, Curvature::UNIT, 0.95);
        let y = random_point(&mut rng, dim, Curvature::UNIT, 0.95);
        let a = dist(&x, &y)?;
        let b = dist_cosh(&x, &y)?;
        let c = dist_hyperboloid(&to_hyperboloid(&x)?, &to_hyperboloid(&y)?)?;
        worst = worst.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
        longest = longest.max(a);
    }
    Ok(Measurement::new(
        worst,
        format!("1000 pairs, longest distance {longest:.3}"),
    ))
}

fn exp_log_roundtrip(seed: u64) -> Result<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c = Curvature::new(-rng.random_range(0.25..2.0))?;
        let dim = rng.random_range(1..=5);
        let x = random_point(&mut rng, dim, c, 0.95);
        let y = random_point(&mut rng, dim, c, 0.95);
        let back = exp_map(&log_map(&x, &y)?);
        for (a, b) in back.coords().iter().zip(y.coords()) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Measurement::new(worst, "1000 pairs, curvature in [-2, -0.25)"))
}

fn euclidean_limit(seed: u64) -> Result<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Curvature::new(-1e-8)?;

    let mut add_err = 0.0f64;
    for _ in 0..1000 {
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s = mobius_add(&BallPoint::new(v.clone(), c)?, &BallPoint::new(w.clone(), c)?)?;
        for ((si, vi), wi) in s.coords().iter().zip(&v).zip(&w) {
            add_err = add_err.max((si - (vi + wi)).abs());
        }
    }

    let values: Vec<f64> = (0..50 * 3).map(|_| StandardNormal.sample(&mut rng)).collect();
    let data = Array2::from_shape_vec((50, 3), values).expect("shape");
    let sigma = 0.5;
    let mut hyper = project_to_ball(&data, c, 1.0)?;
    let rows: Vec<f64> = hyper.iter().flat_map(|p| p.coords().to_vec()).collect();
    let mut flat = Array2::from_shape_vec((50, 3), rows).expect("shape");
    let mut monitor = StoppingMonitor::new(1e-5, 1e-4);
    let mut traj_err = 0.0f64;
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        let h = hypegbms_step(&hyper, sigma)?;
        let g = gbms_step(&flat, euclidean_limit_bandwidth(sigma))?;
        for (p, row) in h.points.iter().zip(g.points.rows()) {
            for (a, b) in p.coords().iter().zip(row) {
                traj_err = traj_err.max((a - b).abs());
            }
        }
        let entropy = crate::clustering::movement_entropy(&h.movements, 0.9)?;
        hyper = h.points;
        flat = g.points;
        if monitor.observe(h.avg_movement, entropy).is_some() {
            break;
        }
    }
    Ok(Measurement::new(
        add_err.max(traj_err),
        format!("addition {add_err:.1e}, trajectories {traj_err:.1e} over {iterations} iterations"),
    ))
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn frechet_scaling(seed: u64) -> Result<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radii = [0.05f64, 0.1, 0.2, 0.4];
    let mut means = Vec::new();
    for &r in &radii {
        // Uniform in the geodesic ball of radius r about the origin.
        let euclidean = (r / 2.0).tanh();
        let mut total = 0.0;
        for _ in 0..50 {
            let cloud: Vec<BallPoint> = (0..10)
                .map(|_| loop {
                    let v: Vec<f64> = (0..2).map(|_| rng.random_range(-euclidean..euclidean)).collect();
                    if raw::norm(&v) < euclidean {
                        break BallPoint::new(v, Curvature::UNIT).expect("inside the ball");
                    }
                })
                .collect();
            let w = random_weights(&mut rng, 10);
            let m = mobius_weighted_mean(&cloud, &w)?;
            let f = frechet_mean(&cloud, &w, FrechetOptions::default())?;
            total += dist(&m, &f)?;
        }
        means.push(total / 50.0);
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.ln()).collect();
    let s = slope(&xs, &ys);
    let detail = radii
        .iter()
        .zip(&means)
        .map(|(r, m)| format!("r={r}: {m:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(Measurement::new(s, detail))
}

fn mean_density_of(points: &[BallPoint], sigma: f64) -> Result<f64> {
    Ok(gaussian_weights(&pairwise_sq_dist(points)?, sigma)?.mean_density())
}

fn density_ascent(seed: u64) -> Result<Measurement> {
    let ds = make_hierarchical(&HierarchySpec {
        num_roots: 1,
        children_per_root: 3,
        points_per_leaf: 100,
        leaf_spread: 0.2,
        level_gap: 10.0,
        dim: 2,
        seed,
    })?;
    let points = project_to_ball(&ds.features, Curvature::UNIT, 0.4)?;
    let mut worst_drop = 0.0f64;
    let mut summary = Vec::new();
    let mut failure = None;
    for sigma in [0.05, 0.1, 0.2] {
        let result = run_hypegbms_projected(points.clone(), &RunConfig::new(sigma))?;
        let finals = result
            .positions
            .rows()
            .into_iter()
            .map(|r| BallPoint::new(r.to_vec(), Curvature::UNIT))
            .collect::<Result<Vec<_>>>()?;
        let mut densities: Vec<f64> = result.trace.iter().map(|t| t.mean_density).collect();
        densities.push(mean_density_of(&finals, sigma)?);
        worst_drop = densities.windows(2).map(|w| w[0] - w[1]).fold(worst_drop, f64::max);
        summary.push(format!(
            "sigma {sigma}: {:.4} -> {:.4} in {} iterations",
            densities[0],
            densities[densities.len() - 1],
            result.iterations()
        ));
        if result.stop_reason == StopReason::MaxIter {
            failure = Some(format!("sigma {sigma} did not stop before max_iter"));
        }
    }
    let mut m = Measurement::new(worst_drop, summary.join(", "));
    m.failure = failure;
    Ok(m)
}

fn kde_gradient_check(seed: u64) -> Result<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = Curvature::new(-rng.random_range(0.5..2.0))?;
        let dim = rng.random_range(2..=4);
        let n = rng.random_range(5..30);
        let data: Vec<BallPoint> = (0..n).map(|_| random_point(&mut rng, dim, c, 0.7)).collect();
        let x = random_point(&mut rng, dim, c, 0.6);
        let sigma = rng.random_range(0.3..1.5);
        let grad = kde_gradient(&x, &data, sigma)?;
        let u = TangentVector::new(x.clone(), gaussian_vec(&mut rng, dim))?;
        let plus = kde(&exp_map(&u.scaled(h)), &data, sigma)?;
        let minus = kde(&exp_map(&u.scaled(-h)), &data, sigma)?;
        let fd = (plus - minus) / (2.0 * h);
        let an = grad.inner(&u)?;
        let scale = grad.metric_norm() * u.metric_norm();
        worst = worst.max((fd - an).abs() / scale);
    }
    Ok(Measurement::new(worst, "20 configurations, step 1e-5"))
}

/// Every set partition of `0..n` as a restricted-growth string.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            prefix.push(l);
            grow(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, &mut out);
    out
}

/// ARI from the four pair counts.
fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let (mut ss, mut sd, mut ds, mut dd) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if den == 0.0 {
        1.0
    } else {
        2.0 * (ss * dd - sd * ds) / den
    }
}

/// NMI as `(H(A) + H(B) - H(A, B)) / ((H(A) + H(B)) / 2)`.
fn nmi_plugin(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let h = |keys: Vec<(usize, usize)>| {
        let mut counts = std::collections::BTreeMap::new();
        for k in keys {
            *counts.entry(k).or_insert(0usize) += 1;
        }
        -counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum::<f64>()
    };
    let ha = h(a.iter().map(|&x| (x, 0)).collect());
    let hb = h(b.iter().map(|&y| (y, 0)).collect());
    let hab = h(a.iter().copied().zip(b.iter().copied()).collect());
    if ha + hb == 0.0 {
        return 1.0;
    }
    ((ha + hb - hab) / ((ha + hb) / 2.0)).clamp(0.0, 1.0)
}

fn metric_oracles(_seed: u64) -> Result<Measurement> {
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for n in 2..=6 {
        let parts = set_partitions(n);
        for a in &parts {
            for b in &parts {
                worst = worst.max((ari(a, b)? - ari_pairs(a, b)).abs());
                worst = worst.max((nmi(a, b)? - nmi_plugin(a, b)).abs());
                pairs += 1;
            }
        }
    }
    let crossed = ari(&[0, 0, 1, 1], &[0, 1, 0, 1])?;
    let mut m = Measurement::new(worst, format!("{pairs} partition pairs, n = 2..6"));
    if crossed != -0.5 {
        m.failure = Some(format!("ARI of crossed halves is {crossed}, expected -0.5"));
    }
    Ok(m)
}

fn end_to_end(seed: u64) -> Result<Measurement> {
    let ds = make_hierarchical(&HierarchySpec {
        seed,
        ..HierarchySpec::default()
    })?;
    let truth = ds.labels.as_ref().expect("generator labels");
    let mut best: Option<(f64, f64, usize)> = None;
    for k in 1..=10 {
        let sigma = k as f64 / 10.0;
        let r = run_hypegbms(&ds.features, &RunConfig::new(sigma))?;
        if r.stop_reason == StopReason::MaxIter {
            continue;
        }
        let score = ari(&r.labels, truth)?;
        if best.is_none_or(|(b, _, _)| score > b) {
            best = Some((score, sigma, r.iterations()));
        }
    }
    Ok(match best {
        Some((score, sigma, iters)) => {
            Measurement::new(score, format!("best sigma {sigma}, {iters} iterations, N={}", ds.len()))
        }
        None => Measurement {
            value: f64::NAN,
            failure: Some("every sigma ran to max_iter".into()),
            detail: String::new(),
        },
    })
}

fn time_step(points: &[BallPoint]) -> Result<Duration> {
    let start = Instant::now();
    std::hint::black_box(hypegbms_step(std::hint::black_box(points), 0.5)?);
    Ok(start.elapsed())
}

fn complexity_scaling(seed: u64) -> Result<Measurement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..1000 * 4).map(|_| StandardNormal.sample(&mut rng)).collect();
    let data = Array2::from_shape_vec((1000, 4), values).expect("shape");
    let points = project_to_ball(&data, Curvature::UNIT, 1.0)?;
    let small = &points[..500];
    time_step(small)?;
    // Alternate the sizes so both see the same machine state; keep the fastest of each.
    let (mut t_small, mut t_large) = (Duration::MAX, Duration::MAX);
    for _ in 0..12 {
        t_small = t_small.min(time_step(small)?);
        t_large = t_large.min(time_step(&points)?);
    }
    let ratio = t_large.as_secs_f64() / t_small.as_secs_f64();
    Ok(Measurement::new(
        ratio,
        format!(
            "N=500: {:.1} ms, N=1000: {:.1} ms",
            t_small.as_secs_f64() * 1e3,
            t_large.as_secs_f64() * 1e3
        ),
    ))
}

fn stopping_criteria(_seed: u64) -> Result<Measurement> {
    let mut failures = Vec::new();

    let same = Array2::from_elem((20, 3), 1.5);
    let r = run_hypegbms(&same, &RunConfig::new(0.5))?;
    if r.iterations() != 1 || r.stop_reason != StopReason::Movement {
        failures.push(format!(
            "identical input stopped at iteration {} ({})",
            r.iterations(),
            r.stop_reason
        ));
    }

    let mut monitor = StoppingMonitor::new(1e-5, 1e-4);
    let trace = [(0.5, 1.2), (0.4, 0.9), (0.3, 0.9 + 5e-5)];
    let verdicts: Vec<Option<StopReason>> = trace.iter().map(|&(d, h)| monitor.observe(d, h)).collect();
    if verdicts != [None, None, Some(StopReason::Entropy)] {
        failures.push(format!("stagnant entropy trace gave {verdicts:?}"));
    }

    let mut m = Measurement::new(failures.len() as f64, "identical input and crafted entropy trace");
    if !failures.is_empty() {
        m.failure = Some(failures.join("; "));
    }
    Ok(m)
}
