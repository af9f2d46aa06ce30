use std::time::Instant;

use anyhow::anyhow;
use hypegbms::clustering::{run_gbms, run_hypegbms, ClusterResult, RunConfig};
use hypegbms::data::{load_csv, Dataset, HeaderMode};
use hypegbms::geometry::Curvature;
use hypegbms::metrics::{ari, nmi};

use crate::args::{Algorithm, ClusterArgs, CommonArgs};
use crate::report::{write_json, Report};
use crate::Failure;

pub fn load(common: &CommonArgs) -> Result<Dataset, Failure> {
    Ok(load_csv(
        &common.input,
        common.label_column.as_ref(),
        HeaderMode::Detect,
    )?)
}

/// Validated configuration for one run. `curvature` is required for HypeGBMS
/// and ignored for GBMS.
pub fn config(common: &CommonArgs, sigma: f64, curvature: Option<f64>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::new(sigma);
    if common.algorithm == Algorithm::Hypegbms {
        let c = curvature.ok_or_else(|| Failure::usage(anyhow!("--curvature is required for hypegbms")))?;
        cfg.curvature = Curvature::new(c)?;
    }
    cfg.epsilon = common.epsilon;
    cfg.delta = common.delta;
    cfg.gamma = common.gamma;
    cfg.max_iter = common.max_iter;
    cfg.scale = common.scale;
    cfg.seed = common.seed;
    cfg.validate()?;
    Ok(cfg)
}

pub fn execute(algorithm: Algorithm, ds: &Dataset, cfg: &RunConfig) -> Result<ClusterResult, Failure> {
    Ok(match algorithm {
        Algorithm::Hypegbms => run_hypegbms(&ds.features, cfg)?,
        Algorithm::Gbms => run_gbms(&ds.features, cfg)?,
    })
}

/// ARI and NMI against the dataset's labels, if it has any.
pub fn scores(ds: &Dataset, labels: &[usize]) -> Result<Option<(f64, f64)>, Failure> {
    match &ds.labels {
        // Both metrics need at least two items.
        Some(truth) if truth.len() >= 2 => Ok(Some((ari(labels, truth)?, nmi(labels, truth)?))),
        _ => Ok(None),
    }
}

pub fn run(args: &ClusterArgs) -> Result<(), Failure> {
    let cfg = config(&args.common, args.sigma, args.curvature)?;
    let ds = load(&args.common)?;
    let start = Instant::now();
    let result = execute(args.common.algorithm, &ds, &cfg)?;
    let elapsed = start.elapsed();

    let mut text = String::with_capacity(result.labels.len() * 3);
    for l in &result.labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    std::fs::write(&args.output, text)
        .map_err(|e| Failure::usage(anyhow::Error::new(e).context(format!("writing {}", args.output.display()))))?;

    let metrics = scores(&ds, &result.labels)?;
    eprintln!(
        "{}: {} clusters after {} iterations ({}){}",
        args.common.algorithm.name(),
        result.num_clusters,
        result.iterations(),
        result.stop_reason,
        metrics.map_or(String::new(), |(a, n)| format!(", ARI {a:.4}, NMI {n:.4}"))
    );
    if let Some(path) = &args.common.report {
        let mut report = Report::new(args.common.algorithm, &args.common.input, &cfg, &result);
        report.ari = metrics.map(|m| m.0);
        report.nmi = metrics.map(|m| m.1);
        report.wall_time_seconds = elapsed.as_secs_f64();
        write_json(&report, path)?;
    }
    Ok(())
}
