use std::path::Path;

use hypegbms::clustering::{ClusterResult, RunConfig, StopReason};
use serde::Serialize;

use crate::args::Algorithm;
use crate::Failure;

/// JSON summary of one clustering run.
#[derive(Debug, Serialize)]
pub struct Report {
    pub algorithm: &'static str,
    pub input: String,
    pub n: usize,
    pub dim: usize,
    pub sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_from_median: bool,
    pub gamma: f64,
    pub max_iter: usize,
    pub scale: f64,
    pub seed: u64,
    pub num_clusters: usize,
    pub cluster_sizes: Vec<usize>,
    pub stop_reason: StopReason,
    pub converged: bool,
    pub iterations: usize,
    pub avg_movement: Vec<f64>,
    pub entropy: Vec<f64>,
    pub mean_density: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    pub wall_time_seconds: f64,
}

impl Report {
    pub fn new(algorithm: Algorithm, input: &Path, cfg: &RunConfig, result: &ClusterResult) -> Self {
        let mut sizes = vec![0; result.num_clusters];
        for &l in &result.labels {
            sizes[l] += 1;
        }
        Report {
            algorithm: algorithm.name(),
            input: input.display().to_string(),
            n: result.labels.len(),
            dim: result.positions.ncols(),
            sigma: cfg.sigma,
            curvature: result.curvature.map(|c| c.c()),
            epsilon: cfg.epsilon,
            delta: result.delta,
            delta_from_median: cfg.delta.is_none(),
            gamma: cfg.gamma,
            max_iter: cfg.max_iter,
            scale: cfg.scale,
            seed: cfg.seed,
            num_clusters: result.num_clusters,
            cluster_sizes: sizes,
            stop_reason: result.stop_reason,
            converged: result.converged,
            iterations: result.iterations(),
            avg_movement: result.trace.iter().map(|t| t.avg_movement).collect(),
            entropy: result.trace.iter().map(|t| t.entropy).collect(),
            mean_density: result.trace.iter().map(|t| t.mean_density).collect(),
            modes: result.modes.rows().into_iter().map(|r| r.to_vec()).collect(),
            ari: None,
            nmi: None,
            wall_time_seconds: 0.0,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::usage)?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| Failure::usage(anyhow::Error::new(e).context(format!("writing {}", path.display()))))
}
