//! The blurring mean-shift loops.
//!
//! Both pipelines share preprocessing (per-column standardization and a
//! global rescale) so that they differ only in geometry: HypeGBMS maps the
//! rows onto the Poincaré ball and replaces each point by a Möbius weighted
//! mean; GBMS stays in the plane and uses ordinary weighted means.
//!
//! Each iteration records its average movement, the entropy of the movement
//! histogram and the mean kernel density of the state it started from. The
//! loop stops on the first of: movement below `epsilon`, entropy change
//! below `gamma` (from the second iteration on), or `max_iter`.

mod assign;
mod step;
mod stopping;

use ndarray::Array2;
use serde::Serialize;

use crate::data::standardize_scaled;
use crate::error::{Error, Result};
use crate::geometry::{project_to_ball, raw, BallPoint, Curvature};
use crate::kernel::{pairwise_sq_dist, pairwise_sq_dist_euclidean};

pub use assign::{assign_clusters, assign_clusters_euclidean, Assignment};
pub use step::{euclidean_limit_bandwidth, gbms_step, hypegbms_step, Step};
pub use stopping::{movement_entropy, should_stop, StopReason, StoppingMonitor};

/// Hyperparameters for a clustering run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    /// Gaussian bandwidth.
    pub sigma: f64,
    /// Ball curvature; ignored by GBMS.
    pub curvature: Curvature,
    /// Average-movement tolerance.
    pub epsilon: f64,
    /// Adjacency threshold for cluster extraction. `None` uses
    /// [`median_delta`] on the preprocessed input.
    pub delta: Option<f64>,
    /// Entropy-change tolerance.
    pub gamma: f64,
    pub max_iter: usize,
    /// Largest row norm after preprocessing, before the exponential map.
    pub scale: f64,
    /// Histogram bin count as a fraction of `N`.
    pub entropy_bins_fraction: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(sigma: f64) -> Self {
        RunConfig {
            sigma,
            curvature: Curvature::UNIT,
            epsilon: 1e-5,
            delta: None,
            gamma: 1e-4,
            max_iter: 200,
            scale: 1.0,
            entropy_bins_fraction: 0.9,
            seed: 42,
        }
    }

    pub fn with_curvature(mut self, curvature: Curvature) -> Self {
        self.curvature = curvature;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("epsilon", self.epsilon)?;
        positive("gamma", self.gamma)?;
        positive("scale", self.scale)?;
        if let Some(d) = self.delta {
            positive("delta", d)?;
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        if !(self.entropy_bins_fraction > 0.0 && self.entropy_bins_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "entropy_bins_fraction must be in (0, 1], got {}",
                self.entropy_bins_fraction
            )));
        }
        Ok(())
    }
}

/// Diagnostics for one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationTrace {
    /// 1-based.
    pub iteration: usize,
    pub avg_movement: f64,
    pub entropy: f64,
    /// Mean kernel density of the positions entering this iteration.
    pub mean_density: f64,
}

/// Output of [`run_hypegbms`] or [`run_gbms`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// One label in `0..num_clusters` per input row.
    pub labels: Vec<usize>,
    pub num_clusters: usize,
    /// One representative per cluster (`num_clusters x p`), in ball
    /// coordinates for HypeGBMS.
    pub modes: Array2<f64>,
    /// Final positions of all points (`N x p`).
    pub positions: Array2<f64>,
    pub trace: Vec<IterationTrace>,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// The adjacency threshold actually used.
    pub delta: f64,
    /// `Some` for HypeGBMS runs.
    pub curvature: Option<Curvature>,
}

impl ClusterResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Default cluster separation: a tenth of the median pairwise distance.
///
/// Falls back to a tenth of the mean positive distance when more than half
/// the pairs coincide, and to 1 when every point is identical.
pub fn median_delta(sq_dists: &Array2<f64>) -> f64 {
    let n = sq_dists.nrows();
    let mut d: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| sq_dists[[i, j]].sqrt())
        .collect();
    if d.is_empty() {
        return 1.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    let median = if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    };
    if median > 0.0 {
        return 0.1 * median;
    }
    let positive: Vec<f64> = d.into_iter().filter(|v| *v > 0.0).collect();
    if positive.is_empty() {
        1.0
    } else {
        0.1 * positive.iter().sum::<f64>() / positive.len() as f64
    }
}

struct Finished<S> {
    state: S,
    trace: Vec<IterationTrace>,
    stop_reason: StopReason,
}

fn iterate<S>(
    initial: S,
    n: usize,
    cfg: &RunConfig,
    mut step: impl FnMut(&S) -> Result<Step<S>>,
) -> Result<Finished<S>> {
    let mut monitor = StoppingMonitor::new(cfg.epsilon, cfg.gamma);
    let mut state = initial;
    let mut trace = Vec::new();
    for t in 1..=cfg.max_iter {
        let s = step(&state)?;
        let entropy = if n >= 2 {
            movement_entropy(&s.movements, cfg.entropy_bins_fraction)?
        } else {
            0.0
        };
        trace.push(IterationTrace {
            iteration: t,
            avg_movement: s.avg_movement,
            entropy,
            mean_density: s.mean_density,
        });
        state = s.points;
        if let Some(reason) = monitor.observe(s.avg_movement, entropy) {
            return Ok(Finished {
                state,
                trace,
                stop_reason: reason,
            });
        }
    }
    Ok(Finished {
        state,
        trace,
        stop_reason: StopReason::MaxIter,
    })
}

fn to_matrix(rows: &[Vec<f64>], dim: usize) -> Array2<f64> {
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), dim), flat).expect("rows share a dimension")
}

/// HypeGBMS end to end: project onto the ball, iterate Möbius-mean
/// blurring until a stopping rule fires, then extract clusters.
pub fn run_hypegbms(raw_data: &Array2<f64>, cfg: &RunConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    let points = project_to_ball(raw_data, cfg.curvature, cfg.scale)?;
    run_hypegbms_projected(points, cfg)
}

/// [`run_hypegbms`] on points that are already in the ball.
pub fn run_hypegbms_projected(points: Vec<BallPoint>, cfg: &RunConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    crate::kernel::check_points(&points)?;
    let n = points.len();
    let dim = points[0].dim();
    let curvature = points[0].curvature();
    let delta = match cfg.delta {
        Some(d) => d,
        None => median_delta(&pairwise_sq_dist(&points)?),
    };
    let done = iterate(points, n, cfg, |p| hypegbms_step(p, cfg.sigma))?;
    let assignment = assign_clusters(&done.state, delta)?;
    let positions: Vec<Vec<f64>> = done.state.into_iter().map(BallPoint::into_coords).collect();
    let modes: Vec<Vec<f64>> = assignment.modes.into_iter().map(BallPoint::into_coords).collect();
    Ok(ClusterResult {
        labels: assignment.labels,
        num_clusters: assignment.num_clusters,
        modes: to_matrix(&modes, dim),
        positions: to_matrix(&positions, dim),
        trace: done.trace,
        converged: done.stop_reason != StopReason::MaxIter,
        stop_reason: done.stop_reason,
        delta,
        curvature: Some(curvature),
    })
}

/// Euclidean GBMS end to end, on the same standardized and rescaled data
/// HypeGBMS would project.
pub fn run_gbms(raw_data: &Array2<f64>, cfg: &RunConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    let points = standardize_scaled(raw_data, cfg.scale)?;
    run_gbms_prepared(points, cfg)
}

/// [`run_gbms`] without preprocessing.
pub fn run_gbms_prepared(points: Array2<f64>, cfg: &RunConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    if points.nrows() == 0 || points.ncols() == 0 {
        return Err(Error::invalid("empty point matrix"));
    }
    let n = points.nrows();
    let dim = points.ncols();
    let delta = match cfg.delta {
        Some(d) => d,
        None => median_delta(&pairwise_sq_dist_euclidean(&points)),
    };
    let done = iterate(points, n, cfg, |p| gbms_step(p, cfg.sigma))?;
    let assignment = assign_clusters_euclidean(&done.state, delta)?;
    Ok(ClusterResult {
        labels: assignment.labels,
        num_clusters: assignment.num_clusters,
        modes: to_matrix(&assignment.modes, dim),
        positions: done.state,
        trace: done.trace,
        converged: done.stop_reason != StopReason::MaxIter,
        stop_reason: done.stop_reason,
        delta,
        curvature: None,
    })
}

/// Largest pairwise hyperbolic distance among the final positions of a
/// HypeGBMS result.
pub fn max_pairwise_distance(result: &ClusterResult) -> Option<f64> {
    let kappa = result.curvature?.kappa();
    let rows: Vec<Vec<f64>> = result.positions.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut max = 0.0f64;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            max = max.max(raw::dist(&rows[i], &rows[j], kappa)?);
        }
    }
    Some(max)
}
