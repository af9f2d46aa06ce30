//! Weighted means on the ball: the Möbius fold used by the clustering
//! update, a tangent-space variant, and an iterative Fréchet mean.

use super::{check_compatible, exp_map, raw, BallPoint, TangentVector};
use crate::error::{Error, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_weighted(points: &[BallPoint], weights: &[f64]) -> Result<()> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("weighted mean of an empty point set"))?;
    if points.len() != weights.len() {
        return Err(Error::invalid(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    for p in &points[1..] {
        check_compatible(first, p)?;
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::invalid(format!(
            "weights must be finite and nonnegative, got {w}"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(Error::invalid(format!("weights sum to {sum}, expected 1")));
    }
    Ok(())
}

/// `(w_0 ⊗ x_0) ⊕ (w_1 ⊗ x_1) ⊕ ... ⊕ (w_{n-1} ⊗ x_{n-1})`.
///
/// Möbius addition is neither associative nor commutative, so the sum is
/// evaluated as a strict left fold in index order. Reordering the inputs
/// can change the result slightly.
pub fn mobius_weighted_mean(points: &[BallPoint], weights: &[f64]) -> Result<BallPoint> {
    check_weighted(points, weights)?;
    let curvature = points[0].curvature();
    let dim = points[0].dim();
    let terms = raw::ScaledTerms::new(points.iter().map(BallPoint::coords), dim, curvature.kappa());
    let mut out = vec![0.0; dim];
    terms
        .mobius_mean_into(weights, &mut out)
        .map_err(|j| Error::degenerate(format!("Möbius mean denominator vanished at term {j}")))?;
    Ok(BallPoint::from_trusted(out, curvature))
}

/// `exp_b( sum_j w_j log_b(x_j) )`: the weighted average taken in the
/// tangent space at `basepoint`. Independent of input order.
pub fn tangent_weighted_mean(basepoint: &BallPoint, points: &[BallPoint], weights: &[f64]) -> Result<BallPoint> {
    check_weighted(points, weights)?;
    check_compatible(basepoint, &points[0])?;
    let v = weighted_log_sum(basepoint, points, weights);
    Ok(exp_map(&TangentVector::new(basepoint.clone(), v)?))
}

fn weighted_log_sum(base: &BallPoint, points: &[BallPoint], weights: &[f64]) -> Vec<f64> {
    let kappa = base.curvature().kappa();
    let mut acc = vec![0.0; base.dim()];
    let mut buf = vec![0.0; base.dim()];
    for (p, &w) in points.iter().zip(weights) {
        raw::log_map_into(base.coords(), p.coords(), kappa, &mut buf);
        acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += w * b);
    }
    acc
}

/// Settings for [`frechet_mean`].
#[derive(Debug, Clone, Copy)]
pub struct FrechetOptions {
    /// Stop once `|sum_j w_j log_z(x_j)|` is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the tangent-space mean taken per iteration.
    pub step: f64,
}

impl Default for FrechetOptions {
    fn default() -> Self {
        FrechetOptions {
            tol: 1e-10,
            max_iter: 1000,
            step: 0.5,
        }
    }
}

/// Weighted Fréchet mean, `argmin_z sum_j w_j d(z, x_j)^2`.
///
/// Damped Karcher iteration `z <- exp_z(step * sum_j w_j log_z(x_j))`
/// started from the Euclidean weighted average of the coordinates. The
/// residual is the Euclidean norm of the weighted log sum, which vanishes
/// exactly at the minimizer.
pub fn frechet_mean(points: &[BallPoint], weights: &[f64], opts: FrechetOptions) -> Result<BallPoint> {
    check_weighted(points, weights)?;
    let curvature = points[0].curvature();
    let dim = points[0].dim();
    let mut start = vec![0.0; dim];
    for (p, &w) in points.iter().zip(weights) {
        start.iter_mut().zip(p.coords()).for_each(|(s, c)| *s += w * c);
    }
    // A convex combination of ball points is inside the ball already.
    let mut z = BallPoint::clipped(start, curvature)?;
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let g = weighted_log_sum(&z, points, weights);
        residual = raw::norm(&g);
        if residual <= opts.tol {
            return Ok(z);
        }
        let step: Vec<f64> = g.iter().map(|v| opts.step * v).collect();
        z = exp_map(&TangentVector::new(z, step)?);
    }
    let g = weighted_log_sum(&z, points, weights);
    let final_residual = raw::norm(&g);
    if final_residual <= opts.tol {
        return Ok(z);
    }
    residual = residual.min(final_residual);
    Err(Error::ConvergenceFailure {
        iterations: opts.max_iter,
        residual,
        last: Box::new(z),
    })
}
