//! Gaussian kernel weights over hyperbolic or Euclidean distances, the
//! hyperbolic kernel density estimate and its Riemannian gradient.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::{check_compatible, raw, BallPoint, TangentVector};

/// Dense Gaussian weights `w_ij = exp(-d_ij^2 / 2 sigma^2)` and their
/// row-normalized form.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub raw: Array2<f64>,
    pub normalized: Array2<f64>,
    pub bandwidth: f64,
}

impl KernelMatrix {
    pub fn len(&self) -> usize {
        self.raw.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.nrows() == 0
    }

    /// Average kernel density over the points that produced the matrix,
    /// `(1/N) sum_i fhat(x_i)` with `fhat` built on the same points.
    pub fn mean_density(&self) -> f64 {
        let n = self.raw.nrows() as f64;
        self.raw.sum() / (n * n)
    }
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("bandwidth must be positive, got {sigma}")))
    }
}

pub(crate) fn check_points(points: &[BallPoint]) -> Result<()> {
    let first = points.first().ok_or_else(|| Error::invalid("empty point set"))?;
    points[1..].iter().try_for_each(|p| check_compatible(first, p))
}

/// Squared hyperbolic distances between every pair of points.
///
/// Each unordered pair is evaluated once and mirrored, so the result is
/// exactly symmetric with a zero diagonal.
pub fn pairwise_sq_dist(points: &[BallPoint]) -> Result<Array2<f64>> {
    check_points(points)?;
    let kappa = points[0].curvature().kappa();
    let n = points.len();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = raw::dist(points[i].coords(), points[j].coords(), kappa)
                .ok_or_else(|| Error::degenerate(format!("distance between points {i} and {j} hit the boundary")))?;
            out[[i, j]] = d * d;
            out[[j, i]] = d * d;
        }
    }
    Ok(out)
}

/// Squared Euclidean distances between the rows of `x`.
pub fn pairwise_sq_dist_euclidean(x: &Array2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            out[[i, j]] = d;
            out[[j, i]] = d;
        }
    }
    out
}

/// Gaussian weights from a matrix of squared distances, plus the
/// row-stochastic normalization.
///
/// Far-apart pairs underflow to exactly zero; the unit diagonal keeps every
/// row sum positive.
pub fn gaussian_weights(sq_dists: &Array2<f64>, sigma: f64) -> Result<KernelMatrix> {
    check_sigma(sigma)?;
    if !sq_dists.is_square() {
        return Err(Error::invalid("distance matrix must be square"));
    }
    let scale = 1.0 / (2.0 * sigma * sigma);
    let raw = sq_dists.mapv(|d| (-d * scale).exp());
    let mut normalized = raw.clone();
    for mut row in normalized.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|w| w / s);
    }
    Ok(KernelMatrix {
        raw,
        normalized,
        bandwidth: sigma,
    })
}

/// `fhat(x) = (1/N) sum_j exp(-d(x, x_j)^2 / 2 sigma^2)`.
pub fn kde(x: &BallPoint, data: &[BallPoint], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_points(data)?;
    check_compatible(x, &data[0])?;
    let kappa = x.curvature().kappa();
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut total = 0.0;
    for (j, p) in data.iter().enumerate() {
        let d = raw::dist(x.coords(), p.coords(), kappa)
            .ok_or_else(|| Error::degenerate(format!("distance to data point {j} hit the boundary")))?;
        total += (-d * d * scale).exp();
    }
    Ok(total / data.len() as f64)
}

/// Riemannian gradient of [`kde`]:
/// `(1 / (N sigma^2)) sum_j K(x, x_j) log_x(x_j)`.
///
/// The returned vector is a gradient for the Poincaré metric, so the
/// directional derivative along a tangent `u` is `grad.inner(u)`, not the
/// plain dot product.
pub fn kde_gradient(x: &BallPoint, data: &[BallPoint], sigma: f64) -> Result<TangentVector> {
    check_sigma(sigma)?;
    check_points(data)?;
    check_compatible(x, &data[0])?;
    let kappa = x.curvature().kappa();
    let scale = 1.0 / (2.0 * sigma * sigma);
    let mut grad = vec![0.0; x.dim()];
    let mut log = vec![0.0; x.dim()];
    for (j, p) in data.iter().enumerate() {
        let d = raw::dist(x.coords(), p.coords(), kappa)
            .ok_or_else(|| Error::degenerate(format!("distance to data point {j} hit the boundary")))?;
        let k = (-d * d * scale).exp();
        raw::log_map_into(x.coords(), p.coords(), kappa, &mut log);
        grad.iter_mut().zip(&log).for_each(|(g, l)| *g += k * l);
    }
    let norm = 1.0 / (data.len() as f64 * sigma * sigma);
    grad.iter_mut().for_each(|g| *g *= norm);
    TangentVector::new(x.clone(), grad)
}
