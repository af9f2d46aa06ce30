//! One blurring iteration in each geometry.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::geometry::{raw, BallPoint};
use crate::kernel::{check_points, check_sigma, gaussian_weights, pairwise_sq_dist, pairwise_sq_dist_euclidean};

/// Outcome of a single blurring iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Step<S> {
    /// Positions after the update.
    pub points: S,
    /// Per-point displacement: `|log_{x_i}(x_i')|` on the ball, `|x_i' - x_i|` in the plane.
    pub movements: Vec<f64>,
    /// Mean of `movements`.
    pub avg_movement: f64,
    /// Mean kernel density of the positions *before* the update, read off
    /// the weight matrix the update was built from.
    pub mean_density: f64,
}

/// One HypeGBMS update: every point is replaced by the Möbius weighted
/// mean of all points under its row of normalized Gaussian weights.
pub fn hypegbms_step(points: &[BallPoint], sigma: f64) -> Result<Step<Vec<BallPoint>>> {
    check_sigma(sigma)?;
    check_points(points)?;
    let curvature = points[0].curvature();
    let kappa = curvature.kappa();
    let dim = points[0].dim();

    let weights = gaussian_weights(&pairwise_sq_dist(points)?, sigma)?;
    let terms = raw::ScaledTerms::new(points.iter().map(BallPoint::coords), dim, kappa);
    debug_assert_eq!(terms.len(), points.len());

    let mut next = Vec::with_capacity(points.len());
    let mut movements = Vec::with_capacity(points.len());
    let mut log = vec![0.0; dim];
    for (i, row) in weights.normalized.rows().into_iter().enumerate() {
        let mut out = vec![0.0; dim];
        let row = row.as_slice().expect("standard layout");
        terms.mobius_mean_into(row, &mut out).map_err(|j| {
            Error::degenerate(format!(
                "Möbius mean for point {i} hit a vanishing denominator at term {j}"
            ))
        })?;
        raw::log_map_into(points[i].coords(), &out, kappa, &mut log);
        movements.push(raw::norm(&log));
        next.push(BallPoint::from_trusted(out, curvature));
    }
    let avg_movement = movements.iter().sum::<f64>() / movements.len() as f64;
    Ok(Step {
        points: next,
        movements,
        avg_movement,
        mean_density: weights.mean_density(),
    })
}

/// One Euclidean GBMS update, `X <- W_normalized X`.
pub fn gbms_step(points: &Array2<f64>, sigma: f64) -> Result<Step<Array2<f64>>> {
    check_sigma(sigma)?;
    if points.nrows() == 0 || points.ncols() == 0 {
        return Err(Error::invalid("empty point matrix"));
    }
    let weights = gaussian_weights(&pairwise_sq_dist_euclidean(points), sigma)?;
    let next = weights.normalized.dot(points);
    let movements: Vec<f64> = next
        .rows()
        .into_iter()
        .zip(points.rows())
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
        .collect();
    let avg_movement = movements.iter().sum::<f64>() / movements.len() as f64;
    Ok(Step {
        points: next,
        movements,
        avg_movement,
        mean_density: weights.mean_density(),
    })
}

/// GBMS bandwidth that reproduces HypeGBMS with bandwidth `sigma` as the
/// curvature goes to zero.
///
/// Ball distances tend to *twice* the Euclidean distance in that limit
/// (the conformal factor at the origin is 2), so the hyperbolic kernel
/// `exp(-d_H^2 / 2 sigma^2)` matches the Euclidean one at `sigma / 2`.
pub fn euclidean_limit_bandwidth(sigma: f64) -> f64 {
    sigma / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{mobius_weighted_mean, Curvature};
    use approx::assert_abs_diff_eq;

    fn unit(coords: &[f64]) -> BallPoint {
        BallPoint::new(coords.to_vec(), Curvature::UNIT).unwrap()
    }

    #[test]
    fn identical_points_do_not_move() {
        let p = unit(&[0.2, -0.1]);
        let s = hypegbms_step(&[p.clone(), p.clone(), p.clone()], 0.5).unwrap();
        assert!(s.avg_movement < 1e-15);
        for q in &s.points {
            for (a, b) in q.coords().iter().zip(p.coords()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn single_point_is_fixed() {
        let p = unit(&[0.4, 0.3]);
        let s = hypegbms_step(std::slice::from_ref(&p), 0.5).unwrap();
        assert_eq!(s.avg_movement, 0.0);
        assert_eq!(s.points[0], p);
        assert_eq!(s.mean_density, 1.0);
    }

    #[test]
    fn symmetric_pair_moves_symmetrically() {
        let a = unit(&[0.3, 0.0]);
        let b = unit(&[-0.3, 0.0]);
        let s = hypegbms_step(&[a.clone(), b.clone()], 100.0).unwrap();
        let (na, nb) = (s.points[0].norm(), s.points[1].norm());
        assert_abs_diff_eq!(na, nb, epsilon = 1e-10);
        assert!(na < 0.3);

        // Step-by-step oracle: weights from the kernel, then the fold by hand.
        let d = crate::geometry::dist(&a, &b).unwrap();
        let w = (-d * d / (2.0 * 100.0 * 100.0)).exp();
        let row = [1.0 / (1.0 + w), w / (1.0 + w)];
        let expected = mobius_weighted_mean(&[a.clone(), b.clone()], &row).unwrap();
        assert_eq!(s.points[0], expected);
        let scaled_a = crate::geometry::mobius_scalar_mul(row[0], &a);
        let scaled_b = crate::geometry::mobius_scalar_mul(row[1], &b);
        let by_hand = crate::geometry::mobius_add(&scaled_a, &scaled_b).unwrap();
        for (x, y) in by_hand.coords().iter().zip(expected.coords()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn gbms_examples() {
        let same = ndarray::array![[1.0, 2.0], [1.0, 2.0]];
        let s = gbms_step(&same, 0.3).unwrap();
        assert_eq!(s.avg_movement, 0.0);
        assert_eq!(s.points, same);

        let pair = ndarray::array![[-0.5], [0.5]];
        let s = gbms_step(&pair, 1e6).unwrap();
        assert_abs_diff_eq!(s.points[[0, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.points[[1, 0]], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.avg_movement, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn near_flat_step_matches_gbms() {
        let c = Curvature::new(-1e-8).unwrap();
        let data = ndarray::array![[0.1, 0.4], [0.3, -0.2], [-0.5, 0.1], [0.0, 0.0], [0.45, 0.35]];
        let pts: Vec<BallPoint> = data
            .rows()
            .into_iter()
            .map(|r| BallPoint::new(r.to_vec(), c).unwrap())
            .collect();
        let sigma = 0.6;
        let h = hypegbms_step(&pts, sigma).unwrap();
        let e = gbms_step(&data, euclidean_limit_bandwidth(sigma)).unwrap();
        for (p, row) in h.points.iter().zip(e.points.rows()) {
            for (a, b) in p.coords().iter().zip(row) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
        assert_abs_diff_eq!(h.avg_movement, e.avg_movement, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(hypegbms_step(&[], 1.0).is_err());
        assert!(hypegbms_step(&[unit(&[0.1])], 0.0).is_err());
        assert!(gbms_step(&Array2::zeros((0, 2)), 1.0).is_err());
    }
}
