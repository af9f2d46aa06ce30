//! The hyperboloid (Lorentz) model, used as an independent cross-check of
//! unit-ball distances.

use super::{raw, BallPoint};
use crate::error::{Error, Result};

/// A point on the forward sheet `-x0^2 + x1^2 + ... + xp^2 = -1`, `x0 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperboloidPoint {
    coords: Vec<f64>,
}

impl HyperboloidPoint {
    /// Checks the sheet constraint to within `1e-9` (relative to `x0^2`).
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::invalid("hyperboloid points need at least 2 coordinates"));
        }
        let x0 = coords[0];
        let residual = minkowski(&coords, &coords) + 1.0;
        if x0.is_nan() || x0 <= 0.0 || residual.abs() > 1e-9 * x0 * x0 {
            return Err(Error::invalid(format!(
                "not on the forward sheet (x0 = {x0}, constraint residual {residual:e})"
            )));
        }
        Ok(HyperboloidPoint { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Minkowski inner product `-x0 y0 + sum xi yi`.
    pub fn minkowski(&self, other: &HyperboloidPoint) -> f64 {
        minkowski(&self.coords, &other.coords)
    }
}

fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + raw::dot(&a[1..], &b[1..])
}

/// Isometry from the unit ball to the hyperboloid,
/// `x -> ((1 + |x|^2), 2x) / (1 - |x|^2)`. Requires `c = -1`.
pub fn to_hyperboloid(x: &BallPoint) -> Result<HyperboloidPoint> {
    if !x.curvature().is_unit() {
        return Err(Error::invalid("to_hyperboloid requires curvature -1"));
    }
    let sq = raw::norm_sq(x.coords());
    let denom = 1.0 - sq;
    let mut coords = Vec::with_capacity(x.dim() + 1);
    coords.push((1.0 + sq) / denom);
    coords.extend(x.coords().iter().map(|v| 2.0 * v / denom));
    HyperboloidPoint::new(coords)
}

/// `acosh(-M(x, y))`.
pub fn dist_hyperboloid(x: &HyperboloidPoint, y: &HyperboloidPoint) -> Result<f64> {
    if x.coords.len() != y.coords.len() {
        return Err(Error::invalid("hyperboloid points of different dimension"));
    }
    // Rounding can push -M a hair below 1 for coincident points.
    Ok((-x.minkowski(y)).max(1.0).acosh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{dist, Curvature};
    use approx::assert_abs_diff_eq;

    #[test]
    fn origin_maps_to_apex() {
        let h = to_hyperboloid(&BallPoint::origin(3, Curvature::UNIT)).unwrap();
        assert_eq!(h.coords(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn half_point_maps_by_formula() {
        let x = BallPoint::new(vec![0.5, 0.0], Curvature::UNIT).unwrap();
        let h = to_hyperboloid(&x).unwrap();
        assert_abs_diff_eq!(h.coords()[0], 1.25 / 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(h.coords()[1], 1.0 / 0.75, epsilon = 1e-15);
        assert_eq!(h.coords()[2], 0.0);
        assert_abs_diff_eq!(h.minkowski(&h), -1.0, epsilon = 1e-14);
    }

    #[test]
    fn isometry_on_a_pair() {
        let x = BallPoint::new(vec![0.1, -0.7], Curvature::UNIT).unwrap();
        let y = BallPoint::new(vec![0.4, 0.3], Curvature::UNIT).unwrap();
        let d = dist_hyperboloid(&to_hyperboloid(&x).unwrap(), &to_hyperboloid(&y).unwrap()).unwrap();
        assert_abs_diff_eq!(d, dist(&x, &y).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_off_sheet_and_other_curvatures() {
        assert!(HyperboloidPoint::new(vec![2.0, 0.0]).is_err());
        assert!(HyperboloidPoint::new(vec![-1.0, 0.0]).is_err());
        let x = BallPoint::origin(2, Curvature::new(-0.5).unwrap());
        assert!(to_hyperboloid(&x).is_err());
    }
}
