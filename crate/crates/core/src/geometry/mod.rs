//! Poincaré ball primitives.
//!
//! The ball of curvature `c < 0` is the open set `{ x : -c |x|^2 < 1 }`, of
//! radius `1/sqrt(-c)`. Throughout, `kappa = -c` is the curvature magnitude.
//!
//! Operations that produce a point clip it radially to
//! `(1 - 1e-5) / sqrt(kappa)` so that later `atanh` evaluations stay finite.

mod hyperboloid;
mod mean;
pub(crate) mod raw;

use ndarray::Array2;

use crate::data::standardize_scaled;
use crate::error::{Error, Result};

pub use hyperboloid::{dist_hyperboloid, to_hyperboloid, HyperboloidPoint};
pub use mean::{frechet_mean, mobius_weighted_mean, tangent_weighted_mean, FrechetOptions};

/// Relative distance from the boundary at which points are clipped.
pub const BOUNDARY_MARGIN: f64 = 1e-5;

/// Denominators (and `1 - atanh argument`) below this are reported as degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-15;

/// Sectional curvature `c` of the ball. Always strictly negative.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct Curvature(f64);

impl Curvature {
    /// The unit ball, `c = -1`.
    pub const UNIT: Curvature = Curvature(-1.0);

    pub fn new(c: f64) -> Result<Self> {
        if c.is_finite() && c < 0.0 {
            Ok(Curvature(c))
        } else {
            Err(Error::invalid(format!("curvature must be finite and < 0, got {c}")))
        }
    }

    pub fn c(self) -> f64 {
        self.0
    }

    /// Curvature magnitude `-c`.
    pub fn kappa(self) -> f64 {
        -self.0
    }

    pub fn radius(self) -> f64 {
        1.0 / self.kappa().sqrt()
    }

    /// Largest norm a point may have after clipping.
    pub fn max_norm(self) -> f64 {
        raw::max_norm(self.kappa())
    }

    pub fn is_unit(self) -> bool {
        self.0 == -1.0
    }
}

impl Default for Curvature {
    fn default() -> Self {
        Curvature::UNIT
    }
}

/// A point strictly inside the Poincaré ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    coords: Vec<f64>,
    curvature: Curvature,
}

impl BallPoint {
    /// Checked constructor: coordinates must be finite and strictly inside the ball.
    pub fn new(coords: Vec<f64>, curvature: Curvature) -> Result<Self> {
        check_coords(&coords)?;
        if curvature.kappa() * raw::norm_sq(&coords) >= 1.0 {
            return Err(Error::invalid(format!(
                "point of norm {} lies outside the ball of radius {}",
                raw::norm(&coords),
                curvature.radius()
            )));
        }
        Ok(BallPoint { coords, curvature })
    }

    /// Like [`BallPoint::new`] but pulls points on or past the boundary back
    /// to the clipping radius instead of rejecting them.
    pub fn clipped(mut coords: Vec<f64>, curvature: Curvature) -> Result<Self> {
        check_coords(&coords)?;
        raw::clip(&mut coords, curvature.kappa());
        Ok(BallPoint { coords, curvature })
    }

    pub fn origin(dim: usize, curvature: Curvature) -> Self {
        BallPoint {
            coords: vec![0.0; dim.max(1)],
            curvature,
        }
    }

    /// Coordinates already known to be inside the ball.
    pub(crate) fn from_trusted(coords: Vec<f64>, curvature: Curvature) -> Self {
        debug_assert!(curvature.kappa() * raw::norm_sq(&coords) < 1.0);
        BallPoint { coords, curvature }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn curvature(&self) -> Curvature {
        self.curvature
    }

    /// Euclidean norm of the coordinates.
    pub fn norm(&self) -> f64 {
        raw::norm(&self.coords)
    }

    /// The gyro-inverse `-x`.
    pub fn neg(&self) -> BallPoint {
        BallPoint {
            coords: self.coords.iter().map(|v| -v).collect(),
            curvature: self.curvature,
        }
    }

    /// Conformal factor `lambda_x = 2 / (1 - kappa |x|^2)`.
    pub fn conformal_factor(&self) -> f64 {
        raw::conformal_factor(&self.coords, self.curvature.kappa())
    }
}

/// A tangent vector, stored in ambient coordinates together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: BallPoint,
    vec: Vec<f64>,
}

impl TangentVector {
    pub fn new(base: BallPoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::invalid(format!(
                "tangent vector has dimension {} but base point has {}",
                vec.len(),
                base.dim()
            )));
        }
        check_coords(&vec)?;
        Ok(TangentVector { base, vec })
    }

    pub fn zero(base: BallPoint) -> Self {
        let vec = vec![0.0; base.dim()];
        TangentVector { base, vec }
    }

    pub fn base(&self) -> &BallPoint {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.vec
    }

    /// Euclidean norm of the ambient coordinates.
    pub fn norm(&self) -> f64 {
        raw::norm(&self.vec)
    }

    /// Riemannian inner product `lambda_x^2 <u, v>` at the shared base point.
    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        if self.base != other.base {
            return Err(Error::invalid("tangent vectors live at different base points"));
        }
        let lambda = self.base.conformal_factor();
        Ok(lambda * lambda * raw::dot(&self.vec, &other.vec))
    }

    /// Riemannian norm `lambda_x |v|`; for `log_x(y)` this is `d(x, y)`.
    pub fn metric_norm(&self) -> f64 {
        self.base.conformal_factor() * self.norm()
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            vec: self.vec.iter().map(|v| s * v).collect(),
        }
    }
}

fn check_coords(coords: &[f64]) -> Result<()> {
    if coords.is_empty() {
        return Err(Error::invalid("points must have dimension >= 1"));
    }
    if let Some(i) = coords.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite coordinate at index {i}")));
    }
    Ok(())
}

pub(crate) fn check_compatible(a: &BallPoint, b: &BallPoint) -> Result<()> {
    if a.curvature != b.curvature {
        return Err(Error::invalid(format!(
            "curvature mismatch: {} vs {}",
            a.curvature.c(),
            b.curvature.c()
        )));
    }
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Möbius addition `v ⊕ w`.
///
/// Fails with [`Error::NumericDegenerate`] when the denominator drops below
/// [`DEGENERATE_DENOMINATOR`], which only happens for nearly antipodal
/// points pressed against the boundary.
pub fn mobius_add(v: &BallPoint, w: &BallPoint) -> Result<BallPoint> {
    check_compatible(v, w)?;
    let kappa = v.curvature.kappa();
    let mut out = vec![0.0; v.dim()];
    let denom = raw::mobius_add_into(&v.coords, &w.coords, kappa, &mut out);
    if raw::is_degenerate(denom) {
        return Err(Error::degenerate(format!(
            "Möbius addition denominator {denom:e} is below {DEGENERATE_DENOMINATOR:e}"
        )));
    }
    raw::clip(&mut out, kappa);
    Ok(BallPoint::from_trusted(out, v.curvature))
}

/// Möbius scalar multiplication `lambda ⊗ v`: rescales the hyperbolic
/// distance from the origin by `|lambda|`, flipping direction for negative
/// `lambda`.
pub fn mobius_scalar_mul(lambda: f64, v: &BallPoint) -> BallPoint {
    let kappa = v.curvature.kappa();
    let terms = raw::ScaledTerms::new([v.coords()], v.dim(), kappa);
    let mut out = vec![0.0; v.dim()];
    terms.scaled_into(0, lambda, &mut out);
    raw::clip(&mut out, kappa);
    BallPoint::from_trusted(out, v.curvature)
}

/// Hyperbolic distance `(2/sqrt(kappa)) atanh(sqrt(kappa) |(-x) ⊕ y|)`.
pub fn dist(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    check_compatible(x, y)?;
    raw::dist(&x.coords, &y.coords, x.curvature.kappa())
        .ok_or_else(|| Error::degenerate("distance atanh argument reached 1 (points at the boundary)"))
}

/// The classical `acosh` form of the unit-ball distance. Only defined for `c = -1`.
pub fn dist_cosh(x: &BallPoint, y: &BallPoint) -> Result<f64> {
    check_compatible(x, y)?;
    if !x.curvature.is_unit() {
        return Err(Error::invalid("dist_cosh requires curvature -1"));
    }
    let diff: f64 = x.coords.iter().zip(&y.coords).map(|(a, b)| (a - b) * (a - b)).sum();
    let denom = (1.0 - raw::norm_sq(&x.coords)) * (1.0 - raw::norm_sq(&y.coords));
    Ok((1.0 + 2.0 * diff / denom).acosh())
}

/// Exponential map at the tangent vector's base point.
///
/// The zero vector returns the base point exactly. Results past the clipping
/// radius (saturated `tanh`) are pulled back inside.
pub fn exp_map(v: &TangentVector) -> BallPoint {
    let base = &v.base;
    let mut out = vec![0.0; base.dim()];
    raw::exp_map_into(&base.coords, &v.vec, base.curvature.kappa(), &mut out);
    BallPoint::from_trusted(out, base.curvature)
}

/// Logarithmic map `log_x(y)`, the tangent vector at `x` pointing at `y`
/// whose Riemannian length is `d(x, y)`. Coincident points give exactly zero.
pub fn log_map(base: &BallPoint, y: &BallPoint) -> Result<TangentVector> {
    check_compatible(base, y)?;
    let mut out = vec![0.0; base.dim()];
    raw::log_map_into(&base.coords, &y.coords, base.curvature.kappa(), &mut out);
    Ok(TangentVector {
        base: base.clone(),
        vec: out,
    })
}

/// Embeds the rows of a raw data matrix in the ball.
///
/// Columns are standardized (constant columns become zero), the whole matrix
/// is rescaled so its largest row norm equals `scale`, and each row is then
/// sent through the exponential map at the origin.
pub fn project_to_ball(raw_data: &Array2<f64>, curvature: Curvature, scale: f64) -> Result<Vec<BallPoint>> {
    let scaled = standardize_scaled(raw_data, scale)?;
    let dim = scaled.ncols();
    let origin = BallPoint::origin(dim, curvature);
    Ok(scaled
        .rows()
        .into_iter()
        .map(|row| {
            let mut out = vec![0.0; dim];
            raw::exp_map_into(
                origin.coords(),
                row.as_slice().expect("standard layout"),
                curvature.kappa(),
                &mut out,
            );
            BallPoint::from_trusted(out, curvature)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn unit(coords: &[f64]) -> BallPoint {
        BallPoint::new(coords.to_vec(), Curvature::UNIT).unwrap()
    }

    #[test]
    fn curvature_rejects_nonnegative() {
        assert!(Curvature::new(0.0).is_err());
        assert!(Curvature::new(0.5).is_err());
        assert!(Curvature::new(f64::NAN).is_err());
        let c = Curvature::new(-4.0).unwrap();
        assert_eq!(c.kappa(), 4.0);
        assert_eq!(c.radius(), 0.5);
    }

    #[test]
    fn membership_is_strict() {
        assert!(BallPoint::new(vec![1.0, 0.0], Curvature::UNIT).is_err());
        assert!(BallPoint::new(vec![0.6, 0.8], Curvature::UNIT).is_err());
        assert!(BallPoint::new(vec![0.6, 0.79], Curvature::UNIT).is_ok());
        let p = BallPoint::clipped(vec![3.0, 4.0], Curvature::UNIT).unwrap();
        assert_abs_diff_eq!(p.norm(), 1.0 - BOUNDARY_MARGIN, epsilon = 1e-15);
    }

    #[test]
    fn mobius_add_identities() {
        let v = unit(&[0.3, -0.2, 0.1]);
        let zero = BallPoint::origin(3, Curvature::UNIT);
        assert_eq!(mobius_add(&v, &zero).unwrap(), v);
        assert_eq!(mobius_add(&zero, &v).unwrap(), v);
        let z = mobius_add(&v.neg(), &v).unwrap();
        for c in z.coords() {
            assert_abs_diff_eq!(*c, 0.0, epsilon = 1e-16);
        }
    }

    #[test]
    fn mobius_add_collinear_is_relativistic_addition() {
        let v = unit(&[0.5, 0.0]);
        let w = unit(&[0.3, 0.0]);
        let s = mobius_add(&v, &w).unwrap();
        assert_abs_diff_eq!(s.coords()[0], 0.8 / 1.15, epsilon = 1e-15);
        assert_eq!(s.coords()[1], 0.0);
    }

    #[test]
    fn mobius_add_rejects_mismatch() {
        let a = unit(&[0.1, 0.2]);
        let b = unit(&[0.1]);
        assert!(matches!(mobius_add(&a, &b), Err(Error::InvalidArgument(_))));
        let c = BallPoint::new(vec![0.1, 0.2], Curvature::new(-2.0).unwrap()).unwrap();
        assert!(matches!(mobius_add(&a, &c), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mobius_add_flags_degenerate_denominator() {
        // Antipodal points 1e-9 from the boundary: denominator (1 - |a|^2)^2 ~ 4e-18.
        let a = unit(&[1.0 - 1e-9]);
        assert!(matches!(mobius_add(&a, &a.neg()), Err(Error::NumericDegenerate(_))));
        // At the clipping radius the denominator is still ~4e-10.
        let b = BallPoint::clipped(vec![1.0], Curvature::UNIT).unwrap();
        assert!(mobius_add(&b, &b.neg()).is_ok());
    }

    #[test]
    fn scalar_mul_examples() {
        let v = unit(&[0.5, 0.0]);
        let one = mobius_scalar_mul(1.0, &v);
        assert_abs_diff_eq!(one.coords()[0], 0.5, epsilon = 1e-15);
        let two = mobius_scalar_mul(2.0, &v);
        assert_abs_diff_eq!(two.coords()[0], 0.8, epsilon = 1e-15);
        let zero = BallPoint::origin(2, Curvature::UNIT);
        assert_eq!(mobius_scalar_mul(3.7, &zero), zero);
        let neg = mobius_scalar_mul(-1.0, &v);
        assert_abs_diff_eq!(neg.coords()[0], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn distance_examples() {
        let o = BallPoint::origin(2, Curvature::UNIT);
        let y = unit(&[0.5, 0.0]);
        let expected = 2.0 * 0.5f64.atanh();
        assert_abs_diff_eq!(dist(&o, &y).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(expected, 1.098_612_288_668_109_6, epsilon = 1e-15);
        assert_abs_diff_eq!(dist_cosh(&o, &y).unwrap(), expected, epsilon = 1e-14);
        assert_eq!(dist(&y, &y).unwrap(), 0.0);
        assert_eq!(dist_cosh(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn dist_cosh_requires_unit_curvature() {
        let c = Curvature::new(-2.0).unwrap();
        let a = BallPoint::origin(2, c);
        assert!(matches!(dist_cosh(&a, &a), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn distance_matches_gyro_difference_vector() {
        // The closed form used by `dist` against the literal (-x) ⊕ y.
        let x = unit(&[0.3, -0.4, 0.2]);
        let y = unit(&[-0.1, 0.5, 0.6]);
        let u = mobius_add(&x.neg(), &y).unwrap();
        let literal = 2.0 * u.norm().atanh();
        assert_abs_diff_eq!(dist(&x, &y).unwrap(), literal, epsilon = 1e-14);
    }

    #[test]
    fn exp_log_examples() {
        let o = BallPoint::origin(2, Curvature::UNIT);
        let v = TangentVector::new(o.clone(), vec![1.0, 0.0]).unwrap();
        let e = exp_map(&v);
        assert_abs_diff_eq!(e.coords()[0], 1f64.tanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(e.coords()[0], 0.761_594_155_955_764_9, epsilon = 1e-15);

        let y = unit(&[0.5, 0.0]);
        let l = log_map(&o, &y).unwrap();
        assert_abs_diff_eq!(l.vec()[0], 0.5f64.atanh(), epsilon = 1e-15);
        assert_abs_diff_eq!(l.vec()[0], 0.549_306_144_334_054_8, epsilon = 1e-15);

        let x = unit(&[0.2, 0.1]);
        assert_eq!(exp_map(&TangentVector::zero(x.clone())), x);
        assert!(log_map(&x, &x).unwrap().vec().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn log_metric_norm_is_distance() {
        let x = unit(&[0.2, -0.6]);
        let y = unit(&[-0.3, 0.1]);
        let l = log_map(&x, &y).unwrap();
        assert_abs_diff_eq!(l.metric_norm(), dist(&x, &y).unwrap(), epsilon = 1e-13);
    }

    #[test]
    fn euclidean_limit_of_exp_and_log() {
        let c = Curvature::new(-1e-10).unwrap();
        let x = BallPoint::new(vec![0.4, -1.2, 2.0], c).unwrap();
        let y = BallPoint::new(vec![-0.7, 0.3, 1.1], c).unwrap();
        let v = TangentVector::new(x.clone(), vec![0.5, 0.25, -1.5]).unwrap();
        let e = exp_map(&v);
        for i in 0..3 {
            assert_abs_diff_eq!(e.coords()[i], x.coords()[i] + v.vec()[i], epsilon = 1e-5);
        }
        let l = log_map(&x, &y).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(l.vec()[i], y.coords()[i] - x.coords()[i], epsilon = 1e-5);
        }
    }

    #[test]
    fn exp_clips_saturated_results() {
        let o = BallPoint::origin(2, Curvature::UNIT);
        let v = TangentVector::new(o, vec![400.0, 0.0]).unwrap();
        let e = exp_map(&v);
        assert!(e.norm() <= Curvature::UNIT.max_norm());
    }

    #[test]
    fn projection_examples() {
        let zeros = Array2::<f64>::zeros((4, 3));
        for p in project_to_ball(&zeros, Curvature::UNIT, 1.0).unwrap() {
            assert!(p.coords().iter().all(|v| *v == 0.0));
        }
        let data = ndarray::array![[1.0, 5.0], [3.0, 5.0], [2.0, 5.0]];
        let pts = project_to_ball(&data, Curvature::UNIT, 1.0).unwrap();
        let max = pts.iter().map(BallPoint::norm).fold(0.0, f64::max);
        assert_abs_diff_eq!(max, 1f64.tanh(), epsilon = 1e-15);
        // Constant column stays at zero.
        assert!(pts.iter().all(|p| p.coords()[1] == 0.0));
    }

    #[test]
    fn projection_near_euclidean_keeps_scaled_data() {
        let data = ndarray::array![[1.0, 2.0], [-3.0, 0.5], [0.0, 7.0], [2.0, -1.0]];
        let c = Curvature::new(-1e-10).unwrap();
        let pts = project_to_ball(&data, c, 2.0).unwrap();
        let scaled = standardize_scaled(&data, 2.0).unwrap();
        for (p, row) in pts.iter().zip(scaled.rows()) {
            for (a, b) in p.coords().iter().zip(row) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-5);
            }
        }
    }

    #[test]
    fn projection_rejects_non_finite() {
        let data = ndarray::array![[1.0, 2.0], [f64::NAN, 0.5]];
        match project_to_ball(&data, Curvature::UNIT, 1.0) {
            Err(Error::InvalidData { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn ball_vec(dim: usize, max: f64) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0f64..1.0, dim).prop_map(move |v| {
            let n = raw::norm(&v);
            if n > max {
                v.iter().map(|x| x * max / n).collect()
            } else {
                v
            }
        })
    }

    proptest! {
        #[test]
        fn left_cancellation(v in ball_vec(3, 0.9), w in ball_vec(3, 0.9)) {
            let v = unit(&v);
            let w = unit(&w);
            let back = mobius_add(&v.neg(), &mobius_add(&v, &w).unwrap()).unwrap();
            for (a, b) in back.coords().iter().zip(w.coords()) {
                prop_assert!((a - b).abs() < 1e-10);
            }
        }

        #[test]
        fn distance_symmetric_and_triangle(
            x in ball_vec(3, 0.9), y in ball_vec(3, 0.9), z in ball_vec(3, 0.9)
        ) {
            let (x, y, z) = (unit(&x), unit(&y), unit(&z));
            let dxy = dist(&x, &y).unwrap();
            prop_assert_eq!(dxy, dist(&y, &x).unwrap());
            prop_assert!(dxy <= dist(&x, &z).unwrap() + dist(&z, &y).unwrap() + 1e-9);
        }

        #[test]
        fn scalar_mul_scales_distance_from_origin(v in ball_vec(2, 0.8), lambda in -3.0f64..3.0) {
            let v = unit(&v);
            let o = BallPoint::origin(2, Curvature::UNIT);
            let lv = mobius_scalar_mul(lambda, &v);
            let lhs = dist(&o, &lv).unwrap();
            let rhs = lambda.abs() * dist(&o, &v).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn scalar_mul_keeps_direction(v in ball_vec(3, 0.9), lambda in 0.01f64..5.0) {
            let v = unit(&v);
            prop_assume!(v.norm() > 1e-6);
            let lv = mobius_scalar_mul(lambda, &v);
            let cos = raw::dot(lv.coords(), v.coords()) / (lv.norm() * v.norm());
            prop_assert!((cos - 1.0).abs() < 1e-12);
        }
    }
}
