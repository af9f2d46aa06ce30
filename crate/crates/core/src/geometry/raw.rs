//! Slice-level kernels shared by the typed API and the clustering hot loop.
//!
//! Everything here works with the curvature magnitude `kappa = -c > 0`.

use super::{BOUNDARY_MARGIN, DEGENERATE_DENOMINATOR};

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

#[inline]
pub(crate) fn max_norm(kappa: f64) -> f64 {
    (1.0 - BOUNDARY_MARGIN) / kappa.sqrt()
}

/// Radially pulls `x` back to the clipping radius. Returns true if it moved.
#[inline]
pub(crate) fn clip(x: &mut [f64], kappa: f64) -> bool {
    let n = norm(x);
    let limit = max_norm(kappa);
    if n >= limit {
        let s = limit / n;
        x.iter_mut().for_each(|v| *v *= s);
        true
    } else {
        false
    }
}

/// Conformal factor `2 / (1 - kappa |x|^2)`.
#[inline]
pub(crate) fn conformal_factor(x: &[f64], kappa: f64) -> f64 {
    2.0 / (1.0 - kappa * norm_sq(x))
}

/// Möbius addition written into `out`; returns the denominator so callers
/// can decide whether it is degenerate. No clipping.
#[inline]
pub(crate) fn mobius_add_into(v: &[f64], w: &[f64], kappa: f64, out: &mut [f64]) -> f64 {
    let vw = dot(v, w);
    let vv = norm_sq(v);
    let ww = norm_sq(w);
    let a = 1.0 + 2.0 * kappa * vw + kappa * ww;
    let b = 1.0 - kappa * vv;
    let denom = 1.0 + 2.0 * kappa * vw + kappa * kappa * vv * ww;
    for ((o, &vi), &wi) in out.iter_mut().zip(v).zip(w) {
        *o = (a * vi + b * wi) / denom;
    }
    denom
}

#[inline]
pub(crate) fn is_degenerate(denom: f64) -> bool {
    denom.is_nan() || denom.abs() < DEGENERATE_DENOMINATOR
}

/// Squared norm of the gyro-difference `(-x) ⊕ y`, through the closed form
/// `|x - y|^2 / (1 - 2 kappa <x,y> + kappa^2 |x|^2 |y|^2)`.
///
/// Bit-for-bit symmetric in its arguments and free of the cancellation the
/// vector form suffers when `x ≈ y`.
#[inline]
pub(crate) fn gyro_diff_norm_sq(x: &[f64], y: &[f64], kappa: f64) -> f64 {
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if diff == 0.0 {
        return 0.0;
    }
    let xy = dot(x, y);
    let denom = 1.0 - 2.0 * kappa * xy + kappa * kappa * (norm_sq(x) * norm_sq(y));
    diff / denom
}

/// Hyperbolic distance, or `None` when the `atanh` argument is too close to 1.
#[inline]
pub(crate) fn dist(x: &[f64], y: &[f64], kappa: f64) -> Option<f64> {
    let arg = (kappa * gyro_diff_norm_sq(x, y, kappa)).sqrt();
    if arg >= 1.0 - DEGENERATE_DENOMINATOR {
        return None;
    }
    Some(2.0 / kappa.sqrt() * arg.atanh())
}

/// Riemannian logarithm `log_x(y)` written into `out` (ambient coordinates).
pub(crate) fn log_map_into(x: &[f64], y: &[f64], kappa: f64, out: &mut [f64]) {
    if x == y {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
    mobius_add_into(&neg_x, y, kappa, out);
    let n = norm(out);
    if n == 0.0 {
        return;
    }
    let sk = kappa.sqrt();
    let lambda = conformal_factor(x, kappa);
    // Arguments at or past 1 only arise from clipped inputs; pin them below.
    let arg = (sk * n).min(1.0 - DEGENERATE_DENOMINATOR);
    let s = 2.0 / (lambda * sk) * arg.atanh() / n;
    out.iter_mut().for_each(|o| *o *= s);
}

/// Riemannian exponential `exp_x(v)` written into `out`, clipped to the ball.
pub(crate) fn exp_map_into(x: &[f64], v: &[f64], kappa: f64, out: &mut [f64]) {
    let n = norm(v);
    if n == 0.0 {
        out.copy_from_slice(x);
        return;
    }
    let sk = kappa.sqrt();
    let lambda = conformal_factor(x, kappa);
    let s = (lambda * sk * n / 2.0).tanh() / (sk * n);
    let mut step: Vec<f64> = v.iter().map(|vi| s * vi).collect();
    clip(&mut step, kappa);
    mobius_add_into(x, &step, kappa, out);
    clip(out, kappa);
}

/// Per-point data for evaluating `w ⊗ x_j` without recomputing `atanh` for
/// every weight: each point is stored as a unit direction and its rapidity
/// `atanh(sqrt(kappa) |x_j|)`.
pub(crate) struct ScaledTerms {
    kappa: f64,
    dim: usize,
    coords: Vec<f64>,
    units: Vec<f64>,
    rapidity: Vec<f64>,
}

impl ScaledTerms {
    pub(crate) fn new<'a>(points: impl IntoIterator<Item = &'a [f64]>, dim: usize, kappa: f64) -> Self {
        let sk = kappa.sqrt();
        let mut coords = Vec::new();
        let mut units = Vec::new();
        let mut rapidity = Vec::new();
        for x in points {
            coords.extend_from_slice(x);
            let n = norm(x);
            if n == 0.0 {
                units.extend(std::iter::repeat_n(0.0, dim));
                rapidity.push(0.0);
            } else {
                units.extend(x.iter().map(|v| v / n));
                rapidity.push((sk * n).min(1.0 - DEGENERATE_DENOMINATOR).atanh());
            }
        }
        Self {
            kappa,
            dim,
            coords,
            units,
            rapidity,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.rapidity.len()
    }

    /// `w ⊗ x_j` into `out`. `1 ⊗ x` is returned bit-exact.
    #[inline]
    pub(crate) fn scaled_into(&self, j: usize, w: f64, out: &mut [f64]) {
        if w == 1.0 {
            out.copy_from_slice(&self.coords[j * self.dim..(j + 1) * self.dim]);
            return;
        }
        let r = (w * self.rapidity[j]).tanh() / self.kappa.sqrt();
        let u = &self.units[j * self.dim..(j + 1) * self.dim];
        for (o, &ui) in out.iter_mut().zip(u) {
            *o = ui * r;
        }
    }

    /// Left fold `(w_0 ⊗ x_0) ⊕ (w_1 ⊗ x_1) ⊕ ...` in index order.
    ///
    /// On a degenerate denominator returns the offending term index.
    pub(crate) fn mobius_mean_into(&self, weights: &[f64], out: &mut [f64]) -> Result<(), usize> {
        let dim = self.dim;
        let mut term = vec![0.0; dim];
        let mut next = vec![0.0; dim];
        self.scaled_into(0, weights[0], out);
        clip(out, self.kappa);
        for (j, &w) in weights.iter().enumerate().skip(1) {
            self.scaled_into(j, w, &mut term);
            let denom = mobius_add_into(out, &term, self.kappa, &mut next);
            if is_degenerate(denom) {
                return Err(j);
            }
            clip(&mut next, self.kappa);
            out.copy_from_slice(&next);
        }
        Ok(())
    }
}
