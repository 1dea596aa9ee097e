//! Mean-curvature comparison along normal geodesic congruences.
//!
//! The scalar focusing inequality `dH/du <= -Ric(g', g') - H^2/n` pins the
//! mean curvature of equidistant sets: under `Ric >= 0` the set at distance
//! `tau` to the future of a Cauchy surface has `H <= n/tau` in the support
//! sense, and under `Ric >= -n*lambda` the bound becomes
//! `n*sqrt(lambda)*coth(sqrt(lambda)*tau)`. In warped models the equidistant
//! set over a coordinate slice is again a coordinate slice, so the bound can
//! be checked directly against the slice mean curvature; that pairing is what
//! [`barrier_pair_select`] uses to trap the flow.

use crate::error::{CmcError, Result};
use crate::ode::{integrate_adaptive, OdeOptions};
use crate::spacetime::MultiWarpedSpacetime;

/// Upper barrier data for the slice at distance `tau` above a reference
/// slice.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BarrierCertificate {
    pub tau: f64,
    pub n: usize,
    pub lambda: f64,
    /// Support-sense mean curvature bound for the equidistant set.
    pub bound: f64,
    /// Coordinate height of the equidistant slice.
    pub t_slice: f64,
    /// Actual mean curvature of that slice.
    pub slice_mean_curvature: f64,
    /// Whether `slice_mean_curvature <= bound` held numerically.
    pub verified: bool,
}

/// Trace of the focusing ODE along a unit timelike geodesic.
#[derive(Debug, Clone)]
pub struct RaychaudhuriTrace {
    pub u: Vec<f64>,
    pub h: Vec<f64>,
    /// `mean_curvature_bound(n, u, lambda)` at each sample.
    pub bound: Vec<f64>,
    /// Location where `H` diverged to `-inf` (focal point), if reached.
    pub blow_up: Option<f64>,
}

/// Mean curvature bound for the distance-`tau` set: `n/tau` when `lambda = 0`,
/// `n sqrt(lambda) coth(sqrt(lambda) tau)` when `lambda > 0`. Continuous in
/// `lambda` at zero.
pub fn mean_curvature_bound(n: usize, tau: f64, lambda: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(CmcError::Argument(format!("tau must be positive, got {tau}")));
    }
    if lambda < 0.0 {
        return Err(CmcError::Argument(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let nf = n as f64;
    if lambda == 0.0 {
        return Ok(nf / tau);
    }
    let s = lambda.sqrt();
    Ok(nf * s / (s * tau).tanh())
}

/// Inverse hyperbolic cotangent for arguments > 1.
fn arcoth(x: f64) -> f64 {
    0.5 * ((x + 1.0) / (x - 1.0)).ln()
}

/// Integrates the equality case `dH/du = -ric(u) - H^2/n - sigma2(u)` from
/// `(u0, h0)` to `u1` with adaptive steps, recording every accepted step.
/// A focal point (`H -> -inf`) stops the trace and is flagged.
pub fn raychaudhuri_integrate<R, S>(
    ric_fn: R,
    h0: f64,
    u0: f64,
    u1: f64,
    n: usize,
    lambda: f64,
    sigma2_fn: Option<S>,
) -> Result<RaychaudhuriTrace>
where
    R: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    if !(u0 < u1) {
        return Err(CmcError::Argument(format!(
            "need u0 < u1, got u0 = {u0}, u1 = {u1}"
        )));
    }
    if !(u0 > 0.0) {
        return Err(CmcError::Argument(format!("u0 must be positive, got {u0}")));
    }
    let nf = n as f64;
    const BLOW_UP: f64 = 1e12;

    let mut us = vec![u0];
    let mut hs = vec![h0];
    let mut blow_up = None;
    let rhs = |u: f64, y: &[f64], dy: &mut [f64]| {
        let ric = ric_fn(u);
        let sig = sigma2_fn.as_ref().map_or(0.0, |f| f(u));
        dy[0] = -ric - y[0] * y[0] / nf - sig;
    };
    // Validate the supplied curvature function up front.
    {
        let mut probe = [0.0f64];
        rhs(u0, &[h0], &mut probe);
        if !probe[0].is_finite() {
            return Err(CmcError::Argument(
                "ric_fn or sigma2_fn returned a non-finite value".into(),
            ));
        }
    }
    let result = integrate_adaptive(
        rhs,
        u0,
        u1,
        &[h0],
        &OdeOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            ..Default::default()
        },
        |u, y| {
            us.push(u);
            hs.push(y[0]);
            if y[0].abs() > BLOW_UP {
                blow_up = Some(u);
                return false;
            }
            true
        },
    );
    match result {
        Ok(_) => {}
        // Step-size underflow right at a focal point also counts as blow-up.
        Err(CmcError::Numeric(_)) if hs.last().map_or(false, |h| h.abs() > 1e6) => {
            blow_up = Some(*us.last().expect("at least the initial sample"));
        }
        Err(e) => return Err(e),
    }
    let bound = us
        .iter()
        .map(|&u| mean_curvature_bound(n, u, lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(RaychaudhuriTrace {
        u: us,
        h: hs,
        bound,
        blow_up,
    })
}

/// The equidistant set at distance `tau` above the `t0`-slice of a warped
/// model is the `(t0 + tau)`-slice (the normal geodesics are the t-lines).
/// Returns its certificate: the comparison bound together with the actual
/// slice mean curvature.
pub fn distance_sphere_slice(
    m: &MultiWarpedSpacetime,
    t0: f64,
    tau: f64,
) -> Result<BarrierCertificate> {
    if !m.contains_t(t0) {
        return Err(CmcError::Domain(format!(
            "t0 = {t0} outside the model interval"
        )));
    }
    if !(tau > 0.0) {
        return Err(CmcError::Argument(format!("tau must be positive, got {tau}")));
    }
    let t_slice = t0 + tau;
    if let Some(t_max) = m.t_max {
        if t_slice >= t_max {
            return Err(CmcError::Domain(format!(
                "tau = {tau} pushes the slice to t = {t_slice}, beyond t_max = {t_max}"
            )));
        }
    }
    let n = m.spatial_dim();
    let bound = mean_curvature_bound(n, tau, m.lambda)?;
    let slice_mean_curvature = m.slice_mean_curvature(t_slice);
    let verified = slice_mean_curvature <= bound * (1.0 + 1e-12) + 1e-12;
    Ok(BarrierCertificate {
        tau,
        n,
        lambda: m.lambda,
        bound,
        t_slice,
        slice_mean_curvature,
        verified,
    })
}

/// Future existence time from the `t0`-slice: normal geodesics are t-lines,
/// defined until `t_max`, so `T0 = t_max - t0` (infinite for future-infinite
/// models). The verdict reports whether `T0 > n/c`, the margin needed to run
/// the barrier construction with forcing level `c`.
pub fn future_existence_time(
    m: &MultiWarpedSpacetime,
    t0: f64,
    c: f64,
) -> Result<(f64, bool)> {
    if !m.contains_t(t0) {
        return Err(CmcError::Domain(format!(
            "t0 = {t0} outside the model interval"
        )));
    }
    if !(c > 0.0) {
        return Err(CmcError::Argument(format!("c must be positive, got {c}")));
    }
    let t_exist = m.t_max.map_or(f64::INFINITY, |tm| tm - t0);
    let n = m.spatial_dim() as f64;
    Ok((t_exist, t_exist > n / c))
}

/// Selects a barrier pair for forcing level `c`: the lower barrier is the
/// `t_ref`-slice (which must have `H > c`), the upper barrier is the
/// equidistant slice at the smallest closed-form `tau` whose comparison bound
/// sits strictly below `c`.
///
/// The target bound is `c/2` when that is reachable; for `lambda > 0` the
/// coth bound never drops below `n sqrt(lambda)`, so when `c/2` lies at or
/// under that asymptote the target falls back to the midpoint
/// `(c + n sqrt(lambda))/2`. No `tau` exists at all when `c <= n sqrt(lambda)`.
pub fn barrier_pair_select(
    m: &MultiWarpedSpacetime,
    c: f64,
    t_ref: f64,
) -> Result<(f64, BarrierCertificate)> {
    if !(c > 0.0) {
        return Err(CmcError::Argument(format!("c must be positive, got {c}")));
    }
    if !m.contains_t(t_ref) {
        return Err(CmcError::Domain(format!(
            "t_ref = {t_ref} outside the model interval"
        )));
    }
    let n = m.spatial_dim();
    let nf = n as f64;
    let h_ref = m.slice_mean_curvature(t_ref);
    if !(h_ref > c) {
        return Err(CmcError::Argument(format!(
            "reference slice has H = {h_ref}, which does not exceed c = {c}"
        )));
    }
    let lambda = m.lambda;
    let tau = if lambda == 0.0 {
        2.0 * nf / c
    } else {
        let asymptote = nf * lambda.sqrt();
        if c <= asymptote {
            return Err(CmcError::NoBarrier(format!(
                "c = {c} does not exceed the bound's asymptote n*sqrt(lambda) = {asymptote}"
            )));
        }
        let target = if c / 2.0 > asymptote {
            c / 2.0
        } else {
            (c + asymptote) / 2.0
        };
        arcoth(target / asymptote) / lambda.sqrt()
    };
    let cert = distance_sphere_slice(m, t_ref, tau)?;
    if !cert.verified {
        return Err(CmcError::NoBarrier(format!(
            "slice at t = {} has H = {} above the comparison bound {}; \
             the model violates the energy condition along t-lines",
            cert.t_slice, cert.slice_mean_curvature, cert.bound
        )));
    }
    if !(cert.bound < c) {
        return Err(CmcError::NoBarrier(format!(
            "selected bound {} failed to drop below c = {c}",
            cert.bound
        )));
    }
    Ok((t_ref, cert))
}
