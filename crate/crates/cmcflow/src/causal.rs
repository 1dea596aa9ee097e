//! Null geodesics, observer horizons, and future-boundary classification for
//! warped models.
//!
//! The spatial coordinates are Killing directions, so the covariant momenta
//! `p_k = a_k(t)^2 dx^k/dsigma` are conserved and `t` itself parameterizes
//! every null geodesic (`dt/dsigma` never vanishes). The integrator still
//! evolves the velocity components by their own geodesic equations, so the
//! momentum and null-condition residuals measured along the trajectory are
//! genuine accuracy diagnostics, not identities.

use serde::Serialize;

use crate::error::{CmcError, Result};
use crate::ode::{integrate_adaptive, OdeOptions};
use crate::quadrature;
use crate::spacetime::{MultiWarpedSpacetime, WarpingLaw};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Past,
    Future,
}

/// An integrated null geodesic, sampled at `ts[i]` with positions
/// `xs[i*d..(i+1)*d]` (coordinates accumulate without torus wrapping) and
/// affine parameter `sigma[i]`.
#[derive(Debug, Clone)]
pub struct NullGeodesic {
    pub start_t: f64,
    pub start_x: Vec<f64>,
    pub momenta: Vec<f64>,
    pub orientation: Orientation,
    pub ts: Vec<f64>,
    pub xs: Vec<f64>,
    pub sigma: Vec<f64>,
    /// max over samples of `|a_k^2 V^k - p_k| / |p|_inf`.
    pub momentum_residual: f64,
    /// max over samples of `|W^2 - sum_k a_k^2 (V^k)^2| / W^2`.
    pub null_residual: f64,
    /// True when the run stopped at the model boundary instead of `t_stop`.
    pub truncated: bool,
}

impl NullGeodesic {
    pub fn dim(&self) -> usize {
        self.start_x.len()
    }

    /// Position sample `i` as a slice.
    pub fn x(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.xs[i * d..(i + 1) * d]
    }

    /// Coordinate displacement along `axis` between start and end.
    pub fn displacement(&self, axis: usize) -> f64 {
        let d = self.dim();
        let last = self.ts.len() - 1;
        self.xs[last * d + axis] - self.start_x[axis]
    }
}

/// Future-boundary classification of a future-infinite model.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryClass {
    /// Fibers with divergent `int^inf a_i^-1 dt`.
    pub divergent_fibers: Vec<usize>,
    /// Fibers with convergent integral; these survive into the boundary.
    pub convergent_fibers: Vec<usize>,
    /// Product of the convergent fibers' tori, or "point".
    pub boundary_shape: String,
    pub spacelike: bool,
    /// Per-fiber tail integral from the reference point (None = divergent).
    pub integrals: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisExtent {
    pub axis: usize,
    pub period: f64,
    /// Largest sampled displacement reached at the slice.
    pub numeric_extent: f64,
    /// Confinement integral from the slice up to the sampling cap.
    pub analytic_extent: f64,
    /// Exact `t0 -> inf` limit of the confinement integral, when finite.
    pub analytic_limit: Option<f64>,
    /// Whether pasts from late enough emission times reach the whole axis.
    /// Decided by the analytic bound (a divergent integral covers any
    /// period); the sampled extent is a cross-check from below.
    pub covered: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HorizonReport {
    pub covers_slice: bool,
    pub axes: Vec<AxisExtent>,
    pub t_cap: f64,
    pub fan: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletenessReport {
    /// Per fiber: whether `int^inf a_i dt` diverges.
    pub fiber_divergent: Vec<bool>,
    /// All fibers divergent (the future-completeness criterion).
    pub overall: bool,
}

fn axis_laws(m: &MultiWarpedSpacetime) -> Vec<WarpingLaw> {
    (0..m.spatial_dim())
        .map(|k| *m.law_of_axis(k))
        .collect()
}

/// Integrates a null geodesic from `(start_t, start_x)` with conserved
/// momenta `momenta` until coordinate time `t_stop`, sampling roughly
/// `samples` nodes. Past-directed runs require `t_stop < start_t`, future
/// ones the reverse. A `t_stop` beyond the model interval truncates near the
/// boundary and flags the trajectory.
pub fn null_geodesic(
    m: &MultiWarpedSpacetime,
    start_t: f64,
    start_x: &[f64],
    momenta: &[f64],
    t_stop: f64,
    orientation: Orientation,
    samples: usize,
) -> Result<NullGeodesic> {
    let d = m.spatial_dim();
    if start_x.len() != d || momenta.len() != d {
        return Err(CmcError::Argument(format!(
            "start/momenta must have {d} components"
        )));
    }
    if momenta.iter().all(|&p| p == 0.0) {
        return Err(CmcError::Argument("momenta must not all vanish".into()));
    }
    if !m.contains_t(start_t) {
        return Err(CmcError::Domain(format!(
            "start t = {start_t} outside the model interval"
        )));
    }
    match orientation {
        Orientation::Past if !(t_stop < start_t) => {
            return Err(CmcError::Argument(format!(
                "past-directed run needs t_stop < start_t ({t_stop} vs {start_t})"
            )))
        }
        Orientation::Future if !(t_stop > start_t) => {
            return Err(CmcError::Argument(format!(
                "future-directed run needs t_stop > start_t ({t_stop} vs {start_t})"
            )))
        }
        _ => {}
    }

    // Clamp the target inside the model interval.
    let mut truncated = false;
    let mut target = t_stop;
    if target <= m.t_min {
        target = m.t_min + 1e-6 * (start_t - m.t_min);
        truncated = true;
    }
    if let Some(t_max) = m.t_max {
        if target >= t_max {
            target = t_max - 1e-6 * (t_max - start_t);
            truncated = true;
        }
    }

    let laws = axis_laws(m);
    let big_a = |t: f64, k: usize| {
        let a = laws[k].value(t);
        a * a
    };

    // State: [x^1..x^d, V^1..V^d, W, sigma] with V = dx/dsigma, W = dt/dsigma.
    let mut y0 = vec![0.0; 2 * d + 2];
    y0[..d].copy_from_slice(start_x);
    let mut s = 0.0;
    for k in 0..d {
        let a2 = big_a(start_t, k);
        y0[d + k] = momenta[k] / a2;
        s += momenta[k] * momenta[k] / a2;
    }
    y0[2 * d] = match orientation {
        Orientation::Future => s.sqrt(),
        Orientation::Past => -s.sqrt(),
    };
    y0[2 * d + 1] = 0.0;

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let w = y[2 * d];
        let mut dw = 0.0;
        for k in 0..d {
            let a = laws[k].value(t);
            let da = laws[k].d1(t);
            let v = y[d + k];
            dy[k] = v / w;
            dy[d + k] = -2.0 * (da / a) * v;
            dw -= a * da * v * v;
        }
        dy[2 * d] = dw / w;
        dy[2 * d + 1] = 1.0 / w;
    };

    // Node grid: uniform in t for modest spans, geometric for large ratios.
    let nodes = node_grid(start_t, target, samples.max(8));

    let p_scale = momenta.iter().fold(0.0f64, |a, &p| a.max(p.abs()));
    let mut ts = Vec::with_capacity(nodes.len());
    let mut xs = Vec::with_capacity(nodes.len() * d);
    let mut sigma = Vec::with_capacity(nodes.len());
    let mut momentum_residual = 0.0f64;
    let mut null_residual = 0.0f64;

    let mut record = |t: f64, y: &[f64]| {
        ts.push(t);
        xs.extend_from_slice(&y[..d]);
        sigma.push(y[2 * d + 1]);
        let w = y[2 * d];
        let mut s = 0.0;
        for k in 0..d {
            let a2 = big_a(t, k);
            let p_now = a2 * y[d + k];
            momentum_residual = momentum_residual.max((p_now - momenta[k]).abs() / p_scale);
            s += a2 * y[d + k] * y[d + k];
        }
        null_residual = null_residual.max((w * w - s).abs() / (w * w));
    };

    record(start_t, &y0);
    let opts = OdeOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let mut y = y0;
    for pair in nodes.windows(2) {
        let (_, y_next) = integrate_adaptive(&rhs, pair[0], pair[1], &y, &opts, |_, _| true)?;
        y = y_next;
        record(pair[1], &y);
    }

    Ok(NullGeodesic {
        start_t,
        start_x: start_x.to_vec(),
        momenta: momenta.to_vec(),
        orientation,
        ts,
        xs,
        sigma,
        momentum_residual,
        null_residual,
        truncated,
    })
}

/// Unit timelike geodesic with conserved spatial momenta (so `p = 0` gives a
/// t-line and proper time equals coordinate time). Returns sampled
/// `(t, x, proper_time)` rows like [`null_geodesic`].
pub fn timelike_geodesic(
    m: &MultiWarpedSpacetime,
    start_t: f64,
    start_x: &[f64],
    momenta: &[f64],
    t_stop: f64,
    samples: usize,
) -> Result<NullGeodesic> {
    let d = m.spatial_dim();
    if start_x.len() != d || momenta.len() != d {
        return Err(CmcError::Argument(format!(
            "start/momenta must have {d} components"
        )));
    }
    if !m.contains_t(start_t) || !m.contains_t(t_stop) {
        return Err(CmcError::Domain("start or stop outside the model".into()));
    }
    if t_stop == start_t {
        return Err(CmcError::Argument("t_stop must differ from start_t".into()));
    }
    let laws = axis_laws(m);
    let mut y0 = vec![0.0; 2 * d + 2];
    y0[..d].copy_from_slice(start_x);
    let mut s = 1.0; // unit timelike normalization
    for k in 0..d {
        let a = laws[k].value(start_t);
        y0[d + k] = momenta[k] / (a * a);
        s += momenta[k] * momenta[k] / (a * a);
    }
    y0[2 * d] = if t_stop > start_t { s.sqrt() } else { -s.sqrt() };

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let w = y[2 * d];
        let mut dw = 0.0;
        for k in 0..d {
            let a = laws[k].value(t);
            let da = laws[k].d1(t);
            let v = y[d + k];
            dy[k] = v / w;
            dy[d + k] = -2.0 * (da / a) * v;
            dw -= a * da * v * v;
        }
        dy[2 * d] = dw / w;
        dy[2 * d + 1] = 1.0 / w;
    };
    let nodes = node_grid(start_t, t_stop, samples.max(8));
    let mut ts = Vec::new();
    let mut xs = Vec::new();
    let mut sigma = Vec::new();
    ts.push(start_t);
    xs.extend_from_slice(&y0[..d]);
    sigma.push(0.0);
    let opts = OdeOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let mut y = y0;
    for pair in nodes.windows(2) {
        let (_, y_next) = integrate_adaptive(&rhs, pair[0], pair[1], &y, &opts, |_, _| true)?;
        y = y_next;
        ts.push(pair[1]);
        xs.extend_from_slice(&y[..d]);
        sigma.push(y[2 * d + 1]);
    }
    Ok(NullGeodesic {
        start_t,
        start_x: start_x.to_vec(),
        momenta: momenta.to_vec(),
        orientation: if t_stop > start_t {
            Orientation::Future
        } else {
            Orientation::Past
        },
        ts,
        xs,
        sigma,
        momentum_residual: 0.0,
        null_residual: 0.0,
        truncated: false,
    })
}

fn node_grid(from: f64, to: f64, n: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(n + 1);
    let ratio = (to.abs().max(1e-12) / from.abs().max(1e-12)).max(1.0);
    if from > 0.0 && to > 0.0 && ratio > 32.0 {
        // Geometric spacing for long spans like t_cap ladders.
        let lf = from.ln();
        let lt = to.ln();
        for i in 0..=n {
            nodes.push((lf + (lt - lf) * i as f64 / n as f64).exp());
        }
    } else {
        for i in 0..=n {
            nodes.push(from + (to - from) * i as f64 / n as f64);
        }
    }
    nodes[0] = from;
    nodes[n] = to;
    nodes
}

/// `int_{t1}^{t0} a_k^{-1} dt`: bounds the coordinate displacement along
/// `axis` of any past null geodesic running from `t0` down to `t1`.
pub fn confinement_bound(
    m: &MultiWarpedSpacetime,
    axis: usize,
    t1: f64,
    t0: f64,
) -> Result<f64> {
    if !(t1 < t0) {
        return Err(CmcError::Argument(format!(
            "need t1 < t0, got t1 = {t1}, t0 = {t0}"
        )));
    }
    if t1 < m.t_min || m.t_max.map_or(false, |tm| t0 > tm) {
        return Err(CmcError::Domain(format!(
            "[{t1}, {t0}] leaves the model interval"
        )));
    }
    let law = *m.law_of_axis(axis);
    quadrature::integrate(&|t| 1.0 / law.value(t), t1, t0, 1e-10)
}

/// Exact `t0 -> inf` limit of [`confinement_bound`], when finite.
pub fn confinement_limit(m: &MultiWarpedSpacetime, axis: usize, t1: f64) -> Result<Option<f64>> {
    if m.t_max.is_some() {
        return Err(CmcError::NotApplicable(
            "tail limits require a future-infinite model".into(),
        ));
    }
    if t1 < m.t_min {
        return Err(CmcError::Domain(format!("t1 = {t1} below t_min")));
    }
    Ok(match *m.law_of_axis(axis) {
        WarpingLaw::Power { p } if p > 1.0 => Some(t1.powf(1.0 - p) / (p - 1.0)),
        WarpingLaw::Power { .. } => None,
        WarpingLaw::Exponential { rate } if rate > 0.0 => Some((-rate * t1).exp() / rate),
        WarpingLaw::Exponential { .. } => None,
        WarpingLaw::Constant { .. } => None,
    })
}

/// Shoots fans of past null geodesics from the t-line through `xi`, with
/// emission times on a geometric ladder up to `t_cap`, and measures how much
/// of the `t1`-slice their displacements reach. The slice is covered along an
/// axis once the extent reaches the torus period; an axis whose confinement
/// integral stays below its period keeps an observer horizon.
pub fn observer_horizon_test(
    m: &MultiWarpedSpacetime,
    xi: &[f64],
    t1: f64,
    fan: usize,
    t_cap: f64,
    jobs: usize,
) -> Result<HorizonReport> {
    let d = m.spatial_dim();
    if xi.len() != d {
        return Err(CmcError::Argument(format!("xi must have {d} components")));
    }
    if fan == 0 {
        return Err(CmcError::Argument("fan must be >= 1".into()));
    }
    if !m.contains_t(t1) {
        return Err(CmcError::Domain(format!("t1 = {t1} outside the model")));
    }
    let mut cap = t_cap;
    if let Some(t_max) = m.t_max {
        cap = cap.min(t_max - 1e-9 * (t_max - t1));
    }
    if cap <= t1 {
        return Err(CmcError::Argument(format!(
            "t_cap = {t_cap} must exceed t1 = {t1}"
        )));
    }

    // Emission ladder: t1 * 2^j capped at `cap`.
    let mut ladder = Vec::new();
    let base = if t1 > 0.0 { t1 } else { t1 + 1.0 };
    let mut t0 = base * 2.0;
    while t0 < cap {
        ladder.push(t0);
        t0 *= 2.0;
    }
    ladder.push(cap);

    // Ray directions: axis-aligned (the extremal displacements) plus mixed
    // fans per axis pair.
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        let mut p = vec![0.0; d];
        p[k] = 1.0;
        directions.push(p);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            for i in 0..fan {
                let theta = (i + 1) as f64 * std::f64::consts::FRAC_PI_2 / (fan + 1) as f64;
                let mut p = vec![0.0; d];
                p[j] = theta.cos();
                p[k] = theta.sin();
                directions.push(p);
            }
        }
    }
    let rays: Vec<(f64, &Vec<f64>)> = ladder
        .iter()
        .flat_map(|&t_emit| directions.iter().map(move |p| (t_emit, p)))
        .collect();

    // Displacements merge by max, so chunked threads stay deterministic.
    let jobs = jobs.max(1).min(rays.len().max(1));
    let chunk = rays.len().div_ceil(jobs);
    let extents = std::thread::scope(|scope| -> Result<Vec<f64>> {
        let mut handles = Vec::new();
        for piece in rays.chunks(chunk) {
            handles.push(scope.spawn(move || -> Result<Vec<f64>> {
                let mut local = vec![0.0f64; d];
                for (t_emit, p) in piece {
                    let geo = null_geodesic(m, *t_emit, xi, p, t1, Orientation::Past, 256)?;
                    for k in 0..d {
                        local[k] = local[k].max(geo.displacement(k).abs());
                    }
                }
                Ok(local)
            }));
        }
        let mut extents = vec![0.0f64; d];
        for h in handles {
            let local = h.join().expect("horizon worker panicked")?;
            for k in 0..d {
                extents[k] = extents[k].max(local[k]);
            }
        }
        Ok(extents)
    })?;

    let mut axes = Vec::with_capacity(d);
    let mut covers = true;
    for k in 0..d {
        let period = m.period_of_axis(k);
        let analytic_extent = confinement_bound(m, k, t1, cap)?;
        let analytic_limit = if m.t_max.is_none() {
            confinement_limit(m, k, t1)?
        } else {
            None
        };
        let covered = if m.t_max.is_none() {
            match analytic_limit {
                None => true, // divergent integral reaches any period
                Some(limit) => limit >= period,
            }
        } else {
            analytic_extent >= period
        };
        covers &= covered;
        axes.push(AxisExtent {
            axis: k,
            period,
            numeric_extent: extents[k],
            analytic_extent,
            analytic_limit,
            covered,
        });
    }
    Ok(HorizonReport {
        covers_slice: covers,
        axes,
        t_cap: cap,
        fan,
    })
}

/// Classifies the future boundary of a future-infinite model by the tail
/// behavior of `int^inf a_i^{-1} dt` per fiber: the convergent fibers survive
/// as the boundary's product of tori, a fully divergent model collapses the
/// boundary to a point.
pub fn classify_boundary(m: &MultiWarpedSpacetime) -> Result<BoundaryClass> {
    if m.t_max.is_some() {
        return Err(CmcError::NotApplicable(
            "boundary classification requires t_max = inf".into(),
        ));
    }
    let reference = if m.t_min.is_finite() {
        m.t_min + 1.0
    } else {
        0.0
    };
    let mut divergent = Vec::new();
    let mut convergent = Vec::new();
    let mut integrals = Vec::new();
    for (i, f) in m.fibers.iter().enumerate() {
        let tail = match f.law {
            WarpingLaw::Power { p } if p > 1.0 => Some(reference.powf(1.0 - p) / (p - 1.0)),
            WarpingLaw::Power { .. } => None,
            WarpingLaw::Exponential { rate } if rate > 0.0 => {
                Some((-rate * reference).exp() / rate)
            }
            WarpingLaw::Exponential { .. } => None,
            WarpingLaw::Constant { .. } => None,
        };
        if tail.is_some() {
            convergent.push(i);
        } else {
            divergent.push(i);
        }
        integrals.push(tail);
    }
    let boundary_shape = if convergent.is_empty() {
        "point".to_string()
    } else {
        convergent
            .iter()
            .map(|&i| format!("T^{}", m.fibers[i].dim))
            .collect::<Vec<_>>()
            .join(" x ")
    };
    Ok(BoundaryClass {
        divergent_fibers: divergent,
        convergent_fibers: convergent,
        boundary_shape,
        spacelike: true,
        integrals,
    })
}

/// Future-completeness criterion: every fiber must have `int^inf a_i dt`
/// divergent. Reported as a criterion, not a proof.
pub fn completeness_test(m: &MultiWarpedSpacetime) -> Result<CompletenessReport> {
    if m.t_max.is_some() {
        return Err(CmcError::NotApplicable(
            "completeness criterion requires t_max = inf".into(),
        ));
    }
    let fiber_divergent: Vec<bool> = m
        .fibers
        .iter()
        .map(|f| match f.law {
            WarpingLaw::Power { p } => p >= -1.0,
            WarpingLaw::Exponential { rate } => rate >= 0.0,
            WarpingLaw::Constant { .. } => true,
        })
        .collect();
    let overall = fiber_divergent.iter().all(|&b| b);
    Ok(CompletenessReport {
        fiber_divergent,
        overall,
    })
}
