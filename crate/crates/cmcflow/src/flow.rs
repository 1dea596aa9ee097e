//! Forced mean curvature flow of graph surfaces.
//!
//! The height field evolves by `u <- u + ds (H - c) v` at fixed grid points
//! (the lapse is 1 in these models). Stationary states are exactly the
//! surfaces with `H = c`; convergence is declared on `max|H - c|`, the CMC
//! property itself. Steps use a Heun (RK2) update under a parabolic CFL
//! restriction `ds <= cfl * min(dx)^2 / P`, with `P` an upper bound on the
//! diffusion coefficient of the quasilinear operator.

use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};
use crate::hypersurface::{induced_geometry, parabolicity_factor, GraphSurface, SurfaceGeometry};
use crate::spacetime::MultiWarpedSpacetime;

#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Forcing constant `c`: the mean curvature value the flow seeks.
    pub forcing: f64,
    /// Time-step safety factor in (0, 1).
    pub cfl: f64,
    pub ds_max: f64,
    /// Convergence threshold on `max|H - c|`.
    pub tol_h: f64,
    pub max_steps: usize,
    pub barrier_lower: Option<f64>,
    pub barrier_upper: Option<f64>,
    /// Diagnostics series sampling cadence (steps).
    pub series_every: usize,
    /// When set, record consecutive height-field snapshot pairs at this
    /// cadence (for the estimate monitors).
    pub snapshot_every: Option<usize>,
}

impl FlowConfig {
    pub fn new(forcing: f64) -> Self {
        FlowConfig {
            forcing,
            cfl: 0.4,
            ds_max: 0.05,
            tol_h: 1e-6,
            max_steps: 2_000_000,
            barrier_lower: None,
            barrier_upper: None,
            series_every: 10,
            snapshot_every: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(CmcError::Argument(format!(
                "cfl must lie in (0,1), got {}",
                self.cfl
            )));
        }
        if !(self.ds_max > 0.0) || !(self.tol_h > 0.0) {
            return Err(CmcError::Argument(
                "ds_max and tol_h must be positive".into(),
            ));
        }
        if self.series_every == 0 {
            return Err(CmcError::Argument("series_every must be >= 1".into()));
        }
        if let (Some(lo), Some(hi)) = (self.barrier_lower, self.barrier_upper) {
            if !(lo < hi) {
                return Err(CmcError::Argument(format!(
                    "barrier_lower ({lo}) must be below barrier_upper ({hi})"
                )));
            }
        }
        Ok(())
    }

    /// Barrier slack separating discretization drift from a genuine exit.
    pub fn barrier_slack(&self) -> f64 {
        10.0 * self.tol_h * self.ds_max
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowDiagnostics {
    pub min_h: f64,
    pub max_h: f64,
    pub max_tilt: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `max|H - c|`.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct FlowState {
    pub s: f64,
    pub step: usize,
    pub surface: GraphSurface,
    pub geometry: SurfaceGeometry,
    pub diagnostics: FlowDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FlowVerdict {
    Converged,
    MaxSteps,
    BarrierViolation,
    SpacelikenessLost,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub enum BarrierSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BarrierViolation {
    pub index: usize,
    pub side: BarrierSide,
    /// How far past the barrier (beyond the slack) the height reached.
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesSample {
    pub step: usize,
    pub s: f64,
    pub ds: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub max_tilt: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub residual: f64,
}

/// Height-field snapshot for post-hoc verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub s: f64,
    pub u: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub verdict: FlowVerdict,
    pub final_state: FlowState,
    pub series: Vec<SeriesSample>,
    pub snapshots: Vec<Snapshot>,
    pub violation: Option<BarrierViolation>,
}

fn diagnostics(c: f64, surface: &GraphSurface, geometry: &SurfaceGeometry) -> FlowDiagnostics {
    let mut d = FlowDiagnostics {
        min_h: f64::INFINITY,
        max_h: f64::NEG_INFINITY,
        max_tilt: f64::NEG_INFINITY,
        min_u: f64::INFINITY,
        max_u: f64::NEG_INFINITY,
        residual: 0.0,
    };
    for i in 0..surface.u.len() {
        let h = geometry.mean_curvature[i];
        d.min_h = d.min_h.min(h);
        d.max_h = d.max_h.max(h);
        d.max_tilt = d.max_tilt.max(geometry.tilt[i]);
        d.min_u = d.min_u.min(surface.u[i]);
        d.max_u = d.max_u.max(surface.u[i]);
        d.residual = d.residual.max((h - c).abs());
    }
    d
}

/// Builds the initial flow state, verifying spacelikeness.
pub fn initial_state(m: &MultiWarpedSpacetime, surface: GraphSurface, c: f64) -> Result<FlowState> {
    let geometry = induced_geometry(m, &surface)?;
    let diagnostics = diagnostics(c, &surface, &geometry);
    Ok(FlowState {
        s: 0.0,
        step: 0,
        surface,
        geometry,
        diagnostics,
    })
}

/// The CFL-limited step size for the current surface.
pub fn step_size(m: &MultiWarpedSpacetime, state: &FlowState, cfg: &FlowConfig) -> Result<f64> {
    let p = parabolicity_factor(m, &state.surface)?;
    let dx = state.surface.grid.min_spacing();
    Ok(cfg.ds_max.min(cfg.cfl * dx * dx / p))
}

/// One Heun step of `du/ds = (H - c) v`. Geometry is recomputed on the
/// returned state.
pub fn flow_step(m: &MultiWarpedSpacetime, state: &FlowState, cfg: &FlowConfig) -> Result<FlowState> {
    cfg.validate()?;
    let ds = step_size(m, state, cfg)?;
    flow_step_with(m, state, cfg, ds)
}

/// One Heun step with a caller-chosen step size (for refinement studies
/// where runs at different resolutions must share a time grid). The caller
/// is responsible for CFL stability.
pub fn flow_step_sized(
    m: &MultiWarpedSpacetime,
    state: &FlowState,
    cfg: &FlowConfig,
    ds: f64,
) -> Result<FlowState> {
    cfg.validate()?;
    if !(ds > 0.0) {
        return Err(CmcError::Argument(format!("ds must be positive, got {ds}")));
    }
    flow_step_with(m, state, cfg, ds)
}

fn flow_step_with(
    m: &MultiWarpedSpacetime,
    state: &FlowState,
    cfg: &FlowConfig,
    ds: f64,
) -> Result<FlowState> {
    let c = cfg.forcing;
    let n = state.surface.u.len();

    let mut u_half = vec![0.0; n];
    for i in 0..n {
        let k1 = (state.geometry.mean_curvature[i] - c) * state.geometry.tilt[i];
        u_half[i] = state.surface.u[i] + ds * k1;
    }
    let s_half = GraphSurface::new(state.surface.grid.clone(), u_half)?;
    let g_half = induced_geometry(m, &s_half)?;

    let mut u_new = vec![0.0; n];
    for i in 0..n {
        let k1 = (state.geometry.mean_curvature[i] - c) * state.geometry.tilt[i];
        let k2 = (g_half.mean_curvature[i] - c) * g_half.tilt[i];
        u_new[i] = state.surface.u[i] + 0.5 * ds * (k1 + k2);
        if !u_new[i].is_finite() {
            return Err(CmcError::Numeric(format!(
                "non-finite height at grid point {i} after step {}",
                state.step + 1
            )));
        }
    }
    let surface = GraphSurface::new(state.surface.grid.clone(), u_new)?;
    let geometry = induced_geometry(m, &surface)?;
    let diagnostics = diagnostics(c, &surface, &geometry);
    Ok(FlowState {
        s: state.s + ds,
        step: state.step + 1,
        surface,
        geometry,
        diagnostics,
    })
}

/// Reports the first grid point whose height leaves `[t1 - slack, t2 + slack]`.
pub fn barrier_monitor(
    surface: &GraphSurface,
    t1: f64,
    t2: f64,
    slack: f64,
) -> Option<BarrierViolation> {
    for (i, &u) in surface.u.iter().enumerate() {
        if u < t1 - slack {
            return Some(BarrierViolation {
                index: i,
                side: BarrierSide::Lower,
                amount: (t1 - slack) - u,
            });
        }
        if u > t2 + slack {
            return Some(BarrierViolation {
                index: i,
                side: BarrierSide::Upper,
                amount: u - (t2 + slack),
            });
        }
    }
    None
}

/// Runs the flow until convergence (`max|H - c| < tol_h`), a barrier exit,
/// loss of spacelikeness, or the step budget.
pub fn flow_run(
    m: &MultiWarpedSpacetime,
    s0: GraphSurface,
    cfg: &FlowConfig,
) -> Result<FlowResult> {
    cfg.validate()?;
    if let (Some(t1), Some(t2)) = (cfg.barrier_lower, cfg.barrier_upper) {
        let (lo, hi) = (s0.min_u(), s0.max_u());
        if !(t1 < lo && hi < t2) {
            return Err(CmcError::Argument(format!(
                "initial surface [{lo}, {hi}] must lie strictly between the barriers [{t1}, {t2}]"
            )));
        }
    }
    let mut state = initial_state(m, s0, cfg.forcing)?;
    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let slack = cfg.barrier_slack();

    let record_series =
        |series: &mut Vec<SeriesSample>, state: &FlowState, ds: f64| {
            series.push(SeriesSample {
                step: state.step,
                s: state.s,
                ds,
                min_h: state.diagnostics.min_h,
                max_h: state.diagnostics.max_h,
                max_tilt: state.diagnostics.max_tilt,
                min_u: state.diagnostics.min_u,
                max_u: state.diagnostics.max_u,
                residual: state.diagnostics.residual,
            });
        };
    let record_snapshot = |snaps: &mut Vec<Snapshot>, state: &FlowState| {
        snaps.push(Snapshot {
            step: state.step,
            s: state.s,
            u: state.surface.u.clone(),
        });
    };

    loop {
        let ds_next = step_size(m, &state, cfg)?;
        let mut recorded = false;
        if state.step % cfg.series_every == 0 {
            record_series(&mut series, &state, ds_next);
            recorded = true;
        }
        if let Some(every) = cfg.snapshot_every {
            // Consecutive pairs: steps k and k+1 for k on the cadence.
            if state.step % every == 0 || state.step % every == 1 {
                record_snapshot(&mut snapshots, &state);
            }
        }

        if state.diagnostics.residual < cfg.tol_h {
            if !recorded {
                record_series(&mut series, &state, ds_next);
            }
            return Ok(FlowResult {
                verdict: FlowVerdict::Converged,
                final_state: state,
                series,
                snapshots,
                violation: None,
            });
        }
        if state.step >= cfg.max_steps {
            if !recorded {
                record_series(&mut series, &state, ds_next);
            }
            return Ok(FlowResult {
                verdict: FlowVerdict::MaxSteps,
                final_state: state,
                series,
                snapshots,
                violation: None,
            });
        }

        state = match flow_step_with(m, &state, cfg, ds_next) {
            Ok(next) => next,
            Err(CmcError::Geometry { .. }) => {
                record_series(&mut series, &state, ds_next);
                return Ok(FlowResult {
                    verdict: FlowVerdict::SpacelikenessLost,
                    final_state: state,
                    series,
                    snapshots,
                    violation: None,
                });
            }
            Err(e) => return Err(e),
        };

        if let (Some(t1), Some(t2)) = (cfg.barrier_lower, cfg.barrier_upper) {
            if let Some(v) = barrier_monitor(&state.surface, t1, t2, slack) {
                record_series(&mut series, &state, ds_next);
                return Ok(FlowResult {
                    verdict: FlowVerdict::BarrierViolation,
                    final_state: state,
                    series,
                    snapshots,
                    violation: Some(v),
                });
            }
        }
    }
}
