//! Adaptive Dormand-Prince 5(4) integration for the small ODE systems used
//! by the comparison and causal modules.

use crate::error::{CmcError, Result};

/// Dormand-Prince coefficients (RK45 with embedded 4th-order error estimate).
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
/// 5th-order weights (same as the last A row; FSAL scheme).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Optional cap on |h|.
    pub max_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_steps: 1_000_000,
            max_step: None,
        }
    }
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (either direction) with
/// adaptive step control. `observer` is called after every accepted step with
/// `(t, y)`; returning `false` stops the integration early.
///
/// Returns the final `(t, y)` reached.
pub fn integrate_adaptive<F, O>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<(f64, Vec<f64>)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]) -> bool,
{
    let dim = y0.len();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((t0, y0.to_vec()));
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0f64; dim]; 7];
    let mut y_stage = vec![0.0f64; dim];
    let mut y5 = vec![0.0f64; dim];

    f(t, &y, &mut k[0]);
    let mut h = initial_step(span, opts);

    for _ in 0..opts.max_steps {
        if (t - t1) * dir >= 0.0 {
            return Ok((t, y));
        }
        // Land exactly on the endpoint.
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }

        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    acc += A[stage][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            f(t + C[stage] * h, &y_stage, &mut k[stage + 1]);
        }

        let mut err_norm = 0.0f64;
        for i in 0..dim {
            let mut acc5 = 0.0;
            let mut acc4 = 0.0;
            for j in 0..7 {
                acc5 += B5[j] * k[j][i];
                acc4 += B4[j] * k[j][i];
            }
            y5[i] = y[i] + h * acc5;
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let e = h * (acc5 - acc4) / sc;
            err_norm += e * e;
        }
        err_norm = (err_norm / dim as f64).sqrt();

        if !err_norm.is_finite() {
            return Err(CmcError::Numeric(format!(
                "non-finite state during ODE integration near t = {t}"
            )));
        }

        if err_norm <= 1.0 {
            t += h;
            y.copy_from_slice(&y5);
            let (head, tail) = k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]); // FSAL
            if !observer(t, &y) {
                return Ok((t, y));
            }
        }

        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if let Some(max_h) = opts.max_step {
            if h.abs() > max_h {
                h = dir * max_h;
            }
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(CmcError::Numeric(format!(
                "ODE step size underflow at t = {t}"
            )));
        }
    }
    Err(CmcError::Numeric(format!(
        "ODE integration exceeded {} steps (t = {t}, target {t1})",
        opts.max_steps
    )))
}

fn initial_step(span: f64, opts: &OdeOptions) -> f64 {
    let h = span.abs().min(1.0) * 1e-3 * span.signum();
    match opts.max_step {
        Some(m) if h.abs() > m => span.signum() * m,
        _ => h,
    }
}
