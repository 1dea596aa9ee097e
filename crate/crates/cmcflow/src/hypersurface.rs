//! Spacelike graph surfaces `t = u(x)` over the spatial torus and their
//! induced geometry.
//!
//! For a graph in the warped metric `-dt^2 + sum_k A_k(t) (dx^k)^2`
//! (`A_k = a_k^2` per coordinate) the induced metric is
//! `h_jk = A_j d_jk - u_j u_k`, the future unit normal is
//! `nu = v (d_t + sum_k (u_k / A_k) d_k)` with `v = (1 - q^2)^{-1/2}`,
//! `q^2 = sum_k u_k^2 / A_k`, and the surface is spacelike exactly when
//! `q^2 < 1`.
//!
//! Mean curvature is available through two independent discretizations:
//! the quasilinear graph operator ([`induced_geometry`]) and the spacetime
//! divergence of the extended unit normal ([`mean_curvature_divergence`]).
//! Both are second order on smooth surfaces; the constant-graph values are
//! exact.

use crate::error::{CmcError, Result};
use crate::grid::{PeriodicGrid, MAX_DIM};
use crate::spacetime::MultiWarpedSpacetime;

/// Relative spacelikeness margin below which a surface is rejected.
pub const SPACELIKE_MARGIN_TOL: f64 = 1e-6;

/// A spacelike Cauchy surface sampled as height values over a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSurface {
    pub grid: PeriodicGrid,
    /// Height samples, units of coordinate time.
    pub u: Vec<f64>,
}

impl GraphSurface {
    pub fn new(grid: PeriodicGrid, u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(CmcError::Argument(format!(
                "height field has {} samples, grid has {}",
                u.len(),
                grid.len()
            )));
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(CmcError::Argument("height field has non-finite samples".into()));
        }
        Ok(GraphSurface { grid, u })
    }

    pub fn constant(grid: PeriodicGrid, t0: f64) -> Result<Self> {
        let n = grid.len();
        GraphSurface::new(grid, vec![t0; n])
    }

    /// `u(x) = base + amplitude * sin(mode * pi * x1 / b1)`, varying along the
    /// first axis only.
    pub fn sine(grid: PeriodicGrid, base: f64, amplitude: f64, mode: u32) -> Result<Self> {
        let b = grid.periods[0];
        let mut u = vec![0.0; grid.len()];
        for idx in 0..grid.len() {
            let c = grid.unflatten(idx);
            let x = grid.coord(0, c[0]);
            u[idx] = base + amplitude * (mode as f64 * std::f64::consts::PI * x / b).sin();
        }
        GraphSurface::new(grid, u)
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Derived pointwise fields of a graph surface.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    /// Mean curvature with respect to the future unit normal (expanding
    /// slices are positive).
    pub mean_curvature: Vec<f64>,
    /// Gradient function `v = -<nu, T>`, always >= 1.
    pub tilt: Vec<f64>,
    /// `|A|^2`, squared norm of the second fundamental form.
    pub second_form_sq: Vec<f64>,
    /// Trace-free part `sigma^2 = |A|^2 - H^2/n`.
    pub shear_sq: Vec<f64>,
    /// `Ric(nu, nu)` of the ambient model along the surface normal.
    pub ricci_normal: Vec<f64>,
}

/// Per-point metric data consumed by the stability operator and the flow
/// stepper: `weight = sqrt(det h)` and the inverse induced metric.
#[derive(Debug, Clone)]
pub struct MetricCoeffs {
    pub weight: Vec<f64>,
    /// Row-major upper-triangular inverse metric per point, padded to 3x3.
    pub inv: Vec<[[f64; 3]; 3]>,
    pub tilt: Vec<f64>,
}

/// Checks that surface and model are compatible. The grid may resolve only
/// the first `grid.dim()` of the model's `n` spatial axes; the surface is
/// then constant along the remaining ones (a symmetry reduction — the
/// geometry is still that of an `n`-dimensional hypersurface).
fn check_compatible(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<()> {
    let n = m.spatial_dim();
    if n > MAX_DIM {
        return Err(CmcError::Argument(format!(
            "surface geometry supports spatial dimension <= {MAX_DIM}, model has {n}"
        )));
    }
    if s.grid.dim() > n {
        return Err(CmcError::Argument(format!(
            "surface grid is {}-dimensional, model only has {n} spatial axes",
            s.grid.dim()
        )));
    }
    for k in 0..s.grid.dim() {
        let bm = m.period_of_axis(k);
        let bg = s.grid.periods[k];
        if (bm - bg).abs() > 1e-12 * bm.abs().max(1.0) {
            return Err(CmcError::Argument(format!(
                "axis {k}: grid period {bg} does not match model period {bm}"
            )));
        }
    }
    let (lo, hi) = (s.min_u(), s.max_u());
    if lo <= m.t_min || m.t_max.map_or(false, |tm| hi >= tm) {
        return Err(CmcError::Domain(format!(
            "surface heights [{lo}, {hi}] leave the model interval"
        )));
    }
    Ok(())
}

struct AxisData {
    big_a: f64, // a^2
    alpha: f64, // a'/a
    aa1: f64,   // a a' = A'/2
}

fn axis_data(m: &MultiWarpedSpacetime, axis_laws: &[usize], t: f64, out: &mut [AxisData]) {
    for (k, &fi) in axis_laws.iter().enumerate() {
        let law = &m.fibers[fi].law;
        let a = law.value(t);
        let d1 = law.d1(t);
        out[k] = AxisData {
            big_a: a * a,
            alpha: d1 / a,
            aa1: a * d1,
        };
    }
}

/// Computes all induced-geometry fields by the quasilinear graph-operator
/// route. Errors at the first point where spacelikeness drops below the
/// margin tolerance.
pub fn induced_geometry(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<SurfaceGeometry> {
    check_compatible(m, s)?;
    let d = m.spatial_dim();
    let dg = s.grid.dim();
    let n = s.grid.len();
    let nf = d as f64;
    let axis_fibers: Vec<usize> = (0..d).map(|k| m.fiber_of_axis(k)).collect();

    let mut mean_curvature = vec![0.0; n];
    let mut tilt = vec![0.0; n];
    let mut second_form_sq = vec![0.0; n];
    let mut shear_sq = vec![0.0; n];
    let mut ricci_normal = vec![0.0; n];

    let mut ax: [AxisData; MAX_DIM] = std::array::from_fn(|_| AxisData {
        big_a: 0.0,
        alpha: 0.0,
        aa1: 0.0,
    });

    for idx in 0..n {
        let t = s.u[idx];
        axis_data(m, &axis_fibers, t, &mut ax[..d]);

        let mut du = [0.0f64; MAX_DIM];
        for k in 0..dg {
            du[k] = s.grid.d1(&s.u, idx, k);
        }
        let mut q2 = 0.0;
        for k in 0..d {
            q2 += du[k] * du[k] / ax[k].big_a;
        }
        let margin = 1.0 - q2;
        if margin < SPACELIKE_MARGIN_TOL {
            return Err(CmcError::Geometry { index: idx, margin });
        }
        let v = 1.0 / margin.sqrt();

        // Inverse induced metric h^{jk} = d_jk/A_j + v^2 w_j w_k.
        let mut w = [0.0f64; MAX_DIM];
        for k in 0..d {
            w[k] = du[k] / ax[k].big_a;
        }
        let mut hinv = [[0.0f64; MAX_DIM]; MAX_DIM];
        for j in 0..d {
            for k in 0..d {
                hinv[j][k] = v * v * w[j] * w[k];
            }
            hinv[j][j] += 1.0 / ax[j].big_a;
        }

        // Second fundamental form of the future normal.
        let mut ii = [[0.0f64; MAX_DIM]; MAX_DIM];
        for j in 0..d {
            for k in j..d {
                let udd = if j >= dg || k >= dg {
                    0.0
                } else if j == k {
                    s.grid.d2(&s.u, idx, j)
                } else {
                    s.grid.d_cross(&s.u, idx, j, k)
                };
                let mut val = udd - du[j] * du[k] * (ax[j].alpha + ax[k].alpha);
                if j == k {
                    val += ax[j].aa1;
                }
                ii[j][k] = v * val;
                ii[k][j] = ii[j][k];
            }
        }

        // Shape operator and its invariants.
        let mut shape = [[0.0f64; MAX_DIM]; MAX_DIM];
        for j in 0..d {
            for k in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += hinv[j][l] * ii[l][k];
                }
                shape[j][k] = acc;
            }
        }
        let mut h_tr = 0.0;
        for j in 0..d {
            h_tr += shape[j][j];
        }
        let mut a2 = 0.0;
        for j in 0..d {
            for k in 0..d {
                a2 += shape[j][k] * shape[k][j];
            }
        }

        let ric = m.ricci_diagonal(t)?;
        let mut ric_nu = ric.r0;
        for k in 0..d {
            ric_nu += du[k] * du[k] / ax[k].big_a * ric.fiber[axis_fibers[k]];
        }
        ric_nu *= v * v;

        mean_curvature[idx] = h_tr;
        tilt[idx] = v;
        second_form_sq[idx] = a2;
        shear_sq[idx] = a2 - h_tr * h_tr / nf;
        ricci_normal[idx] = ric_nu;
    }

    Ok(SurfaceGeometry {
        mean_curvature,
        tilt,
        second_form_sq,
        shear_sq,
        ricci_normal,
    })
}

/// Mean curvature by the independent divergence route: `H = div(nu)` with the
/// unit normal extended off the surface by the level-set foliation
/// `t - u(x) = const`, using the analytic Christoffel contraction
/// `Gamma^mu_{mu 0} = sum_k a_k'/a_k` for the time direction and discrete
/// spatial differences of the extended normal components at frozen `t`.
pub fn mean_curvature_divergence(
    m: &MultiWarpedSpacetime,
    s: &GraphSurface,
) -> Result<Vec<f64>> {
    check_compatible(m, s)?;
    let d = m.spatial_dim();
    let dg = s.grid.dim();
    let n = s.grid.len();
    let axis_fibers: Vec<usize> = (0..d).map(|k| m.fiber_of_axis(k)).collect();
    let mut out = vec![0.0; n];

    let mut ax: [AxisData; MAX_DIM] = std::array::from_fn(|_| AxisData {
        big_a: 0.0,
        alpha: 0.0,
        aa1: 0.0,
    });

    // v(t0, y) and w^k(t0, y) for a neighbor y with the metric frozen at t0.
    let tilt_at = |t_big_a: &[AxisData], idx: usize| -> Result<(f64, [f64; MAX_DIM])> {
        let mut du = [0.0f64; MAX_DIM];
        let mut q2 = 0.0;
        for k in 0..dg {
            du[k] = s.grid.d1(&s.u, idx, k);
            q2 += du[k] * du[k] / t_big_a[k].big_a;
        }
        let margin = 1.0 - q2;
        if margin <= 0.0 {
            return Err(CmcError::Geometry { index: idx, margin });
        }
        let v = 1.0 / margin.sqrt();
        let mut w = [0.0f64; MAX_DIM];
        for k in 0..dg {
            w[k] = du[k] / t_big_a[k].big_a;
        }
        Ok((v, w))
    };

    for idx in 0..n {
        let t0 = s.u[idx];
        axis_data(m, &axis_fibers, t0, &mut ax[..d]);
        let (v, w) = tilt_at(&ax, idx)?;

        // d/dt of the extended tilt at fixed x: -v^3 sum_k alpha_k u_k^2/A_k.
        let mut dv_dt = 0.0;
        for k in 0..dg {
            dv_dt -= ax[k].alpha * w[k] * w[k] * ax[k].big_a;
        }
        dv_dt *= v * v * v;

        let mut gamma_trace = 0.0;
        for a in ax.iter().take(d) {
            gamma_trace += a.alpha;
        }

        let mut div_spatial = 0.0;
        for k in 0..dg {
            let (vp, wp) = tilt_at(&ax, s.grid.neighbor(idx, k, 1))?;
            let (vm, wm) = tilt_at(&ax, s.grid.neighbor(idx, k, -1))?;
            div_spatial += (vp * wp[k] - vm * wm[k]) / (2.0 * s.grid.spacing(k));
        }

        out[idx] = dv_dt + v * gamma_trace + div_spatial;
    }
    Ok(out)
}

/// Spacelikeness verdict: true iff at every grid point the smallest
/// eigenvalue of the induced metric is at least `margin_tol` times the
/// smallest fiber metric coefficient there. Also returns the worst (smallest)
/// eigenvalue found over the grid.
pub fn spacelike_check(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<(bool, f64)> {
    let d = m.spatial_dim();
    if d > MAX_DIM || s.grid.dim() > d {
        return Err(CmcError::Argument(format!(
            "surface grid is {}-dimensional, model has {d} spatial axes (max {MAX_DIM})",
            s.grid.dim()
        )));
    }
    let dg = s.grid.dim();
    let axis_fibers: Vec<usize> = (0..d).map(|k| m.fiber_of_axis(k)).collect();
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for idx in 0..s.grid.len() {
        let t = s.u[idx];
        let mut h = [[0.0f64; MAX_DIM]; MAX_DIM];
        let mut min_a = f64::INFINITY;
        let mut du = [0.0f64; MAX_DIM];
        for k in 0..dg {
            du[k] = s.grid.d1(&s.u, idx, k);
        }
        for j in 0..d {
            let a = m.fibers[axis_fibers[j]].law.value(t);
            let big_a = a * a;
            min_a = min_a.min(big_a);
            for k in 0..d {
                h[j][k] = -du[j] * du[k];
            }
            h[j][j] += big_a;
        }
        let lam = sym_min_eigenvalue(&h, d);
        worst = worst.min(lam);
        if lam < SPACELIKE_MARGIN_TOL * min_a {
            ok = false;
        }
    }
    Ok((ok, worst))
}

/// Upper bound on the effective diffusion coefficient of the flow update:
/// max over the grid of `(1/min_j A_j + v^2 |w|^2) * max(1, v^2)`, which
/// dominates the largest eigenvalue of `h^{jk}` times the update's tilt
/// factor.
pub fn parabolicity_factor(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<f64> {
    check_compatible(m, s)?;
    let d = m.spatial_dim();
    let dg = s.grid.dim();
    let axis_fibers: Vec<usize> = (0..d).map(|k| m.fiber_of_axis(k)).collect();
    let mut p = 0.0f64;
    for idx in 0..s.grid.len() {
        let t = s.u[idx];
        let mut q2 = 0.0;
        let mut w2 = 0.0;
        let mut min_a = f64::INFINITY;
        for k in 0..d {
            let a = m.fibers[axis_fibers[k]].law.value(t);
            let big_a = a * a;
            min_a = min_a.min(big_a);
            let du = if k < dg { s.grid.d1(&s.u, idx, k) } else { 0.0 };
            q2 += du * du / big_a;
            w2 += du * du / (big_a * big_a);
        }
        let margin = 1.0 - q2;
        if margin < SPACELIKE_MARGIN_TOL {
            return Err(CmcError::Geometry { index: idx, margin });
        }
        let v2 = 1.0 / margin;
        p = p.max((1.0 / min_a + v2 * w2) * v2.max(1.0));
    }
    Ok(p)
}

/// Weight `sqrt(det h)` and inverse metric per point, for divergence-form
/// operators. `det h = (prod_j A_j)(1 - q^2)` by the matrix determinant
/// lemma.
pub fn metric_coefficients(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<MetricCoeffs> {
    check_compatible(m, s)?;
    let d = m.spatial_dim();
    let n = s.grid.len();
    let dg = s.grid.dim();
    let axis_fibers: Vec<usize> = (0..d).map(|k| m.fiber_of_axis(k)).collect();
    let mut weight = vec![0.0; n];
    let mut tilt = vec![0.0; n];
    let mut inv = vec![[[0.0f64; 3]; 3]; n];
    for idx in 0..n {
        let t = s.u[idx];
        let mut big_a = [0.0f64; MAX_DIM];
        let mut du = [0.0f64; MAX_DIM];
        let mut q2 = 0.0;
        let mut prod_a = 1.0;
        for k in 0..d {
            let a = m.fibers[axis_fibers[k]].law.value(t);
            big_a[k] = a * a;
            prod_a *= big_a[k];
            du[k] = if k < dg { s.grid.d1(&s.u, idx, k) } else { 0.0 };
            q2 += du[k] * du[k] / big_a[k];
        }
        let margin = 1.0 - q2;
        if margin < SPACELIKE_MARGIN_TOL {
            return Err(CmcError::Geometry { index: idx, margin });
        }
        let v = 1.0 / margin.sqrt();
        weight[idx] = (prod_a * margin).sqrt();
        tilt[idx] = v;
        for j in 0..d {
            for k in 0..d {
                inv[idx][j][k] = v * v * du[j] * du[k] / (big_a[j] * big_a[k]);
            }
            inv[idx][j][j] += 1.0 / big_a[j];
        }
    }
    Ok(MetricCoeffs { weight, inv, tilt })
}

/// Smallest eigenvalue of a symmetric matrix of dimension 1..=3.
fn sym_min_eigenvalue(h: &[[f64; MAX_DIM]; MAX_DIM], d: usize) -> f64 {
    match d {
        1 => h[0][0],
        2 => {
            let tr = h[0][0] + h[1][1];
            let det = h[0][0] * h[1][1] - h[0][1] * h[0][1];
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            0.5 * (tr - disc)
        }
        3 => {
            // Trigonometric solution for symmetric 3x3 eigenvalues.
            let p1 = h[0][1] * h[0][1] + h[0][2] * h[0][2] + h[1][2] * h[1][2];
            if p1 == 0.0 {
                return h[0][0].min(h[1][1]).min(h[2][2]);
            }
            let q = (h[0][0] + h[1][1] + h[2][2]) / 3.0;
            let p2 = (h[0][0] - q).powi(2) + (h[1][1] - q).powi(2) + (h[2][2] - q).powi(2)
                + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let mut b = [[0.0f64; 3]; 3];
            for j in 0..3 {
                for k in 0..3 {
                    b[j][k] = h[j][k] / p;
                }
                b[j][j] -= q / p;
            }
            let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
                - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
                + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
            let r = (det_b / 2.0).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            // phi lies in [0, pi/3]; the root at phi + 2pi/3 is the smallest.
            q + 2.0 * p * (phi + 2.0 * std::f64::consts::FRAC_PI_3).cos()
        }
        _ => unreachable!("dimension capped at 3"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{example_de_sitter_like, example_flrw_linear, example_three_torus};
    use std::f64::consts::PI;

    fn grid1(n: usize, b: f64) -> PeriodicGrid {
        PeriodicGrid::new(vec![n], vec![b]).unwrap()
    }

    #[test]
    fn constant_slice_closed_forms_three_torus() {
        let m = example_three_torus(5.0);
        let grid = PeriodicGrid::new(vec![8, 8, 8], vec![5.0, 5.0, 5.0]).unwrap();
        for t0 in [0.7, 1.0, 2.0, 10.0] {
            let s = GraphSurface::constant(grid.clone(), t0).unwrap();
            let g = induced_geometry(&m, &s).unwrap();
            let h_exact = 2.75 / t0;
            let a2_exact = (2.0 * (0.75 / t0).powi(2)) + (1.25 / t0).powi(2);
            // The slice shape operator diag(3/4, 3/4, 5/4)/t is not umbilic:
            // its trace-free norm squared is (1/6)/t^2.
            let shear_exact = (1.0 / 6.0) / (t0 * t0);
            let r0 = m.ricci_diagonal(t0).unwrap().r0;
            for idx in 0..grid.len() {
                assert!((g.mean_curvature[idx] - h_exact).abs() < 1e-12 * h_exact.abs());
                assert!((g.tilt[idx] - 1.0).abs() < 1e-14);
                assert!((g.second_form_sq[idx] - a2_exact).abs() < 1e-12 * a2_exact);
                assert!((g.ricci_normal[idx] - r0).abs() < 1e-13);
                assert!((g.shear_sq[idx] - shear_exact).abs() < 1e-12 * shear_exact);
            }
        }
    }

    #[test]
    fn constant_slice_closed_forms_random_heights() {
        // H = sum n_i a_i'/a_i, v = 1, |A|^2 = sum n_i (a_i'/a_i)^2 and
        // Ric(nu,nu) = r0, to 1e-12, across all three families.
        let models = [
            example_three_torus(5.0),
            example_de_sitter_like(0.8, 2.0),
            MultiWarpedSpacetime::new(
                0.0,
                None,
                vec![
                    crate::spacetime::FiberSpec {
                        dim: 1,
                        period: 2.0,
                        law: crate::spacetime::WarpingLaw::Power { p: 0.4 },
                    },
                    crate::spacetime::FiberSpec {
                        dim: 2,
                        period: 3.0,
                        law: crate::spacetime::WarpingLaw::Constant { value: 1.7 },
                    },
                ],
                0.0,
            )
            .unwrap(),
        ];
        let mut state = 0x243f6a8885a308d3u64;
        let mut rand = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for m in &models {
            let periods: Vec<f64> = (0..m.spatial_dim()).map(|k| m.period_of_axis(k)).collect();
            let dims = vec![4usize; m.spatial_dim()];
            let grid = PeriodicGrid::new(dims, periods).unwrap();
            for _ in 0..50 {
                let t0 = 0.5 + 5.0 * rand();
                let s = GraphSurface::constant(grid.clone(), t0).unwrap();
                let g = induced_geometry(m, &s).unwrap();
                let h_exact = m.slice_mean_curvature(t0);
                let a2_exact: f64 = m
                    .fibers
                    .iter()
                    .map(|f| f.dim as f64 * f.law.log_d1(t0).powi(2))
                    .sum();
                let r0 = m.ricci_diagonal(t0).unwrap().r0;
                let tol = 1e-12;
                assert!((g.mean_curvature[0] - h_exact).abs() <= tol * h_exact.abs().max(1.0));
                assert!((g.tilt[0] - 1.0).abs() <= tol);
                assert!((g.second_form_sq[0] - a2_exact).abs() <= tol * a2_exact.max(1.0));
                assert!((g.ricci_normal[0] - r0).abs() <= tol * r0.abs().max(1.0));
            }
        }
    }

    #[test]
    fn constant_slice_de_sitter() {
        let lambda: f64 = 0.5;
        let m = example_de_sitter_like(lambda, 2.0);
        let grid = PeriodicGrid::new(vec![6, 6, 6], vec![2.0, 2.0, 2.0]).unwrap();
        let s = GraphSurface::constant(grid, 1.3).unwrap();
        let g = induced_geometry(&m, &s).unwrap();
        let h_exact = 3.0 * lambda.sqrt();
        assert!((g.mean_curvature[0] - h_exact).abs() < 1e-13);
        assert!(g.shear_sq[0].abs() < 1e-13);
    }

    #[test]
    fn minkowski_constant_slice_is_totally_geodesic() {
        let m = MultiWarpedSpacetime::new(
            f64::NEG_INFINITY,
            None,
            vec![crate::spacetime::FiberSpec {
                dim: 2,
                period: 1.0,
                law: crate::spacetime::WarpingLaw::Constant { value: 1.0 },
            }],
            0.0,
        )
        .unwrap();
        let grid = PeriodicGrid::new(vec![10, 10], vec![1.0, 1.0]).unwrap();
        let s = GraphSurface::constant(grid, 0.0).unwrap();
        let g = induced_geometry(&m, &s).unwrap();
        assert!(g.mean_curvature.iter().all(|&h| h == 0.0));
        assert!(g.second_form_sq.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn two_mean_curvature_routes_converge_together() {
        // 1-d model a(t) = t, u(x) = 2 + 0.1 sin(pi x / b): the two
        // discretizations must approach each other at second order.
        let m = MultiWarpedSpacetime::new(
            0.0,
            None,
            vec![crate::spacetime::FiberSpec {
                dim: 1,
                period: PI,
                law: crate::spacetime::WarpingLaw::Power { p: 1.0 },
            }],
            0.0,
        )
        .unwrap();
        let mut gaps = Vec::new();
        for &n in &[64usize, 128, 256] {
            let s = GraphSurface::sine(grid1(n, PI), 2.0, 0.1, 1).unwrap();
            let g = induced_geometry(&m, &s).unwrap();
            let hd = mean_curvature_divergence(&m, &s).unwrap();
            let gap = g
                .mean_curvature
                .iter()
                .zip(&hd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            gaps.push(gap);
        }
        assert!(gaps[1] < gaps[0] / 3.0, "gaps {gaps:?}");
        assert!(gaps[2] < gaps[1] / 3.0, "gaps {gaps:?}");
    }

    #[test]
    fn mean_curvature_grid_convergence_richardson() {
        // Richardson-extrapolated limit: H at N and 2N should bracket the
        // limit with second-order gaps.
        let m = MultiWarpedSpacetime::new(
            0.0,
            None,
            vec![crate::spacetime::FiberSpec {
                dim: 1,
                period: PI,
                law: crate::spacetime::WarpingLaw::Power { p: 1.0 },
            }],
            0.0,
        )
        .unwrap();
        let sample = |n: usize| -> f64 {
            let s = GraphSurface::sine(grid1(n, PI), 2.0, 0.1, 1).unwrap();
            let g = induced_geometry(&m, &s).unwrap();
            g.mean_curvature[0]
        };
        let h256 = sample(256);
        let h512 = sample(512);
        let h1024 = sample(1024);
        let limit = (4.0 * h1024 - h512) / 3.0;
        let e256 = (h256 - limit).abs();
        let e512 = (h512 - limit).abs();
        assert!(e512 < e256 / 3.0, "e256 {e256}, e512 {e512}");
    }

    #[test]
    fn tilt_at_least_one_and_shear_nonnegative() {
        let m = example_three_torus(5.0);
        let grid = PeriodicGrid::new(vec![16, 8, 8], vec![5.0, 5.0, 5.0]).unwrap();
        let mut s = GraphSurface::constant(grid, 3.0).unwrap();
        for idx in 0..s.grid.len() {
            let c = s.grid.unflatten(idx);
            let x0 = s.grid.coord(0, c[0]);
            let x1 = s.grid.coord(1, c[1]);
            s.u[idx] = 3.0 + 0.3 * (PI * x0 / 5.0).sin() + 0.2 * (PI * x1 / 5.0).cos();
        }
        let g = induced_geometry(&m, &s).unwrap();
        for idx in 0..s.grid.len() {
            assert!(g.tilt[idx] >= 1.0 - 1e-12);
            assert!(g.shear_sq[idx] >= -1e-12);
        }
    }

    #[test]
    fn spacelike_check_constant_slice_margin() {
        let m = example_three_torus(5.0);
        let grid = PeriodicGrid::new(vec![8, 8, 8], vec![5.0, 5.0, 5.0]).unwrap();
        let s = GraphSurface::constant(grid, 2.0).unwrap();
        let (ok, margin) = spacelike_check(&m, &s).unwrap();
        assert!(ok);
        // Smallest fiber coefficient is a1^2 = 2^{3/2}.
        let expect = 2.0f64.powf(1.5);
        assert!((margin - expect).abs() < 1e-12, "margin {margin}");
    }

    #[test]
    fn steep_graph_fails_spacelike_check() {
        // Flat 1-d model, u = steep sawtooth-like sine with slope > 1.
        let m = MultiWarpedSpacetime::new(
            f64::NEG_INFINITY,
            None,
            vec![crate::spacetime::FiberSpec {
                dim: 1,
                period: PI,
                law: crate::spacetime::WarpingLaw::Constant { value: 1.0 },
            }],
            0.0,
        )
        .unwrap();
        let s = GraphSurface::sine(grid1(64, PI), 0.0, 2.0, 1).unwrap();
        let (ok, _) = spacelike_check(&m, &s).unwrap();
        assert!(!ok);
        assert!(induced_geometry(&m, &s).is_err());
    }

    #[test]
    fn spacelike_flip_matches_eigenvalue_scan() {
        // Amplitude sweep: verdict flips exactly when the discrete induced
        // metric loses positivity.
        let m = MultiWarpedSpacetime::new(
            f64::NEG_INFINITY,
            None,
            vec![crate::spacetime::FiberSpec {
                dim: 1,
                period: PI,
                law: crate::spacetime::WarpingLaw::Constant { value: 1.0 },
            }],
            0.0,
        )
        .unwrap();
        let g = grid1(64, PI);
        let mut last_ok = true;
        let mut flipped_at = None;
        for step in 0..40 {
            let amp = 0.05 * (step + 1) as f64;
            let s = GraphSurface::sine(g.clone(), 0.0, amp, 1).unwrap();
            let (ok, worst) = spacelike_check(&m, &s).unwrap();
            // Discrete slope of amp*sin is amp*cos sampled: metric 1 - (du)^2.
            assert_eq!(ok, worst >= SPACELIKE_MARGIN_TOL * 1.0, "amp {amp}");
            if last_ok && !ok {
                flipped_at = Some(amp);
            }
            last_ok = ok;
        }
        let amp = flipped_at.expect("sweep should cross the spacelike limit");
        // The discrete max slope is amp * max|cos| on the offset grid; the
        // flip should occur near amp ~ 1.
        assert!(amp > 0.9 && amp < 1.15, "flips at {amp}");
    }

    #[test]
    fn translation_equivariance_exact() {
        let m = example_flrw_linear(PI);
        let g3 = PeriodicGrid::new(vec![16, 16, 16], vec![PI, PI, PI]).unwrap();
        let mut s = GraphSurface::constant(g3.clone(), 2.0).unwrap();
        for idx in 0..g3.len() {
            let c = g3.unflatten(idx);
            s.u[idx] = 2.0
                + 0.1 * (g3.coord(0, c[0])).sin()
                + 0.05 * (2.0 * g3.coord(1, c[1])).cos();
        }
        let shift = [3usize, 7, 11];
        let mut shifted = s.clone();
        for idx in 0..g3.len() {
            let c = g3.unflatten(idx);
            let src = g3.flatten(&[
                (c[0] + shift[0]) % 16,
                (c[1] + shift[1]) % 16,
                (c[2] + shift[2]) % 16,
            ]);
            shifted.u[idx] = s.u[src];
        }
        let ga = induced_geometry(&m, &s).unwrap();
        let gb = induced_geometry(&m, &shifted).unwrap();
        for idx in 0..g3.len() {
            let c = g3.unflatten(idx);
            let src = g3.flatten(&[
                (c[0] + shift[0]) % 16,
                (c[1] + shift[1]) % 16,
                (c[2] + shift[2]) % 16,
            ]);
            assert_eq!(gb.mean_curvature[idx], ga.mean_curvature[src]);
            assert_eq!(gb.tilt[idx], ga.tilt[src]);
            assert_eq!(gb.shear_sq[idx], ga.shear_sq[src]);
        }
    }

    #[test]
    fn reduced_grid_matches_full_slice_geometry() {
        // A 1-d grid in the n = 3 model: constant surfaces still carry the
        // full three-dimensional slice data.
        let m = example_flrw_linear(PI);
        let s = GraphSurface::constant(grid1(32, PI), 2.0).unwrap();
        let g = induced_geometry(&m, &s).unwrap();
        assert!((g.mean_curvature[0] - 1.5).abs() < 1e-14);
        assert!((g.second_form_sq[0] - 3.0 * 0.25).abs() < 1e-14);
        assert!(g.shear_sq[0].abs() < 1e-14);
        let hd = mean_curvature_divergence(&m, &s).unwrap();
        assert!((hd[0] - 1.5).abs() < 1e-14);
        // And a tilted 1-d profile still satisfies v >= 1, sigma2 >= 0.
        let s = GraphSurface::sine(grid1(64, PI), 2.0, 0.1, 1).unwrap();
        let g = induced_geometry(&m, &s).unwrap();
        for i in 0..64 {
            assert!(g.tilt[i] >= 1.0 - 1e-12);
            assert!(g.shear_sq[i] >= -1e-12);
        }
    }

    #[test]
    fn geometry_error_identifies_point() {
        let m = MultiWarpedSpacetime::new(
            f64::NEG_INFINITY,
            None,
            vec![crate::spacetime::FiberSpec {
                dim: 1,
                period: PI,
                law: crate::spacetime::WarpingLaw::Constant { value: 1.0 },
            }],
            0.0,
        )
        .unwrap();
        let g = grid1(64, PI);
        let mut s = GraphSurface::constant(g, 0.0).unwrap();
        // One sharp spike makes the neighborhood of index 10 non-spacelike.
        s.u[10] = 1.0;
        match induced_geometry(&m, &s) {
            Err(CmcError::Geometry { index, .. }) => {
                assert!((9..=11).contains(&index), "index {index}")
            }
            other => panic!("expected geometry error, got {other:?}"),
        }
    }
}
