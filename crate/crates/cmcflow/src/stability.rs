//! The stability operator `L phi = -Lap(phi) + (Ric(nu,nu) + H^2/n + sigma^2) phi`
//! on a graph surface, its principal eigenpair, and the past perturbation
//! that turns `H >= 0` (with `H > 0` somewhere) into `H > 0` everywhere.
//!
//! The Laplace-Beltrami operator is discretized in divergence form with
//! face-averaged coefficients for the diagonal terms and centered
//! differences for the mixed ones, so the discrete operator is exactly
//! self-adjoint for the `sqrt(det h)`-weighted inner product. The principal
//! eigenpair comes from inverse power iteration shifted below the spectrum,
//! with conjugate-gradient solves of the shifted system.

use crate::error::{CmcError, Result};
use crate::grid::PeriodicGrid;
use crate::hypersurface::{induced_geometry, metric_coefficients, GraphSurface};
use crate::spacetime::MultiWarpedSpacetime;

/// Convergence threshold on `max|L phi - lambda phi|`.
pub const EIGEN_TOL: f64 = 1e-10;

/// Principal eigenpair of the stability operator.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Principal eigenfunction, normalized to `max phi = 1`, positive.
    pub phi1: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Assembled discrete stability operator for one surface.
pub struct StabilityOperator {
    grid: PeriodicGrid,
    /// sqrt(det h) per point (the inner-product weight).
    pub weight: Vec<f64>,
    /// Face coefficient per axis: avg of `W h^{jj}` between i and i+e_j.
    face: Vec<Vec<f64>>,
    /// Cell-centered `W h^{jk}` per unordered pair (j, k), j < k.
    mixed: Vec<(usize, usize, Vec<f64>)>,
    /// Zeroth-order coefficient `Ric(nu,nu) + H^2/n + sigma^2`.
    pub potential: Vec<f64>,
}

impl StabilityOperator {
    pub fn assemble(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<Self> {
        let geom = induced_geometry(m, s)?;
        let coeffs = metric_coefficients(m, s)?;
        let n_pts = s.grid.len();
        let dg = s.grid.dim();
        let nf = m.spatial_dim() as f64;

        let mut potential = vec![0.0; n_pts];
        for i in 0..n_pts {
            potential[i] = geom.ricci_normal[i]
                + geom.mean_curvature[i] * geom.mean_curvature[i] / nf
                + geom.shear_sq[i];
        }

        let mut face = Vec::with_capacity(dg);
        for j in 0..dg {
            let mut cf = vec![0.0; n_pts];
            for i in 0..n_pts {
                let here = coeffs.weight[i] * coeffs.inv[i][j][j];
                let there_idx = s.grid.neighbor(i, j, 1);
                let there = coeffs.weight[there_idx] * coeffs.inv[there_idx][j][j];
                cf[i] = 0.5 * (here + there);
            }
            face.push(cf);
        }
        let mut mixed = Vec::new();
        for j in 0..dg {
            for k in (j + 1)..dg {
                let mut cm = vec![0.0; n_pts];
                let mut any = false;
                for i in 0..n_pts {
                    cm[i] = coeffs.weight[i] * coeffs.inv[i][j][k];
                    any |= cm[i] != 0.0;
                }
                if any {
                    mixed.push((j, k, cm));
                }
            }
        }
        Ok(StabilityOperator {
            grid: s.grid.clone(),
            weight: coeffs.weight,
            face,
            mixed,
            potential,
        })
    }

    /// Laplace-Beltrami `Lap phi` of the induced metric (divergence form).
    pub fn laplace_beltrami(&self, phi: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        // Diagonal flux part.
        for (j, cf) in self.face.iter().enumerate() {
            let dx2 = self.grid.spacing(j) * self.grid.spacing(j);
            for i in 0..n {
                let up = self.grid.neighbor(i, j, 1);
                let dn = self.grid.neighbor(i, j, -1);
                let flux = cf[i] * (phi[up] - phi[i]) - cf[dn] * (phi[i] - phi[dn]);
                out[i] += flux / (dx2 * self.weight[i]);
            }
        }
        // Mixed terms: (1/W)[D_j(cm D_k phi) + D_k(cm D_j phi)].
        let mut tmp = vec![0.0; n];
        for (j, k, cm) in &self.mixed {
            for i in 0..n {
                tmp[i] = cm[i] * self.grid.d1(phi, i, *k);
            }
            for i in 0..n {
                out[i] += self.grid.d1(&tmp, i, *j) / self.weight[i];
            }
            for i in 0..n {
                tmp[i] = cm[i] * self.grid.d1(phi, i, *j);
            }
            for i in 0..n {
                out[i] += self.grid.d1(&tmp, i, *k) / self.weight[i];
            }
        }
        out
    }

    /// `L phi` pointwise.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let mut out = self.laplace_beltrami(phi);
        for i in 0..self.grid.len() {
            out[i] = -out[i] + self.potential[i] * phi[i];
        }
        out
    }

    /// Weighted inner product `sum W a b`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.weight)
            .map(|((x, y), w)| w * x * y)
            .sum()
    }

    /// Rayleigh quotient of the operator at `phi`.
    pub fn rayleigh(&self, phi: &[f64]) -> f64 {
        let lphi = self.apply(phi);
        self.inner(phi, &lphi) / self.inner(phi, phi)
    }

    /// Conjugate gradients for `(L - shift) y = rhs` in the weighted inner
    /// product (the shifted operator is positive definite for shifts below
    /// the spectrum).
    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.len();
        let apply_shifted = |x: &[f64]| {
            let mut ax = self.apply(x);
            for i in 0..n {
                ax[i] -= shift * x[i];
            }
            ax
        };
        let mut y = vec![0.0; n];
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut rs = self.inner(&r, &r);
        let rhs_norm = rs.sqrt().max(1e-300);
        for _ in 0..20 * n {
            if rs.sqrt() <= 1e-13 * rhs_norm {
                return Ok(y);
            }
            let ap = apply_shifted(&p);
            let denom = self.inner(&p, &ap);
            if !(denom > 0.0) {
                return Err(CmcError::Numeric(
                    "shifted stability operator is not positive definite".into(),
                ));
            }
            let alpha = rs / denom;
            for i in 0..n {
                y[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rs_new = self.inner(&r, &r);
            let beta = rs_new / rs;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rs = rs_new;
        }
        Err(CmcError::Numeric(
            "conjugate gradients failed to converge".into(),
        ))
    }
}

/// `L phi` for an arbitrary field on the surface.
pub fn stability_apply(
    m: &MultiWarpedSpacetime,
    s: &GraphSurface,
    phi: &[f64],
) -> Result<Vec<f64>> {
    if phi.len() != s.grid.len() {
        return Err(CmcError::Argument(format!(
            "field has {} samples, grid has {}",
            phi.len(),
            s.grid.len()
        )));
    }
    Ok(StabilityOperator::assemble(m, s)?.apply(phi))
}

/// Smallest eigenvalue and positive eigenfunction of the stability operator,
/// by inverse power iteration with a shift below the Gershgorin-style lower
/// bound `min(0, min potential)` (the divergence-form Laplacian part is
/// positive semidefinite).
pub fn principal_eigen(m: &MultiWarpedSpacetime, s: &GraphSurface) -> Result<EigenResult> {
    let op = StabilityOperator::assemble(m, s)?;
    let n = s.grid.len();
    let p_min = op.potential.iter().cloned().fold(f64::INFINITY, f64::min);
    let shift = p_min.min(0.0) - 1.0;

    let mut phi = vec![1.0; n];
    let mut lambda = op.rayleigh(&phi);
    let mut min_rayleigh = lambda;
    for iter in 1..=200 {
        let mut y = op.solve_shifted(shift, &phi)?;
        // Normalize to max = 1 with positive orientation.
        let (mut max_abs, mut max_val) = (0.0f64, 0.0f64);
        for &v in &y {
            if v.abs() > max_abs {
                max_abs = v.abs();
                max_val = v;
            }
        }
        if max_abs == 0.0 {
            return Err(CmcError::Numeric("inverse iteration collapsed to zero".into()));
        }
        let scale = 1.0 / max_val;
        for v in &mut y {
            *v *= scale;
        }
        lambda = op.rayleigh(&y);
        min_rayleigh = min_rayleigh.min(lambda);
        let ly = op.apply(&y);
        let residual = y
            .iter()
            .zip(&ly)
            .map(|(p, lp)| (lp - lambda * p).abs())
            .fold(0.0f64, f64::max);
        phi = y;
        if residual <= EIGEN_TOL {
            if phi.iter().any(|&v| v <= 0.0) {
                return Err(CmcError::Numeric(
                    "principal eigenfunction failed positivity".into(),
                ));
            }
            // The iteration history's smallest Rayleigh quotient is an upper
            // bound that must have converged onto the eigenvalue.
            if (min_rayleigh - lambda).abs() > 1e-6 * lambda.abs().max(1.0) {
                return Err(CmcError::Numeric(format!(
                    "Rayleigh history minimum {min_rayleigh} disagrees with eigenvalue {lambda}"
                )));
            }
            return Ok(EigenResult {
                lambda1: lambda,
                phi1: phi,
                iterations: iter,
                residual,
            });
        }
    }
    Err(CmcError::Numeric(format!(
        "inverse iteration did not reach residual {EIGEN_TOL}"
    )))
}

/// Maximum number of `eps` halvings tried by [`perturb_to_positive`].
pub const PERTURB_MAX_HALVINGS: usize = 40;

/// Pushes the surface to the past along the principal eigenfunction with
/// normal speed `eps phi1`: as a graph update that is `u <- u - eps phi1 / v`
/// (the tilt divides because the moving point also drifts tangentially). To
/// first order the mean curvature at the moving points gains
/// `eps lambda1 phi1 > 0`; `eps` is halved until `min H > 0` holds after the
/// exact recomputation.
pub fn perturb_to_positive(
    m: &MultiWarpedSpacetime,
    s: &GraphSurface,
    eps: f64,
) -> Result<GraphSurface> {
    if eps < 0.0 {
        return Err(CmcError::Argument(format!("eps must be >= 0, got {eps}")));
    }
    let geom = induced_geometry(m, s)?;
    let min_h = geom
        .mean_curvature
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min_h < -1e-8 {
        return Err(CmcError::Argument(format!(
            "surface has min H = {min_h}; the perturbation needs H >= 0"
        )));
    }
    if eps == 0.0 {
        if min_h > 0.0 {
            return Ok(s.clone());
        }
        return Err(CmcError::Argument(
            "eps = 0 cannot fix a surface with min H <= 0".into(),
        ));
    }
    let eig = principal_eigen(m, s)?;
    if !(eig.lambda1 > 0.0) {
        return Err(CmcError::Argument(format!(
            "principal eigenvalue {} is not positive",
            eig.lambda1
        )));
    }
    let mut eps = eps;
    let mut trace = Vec::new();
    for _ in 0..PERTURB_MAX_HALVINGS {
        let mut u_new = s.u.clone();
        for i in 0..u_new.len() {
            u_new[i] -= eps * eig.phi1[i] / geom.tilt[i];
        }
        let candidate = GraphSurface::new(s.grid.clone(), u_new)?;
        match induced_geometry(m, &candidate) {
            Ok(g) => {
                let new_min = g
                    .mean_curvature
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                trace.push((eps, new_min));
                if new_min > 0.0 {
                    return Ok(candidate);
                }
            }
            Err(CmcError::Geometry { .. }) => {
                trace.push((eps, f64::NAN));
            }
            Err(e) => return Err(e),
        }
        eps *= 0.5;
    }
    Err(CmcError::Numeric(format!(
        "perturbation failed to reach min H > 0; (eps, min H) trace: {trace:?}"
    )))
}
