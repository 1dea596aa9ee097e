//! Shared test oracles, independent of the library's closed forms.
#![allow(dead_code)] // each integration test uses its own slice of this module

use cmcflow::spacetime::MultiWarpedSpacetime;

/// Metric matrix of a warped model at coordinates (only `x[0] = t` matters).
fn metric(m: &MultiWarpedSpacetime, x: &[f64]) -> Vec<Vec<f64>> {
    let n = m.spatial_dim();
    let mut g = vec![vec![0.0; n + 1]; n + 1];
    g[0][0] = -1.0;
    for k in 0..n {
        let a = m.law_of_axis(k).value(x[0]);
        g[k + 1][k + 1] = a * a;
    }
    g
}

fn inverse_diag(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut inv = vec![vec![0.0; n]; n];
    for i in 0..n {
        inv[i][i] = 1.0 / g[i][i];
    }
    inv
}

/// Christoffel symbols by centered differences of metric samples.
fn christoffel(m: &MultiWarpedSpacetime, x: &[f64], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = m.spatial_dim() + 1;
    let g = metric(m, x);
    let ginv = inverse_diag(&g);
    // dg[a][mu][nu] = d g_{mu nu} / d x^a
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    for a in 0..n {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[a] += h;
        xm[a] -= h;
        let gp = metric(m, &xp);
        let gm = metric(m, &xm);
        for mu in 0..n {
            for nu in 0..n {
                dg[a][mu][nu] = (gp[mu][nu] - gm[mu][nu]) / (2.0 * h);
            }
        }
    }
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for mu in 0..n {
        for al in 0..n {
            for be in 0..n {
                let mut acc = 0.0;
                for la in 0..n {
                    acc += ginv[mu][la] * (dg[al][la][be] + dg[be][la][al] - dg[la][al][be]);
                }
                gamma[mu][al][be] = 0.5 * acc;
            }
        }
    }
    gamma
}

/// Ricci tensor (coordinate components) from nested centered differences of
/// the Christoffel symbols; no closed-form curvature enters anywhere.
pub fn ricci_fd(m: &MultiWarpedSpacetime, t: f64, h: f64) -> Vec<Vec<f64>> {
    let n = m.spatial_dim() + 1;
    let mut x = vec![0.0; n];
    x[0] = t;
    let gamma = christoffel(m, &x, h);
    // dgamma[a][mu][al][be]
    let mut dgamma = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for a in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[a] += h;
        xm[a] -= h;
        let gp = christoffel(m, &xp, h);
        let gm = christoffel(m, &xm, h);
        for mu in 0..n {
            for al in 0..n {
                for be in 0..n {
                    dgamma[a][mu][al][be] = (gp[mu][al][be] - gm[mu][al][be]) / (2.0 * h);
                }
            }
        }
    }
    // Ric_{s n} = d_mu Gamma^mu_{n s} - d_n Gamma^mu_{mu s}
    //           + Gamma^mu_{mu l} Gamma^l_{n s} - Gamma^mu_{n l} Gamma^l_{mu s}
    let mut ric = vec![vec![0.0; n]; n];
    for si in 0..n {
        for nu in 0..n {
            let mut acc = 0.0;
            for mu in 0..n {
                acc += dgamma[mu][mu][nu][si] - dgamma[nu][mu][mu][si];
                for la in 0..n {
                    acc += gamma[mu][mu][la] * gamma[la][nu][si]
                        - gamma[mu][nu][la] * gamma[la][mu][si];
                }
            }
            ric[si][nu] = acc;
        }
    }
    ric
}

/// Orthonormal-frame diagonal Ricci eigenvalues from the finite-difference
/// oracle: `(r0, r_axis[k])`.
pub fn ricci_fd_frame(m: &MultiWarpedSpacetime, t: f64, h: f64) -> (f64, Vec<f64>) {
    let ric = ricci_fd(m, t, h);
    let n = m.spatial_dim();
    let r0 = ric[0][0]; // |g_00| = 1
    let mut spatial = Vec::with_capacity(n);
    for k in 0..n {
        let a = m.law_of_axis(k).value(t);
        spatial.push(ric[k + 1][k + 1] / (a * a));
    }
    (r0, spatial)
}

/// Simple splitmix64 stream for reproducible test randomness without
/// external dependencies in the shared module.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}
