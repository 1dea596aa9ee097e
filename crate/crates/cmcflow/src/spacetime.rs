//! Multiply warped product spacetime models.
//!
//! A model is an interval `(t_min, t_max)` times a product of flat tori,
//! with metric `g = -dt^2 + sum_i a_i(t)^2 h_i`. The warping laws `a_i` are
//! restricted to three analytic families (power, exponential, constant) so
//! that derivatives, Ricci eigenvalues, and the confinement integrals all
//! have closed forms.
//!
//! The orthonormal frame used for curvature is `e_0 = d/dt`,
//! `e_{i,k} = a_i^{-1} d/dx^k`; the Ricci tensor of these models is diagonal
//! in that frame.

use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};

/// Analytic warping law `a(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum WarpingLaw {
    /// `a(t) = t^p`; requires `t > 0`.
    Power { p: f64 },
    /// `a(t) = exp(rate * t)`.
    Exponential { rate: f64 },
    /// `a(t) = value`, with `value > 0`.
    Constant { value: f64 },
}

impl WarpingLaw {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            // powf is the flow stepper's hot spot; short-circuit the two
            // integer exponents the test models use.
            WarpingLaw::Power { p } if p == 1.0 => t,
            WarpingLaw::Power { p } if p == 2.0 => t * t,
            WarpingLaw::Power { p } => t.powf(p),
            WarpingLaw::Exponential { rate } => (rate * t).exp(),
            WarpingLaw::Constant { value } => value,
        }
    }

    /// First derivative `a'(t)`.
    pub fn d1(&self, t: f64) -> f64 {
        match *self {
            WarpingLaw::Power { p } if p == 1.0 => 1.0,
            WarpingLaw::Power { p } if p == 2.0 => 2.0 * t,
            WarpingLaw::Power { p } => p * t.powf(p - 1.0),
            WarpingLaw::Exponential { rate } => rate * (rate * t).exp(),
            WarpingLaw::Constant { .. } => 0.0,
        }
    }

    /// Second derivative `a''(t)`.
    pub fn d2(&self, t: f64) -> f64 {
        match *self {
            WarpingLaw::Power { p } => p * (p - 1.0) * t.powf(p - 2.0),
            WarpingLaw::Exponential { rate } => rate * rate * (rate * t).exp(),
            WarpingLaw::Constant { .. } => 0.0,
        }
    }

    /// Logarithmic derivative `a'/a`.
    pub fn log_d1(&self, t: f64) -> f64 {
        match *self {
            WarpingLaw::Power { p } => p / t,
            WarpingLaw::Exponential { rate } => rate,
            WarpingLaw::Constant { .. } => 0.0,
        }
    }

    /// `a''/a`.
    pub fn log_d2(&self, t: f64) -> f64 {
        match *self {
            WarpingLaw::Power { p } => p * (p - 1.0) / (t * t),
            WarpingLaw::Exponential { rate } => rate * rate,
            WarpingLaw::Constant { .. } => 0.0,
        }
    }
}

/// One torus factor `T^{n_i}` with its warping law. Each coordinate runs over
/// `[-period, period]` with the endpoints identified (side `2*period`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub dim: usize,
    pub period: f64,
    pub law: WarpingLaw,
}

/// The ambient Lorentzian model: `g = -dt^2 + sum_i a_i(t)^2 h_i` on
/// `(t_min, t_max) x prod_i T^{n_i}`, with flat `h_i`. The temporal function
/// is the coordinate `t` itself, so the lapse is 1 and the reference timelike
/// field is `d/dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiWarpedSpacetime {
    pub t_min: f64,
    /// `None` means `+infinity`.
    pub t_max: Option<f64>,
    pub fibers: Vec<FiberSpec>,
    /// Cosmological parameter `lambda = 2 Lambda / (n (n-1))`, nonnegative.
    pub lambda: f64,
}

/// Diagonal Ricci eigenvalues in the orthonormal frame at a fixed `t`:
/// `r0` along `e_0` and one spatial eigenvalue per fiber.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RicciDiagonal {
    pub r0: f64,
    pub fiber: Vec<f64>,
}

/// Sample-by-sample energy condition report.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub passed: bool,
    /// `min` over samples of `min(r0 + n*lambda, min_i (r0 + r_i))`; the
    /// condition `Ric(X,X) >= -n*lambda` over all unit timelike `X` holds at
    /// a sample iff this quantity is nonnegative there.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub samples: usize,
    pub lambda: f64,
}

impl MultiWarpedSpacetime {
    pub fn new(
        t_min: f64,
        t_max: Option<f64>,
        fibers: Vec<FiberSpec>,
        lambda: f64,
    ) -> Result<Self> {
        let model = MultiWarpedSpacetime {
            t_min,
            t_max,
            fibers,
            lambda,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.fibers.is_empty() {
            return Err(CmcError::Parse("model has no fibers".into()));
        }
        if let Some(t_max) = self.t_max {
            if !(self.t_min < t_max) {
                return Err(CmcError::Parse(format!(
                    "t_min ({}) must be below t_max ({})",
                    self.t_min, t_max
                )));
            }
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(CmcError::Parse(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        for (i, f) in self.fibers.iter().enumerate() {
            if f.dim == 0 {
                return Err(CmcError::Parse(format!("fiber {i}: dim must be >= 1")));
            }
            if !(f.period > 0.0) || !f.period.is_finite() {
                return Err(CmcError::Parse(format!(
                    "fiber {i}: period must be positive, got {}",
                    f.period
                )));
            }
            match f.law {
                WarpingLaw::Power { p } => {
                    if !p.is_finite() {
                        return Err(CmcError::Parse(format!("fiber {i}: p not finite")));
                    }
                    // t^p is only positive and smooth on t > 0.
                    if self.t_min < 0.0 {
                        return Err(CmcError::Parse(format!(
                            "fiber {i}: power law requires t_min >= 0, got {}",
                            self.t_min
                        )));
                    }
                }
                WarpingLaw::Exponential { rate } => {
                    if !rate.is_finite() {
                        return Err(CmcError::Parse(format!("fiber {i}: rate not finite")));
                    }
                }
                WarpingLaw::Constant { value } => {
                    if !(value > 0.0) || !value.is_finite() {
                        return Err(CmcError::Parse(format!(
                            "fiber {i}: constant warping must be positive, got {value}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Total spatial dimension `n = sum_i n_i`.
    pub fn spatial_dim(&self) -> usize {
        self.fibers.iter().map(|f| f.dim).sum()
    }

    /// Fiber index owning spatial coordinate axis `k` (axes are ordered
    /// fiber by fiber).
    pub fn fiber_of_axis(&self, axis: usize) -> usize {
        let mut k = axis;
        for (i, f) in self.fibers.iter().enumerate() {
            if k < f.dim {
                return i;
            }
            k -= f.dim;
        }
        panic!(
            "axis {axis} out of range for {}-dim model",
            self.spatial_dim()
        );
    }

    /// Warping law of the fiber owning axis `k`.
    pub fn law_of_axis(&self, axis: usize) -> &WarpingLaw {
        &self.fibers[self.fiber_of_axis(axis)].law
    }

    /// Torus period of the fiber owning axis `k`.
    pub fn period_of_axis(&self, axis: usize) -> f64 {
        self.fibers[self.fiber_of_axis(axis)].period
    }

    pub fn contains_t(&self, t: f64) -> bool {
        t > self.t_min && self.t_max.map_or(true, |m| t < m)
    }

    fn require_t(&self, t: f64) -> Result<()> {
        if !self.contains_t(t) {
            return Err(CmcError::Domain(format!(
                "t = {t} outside the model interval ({}, {})",
                self.t_min,
                self.t_max.map_or("inf".to_string(), |m| m.to_string())
            )));
        }
        Ok(())
    }

    /// Mean curvature of the constant-`t` slice with respect to the future
    /// unit normal `d/dt`: `H(t) = sum_i n_i a_i'/a_i`. Positive on expanding
    /// slices.
    pub fn slice_mean_curvature(&self, t: f64) -> f64 {
        self.fibers
            .iter()
            .map(|f| f.dim as f64 * f.law.log_d1(t))
            .sum()
    }

    /// Diagonal Ricci eigenvalues at `t` in the orthonormal frame.
    ///
    /// `r0 = -sum_i n_i a_i''/a_i`, and for a unit direction in fiber `i`
    /// `r_i = a_i''/a_i + (n_i - 1)(a_i'/a_i)^2 + (a_i'/a_i) sum_{j!=i} n_j a_j'/a_j`.
    pub fn ricci_diagonal(&self, t: f64) -> Result<RicciDiagonal> {
        self.require_t(t)?;
        let total_log_d1: f64 = self
            .fibers
            .iter()
            .map(|f| f.dim as f64 * f.law.log_d1(t))
            .sum();
        let mut r0 = 0.0;
        let mut fiber = Vec::with_capacity(self.fibers.len());
        for f in &self.fibers {
            let l1 = f.law.log_d1(t);
            let l2 = f.law.log_d2(t);
            r0 -= f.dim as f64 * l2;
            fiber.push(l2 - l1 * l1 + l1 * total_log_d1);
        }
        let out = RicciDiagonal { r0, fiber };
        if !out.r0.is_finite() || out.fiber.iter().any(|r| !r.is_finite()) {
            return Err(CmcError::Numeric(format!(
                "non-finite Ricci eigenvalue at t = {t}"
            )));
        }
        Ok(out)
    }

    /// Checks `Ric(X,X) >= -n*lambda` over all unit timelike `X` at every
    /// sample. For a diagonal Ricci tensor this reduces to the eigenvalue
    /// pair `r0 >= -n*lambda` and `r0 + r_i >= 0` for every fiber `i`: the
    /// boost family `X = cosh(phi) e_0 + sinh(phi) e_i` realizes the infimum.
    pub fn check_energy_condition(&self, lambda: f64, t_samples: &[f64]) -> Result<EnergyReport> {
        if t_samples.is_empty() {
            return Err(CmcError::Argument("empty sample list".into()));
        }
        if lambda < 0.0 {
            return Err(CmcError::Argument(format!(
                "lambda must be nonnegative, got {lambda}"
            )));
        }
        let n = self.spatial_dim() as f64;
        let mut worst_margin = f64::INFINITY;
        let mut worst_t = t_samples[0];
        for &t in t_samples {
            let ric = self.ricci_diagonal(t)?;
            let mut margin = ric.r0 + n * lambda;
            for &ri in &ric.fiber {
                margin = margin.min(ric.r0 + ri);
            }
            if margin < worst_margin {
                worst_margin = margin;
                worst_t = t;
            }
        }
        Ok(EnergyReport {
            passed: worst_margin >= 0.0,
            worst_margin,
            worst_t,
            samples: t_samples.len(),
            lambda,
        })
    }
}

/// The explicit three-torus example with warpings `(t^{3/4}, t^{3/4}, t^{5/4})`
/// and coordinate period `b` per axis, on `(0, inf)`.
pub fn example_three_torus(b: f64) -> MultiWarpedSpacetime {
    MultiWarpedSpacetime::new(
        0.0,
        None,
        vec![
            FiberSpec {
                dim: 1,
                period: b,
                law: WarpingLaw::Power { p: 0.75 },
            },
            FiberSpec {
                dim: 1,
                period: b,
                law: WarpingLaw::Power { p: 0.75 },
            },
            FiberSpec {
                dim: 1,
                period: b,
                law: WarpingLaw::Power { p: 1.25 },
            },
        ],
        0.0,
    )
    .expect("example model is valid")
}

/// Single-fiber `T^3` model with `a(t) = exp(sqrt(lambda) t)` on the full line.
pub fn example_de_sitter_like(lambda: f64, b: f64) -> MultiWarpedSpacetime {
    MultiWarpedSpacetime::new(
        f64::NEG_INFINITY,
        None,
        vec![FiberSpec {
            dim: 3,
            period: b,
            law: WarpingLaw::Exponential {
                rate: lambda.sqrt(),
            },
        }],
        lambda,
    )
    .expect("example model is valid")
}

/// Single-fiber `T^3` model with `a(t) = t` on `(0, inf)`.
pub fn example_flrw_linear(b: f64) -> MultiWarpedSpacetime {
    MultiWarpedSpacetime::new(
        0.0,
        None,
        vec![FiberSpec {
            dim: 3,
            period: b,
            law: WarpingLaw::Power { p: 1.0 },
        }],
        0.0,
    )
    .expect("example model is valid")
}
