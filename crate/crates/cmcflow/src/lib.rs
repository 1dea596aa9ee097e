//! Numerical laboratory for constant-mean-curvature Cauchy surfaces in
//! multiply warped product cosmologies.
//!
//! The crate evolves spacelike graph surfaces by forced mean curvature flow,
//! certifies barrier slices through curvature comparison bounds, perturbs
//! surfaces along the principal eigenfunction of the stability operator, and
//! classifies causal structure (observer horizons, future boundary shape,
//! completeness criteria) for the warped models it supports.

pub mod causal;
pub mod comparison;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod grid;
pub mod hypersurface;
pub mod io;
pub mod ode;
pub mod quadrature;
pub mod spacetime;
pub mod stability;

pub use error::{CmcError, Result};
pub use spacetime::{FiberSpec, MultiWarpedSpacetime, RicciDiagonal, WarpingLaw};
