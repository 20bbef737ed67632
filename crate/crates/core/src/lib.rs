//! Exact piecewise structure and asymptotics of the Margulis region boundary
//! for a screw parabolic isometry of hyperbolic 4-space, plus sampled
//! distortion certification of the quasi-isometry to a horoball.
//!
//! The library is organized around three layers:
//!
//! - [`cf`]: exact continued-fraction arithmetic for the rotation angle
//!   (convergents, norms ‖kθ‖, closest returns), backed by a guarded
//!   high-precision rational surrogate.
//! - [`region`]: the curve family u_k(r), the lower envelope b(r), its
//!   constituent-piece decomposition, and comparability analysis.
//! - [`hyperbolic`]: upper half-space geometry, the screw parabolic action,
//!   the maps h and f, and seeded distortion certification.
//!
//! The `margulis` binary surfaces all of this as `decompose`, `sample`,
//! `verify`, and `distort` subcommands.

pub mod cf;
mod error;
pub mod hyperbolic;
pub mod region;

pub use error::{Error, Result};
