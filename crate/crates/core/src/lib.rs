//! Numerical laboratory for the asymptotic wave patterns of a radiating-gas
//! model on the half line: a coupled hyperbolic-elliptic system whose
//! solutions approach a rarefaction wave, a stationary boundary layer, or a
//! superposition of the two depending on the boundary and far-field states.
//!
//! Modules:
//! - [`grid`]: uniform half-line grids, FD derivatives, discrete norms.
//! - [`elliptic`]: screened-Poisson solves, reflected-kernel integrals, and
//!   the optimal sup-norm interpolation inequality checker.
//! - [`rarefaction`]: exact smoothed rarefaction waves of the viscous Burgers
//!   equation with step data, boundary correctors, and residual fields.
//! - [`stationary`]: the singular phase-plane engine for stationary layers,
//!   including certified decay bands.
//! - [`ibvp`]: the time-dependent solver, scenarios for the five sign cases,
//!   and perturbation diagnostics.
//! - [`verify`]: property suites behind the CLI `verify-*` subcommands.

pub mod elliptic;
pub mod grid;
pub mod ibvp;
pub mod numerics;
pub mod rarefaction;
pub mod stationary;
pub mod verify;
