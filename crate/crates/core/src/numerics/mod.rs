//! Shared numerical plumbing: special functions, a scalar embedded RK pair,
//! adaptive quadrature, and monotone interpolation.

pub mod interp;
pub mod ode;
pub mod quad;
pub mod special;
