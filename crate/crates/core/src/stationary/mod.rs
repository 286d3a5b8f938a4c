//! Stationary boundary layers of the radiating-gas system via singular
//! phase-plane analysis: approximants, the monotone limit, the expansion
//! recurrence, and reconstructed profiles with certified decay bands.

mod coeffs;
mod phase;
mod profile;

pub use coeffs::{ExpansionCoeffs, MAX_ORDER};
pub use phase::{
    geometric_mesh, phase_approximant, phase_approximant_on, stationary_limit, PhaseTrajectory,
    StationaryLimit, INTEGRATOR_TOL,
};
pub use profile::{
    decay_band, reconstruct_profile, Band, BandResult, ProfileField, StationaryProfile,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StationaryError {
    #[error("need u_minus < u_plus <= 0, got ({0}, {1})")]
    InvalidStates(f64, f64),
    #[error("expansion order {0} outside 1..=30")]
    OrderOutOfRange(usize),
    #[error("anchor 1/k^2 must lie below s0 = {s0}; k = {k} is too small")]
    AnchorInvalid { k: u32, s0: f64 },
    #[error("trajectory integration failed: {0}")]
    Integrator(String),
    #[error("k-ladder exceeded k_max = {k_max} without reaching tol = {tol}")]
    LadderExceeded { k_max: u32, tol: f64 },
    #[error("quadrature failed on s-interval [{s_lo}, {s_hi}]")]
    Quadrature { s_lo: f64, s_hi: f64 },
    #[error("profile domain too short: needs x-coverage {needed}, table reaches {covered}")]
    DomainTooShort { needed: f64, covered: f64 },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Degenerate: far field u_plus = 0, polynomial decay. NonDegenerate:
/// u_plus < 0, exponential decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StationaryCase {
    Degenerate,
    NonDegenerate,
}

/// Which closed-form decay bands the parameters certify.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BandValidity {
    /// s0 < 1/6: value and slope bands.
    pub value_bands: bool,
    /// s0 < 1/8: curvature and third-derivative bands.
    pub curvature_bands: bool,
    /// s0 < 1/16 (conservative): fourth-derivative band.
    pub fourth_band: bool,
}

/// Boundary/far-field pair u_minus < u_plus <= 0 of a stationary layer.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryParams {
    u_minus: f64,
    u_plus: f64,
    s0: f64,
    delta: f64,
    case: StationaryCase,
}

impl StationaryParams {
    pub fn new(u_minus: f64, u_plus: f64) -> Result<Self, StationaryError> {
        if !(u_minus.is_finite() && u_plus.is_finite() && u_minus < u_plus && u_plus <= 0.0) {
            return Err(StationaryError::InvalidStates(u_minus, u_plus));
        }
        let s0 = 0.5 * (u_minus * u_minus - u_plus * u_plus);
        let case = if u_plus == 0.0 {
            StationaryCase::Degenerate
        } else {
            StationaryCase::NonDegenerate
        };
        Ok(Self {
            u_minus,
            u_plus,
            s0,
            delta: u_plus - u_minus,
            case,
        })
    }

    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }

    /// s0 = (u_minus^2 - u_plus^2)/2 > 0, the depth of the layer in the
    /// transformed variable.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn case(&self) -> StationaryCase {
        self.case
    }

    /// sqrt(u_plus^2 + 2s); the degenerate case degenerates to sqrt(2s).
    pub fn sound_width(&self, s: f64) -> f64 {
        (self.u_plus * self.u_plus + 2.0 * s).sqrt()
    }

    /// Positive root of l = 1/l - 1/|u_plus| (non-degenerate decay rate).
    pub fn lambda0(&self) -> f64 {
        assert_eq!(self.case, StationaryCase::NonDegenerate);
        let m = self.u_plus.abs();
        ((1.0 + 4.0 * m * m).sqrt() - 1.0) / (2.0 * m)
    }

    /// b = 1/(2 |u_plus|^3), the quadratic upper-bracket coefficient.
    pub fn quadratic_bound_coefficient(&self) -> f64 {
        assert_eq!(self.case, StationaryCase::NonDegenerate);
        let m = self.u_plus.abs();
        1.0 / (2.0 * m * m * m)
    }

    pub fn band_validity(&self) -> BandValidity {
        BandValidity {
            value_bands: self.s0 < 1.0 / 6.0,
            curvature_bands: self.s0 < 1.0 / 8.0,
            fourth_band: self.s0 < 1.0 / 16.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validation() {
        assert!(StationaryParams::new(-0.5, 0.0).is_ok());
        assert!(StationaryParams::new(-0.5, -0.6).is_err());
        assert!(StationaryParams::new(-0.5, 0.1).is_err());
        assert!(StationaryParams::new(0.0, 0.0).is_err());
    }

    #[test]
    fn s0_matches_definition() {
        let p = StationaryParams::new(-0.6, -0.5).unwrap();
        assert!((p.s0() - 0.5 * (0.36 - 0.25)).abs() < 1e-16);
        assert_eq!(p.case(), StationaryCase::NonDegenerate);
        let d = StationaryParams::new(-0.4, 0.0).unwrap();
        assert_eq!(d.case(), StationaryCase::Degenerate);
        assert!((d.s0() - 0.08).abs() < 1e-16);
    }

    #[test]
    fn lambda0_solves_its_fixed_point() {
        let p = StationaryParams::new(-0.6, -0.5).unwrap();
        let l = p.lambda0();
        assert!((l - (1.0 / l - 1.0 / 0.5_f64)).abs() < 1e-14);
    }

    #[test]
    fn validity_flags() {
        let p = StationaryParams::new(-(0.2_f64.sqrt()), 0.0).unwrap(); // s0 = 0.1
        let v = p.band_validity();
        assert!(v.value_bands && v.curvature_bands);
        assert!(!v.fourth_band); // 0.1 > 1/16
    }
}
