//! Smoothed rarefaction waves: the inviscid fan, the exact viscous Burgers
//! solution for step data (log-domain erfc-ratio form), boundary correctors,
//! the modified wave, and its residual fields.

use std::io::Write;

use thiserror::Error;

use crate::numerics::special::{erfc_log_slope, ln_erfc};

#[derive(Debug, Error)]
pub enum RarefactionError {
    #[error("need 0 <= u_minus < u_plus, got ({0}, {1})")]
    InvalidStates(f64, f64),
    #[error("derivative order {0} outside 0..=4")]
    InvalidOrder(usize),
    #[error("precision loss evaluating the wave at (x, t) = ({x}, {t})")]
    PrecisionLoss { x: f64, t: f64 },
}

/// Inviscid rarefaction fan for Burgers flux: u_minus left of the fan, x/t
/// inside, u_plus to the right. At t = 0 returns the step datum.
pub fn riemann_rarefaction(u_minus: f64, u_plus: f64, x: f64, t: f64) -> f64 {
    debug_assert!(u_minus < u_plus);
    if t <= 0.0 {
        return if x > 0.0 { u_plus } else { u_minus };
    }
    let speed = x / t;
    if speed <= u_minus {
        u_minus
    } else if speed >= u_plus {
        u_plus
    } else {
        speed
    }
}

/// Which smoothing applies: the boundary state u_minus = 0 needs the
/// antisymmetrized Burgers datum (-u_plus, u_plus) so the wave vanishes at
/// x = 0 for all time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RarefactionCase {
    Case4,
    Case5,
}

/// Family of smoothed rarefactions connecting 0 <= u_minus < u_plus.
#[derive(Debug, Clone, Copy)]
pub struct RarefactionFamily {
    u_minus: f64,
    u_plus: f64,
    case_tag: RarefactionCase,
}

/// Value and first two x-derivatives of the smoothed wave at a point.
#[derive(Debug, Clone, Copy)]
pub struct WavePoint {
    pub u: f64,
    pub ux: f64,
    pub uxx: f64,
}

impl RarefactionFamily {
    pub fn new(u_minus: f64, u_plus: f64) -> Result<Self, RarefactionError> {
        if !(u_minus >= 0.0 && u_minus < u_plus) || !u_plus.is_finite() {
            return Err(RarefactionError::InvalidStates(u_minus, u_plus));
        }
        let case_tag = if u_minus == 0.0 {
            RarefactionCase::Case4
        } else {
            RarefactionCase::Case5
        };
        Ok(Self {
            u_minus,
            u_plus,
            case_tag,
        })
    }

    pub fn u_minus(&self) -> f64 {
        self.u_minus
    }

    pub fn u_plus(&self) -> f64 {
        self.u_plus
    }

    pub fn case_tag(&self) -> RarefactionCase {
        self.case_tag
    }

    pub fn delta(&self) -> f64 {
        self.u_plus - self.u_minus
    }

    /// Left state of the Burgers step datum (antisymmetrized in Case4).
    pub fn burgers_left(&self) -> f64 {
        match self.case_tag {
            RarefactionCase::Case4 => -self.u_plus,
            RarefactionCase::Case5 => self.u_minus,
        }
    }

    /// Value and x-derivatives 1..2 at (x, t); whole-line x.
    pub fn eval(&self, x: f64, t: f64) -> Result<WavePoint, RarefactionError> {
        let left = self.burgers_left();
        let right = self.u_plus;
        if t <= 0.0 {
            let u = if x > 0.0 {
                right
            } else if x < 0.0 {
                left
            } else {
                self.u_minus
            };
            return Ok(WavePoint {
                u,
                ux: 0.0,
                uxx: 0.0,
            });
        }
        let sqt = t.sqrt();
        let a = (x - left * t) / (2.0 * sqt);
        let b = (right * t - x) / (2.0 * sqt);
        let dlt = right - left;
        // a^2 - b^2 in cancellation-free form.
        let ln_r = (x - 0.5 * (left + right) * t) * (0.5 * dlt) + ln_erfc(a) - ln_erfc(b);
        let sigma = if ln_r >= 0.0 {
            let e = (-ln_r).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + ln_r.exp())
        };
        let u = left + dlt * sigma;
        let ha = erfc_log_slope(a);
        let hb = erfc_log_slope(b);
        let m1 = 0.5 * dlt - (ha + hb) / (2.0 * sqt);
        let sig01 = sigma * (1.0 - sigma);
        let ux = -dlt * sig01 * m1;
        let hpa = ha * (ha - 2.0 * a);
        let hpb = hb * (hb - 2.0 * b);
        let m2 = -(hpa - hpb) / (4.0 * t);
        let uxx = dlt * sig01 * ((1.0 - 2.0 * sigma) * m1 * m1 - m2);
        if !(u.is_finite() && ux.is_finite() && uxx.is_finite()) {
            return Err(RarefactionError::PrecisionLoss { x, t });
        }
        Ok(WavePoint { u, ux, uxx })
    }

    /// Time derivative via the equation: u_t = u_xx - u u_x.
    pub fn eval_time_derivative(&self, x: f64, t: f64) -> Result<f64, RarefactionError> {
        let p = self.eval(x, t)?;
        Ok(p.uxx - p.u * p.ux)
    }

    /// Boundary state (u(0,t), u_x(0,t), u_xx(0,t)); the t = 0 values follow
    /// the initial-datum convention u(0,0) = u_minus with flat derivatives.
    pub fn boundary(&self, t: f64) -> Result<(f64, f64, f64), RarefactionError> {
        if t <= 0.0 {
            return Ok((self.u_minus, 0.0, 0.0));
        }
        let p = self.eval(0.0, t)?;
        Ok((p.u, p.ux, p.uxx))
    }

    /// FD step for the Richardson third/fourth derivatives, keyed to the
    /// diffusive length scale.
    fn fd_step(&self, t: f64) -> f64 {
        7e-4 * (1.0 + t).sqrt()
    }

    fn third_derivative(&self, x: f64, t: f64) -> Result<f64, RarefactionError> {
        let h = self.fd_step(t);
        let d = |h: f64| -> Result<f64, RarefactionError> {
            Ok((self.eval(x + h, t)?.uxx - self.eval(x - h, t)?.uxx) / (2.0 * h))
        };
        Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
    }

    fn fourth_derivative(&self, x: f64, t: f64) -> Result<f64, RarefactionError> {
        let h = self.fd_step(t);
        let s = |h: f64| -> Result<f64, RarefactionError> {
            Ok((self.eval(x + h, t)?.uxx - 2.0 * self.eval(x, t)?.uxx
                + self.eval(x - h, t)?.uxx)
                / (h * h))
        };
        Ok((4.0 * s(0.5 * h)? - s(h)?) / 3.0)
    }
}

/// ∂_x^k of the smoothed wave, k = 0..=4. Orders 0..2 are analytic; 3 and 4
/// are Richardson-extrapolated differences of the analytic second derivative.
pub fn smooth_rarefaction(
    family: &RarefactionFamily,
    x: f64,
    t: f64,
    order: usize,
) -> Result<f64, RarefactionError> {
    match order {
        0 => Ok(family.eval(x, t)?.u),
        1 => Ok(family.eval(x, t)?.ux),
        2 => Ok(family.eval(x, t)?.uxx),
        3 => family.third_derivative(x, t),
        4 => family.fourth_derivative(x, t),
        _ => Err(RarefactionError::InvalidOrder(order)),
    }
}

/// Smoothed wave with the boundary-layer correctors subtracted so the
/// boundary values are exact: phi(0,t) = u_minus, psi(0,t) = 0.
#[derive(Debug, Clone, Copy)]
pub struct ModifiedWave {
    family: RarefactionFamily,
}

/// One evaluation of the modified wave and its correctors.
#[derive(Debug, Clone, Copy)]
pub struct ModifiedWaveEval {
    pub phi: f64,
    pub phi_x: f64,
    pub psi: f64,
    pub u_hat: f64,
    pub q_hat: f64,
}

impl ModifiedWave {
    pub fn new(family: RarefactionFamily) -> Self {
        Self { family }
    }

    pub fn family(&self) -> &RarefactionFamily {
        &self.family
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<ModifiedWaveEval, RarefactionError> {
        let (u0, ux0, _) = self.family.boundary(t)?;
        let um = self.family.u_minus();
        let e = (-x).exp();
        let u_hat = (u0 - um) * e;
        let q_hat = -ux0 * e;
        if x == 0.0 {
            // Exact boundary values by construction.
            return Ok(ModifiedWaveEval {
                phi: um,
                phi_x: ux0 + (u0 - um),
                psi: 0.0,
                u_hat,
                q_hat,
            });
        }
        let p = self.family.eval(x, t)?;
        Ok(ModifiedWaveEval {
            phi: p.u - u_hat,
            phi_x: p.ux + u_hat,
            psi: -p.ux + ux0 * e,
            u_hat,
            q_hat,
        })
    }

    /// Residual fields of the corrected wave, evaluated term by term:
    ///
    /// R1 = u_hat_t + phi_x u_hat + phi u_hat_x + u_hat u_hat_x + q_hat_x
    /// R2 = -phi_xxx - u_hat_xxx - q_hat_xx + u_hat_x + q_hat
    pub fn residuals(&self, x: f64, t: f64) -> Result<(f64, f64), RarefactionError> {
        let (u0, ux0, uxx0) = self.family.boundary(t)?;
        let um = self.family.u_minus();
        let e = (-x).exp();
        let u_hat = (u0 - um) * e;
        let u_hat_x = -u_hat;
        let u_hat_t = if t > 0.0 { (uxx0 - u0 * ux0) * e } else { 0.0 };
        let q_hat = -ux0 * e;
        let q_hat_x = -q_hat;
        let q_hat_xx = q_hat;
        let ev = self.eval(x, t)?;
        let r1 = u_hat_t + ev.phi_x * u_hat + ev.phi * u_hat_x + u_hat * u_hat_x + q_hat_x;
        let u_hat_xxx = -u_hat;
        let wave_xxx = self.family.third_derivative(x, t)?;
        let phi_xxx = wave_xxx - u_hat_xxx;
        let r2 = -phi_xxx - u_hat_xxx - q_hat_xx + u_hat_x + q_hat;
        Ok((r1, r2))
    }
}

/// (x, t, value) lattice dump.
pub fn write_lattice_csv<W: Write>(
    mut out: W,
    rows: impl Iterator<Item = (f64, f64, f64)>,
) -> std::io::Result<()> {
    writeln!(out, "x,t,value")?;
    for (x, t, v) in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", x, t, v)?;
    }
    Ok(())
}
