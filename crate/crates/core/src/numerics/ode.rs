//! Embedded Dormand-Prince 5(4) integrator for scalar ODEs with dense
//! sampling at caller-supplied output points and a positivity guard.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("integrator failed near s = {s}: {reason}")]
    Failure { s: f64, reason: &'static str },
}

/// Options for [`integrate_to_samples`].
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Reject any step whose endpoint or final stage drops to or below this.
    pub positivity_floor: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-13,
            positivity_floor: 0.0,
            max_steps: 50_000_000,
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrate dy/ds = f(s, y) from (s0, y0), recording y at each ascending
/// `samples` point (all must lie in [s0, s_end]); returns values in order.
pub fn integrate_to_samples(
    f: impl Fn(f64, f64) -> f64,
    s0: f64,
    y0: f64,
    samples: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<f64>, OdeError> {
    let mut out = Vec::with_capacity(samples.len());
    let mut s = s0;
    let mut y = y0;
    let mut k1 = f(s, y);
    let s_end = *samples.last().unwrap_or(&s0);
    let mut idx = 0;
    while idx < samples.len() && samples[idx] <= s {
        out.push(y);
        idx += 1;
    }

    // Initial step keyed to the local slope.
    let scale = opts.abs_tol + y.abs() * opts.rel_tol;
    let mut h = (0.01 * (y.abs().max(1e-12)) / k1.abs().max(1e-12))
        .min(s_end - s0)
        .max(1e-14 * (s_end - s0).max(1e-300));
    let _ = scale;

    let mut steps = 0usize;
    let mut rejects_in_row = 0usize;

    while s < s_end && idx < samples.len() {
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::Failure {
                s,
                reason: "step budget exhausted",
            });
        }
        let target = samples[idx];
        if target - s <= 4.0 * f64::EPSILON * target.abs() {
            // Already at the output point to roundoff.
            s = target;
            out.push(y);
            idx += 1;
            continue;
        }
        if h > target - s {
            h = target - s;
        }

        let k2 = f(s + A21 * h, y + h * (A21 * k1));
        let k3 = f(s + 0.3 * h, y + h * (A31 * k1 + A32 * k2));
        let k4 = f(s + 0.8 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = f(
            s + 8.0 / 9.0 * h,
            y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        );
        let k6 = f(
            s + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        );
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = f(s + h, y_new);
        let err_raw = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let tol = opts.abs_tol + y.abs().max(y_new.abs()) * opts.rel_tol;
        let err = (err_raw / tol).abs();

        let positive_ok = y_new.is_finite() && y_new > opts.positivity_floor;
        if err <= 1.0 && positive_ok {
            s += h;
            y = y_new;
            k1 = k7;
            rejects_in_row = 0;
            while idx < samples.len() && samples[idx] <= s + f64::EPSILON * s.abs() {
                out.push(y);
                idx += 1;
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= factor;
        } else {
            rejects_in_row += 1;
            if rejects_in_row > 200 {
                return Err(OdeError::Failure {
                    s,
                    reason: if positive_ok {
                        "tolerance unreachable"
                    } else {
                        "positivity lost"
                    },
                });
            }
            let factor = if positive_ok {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.3
            };
            h *= factor;
            if !h.is_finite() || h <= f64::EPSILON * s.abs().max(1e-100) {
                return Err(OdeError::Failure {
                    s,
                    reason: "step size collapsed",
                });
            }
        }
    }
    while idx < samples.len() {
        out.push(y);
        idx += 1;
    }
    Ok(out)
}
