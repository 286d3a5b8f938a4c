//! Singular phase-plane approximants v_k(s) of the stationary trajectory and
//! the monotone k-ladder extraction of their limit.

use crate::numerics::interp::MonotoneCubic;
use crate::numerics::ode::{integrate_to_samples, OdeOptions};

use super::coeffs::ExpansionCoeffs;
use super::{StationaryCase, StationaryError, StationaryParams};

/// Sampled curve s -> v_k(s); `k = None` marks the extracted limit.
#[derive(Debug, Clone)]
pub struct PhaseTrajectory {
    pub k: Option<u32>,
    /// (s, v) with s ascending over the validity interval.
    pub samples: Vec<(f64, f64)>,
    /// Approximate turning point of the initial dip, when resolved.
    pub turning_point: Option<f64>,
}

impl PhaseTrajectory {
    pub fn s_range(&self) -> (f64, f64) {
        (self.samples[0].0, self.samples.last().unwrap().0)
    }
}

/// Integrator tolerance used for all trajectory work.
pub const INTEGRATOR_TOL: f64 = 1e-10;

const LADDER_MESH_POINTS: usize = 2048;
const K_MAX: u32 = 1 << 22;

/// Log-graded mesh of n points from lo to hi inclusive.
pub fn geometric_mesh(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).ln();
    let mut mesh: Vec<f64> = (0..n)
        .map(|i| lo * (ratio * i as f64 / (n - 1) as f64).exp())
        .collect();
    mesh[0] = lo;
    mesh[n - 1] = hi;
    mesh
}

fn integrate_rung(
    params: &StationaryParams,
    anchor_s: f64,
    anchor_v: f64,
    mesh: &[f64],
) -> Result<Vec<f64>, StationaryError> {
    let rhs = |s: f64, v: f64| s / v - 1.0 / params.sound_width(s);
    let opts = OdeOptions {
        rel_tol: INTEGRATOR_TOL,
        abs_tol: 1e-14,
        positivity_floor: 0.0,
        max_steps: 80_000_000,
    };
    integrate_to_samples(rhs, anchor_s, anchor_v, mesh, &opts)
        .map_err(|e| StationaryError::Integrator(e.to_string()))
}

/// Solve the approximated trajectory problem for index k: anchored at
/// (1/k^2, 1/k) in the degenerate case and at (0, 1/k) otherwise, integrated
/// toward s0 with positivity preserved.
pub fn phase_approximant(
    params: &StationaryParams,
    k: u32,
) -> Result<PhaseTrajectory, StationaryError> {
    let s0 = params.s0();
    let mesh = match params.case() {
        StationaryCase::Degenerate => {
            let sa = anchor(params, k)?.0;
            geometric_mesh(sa, s0, 513)
        }
        StationaryCase::NonDegenerate => {
            anchor(params, k)?;
            let mut mesh = geometric_mesh(s0 * 1e-6, s0, 512);
            mesh.insert(0, 0.0);
            mesh
        }
    };
    phase_approximant_on(params, k, mesh)
}

fn anchor(params: &StationaryParams, k: u32) -> Result<(f64, f64), StationaryError> {
    if k == 0 {
        return Err(StationaryError::AnchorInvalid { k, s0: params.s0() });
    }
    match params.case() {
        StationaryCase::Degenerate => {
            let sa = 1.0 / (k as f64 * k as f64);
            if sa >= params.s0() {
                return Err(StationaryError::AnchorInvalid { k, s0: params.s0() });
            }
            Ok((sa, 1.0 / k as f64))
        }
        StationaryCase::NonDegenerate => Ok((0.0, 1.0 / k as f64)),
    }
}

/// Like [`phase_approximant`] but sampled on a caller-supplied ascending
/// mesh inside the validity interval, so rungs with different k can be
/// compared pointwise.
pub fn phase_approximant_on(
    params: &StationaryParams,
    k: u32,
    mesh: Vec<f64>,
) -> Result<PhaseTrajectory, StationaryError> {
    let (anchor_s, anchor_v) = anchor(params, k)?;
    assert!(
        mesh.first().is_some_and(|&s| s >= anchor_s)
            && mesh.last().is_some_and(|&s| s <= params.s0()),
        "mesh must lie within [anchor, s0]"
    );
    let mut values = integrate_rung(params, anchor_s, anchor_v, &mesh)?;
    if anchor_s == 0.0 && mesh[0] == 0.0 {
        // keep the anchor itself exact
        values[0] = anchor_v;
    }
    let samples: Vec<(f64, f64)> = mesh.into_iter().zip(values).collect();
    let turning_point = match params.case() {
        StationaryCase::Degenerate => samples
            .windows(2)
            .find(|w| w[1].1 > w[0].1)
            .map(|w| w[0].0),
        StationaryCase::NonDegenerate => None,
    };
    Ok(PhaseTrajectory {
        k: Some(k),
        samples,
        turning_point,
    })
}

/// Limit trajectory: ladder data on [s_star, s0] plus the one-sided expansion
/// band below the crossover.
#[derive(Debug, Clone)]
pub struct StationaryLimit {
    params: StationaryParams,
    s_star: f64,
    samples: Vec<(f64, f64)>,
    interp: MonotoneCubic,
    coeffs: ExpansionCoeffs,
    pub final_k: u32,
    pub ladder_gap: f64,
}

impl StationaryLimit {
    pub fn params(&self) -> &StationaryParams {
        &self.params
    }

    /// Crossover below which the truncated expansion replaces ladder data.
    pub fn s_star(&self) -> f64 {
        self.s_star
    }

    pub fn coeffs(&self) -> &ExpansionCoeffs {
        &self.coeffs
    }

    pub fn trajectory(&self) -> PhaseTrajectory {
        PhaseTrajectory {
            k: None,
            samples: self.samples.clone(),
            turning_point: None,
        }
    }

    /// v(s) anywhere in (0, s0]: interpolated ladder data above the
    /// crossover, midpoint of the certified one-sided band below it.
    pub fn v(&self, s: f64) -> f64 {
        if s >= self.s_star {
            self.interp.eval(s)
        } else {
            match self.params.case() {
                StationaryCase::Degenerate => {
                    self.coeffs.series(s, 3)
                        - 0.5 * self.coeffs.remainder_coefficient(3) * s.powf(4.5)
                }
                StationaryCase::NonDegenerate => {
                    let l = self.params.lambda0();
                    let b = self.params.quadratic_bound_coefficient();
                    l * s + 0.5 * b * s * s
                }
            }
        }
    }

    /// Half-width of the certified band around the tail evaluation.
    pub fn tail_halfwidth(&self, s: f64) -> f64 {
        match self.params.case() {
            StationaryCase::Degenerate => {
                0.5 * self.coeffs.remainder_coefficient(3) * s.powf(4.5)
            }
            StationaryCase::NonDegenerate => {
                0.5 * self.params.quadratic_bound_coefficient() * s * s
            }
        }
    }
}

/// Extract the limit by k-doubling until consecutive rungs agree to `tol` on
/// the shared mesh; monotone decrease makes the stop rigorous.
pub fn stationary_limit(
    params: &StationaryParams,
    tol: f64,
) -> Result<StationaryLimit, StationaryError> {
    assert!(tol > 0.0);
    let s0 = params.s0();
    let coeffs = ExpansionCoeffs::new(4)?;
    let s_star = match params.case() {
        StationaryCase::Degenerate => {
            let m3 = coeffs.remainder_coefficient(3);
            (tol / m3).powf(2.0 / 9.0).min(0.25 * s0)
        }
        StationaryCase::NonDegenerate => s0 / 50.0,
    };
    let mesh = geometric_mesh(s_star, s0, LADDER_MESH_POINTS);

    let k_start = match params.case() {
        StationaryCase::Degenerate => {
            let k0 = (1.0 / s0.sqrt()).floor() as u32 + 1;
            k0.max((2.0 / s_star.sqrt()).ceil() as u32)
        }
        StationaryCase::NonDegenerate => 64,
    };

    let rung = |k: u32| -> Result<Vec<f64>, StationaryError> {
        let (sa, va) = match params.case() {
            StationaryCase::Degenerate => (1.0 / (k as f64 * k as f64), 1.0 / k as f64),
            StationaryCase::NonDegenerate => (0.0, 1.0 / k as f64),
        };
        integrate_rung(params, sa, va, &mesh)
    };

    let mut k = k_start;
    let mut prev = rung(k)?;
    loop {
        let k_next = k.checked_mul(2).filter(|&k| k <= K_MAX).ok_or(
            StationaryError::LadderExceeded {
                k_max: K_MAX,
                tol,
            },
        )?;
        let cur = rung(k_next)?;
        let mut gap = 0.0_f64;
        for (p, c) in prev.iter().zip(&cur) {
            // rungs decrease monotonically in k; allow integrator noise
            debug_assert!(p - c >= -10.0 * INTEGRATOR_TOL);
            gap = gap.max((p - c).abs());
        }
        if gap < tol {
            let samples: Vec<(f64, f64)> = mesh.iter().copied().zip(cur.clone()).collect();
            let interp = MonotoneCubic::new(mesh.clone(), cur);
            return Ok(StationaryLimit {
                params: params.clone(),
                s_star,
                samples,
                interp,
                coeffs,
                final_k: k_next,
                ladder_gap: gap,
            });
        }
        prev = cur;
        k = k_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn degenerate() -> StationaryParams {
        // s0 = 0.1
        StationaryParams::new(-(0.2_f64.sqrt()), 0.0).unwrap()
    }

    fn nondegenerate() -> StationaryParams {
        StationaryParams::new(-0.6, -0.5).unwrap()
    }

    #[test]
    fn degenerate_bounds_hold_along_trajectory() {
        let p = degenerate();
        let traj = phase_approximant(&p, 10).unwrap();
        for &(s, v) in &traj.samples {
            let upper = (1.0 / 10.0_f64).max(SQRT_2 * s.powf(1.5));
            let lower = (SQRT_2 / 2.0) * s.powf(1.5);
            assert!(v <= upper + 1e-10, "upper violated at s={s}: v={v}");
            assert!(v >= lower - 1e-10, "lower violated at s={s}: v={v}");
        }
        assert!(traj.turning_point.is_some());
        let hat = traj.turning_point.unwrap();
        assert!(hat > 0.01 && hat < (1.0 / (SQRT_2 * 10.0)).powf(2.0 / 3.0));
    }

    #[test]
    fn ladder_is_pointwise_decreasing() {
        let p = degenerate();
        // compare both rungs on a shared mesh inside the joint interval
        let mesh = geometric_mesh(0.0101, p.s0(), 400);
        let t10 = phase_approximant_on(&p, 10, mesh.clone()).unwrap();
        let t40 = phase_approximant_on(&p, 40, mesh).unwrap();
        let mut strictly_less = 0;
        for (&(s, v10), &(_, v40)) in t10.samples.iter().zip(&t40.samples) {
            assert!(v40 <= v10 + 1e-9, "s={s}: v40={v40} v10={v10}");
            if v40 < v10 - 1e-9 {
                strictly_less += 1;
            }
        }
        assert!(strictly_less > 100, "gap never resolved: {strictly_less}");
    }

    #[test]
    fn anchor_precondition_enforced() {
        let p = degenerate(); // s0 = 0.1, needs k >= 4
        assert!(phase_approximant(&p, 3).is_err());
        assert!(phase_approximant(&p, 4).is_ok());
        assert!(phase_approximant(&p, 0).is_err());
    }

    #[test]
    fn nondegenerate_lower_bound() {
        let p = StationaryParams::new(-1.1, -1.0).unwrap();
        let lambda0 = (5.0_f64.sqrt() - 1.0) / 2.0;
        assert!((p.lambda0() - lambda0).abs() < 1e-15);
        let traj = phase_approximant(&p, 50).unwrap();
        for &(s, v) in &traj.samples {
            assert!(v >= lambda0 * s - 1e-10, "s={s} v={v}");
            let upper = (1.0 / 50.0_f64).max(s * p.sound_width(s));
            assert!(v <= upper + 1e-10, "s={s} v={v}");
        }
    }

    #[test]
    fn limit_has_cubic_leading_order() {
        let p = degenerate();
        let lim = stationary_limit(&p, 1e-9).unwrap();
        // near the crossover the limit behaves like sqrt(2) s^{3/2}
        for mult in [1.0, 2.0, 4.0] {
            let s = lim.s_star() * mult;
            let ratio = lim.v(s) / (SQRT_2 * s.powf(1.5));
            assert!(
                (ratio - 1.0).abs() < 5.0 * s,
                "s={s}: v/s^(3/2)/sqrt2 = {ratio}"
            );
        }
    }

    #[test]
    fn limit_respects_second_order_band() {
        let p = degenerate();
        let lim = stationary_limit(&p, 1e-9).unwrap();
        let c = lim.coeffs();
        let mut s = 1e-6;
        while s < 0.1 {
            let v = lim.v(s);
            let lower = c.series(s, 2);
            let upper = c.series(s, 2) + c.remainder_coefficient(2) * s.powf(3.5);
            assert!(v >= lower - 1e-8, "s={s}");
            assert!(v <= upper + 1e-8, "s={s}");
            s *= 1.7;
        }
    }

    #[test]
    fn nondegenerate_limit_bracket() {
        let p = nondegenerate();
        let lim = stationary_limit(&p, 1e-8).unwrap();
        let l = p.lambda0();
        let b = p.quadratic_bound_coefficient();
        assert!((b - 4.0).abs() < 1e-12); // 1/(2 * 0.125)
        let mut s = p.s0() * 1e-4;
        while s <= p.s0() * 0.999 {
            let v = lim.v(s);
            assert!(v >= l * s - 1e-8, "s={s} v={v}");
            assert!(v <= l * s + b * s * s + 1e-8, "s={s} v={v}");
            s *= 1.4;
        }
    }
}
