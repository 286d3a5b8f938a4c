//! Property suites behind the CLI `verify-*` subcommands and the acceptance
//! tests. Envelope constants marked "frozen" were fitted once on coarse
//! lattices and are always re-verified here on strictly finer ones.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::{
    bessel_solution, gns_extremal_full_line, gns_extremal_half_line, gns_ratio,
    solve_screened_poisson, GnsDomain, LeftBC,
};
use crate::grid::{Grid, NormKind};
use crate::rarefaction::{
    riemann_rarefaction, smooth_rarefaction, ModifiedWave, RarefactionFamily,
};
use crate::stationary::{
    decay_band, geometric_mesh, phase_approximant_on, reconstruct_profile, stationary_limit,
    Band, ExpansionCoeffs, ProfileField, StationaryParams, INTEGRATOR_TOL,
};

/// One verified property.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub note: String,
}

/// A suite of checks with an overall verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(suite: &str) -> Self {
        Self {
            suite: suite.to_string(),
            passed: true,
            checks: Vec::new(),
        }
    }

    fn push(&mut self, name: &str, measured: f64, bound: f64, upper: bool, note: &str) {
        let passed = if upper {
            measured <= bound
        } else {
            measured >= bound
        };
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            measured,
            bound,
            note: note.to_string(),
        });
    }

    fn push_flag(&mut self, name: &str, passed: bool, note: &str) {
        self.passed &= passed;
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            measured: if passed { 1.0 } else { 0.0 },
            bound: 1.0,
            note: note.to_string(),
        });
    }
}

fn log_lattice(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut v = vec![lo];
    while *v.last().unwrap() * ratio < hi {
        let next = v.last().unwrap() * ratio;
        v.push(next);
    }
    v.push(hi);
    v
}

// ---------------------------------------------------------------------------
// elliptic suite
// ---------------------------------------------------------------------------

pub fn verify_elliptic() -> Report {
    let mut r = Report::new("elliptic");

    // pure boundary layer: f = 0, g = -1 -> z = e^{-x}, O(h^2) exact
    {
        let g = Grid::new(40.0, 4001).unwrap();
        let h = g.spacing();
        let f = g.sample(|_| 0.0);
        let sol = solve_screened_poisson(&f, LeftBC::Neumann(-1.0)).unwrap();
        let worst = g
            .nodes()
            .zip(sol.z.values())
            .map(|(x, z)| (z - (-x).exp()).abs())
            .fold(0.0_f64, f64::max);
        r.push(
            "boundary_layer_exactness",
            worst,
            10.0 * h * h,
            true,
            "f=0, g=-1 reproduces e^{-x} to O(h^2)",
        );
    }

    // manufactured solution x e^{-x}: error ratio in [3.5, 4.5] per halving
    {
        let err_at = |n: usize| {
            let g = Grid::new(40.0, n).unwrap();
            let f = g.sample(|x| 2.0 * (-x).exp());
            let sol = solve_screened_poisson(&f, LeftBC::Dirichlet(0.0)).unwrap();
            g.nodes()
                .zip(sol.z.values())
                .map(|(x, z)| (z - x * (-x).exp()).abs())
                .fold(0.0_f64, f64::max)
        };
        let errs = [err_at(1001), err_at(2001), err_at(4001), err_at(8001)];
        for i in 0..3 {
            let ratio = errs[i] / errs[i + 1];
            r.push_flag(
                &format!("manufactured_convergence_ratio_{}", i + 1),
                (3.5..=4.5).contains(&ratio),
                &format!("refinement {}: ratio {ratio:.3}", i + 1),
            );
        }
    }

    // kernel witnesses for the three optimal coefficients
    {
        let g = Grid::new(40.0, 2001).unwrap();
        let f = g.sample(|_| 0.0);
        let (u, _, _) = bessel_solution(&f, -1.0, 1.0).unwrap();
        r.push(
            "kernel_boundary_witness",
            (u - (-1.0_f64).exp()).abs(),
            1e-12,
            true,
            "f=0, g=-1, x=1 gives e^{-1}",
        );

        let x0 = 20.0;
        let g = Grid::new(60.0, 240_001).unwrap();
        let f = g.sample(|y| if y - x0 >= 0.0 { 1.0 } else { -1.0 });
        let (_, ux, _) = bessel_solution(&f, 0.0, x0).unwrap();
        r.push("kernel_slope_witness", ux, 0.999, false, "sign-step u_x(x0) -> 1");

        let eps = 1e-4;
        let g = Grid::new(40.0, 1_600_001).unwrap();
        let f = g.sample(|y| if y - eps >= 0.0 { 1.0 } else { -1.0 });
        let (_, _, uxx) = bessel_solution(&f, 0.0, 0.0).unwrap();
        r.push(
            "kernel_curvature_witness",
            uxx,
            1.99,
            false,
            "sign-step at eps gives u_xx(0) -> 2",
        );
    }

    // interpolation-inequality extremals at h = 1e-3
    {
        let g = Grid::new(16.0, 16_001).unwrap();
        let u1 = g.sample(gns_extremal_full_line);
        let r1 = gns_ratio(&u1, GnsDomain::FullLine).unwrap();
        r.push_flag(
            "gns_full_line_extremal",
            (0.95..=1.0 + 1e-9).contains(&r1),
            &format!("ratio {r1:.6}"),
        );
        let g2 = Grid::new(20.0, 20_001).unwrap();
        let u2 = g2.sample(gns_extremal_half_line);
        let r2 = gns_ratio(&u2, GnsDomain::HalfLine).unwrap();
        r.push_flag(
            "gns_half_line_extremal",
            (0.95..=1.0 + 1e-9).contains(&r2),
            &format!("ratio {r2:.6}"),
        );
    }

    // 50 randomized smooth functions stay strictly below ratio 1
    {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = Grid::new(24.0, 12_001).unwrap();
        let mut worst = 0.0_f64;
        for _ in 0..50 {
            let a1: f64 = rng.gen_range(-1.0..1.0);
            let a2: f64 = rng.gen_range(-1.0..1.0);
            let w1: f64 = rng.gen_range(0.2..1.2);
            let w2: f64 = rng.gen_range(0.5..3.0);
            let c: f64 = rng.gen_range(8.0..16.0);
            let u = g.sample(|x| {
                a1 * (w1 * x).sin() + a2 * (-(x - c) * (x - c) / (2.0 * w2)).exp() + 0.05
            });
            match gns_ratio(&u, GnsDomain::HalfLine) {
                Ok(ratio) => worst = worst.max(ratio),
                Err(_) => continue,
            }
        }
        r.push(
            "gns_random_suite",
            worst,
            1.0 - 1e-9,
            true,
            "50 seeded smooth functions, ratio < 1",
        );
    }

    // randomized sup-norm bounds with tolerance 10h
    {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = Grid::new(60.0, 6001).unwrap();
        let h = g.spacing();
        let mut worst_margin = f64::NEG_INFINITY;
        for _ in 0..20 {
            let a: f64 = rng.gen_range(-2.0..2.0);
            let b: f64 = rng.gen_range(0.3..3.0);
            let c: f64 = rng.gen_range(-1.5..1.5);
            let gv: f64 = rng.gen_range(-2.0..2.0);
            let f = g.sample(|x| {
                a * (-(x - 8.0) * (x - 8.0) / (2.0 * b * b)).exp()
                    + c * (-x).exp() * (1.3 * x).sin()
            });
            let sup_f = f.norm(NormKind::Sup).unwrap();
            let mut sup = [0.0_f64; 3];
            let mut x = 0.0;
            while x <= 30.0 {
                let (u, ux, uxx) = bessel_solution(&f, gv, x).unwrap();
                sup[0] = sup[0].max(u.abs());
                sup[1] = sup[1].max(ux.abs());
                sup[2] = sup[2].max(uxx.abs());
                x += 0.2;
            }
            worst_margin = worst_margin
                .max(sup[0] - (sup_f + gv.abs()))
                .max(sup[1] - (sup_f + gv.abs()))
                .max(sup[2] - (2.0 * sup_f + gv.abs()));
        }
        r.push(
            "kernel_norm_bounds_random",
            worst_margin,
            10.0 * h,
            true,
            "sup-norm coefficient bounds on 20 seeded sources",
        );
    }

    // FD solver and kernel representation agree on compact smooth sources
    {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = Grid::new(50.0, 5001).unwrap();
        let h = g.spacing();
        let mut worst = 0.0_f64;
        for _ in 0..10 {
            let amp: f64 = rng.gen_range(-2.0..2.0);
            let center: f64 = rng.gen_range(6.0..14.0);
            let width: f64 = rng.gen_range(0.5..2.0);
            let f = g.sample(|x| {
                let u = (x - center) / width;
                if u.abs() < 1.0 {
                    amp * (1.0 - u * u).powi(2)
                } else {
                    0.0
                }
            });
            let sol = solve_screened_poisson(&f, LeftBC::Neumann(0.0)).unwrap();
            for i in (0..g.n_points()).step_by(100) {
                let (u, _, _) = bessel_solution(&f, 0.0, g.node(i)).unwrap();
                worst = worst.max((u - sol.z.values()[i]).abs());
            }
        }
        r.push(
            "solver_kernel_agreement",
            worst,
            60.0 * h * h,
            true,
            "pointwise agreement on 10 seeded compact sources",
        );
    }

    r
}

// ---------------------------------------------------------------------------
// rarefaction suite
// ---------------------------------------------------------------------------

/// Frozen envelope constants (fitted on doubling lattices, verified on
/// ratio-1.25 lattices).
pub const FAN_ENVELOPE: f64 = 1.25;
pub const BOUNDARY_DECAY_C1: f64 = 1.1;
pub const BOUNDARY_DECAY_C3: f64 = 0.5;
pub const R1_ENVELOPE_RATE: f64 = 0.01;
pub const R1_ENVELOPE_C: f64 = 0.34;
pub const R2_L2_ENVELOPE_C: f64 = 6.5;

pub fn verify_rarefaction() -> Report {
    let mut r = Report::new("rarefaction");
    let case5 = RarefactionFamily::new(0.2, 1.0).unwrap();
    let case4 = RarefactionFamily::new(0.0, 1.0).unwrap();

    // equation residual by Richardson differences of plain values
    {
        let mut worst = 0.0_f64;
        for &t in &[0.5_f64, 2.0, 20.0, 200.0] {
            let hx = 1e-3 * (1.0 + t).sqrt();
            let ht = 1e-4 * (1.0 + t);
            let u = |x: f64, t: f64| case5.eval(x, t).unwrap().u;
            for i in 0..30 {
                let x = -2.0 + (case5.u_plus() * t + 4.0) * i as f64 / 29.0;
                let dx = |h: f64| (u(x + h, t) - u(x - h, t)) / (2.0 * h);
                let ux = (4.0 * dx(0.5 * hx) - dx(hx)) / 3.0;
                let dxx = |h: f64| (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
                let uxx = (4.0 * dxx(0.5 * hx) - dxx(hx)) / 3.0;
                let dt = |h: f64| (u(x, t + h) - u(x, t - h)) / (2.0 * h);
                let ut = (4.0 * dt(0.5 * ht) - dt(ht)) / 3.0;
                worst = worst.max((ut + u(x, t) * ux - uxx).abs());
            }
        }
        r.push(
            "equation_residual",
            worst,
            1e-6,
            true,
            "u_t + u u_x - u_xx by value-only differences",
        );
    }

    // monotonicity and range confinement on a space-time lattice
    {
        let mut min_slope = f64::INFINITY;
        let mut range_ok = true;
        for fam in [case4, case5] {
            for &t in &[0.1, 1.0, 10.0, 100.0, 1000.0] {
                for i in 0..200 {
                    let x = -5.0 - fam.u_plus() * t
                        + (2.0 * (5.0 + fam.u_plus() * t)) * i as f64 / 199.0;
                    let p = fam.eval(x, t).unwrap();
                    if p.u > fam.burgers_left() + 1e-12 && p.u < fam.u_plus() - 1e-12 {
                        min_slope = min_slope.min(p.ux);
                    }
                    range_ok &= p.u >= fam.burgers_left() - 1e-12
                        && p.u <= fam.u_plus() + 1e-12;
                }
            }
        }
        r.push(
            "strict_monotonicity",
            min_slope,
            0.0,
            false,
            "u_x > 0 wherever the value is unsaturated",
        );
        r.push_flag("range_confinement", range_ok, "values stay inside the step range");
    }

    // fan approach: sup_x |u - fan| (1+t)^{1/2} below the frozen envelope,
    // t in [1, 1000] on a finer lattice than the fit used
    for (name, fam) in [("case5", &case5), ("case4", &case4)] {
        let mut worst = 0.0_f64;
        for &t in &log_lattice(1.0, 1000.0, 1.25) {
            let mut sup = 0.0_f64;
            for i in 0..3000 {
                let x = (fam.u_plus() * t + 30.0 * (1.0 + t).sqrt()) * i as f64 / 2999.0;
                let u = fam.eval(x, t).unwrap().u;
                let ur = riemann_rarefaction(fam.u_minus(), fam.u_plus(), x, t);
                sup = sup.max((u - ur).abs());
            }
            worst = worst.max(sup * (1.0 + t).sqrt());
        }
        r.push(
            &format!("fan_approach_{name}"),
            worst,
            FAN_ENVELOPE,
            true,
            "scaled sup distance to the inviscid fan",
        );
    }

    // boundary-derivative decay for the antisymmetric wave
    {
        let mut c1 = 0.0_f64;
        let mut c3 = 0.0_f64;
        let mut even_max = 0.0_f64;
        for &t in &log_lattice(1.0, 1000.0, 1.2) {
            let d1 = smooth_rarefaction(&case4, 0.0, t, 1).unwrap().abs();
            c1 = c1.max(d1 * (1.0 + t));
            let d2 = smooth_rarefaction(&case4, 0.0, t, 2).unwrap().abs();
            even_max = even_max.max(d2);
            if t <= 100.0 {
                let d3 = smooth_rarefaction(&case4, 0.0, t, 3).unwrap().abs();
                c3 = c3.max(d3 * (1.0 + t).powi(2));
                let d4 = smooth_rarefaction(&case4, 0.0, t, 4).unwrap().abs();
                even_max = even_max.max(d4);
            }
        }
        r.push(
            "boundary_decay_k1",
            c1,
            BOUNDARY_DECAY_C1,
            true,
            "|u_x(0,t)| (1+t) against the frozen constant",
        );
        r.push(
            "boundary_decay_k3",
            c3,
            BOUNDARY_DECAY_C3,
            true,
            "|u_xxx(0,t)| (1+t)^2, t in [1,100]",
        );
        r.push(
            "boundary_even_derivatives_vanish",
            even_max,
            1e-7,
            true,
            "antisymmetry kills even x-derivatives at x = 0",
        );
    }

    // residual envelopes with frozen constants on finer lattices
    {
        let mw = ModifiedWave::new(case5);
        let delta = case5.delta();
        let mut worst_r1 = 0.0_f64;
        for &t in &log_lattice(1.0, 512.0, 1.25) {
            let mut sup = 0.0_f64;
            for i in 0..150 {
                let x = 30.0 * i as f64 / 149.0;
                let (r1, _) = mw.residuals(x, t).unwrap();
                sup = sup.max(r1.abs());
            }
            worst_r1 =
                worst_r1.max(sup * (R1_ENVELOPE_RATE * (1.0 + t)).exp() / delta);
        }
        r.push(
            "first_residual_exponential",
            worst_r1,
            R1_ENVELOPE_C,
            true,
            "sup R1 e^{c(1+t)}/delta with frozen (C, c)",
        );

        let mut worst_r2 = 0.0_f64;
        for &t in &log_lattice(1.0, 512.0, 1.4) {
            let x_max = case5.u_plus() * t + 40.0 * (1.0 + t).sqrt();
            let n = 1500;
            let h = x_max / n as f64;
            let mut sum = 0.0;
            for i in 0..=n {
                let (_, r2) = mw.residuals(i as f64 * h, t).unwrap();
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                sum += w * r2 * r2 * h;
            }
            worst_r2 = worst_r2.max(sum.sqrt() * (1.0 + t).powf(1.25) / delta);
        }
        r.push(
            "second_residual_polynomial",
            worst_r2,
            R2_L2_ENVELOPE_C,
            true,
            "L2 R2 (1+t)^{5/4}/delta with frozen C",
        );
    }

    // exact boundary values of the corrected wave
    {
        let mw = ModifiedWave::new(case5);
        let mut worst = 0.0_f64;
        for &t in &[0.0, 0.5, 5.0, 500.0] {
            let ev = mw.eval(0.0, t).unwrap();
            worst = worst
                .max((ev.phi - case5.u_minus()).abs())
                .max(ev.psi.abs());
        }
        r.push(
            "corrected_boundary_exact",
            worst,
            0.0,
            true,
            "phi(0,t) = u_minus and psi(0,t) = 0 exactly",
        );
    }

    r
}

// ---------------------------------------------------------------------------
// stationary suite
// ---------------------------------------------------------------------------

/// Frozen quotient-envelope constants on the degenerate s0 = 0.1 profile
/// (fitted at grid 2001/L=200, verified finer).
pub const QUOTIENT_ENVELOPES: [(ProfileQuotient, f64, i32); 4] = [
    (ProfileQuotient::CurvatureSqOverSlope, 10.0, 4),
    (ProfileQuotient::ThirdSqOverSlope, 90.0, 6),
    (ProfileQuotient::ThirdOverSlope, 8.0, 2),
    (ProfileQuotient::FourthOverSlope, 150.0, 3),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileQuotient {
    CurvatureSqOverSlope,
    ThirdSqOverSlope,
    ThirdOverSlope,
    FourthOverSlope,
}

pub fn verify_stationary() -> Report {
    let mut r = Report::new("stationary");

    // coefficient table
    {
        let e = ExpansionCoeffs::new(5).unwrap();
        let expected = [1.0, 3.0, 24.0, 285.0, 4284.0];
        let mut exact = true;
        let mut rel = 0.0_f64;
        for (k, want) in expected.iter().enumerate() {
            exact &= e.c(k + 1) == *want;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let want_a = sign * std::f64::consts::SQRT_2 * want;
            rel = rel.max(((e.a(k + 1) - want_a) / want_a).abs());
        }
        r.push_flag("coefficient_table_exact", exact, "c = [1,3,24,285,4284]");
        r.push(
            "coefficient_a_relative",
            rel,
            1e-15,
            true,
            "a_k = (-1)^{k+1} sqrt(2) c_k",
        );
    }

    let degenerate = StationaryParams::new(-(0.2_f64.sqrt()), 0.0).unwrap();

    // trajectory bounds and monotone ladder for k in {10, 20, 40, 80}
    {
        let mesh = geometric_mesh(1.0 / 100.0 + 1e-12, degenerate.s0(), 1024);
        let ks = [10u32, 20, 40, 80];
        let mut trajs = Vec::new();
        for &k in &ks {
            trajs.push(phase_approximant_on(&degenerate, k, mesh.clone()).unwrap());
        }
        let mut bound_margin = f64::NEG_INFINITY;
        for (traj, &k) in trajs.iter().zip(&ks) {
            for &(s, v) in &traj.samples {
                let upper = (1.0 / k as f64).max(std::f64::consts::SQRT_2 * s.powf(1.5));
                let lower = (std::f64::consts::SQRT_2 / 2.0) * s.powf(1.5);
                bound_margin = bound_margin.max(v - upper).max(lower - v);
            }
        }
        r.push(
            "trajectory_bounds",
            bound_margin,
            INTEGRATOR_TOL,
            true,
            "upper/lower envelopes for k in {10,20,40,80}",
        );
        let mut ladder_margin = f64::NEG_INFINITY;
        for pair in trajs.windows(2) {
            for (a, b) in pair[0].samples.iter().zip(&pair[1].samples) {
                ladder_margin = ladder_margin.max(b.1 - a.1);
            }
        }
        r.push(
            "ladder_pointwise_decreasing",
            ladder_margin,
            INTEGRATOR_TOL,
            true,
            "v_{2k} <= v_k on the shared mesh",
        );
    }

    // one-sided expansion brackets for the extracted limit, k = 1, 2, 3
    {
        let lim = stationary_limit(&degenerate, 1e-9).unwrap();
        let coeffs = ExpansionCoeffs::new(4).unwrap();
        let samples = geometric_mesh(degenerate.s0() * 1e-6, degenerate.s0() * 0.999, 1000);
        let mut margin = f64::NEG_INFINITY;
        for &s in &samples {
            let v = lim.v(s);
            for k in 1..=3usize {
                let series = coeffs.series(s, k);
                let m_k = coeffs.remainder_coefficient(k);
                let (lo, hi) = if k % 2 == 1 {
                    (series - m_k * s.powf(k as f64 + 1.5), series)
                } else {
                    (series, series + m_k * s.powf(k as f64 + 1.5))
                };
                margin = margin.max(v - hi).max(lo - v);
            }
        }
        r.push(
            "expansion_brackets",
            margin,
            1e-8,
            true,
            "one-sided bands k=1,2,3 at 1000 log-spaced samples",
        );
    }

    // degenerate decay bands on the [0, 400] production grid
    {
        let lim = stationary_limit(&degenerate, 1e-9).unwrap();
        let grid = Grid::new(400.0, 8001).unwrap();
        let prof = reconstruct_profile(&lim, &grid).unwrap();
        let mut margin = f64::NEG_INFINITY;
        for i in 0..grid.n_points() {
            let x = grid.node(i);
            for (field, value) in [
                (ProfileField::QBar, prof.qbar.values()[i]),
                (ProfileField::QBarX, prof.qbar_x.values()[i]),
                (ProfileField::QBarXx, prof.qbar_xx.values()[i]),
            ] {
                if let Band::Interval { lo, hi } = decay_band(field, &degenerate, x).band {
                    margin = margin.max(value - hi).max(lo - value);
                }
            }
        }
        r.push(
            "degenerate_decay_bands",
            margin,
            1e-8,
            true,
            "value/slope/curvature bands at every node of [0,400], h=0.05",
        );

        // envelope shape for the third/fourth derivatives: leading term plus
        // a fitted generic-constant tail
        let mut c7 = 0.0_f64;
        let mut c8 = 0.0_f64;
        for i in 0..grid.n_points() {
            let x = grid.node(i);
            let b = 1.0 / degenerate.s0().sqrt() + x / (2.0 * std::f64::consts::SQRT_2);
            let q3 = prof.qbar_xxx.values()[i].abs();
            let lead3 = 6.0 * std::f64::consts::SQRT_2 / b.powi(5);
            c7 = c7.max((q3 - lead3) * b.powi(7));
            let q4 = prof.qbar_xxxx.values()[i].abs();
            let lead4 = 222.0 / b.powi(6);
            c8 = c8.max((q4 - lead4) * b.powi(8));
        }
        // any finite generic constant certifies the shape; freeze generous caps
        r.push(
            "third_derivative_envelope_tail",
            c7,
            50.0,
            true,
            "(|q_xxx| - leading) B^7 bounded",
        );
        r.push(
            "fourth_derivative_envelope_tail",
            c8,
            500.0,
            true,
            "(|q_xxxx| - leading) B^8 bounded",
        );
    }

    // non-degenerate case: limit bracket and exponential envelopes
    {
        let params = StationaryParams::new(-0.6, -0.5).unwrap();
        let lim = stationary_limit(&params, 1e-9).unwrap();
        let l0 = params.lambda0();
        let b = params.quadratic_bound_coefficient();
        let mut margin = f64::NEG_INFINITY;
        for &s in &geometric_mesh(params.s0() * 1e-6, params.s0() * 0.999, 1000) {
            let v = lim.v(s);
            margin = margin.max(l0 * s - v).max(v - (l0 * s + b * s * s));
        }
        r.push(
            "nondegenerate_limit_bracket",
            margin,
            1e-8,
            true,
            "lambda0 s <= v <= lambda0 s + b s^2",
        );

        let grid = Grid::new(80.0, 1601).unwrap();
        let prof = reconstruct_profile(&lim, &grid).unwrap();
        let qm = -params.s0();
        let mut env_margin = f64::NEG_INFINITY;
        for i in 0..grid.n_points() {
            let x = grid.node(i);
            let q = prof.qbar.values()[i];
            let lower = qm * (-l0 * x).exp();
            let upper = qm / (1.0 - (b / l0) * qm) * (-l0 * x).exp();
            env_margin = env_margin.max(lower - q).max(q - upper);
        }
        r.push(
            "nondegenerate_exponential_envelopes",
            env_margin,
            1e-8,
            true,
            "two-sided e^{-lambda0 x} envelopes for qbar",
        );
    }

    // frozen quotient envelopes on a finer grid than the fit used
    {
        let lim = stationary_limit(&degenerate, 1e-9).unwrap();
        let grid = Grid::new(200.0, 8001).unwrap();
        let prof = reconstruct_profile(&lim, &grid).unwrap();
        let delta = degenerate.delta().abs();
        for (which, cap, power) in QUOTIENT_ENVELOPES {
            let mut worst = 0.0_f64;
            for i in 0..grid.n_points() {
                let d = 1.0 + delta * grid.node(i);
                let ux = prof.ubar_x.values()[i];
                let q = match which {
                    ProfileQuotient::CurvatureSqOverSlope => {
                        let uxx = prof.ubar_xx.values()[i];
                        uxx * uxx / ux
                    }
                    ProfileQuotient::ThirdSqOverSlope => {
                        let uxxx = prof.ubar_xxx.values()[i];
                        uxxx * uxxx / ux
                    }
                    ProfileQuotient::ThirdOverSlope => prof.ubar_xxx.values()[i] / ux,
                    ProfileQuotient::FourthOverSlope => prof.ubar_xxxx.values()[i] / ux,
                };
                worst = worst.max(q.abs() / (delta / d).powi(power));
            }
            r.push(
                &format!("quotient_envelope_{which:?}"),
                worst,
                cap,
                true,
                &format!("(delta/(1+delta x))^{power} envelope"),
            );
        }
    }

    // delta-ladder stability of the curvature quotients (non-degenerate)
    {
        let mut c_a = Vec::new();
        let mut c_b = Vec::new();
        for delta in [0.05_f64, 0.1, 0.2] {
            let p = StationaryParams::new(-0.5 - delta, -0.5).unwrap();
            let lim = stationary_limit(&p, 1e-9).unwrap();
            let grid = Grid::new(120.0, 1201).unwrap();
            let prof = reconstruct_profile(&lim, &grid).unwrap();
            let mut q1 = 0.0_f64;
            let mut q2 = 0.0_f64;
            for i in 0..grid.n_points() {
                let ux = prof.ubar_x.values()[i];
                if ux.abs() < 1e-280 {
                    continue;
                }
                let uxx = prof.ubar_xx.values()[i];
                let uxxx = prof.ubar_xxx.values()[i];
                q1 = q1.max((uxx * uxx / ux).abs());
                q2 = q2.max((uxxx * uxxx / ux).abs());
            }
            c_a.push(q1 / delta);
            c_b.push(q2 / delta);
        }
        let spread =
            |v: &[f64]| v.iter().cloned().fold(0.0_f64, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
        r.push(
            "quotient_ladder_stability_curvature",
            spread(&c_a),
            2.0,
            true,
            "max/min fitted C across delta in {0.05, 0.1, 0.2}",
        );
        r.push(
            "quotient_ladder_stability_third",
            spread(&c_b),
            2.0,
            true,
            "max/min fitted C across delta in {0.05, 0.1, 0.2}",
        );
    }

    // phase-plane consistency of the reconstruction
    {
        let lim = stationary_limit(&degenerate, 1e-9).unwrap();
        let grid = Grid::new(40.0, 2001).unwrap();
        let prof = reconstruct_profile(&lim, &grid).unwrap();
        let h = grid.spacing();
        let fd = prof.qbar.fd_derivative(1).unwrap();
        let err = fd.sub(&prof.qbar_x).norm(NormKind::Sup).unwrap();
        r.push(
            "phase_plane_consistency",
            err,
            5.0 * h * h + 1e-9,
            true,
            "FD of qbar matches the trajectory slope field",
        );
    }

    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_suite_passes() {
        let rep = verify_elliptic();
        for c in &rep.checks {
            assert!(c.passed, "{}: measured {} bound {}", c.name, c.measured, c.bound);
        }
    }

    #[test]
    fn rarefaction_suite_passes() {
        let rep = verify_rarefaction();
        for c in &rep.checks {
            assert!(c.passed, "{}: measured {} bound {}", c.name, c.measured, c.bound);
        }
    }

    #[test]
    fn stationary_suite_passes() {
        let rep = verify_stationary();
        for c in &rep.checks {
            assert!(c.passed, "{}: measured {} bound {}", c.name, c.measured, c.bound);
        }
    }
}
