//! Screened-Poisson machinery on the half line: a tridiagonal FD solver for
//! -z_xx + z = f with Dirichlet or Neumann data at x = 0, the reflected
//! Bessel-kernel representation, and the optimal sup-norm interpolation
//! inequality (GNS) ratio checker.

use thiserror::Error;

use crate::grid::{GridFunction, NormKind};

#[derive(Debug, Error)]
pub enum EllipticError {
    #[error("non-finite input")]
    NonFinite,
    #[error("evaluation point x = {0} outside the grid")]
    OutOfDomain(f64),
    #[error("ratio undefined: {0} has zero sup norm")]
    ZeroNorm(&'static str),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// Boundary data for the left end of the half line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeftBC {
    /// z(0) prescribed.
    Dirichlet(f64),
    /// z_x(0) prescribed.
    Neumann(f64),
}

impl LeftBC {
    pub fn value(&self) -> f64 {
        match self {
            LeftBC::Dirichlet(v) | LeftBC::Neumann(v) => *v,
        }
    }
}

/// Solution of -z_xx + z = f with its boundary datum and the source sup norm
/// recorded for bound checks.
#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub z: GridFunction,
    pub bc: LeftBC,
    pub source_sup: f64,
}

/// Second-order FD solve of -z_xx + z = f on the grid of `f`, closed at x = L
/// by homogeneous Dirichlet (valid when everything of interest decays).
///
/// The Neumann case imposes the one-sided 3-point derivative row, whose
/// fill-in is eliminated against the first interior row before the Thomas
/// sweep.
pub fn solve_screened_poisson(
    f: &GridFunction,
    bc: LeftBC,
) -> Result<EllipticSolution, EllipticError> {
    if !bc.value().is_finite() {
        return Err(EllipticError::NonFinite);
    }
    let n = f.len();
    let h = f.grid().spacing();
    let fv = f.values();

    // Tridiagonal bands: sub[i] z_{i-1} + diag[i] z_i + sup[i] z_{i+1} = rhs[i].
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];

    let inv_h2 = 1.0 / (h * h);
    for i in 1..n - 1 {
        sub[i] = -inv_h2;
        diag[i] = 1.0 + 2.0 * inv_h2;
        sup[i] = -inv_h2;
        rhs[i] = fv[i];
    }
    diag[n - 1] = 1.0;
    rhs[n - 1] = 0.0;

    match bc {
        LeftBC::Dirichlet(v) => {
            diag[0] = 1.0;
            rhs[0] = v;
        }
        LeftBC::Neumann(g) => {
            // (-3 z0 + 4 z1 - z2) / (2h) = g, minus (h/2) x first interior row
            // to clear the z2 entry.
            let c0 = -1.0 / (2.0 * h);
            let factor = c0 / sup[1];
            diag[0] = -3.0 / (2.0 * h) - factor * sub[1];
            sup[0] = 4.0 / (2.0 * h) - factor * diag[1];
            rhs[0] = g - factor * rhs[1];
        }
    }

    // Thomas sweep.
    let mut z = vec![0.0; n];
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
        assert!(diag[i] != 0.0, "singular tridiagonal system");
    }
    z[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        z[i] = (rhs[i] - sup[i] * z[i + 1]) / diag[i];
    }

    let z = GridFunction::new(f.grid().clone(), z)?;
    let source_sup = f.norm(NormKind::Sup)?;

    debug_assert!({
        let res = interior_residual(&z, f);
        res <= 10.0 * h * h * (source_sup + 1.0) + 1e-9
    });
    // discrete maximum principle: sup bound with an O(h) allowance
    debug_assert!(
        z.norm(NormKind::Sup)? <= source_sup + bc.value().abs() + 10.0 * h + 1e-12
    );

    Ok(EllipticSolution {
        z,
        bc,
        source_sup,
    })
}

/// Max interior FD residual of -z_xx + z - f.
pub fn interior_residual(z: &GridFunction, f: &GridFunction) -> f64 {
    let h = z.grid().spacing();
    let zv = z.values();
    let fv = f.values();
    let inv_h2 = 1.0 / (h * h);
    let mut worst = 0.0_f64;
    for i in 1..zv.len() - 1 {
        let lap = (zv[i + 1] - 2.0 * zv[i] + zv[i - 1]) * inv_h2;
        worst = worst.max((-lap + zv[i] - fv[i]).abs());
    }
    worst
}

/// Evaluate the reflected-kernel solution of -u_xx + u = f, u_x(0) = g at a
/// single point via trapezoid quadrature on f's grid:
///
/// u(x)    = 1/2 ∫ (e^{-|x-y|} + e^{-(x+y)}) f(y) dy - g e^{-x}
/// u_x(x)  = 1/2 ∫ (-sign(x-y) e^{-|x-y|} - e^{-(x+y)}) f(y) dy + g e^{-x}
/// u_xx(x) = (kernel integral) - g e^{-x} - f(x)
///
/// sign(0) := +1.
pub fn bessel_solution(
    f: &GridFunction,
    g: f64,
    x: f64,
) -> Result<(f64, f64, f64), EllipticError> {
    if !(g.is_finite() && x.is_finite()) {
        return Err(EllipticError::NonFinite);
    }
    if x < 0.0 || x > f.grid().length() {
        return Err(EllipticError::OutOfDomain(x));
    }
    let h = f.grid().spacing();
    let n = f.len();
    let fv = f.values();
    let mut kernel = 0.0;
    let mut kernel_x = 0.0;
    for (i, &fy) in fv.iter().enumerate() {
        let y = f.grid().node(i);
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let near = -(x - y).abs();
        let far = -(x + y);
        let sgn = if x - y >= 0.0 { 1.0 } else { -1.0 };
        kernel += w * (near.exp() + far.exp()) * fy;
        kernel_x += w * (-sgn * near.exp() - far.exp()) * fy;
    }
    kernel *= 0.5 * h;
    kernel_x *= 0.5 * h;
    let ge = g * (-x).exp();
    let fx = interpolate_linear(f, x);
    Ok((kernel - ge, kernel_x + ge, kernel - ge - fx))
}

fn interpolate_linear(f: &GridFunction, x: f64) -> f64 {
    let h = f.grid().spacing();
    let i = ((x / h).floor() as usize).min(f.len() - 2);
    let t = (x - f.grid().node(i)) / h;
    f.values()[i] * (1.0 - t) + f.values()[i + 1] * t
}

/// Domain tag for [`gns_ratio`]: whole-line samples are supplied re-indexed
/// onto [0, L]; only the optimal constant differs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GnsDomain {
    FullLine,
    HalfLine,
}

impl GnsDomain {
    pub fn optimal_constant(&self) -> f64 {
        match self {
            GnsDomain::FullLine => std::f64::consts::SQRT_2,
            GnsDomain::HalfLine => 2.0,
        }
    }
}

/// ||u_x||_inf / (K ||u||_inf^{1/2} ||u_xx||_inf^{1/2}) with FD derivatives;
/// at most 1 + O(h) for any admissible sample.
pub fn gns_ratio(u: &GridFunction, domain: GnsDomain) -> Result<f64, EllipticError> {
    let sup_u = u.norm(NormKind::Sup)?;
    if sup_u == 0.0 {
        return Err(EllipticError::ZeroNorm("u"));
    }
    let ux = u.fd_derivative(1)?;
    let uxx = u.fd_derivative(2)?;
    let sup_ux = ux.norm(NormKind::Sup)?;
    let sup_uxx = uxx.norm(NormKind::Sup)?;
    if sup_uxx == 0.0 {
        return Err(EllipticError::ZeroNorm("u_xx"));
    }
    Ok(sup_ux / (domain.optimal_constant() * sup_u.sqrt() * sup_uxx.sqrt()))
}

/// The whole-line extremal: 4-periodic alternating parabolic arches with
/// |u| <= 1/2, |u_x| <= 1 and u_xx = -sign(u) in {-1, +1} a.e.
pub fn gns_extremal_full_line(x: f64) -> f64 {
    let p = x.rem_euclid(4.0);
    if p < 2.0 {
        p * (1.0 - 0.5 * p)
    } else {
        let q = p - 2.0;
        -q * (1.0 - 0.5 * q)
    }
}

/// The half-line extremal: a parabolic ramp reaching a plateau of 1/4 at
/// x = 1, with |u| <= 1/4, u_x(0) = 1 and |u_xx| <= 1.
pub fn gns_extremal_half_line(x: f64) -> f64 {
    if x < 1.0 {
        x * (1.0 - 0.5 * x) - 0.25
    } else {
        0.25
    }
}
