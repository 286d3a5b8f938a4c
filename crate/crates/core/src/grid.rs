//! Uniform truncated half-line grids, grid functions, finite-difference
//! derivatives, trapezoid quadrature, and the discrete norms used by every
//! other module.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid needs at least {needed} points for this operation, has {actual}")]
    TooFewPoints { needed: usize, actual: usize },
    #[error("derivative order {0} outside supported range 1..=4")]
    InvalidOrder(usize),
    #[error("grid function contains non-finite values")]
    NonFinite,
    #[error("value count {values} does not match grid size {points}")]
    LengthMismatch { values: usize, points: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Uniform grid on [0, L] with `n_points` nodes, spacing `h = L/(n_points-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    length: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(length: f64, n_points: usize) -> Result<Self, GridError> {
        if n_points < 3 {
            return Err(GridError::TooFewPoints {
                needed: 3,
                actual: n_points,
            });
        }
        assert!(length > 0.0 && length.is_finite(), "grid length must be positive");
        Ok(Self { length, n_points })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n_points - 1) as f64
    }

    /// Node coordinate x_i = i*h.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.node(i))
    }

    /// Sample a function at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let values = self.nodes().map(f).collect();
        GridFunction::new(self.clone(), values).expect("sampled values must be finite")
    }
}

/// Real-valued function sampled on a [`Grid`]; values are immutable after
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

/// Norm kinds for [`GridFunction::norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    Sup,
    H1,
    H2,
    H3,
    Lp(f64),
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.n_points() {
            return Err(GridError::LengthMismatch {
                values: values.len(),
                points: grid.n_points(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(GridError::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Trapezoid-rule integral of the sampled values.
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.spacing())
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        let values = self.values.iter().map(|v| c * v).collect();
        GridFunction::new(self.grid.clone(), values).expect("scaling keeps values finite")
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        assert_eq!(self.grid, other.grid, "grid mismatch in add");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        GridFunction::new(self.grid.clone(), values).expect("sum of finite values")
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.add(&other.scale(-1.0))
    }

    /// Discrete norm. L^p norms use the trapezoid rule; H^k combines L2 norms
    /// of FD derivatives up to order k; sup is the max of |values|.
    pub fn norm(&self, kind: NormKind) -> Result<f64, GridError> {
        match kind {
            NormKind::Sup => Ok(self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))),
            NormKind::L2 => Ok(self.lp_norm(2.0)),
            NormKind::Lp(p) => {
                assert!(p >= 1.0, "Lp norm needs p >= 1");
                Ok(self.lp_norm(p))
            }
            NormKind::H1 => self.sobolev(1),
            NormKind::H2 => self.sobolev(2),
            NormKind::H3 => self.sobolev(3),
        }
    }

    fn lp_norm(&self, p: f64) -> f64 {
        let h = self.grid.spacing();
        let powered: Vec<f64> = self.values.iter().map(|v| v.abs().powf(p)).collect();
        trapezoid(&powered, h).powf(1.0 / p)
    }

    fn sobolev(&self, order: usize) -> Result<f64, GridError> {
        let mut sum = self.lp_norm(2.0).powi(2);
        let mut current = self.clone();
        for _ in 0..order {
            current = current.fd_derivative(1)?;
            sum += current.lp_norm(2.0).powi(2);
        }
        Ok(sum.sqrt())
    }

    /// Finite-difference derivative of order 1..=4: second-order centered
    /// stencils in the interior, second-order one-sided at the boundaries.
    pub fn fd_derivative(&self, order: usize) -> Result<GridFunction, GridError> {
        if !(1..=4).contains(&order) {
            return Err(GridError::InvalidOrder(order));
        }
        let n = self.len();
        if n < order + 2 {
            return Err(GridError::TooFewPoints {
                needed: order + 2,
                actual: n,
            });
        }
        // One-sided stencils of width > n would index out of range.
        let min_width = match order {
            1 | 2 => 4,
            3 => 5,
            _ => 6,
        };
        if n < min_width {
            return Err(GridError::TooFewPoints {
                needed: min_width,
                actual: n,
            });
        }
        let h = self.grid.spacing();
        let f = &self.values;
        let mut d = vec![0.0; n];
        match order {
            1 => {
                d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
                for i in 1..n - 1 {
                    d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
                }
                d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
            }
            2 => {
                let h2 = h * h;
                d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
                for i in 1..n - 1 {
                    d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
                }
                d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
            }
            3 => {
                let h3 = h * h * h;
                // Forward/backward 5-point one-sided stencils, O(h^2).
                let fwd = |j: usize| {
                    (-5.0 * f[j] + 18.0 * f[j + 1] - 24.0 * f[j + 2] + 14.0 * f[j + 3]
                        - 3.0 * f[j + 4])
                        / (2.0 * h3)
                };
                let bwd = |j: usize| {
                    (5.0 * f[j] - 18.0 * f[j - 1] + 24.0 * f[j - 2] - 14.0 * f[j - 3]
                        + 3.0 * f[j - 4])
                        / (2.0 * h3)
                };
                d[0] = fwd(0);
                d[1] = fwd(1);
                for i in 2..n - 2 {
                    d[i] = (-f[i - 2] + 2.0 * f[i - 1] - 2.0 * f[i + 1] + f[i + 2]) / (2.0 * h3);
                }
                d[n - 2] = bwd(n - 2);
                d[n - 1] = bwd(n - 1);
            }
            4 => {
                let h4 = h * h * h * h;
                let fwd = |j: usize| {
                    (3.0 * f[j] - 14.0 * f[j + 1] + 26.0 * f[j + 2] - 24.0 * f[j + 3]
                        + 11.0 * f[j + 4]
                        - 2.0 * f[j + 5])
                        / h4
                };
                let bwd = |j: usize| {
                    (3.0 * f[j] - 14.0 * f[j - 1] + 26.0 * f[j - 2] - 24.0 * f[j - 3]
                        + 11.0 * f[j - 4]
                        - 2.0 * f[j - 5])
                        / h4
                };
                d[0] = fwd(0);
                d[1] = fwd(1);
                for i in 2..n - 2 {
                    d[i] =
                        (f[i - 2] - 4.0 * f[i - 1] + 6.0 * f[i] - 4.0 * f[i + 1] + f[i + 2]) / h4;
                }
                d[n - 2] = bwd(n - 2);
                d[n - 1] = bwd(n - 1);
            }
            _ => unreachable!(),
        }
        GridFunction::new(self.grid.clone(), d)
    }

    /// Two-column CSV (x, value) with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), GridError> {
        writeln!(out, "x,value")?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            writeln!(out, "{:.16e},{:.16e}", x, v)?;
        }
        Ok(())
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    h * (0.5 * values[0] + interior + 0.5 * values[values.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn l2_of_unit_constant_is_one() {
        let g = Grid::new(1.0, 101).unwrap();
        let f = g.sample(|_| 1.0);
        assert!(close(f.norm(NormKind::L2).unwrap(), 1.0, 1e-14));
    }

    #[test]
    fn l2_of_exponential_matches_closed_form() {
        // ∫_0^∞ e^{-2x} dx = 1/2, truncation at L = 40 negligible.
        let g = Grid::new(40.0, 40_001).unwrap();
        let f = g.sample(|x| (-x).exp());
        let expected = 0.5_f64.sqrt();
        assert!(close(f.norm(NormKind::L2).unwrap(), expected, 1e-4));
    }

    #[test]
    fn zero_function_has_zero_norms() {
        let g = Grid::new(2.0, 33).unwrap();
        let f = g.sample(|_| 0.0);
        for kind in [
            NormKind::L2,
            NormKind::Sup,
            NormKind::H1,
            NormKind::H2,
            NormKind::H3,
            NormKind::Lp(3.0),
        ] {
            assert_eq!(f.norm(kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn first_derivative_exact_on_linear() {
        let g = Grid::new(3.0, 61).unwrap();
        let f = g.sample(|x| x);
        let d = f.fd_derivative(1).unwrap();
        for v in d.values() {
            assert!(close(*v, 1.0, 1e-12));
        }
    }

    #[test]
    fn second_derivative_exact_on_quadratic() {
        let g = Grid::new(3.0, 61).unwrap();
        let f = g.sample(|x| x * x);
        let d = f.fd_derivative(2).unwrap();
        for v in d.values() {
            assert!(close(*v, 2.0, 1e-9));
        }
    }

    #[test]
    fn higher_stencils_exact_on_low_degree_polynomials() {
        let g = Grid::new(2.0, 41).unwrap();
        // order 3 on cubic, order 4 on quartic: constant results.
        let f3 = g.sample(|x| x * x * x);
        for v in f3.fd_derivative(3).unwrap().values() {
            assert!(close(*v, 6.0, 1e-7), "d3 = {v}");
        }
        let f4 = g.sample(|x| x * x * x * x);
        for v in f4.fd_derivative(4).unwrap().values() {
            assert!(close(*v, 24.0, 1e-4), "d4 = {v}");
        }
    }

    #[test]
    fn richardson_ratio_shows_second_order() {
        // Halving h cuts the max derivative error by ~4 for smooth functions.
        for order in 1..=2usize {
            let err = |n: usize| {
                let g = Grid::new(10.0, n).unwrap();
                let f = g.sample(|x| (-x).exp());
                let d = f.fd_derivative(order).unwrap();
                let exact = |x: f64| if order == 1 { -(-x).exp() } else { (-x).exp() };
                g.nodes()
                    .zip(d.values())
                    .map(|(x, v)| (v - exact(x)).abs())
                    .fold(0.0_f64, f64::max)
            };
            let ratio = err(501) / err(1001);
            assert!(
                (3.5..=4.5).contains(&ratio),
                "order {order} convergence ratio {ratio}"
            );
        }
    }

    #[test]
    fn rejects_bad_orders_and_small_grids() {
        let g = Grid::new(1.0, 5).unwrap();
        let f = g.sample(|x| x);
        assert!(matches!(f.fd_derivative(0), Err(GridError::InvalidOrder(0))));
        assert!(matches!(f.fd_derivative(5), Err(GridError::InvalidOrder(5))));
        assert!(matches!(
            f.fd_derivative(4),
            Err(GridError::TooFewPoints { .. })
        ));
        assert!(Grid::new(1.0, 2).is_err());
    }

    #[test]
    fn csv_round_trip_preserves_17_digits() {
        let g = Grid::new(1.0, 9).unwrap();
        let f = g.sample(|x| (x * 1.7).sin() / 3.0);
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for (line, (x, v)) in text.lines().skip(1).zip(g.nodes().zip(f.values())) {
            let mut parts = line.split(',');
            let xr: f64 = parts.next().unwrap().parse().unwrap();
            let vr: f64 = parts.next().unwrap().parse().unwrap();
            assert_eq!(xr, x);
            assert_eq!(vr, *v);
        }
    }

    proptest! {
        #[test]
        fn norm_homogeneity(c in -100.0_f64..100.0, seed in 0u64..1000) {
            let g = Grid::new(5.0, 64).unwrap();
            let f = g.sample(|x| ((x * 3.0 + seed as f64).sin() + 0.3 * x).cos());
            for kind in [NormKind::L2, NormKind::Sup, NormKind::H1, NormKind::H2, NormKind::H3, NormKind::Lp(4.0)] {
                let lhs = f.scale(c).norm(kind).unwrap();
                let rhs = c.abs() * f.norm(kind).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
            }
        }

        #[test]
        fn triangle_inequality(sa in 0u64..50, sb in 50u64..100) {
            let g = Grid::new(5.0, 64).unwrap();
            let f = g.sample(|x| (x + sa as f64).sin());
            let q = g.sample(|x| (0.5 * x * x - sb as f64 * 0.1).cos());
            for kind in [NormKind::L2, NormKind::Sup, NormKind::H1, NormKind::H2, NormKind::H3, NormKind::Lp(3.0)] {
                let lhs = f.add(&q).norm(kind).unwrap();
                let rhs = f.norm(kind).unwrap() + q.norm(kind).unwrap();
                prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
            }
        }

        #[test]
        fn derivative_commutes_with_scaling(c in -10.0_f64..10.0) {
            let g = Grid::new(4.0, 48).unwrap();
            let f = g.sample(|x| (2.0 * x).sin());
            let a = f.scale(c).fd_derivative(2).unwrap();
            let b = f.fd_derivative(2).unwrap().scale(c);
            for (x, y) in a.values().iter().zip(b.values()) {
                prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1.0));
            }
        }
    }
}
