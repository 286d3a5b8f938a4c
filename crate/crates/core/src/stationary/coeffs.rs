//! Exact expansion coefficients of the small-s trajectory
//! v(s) = sum_k a_k s^{(2k+1)/2} with a_k = (-1)^{k+1} sqrt(2) c_k and
//! c_1 = 1, c_k = sum_{i+j=k} (2j+1) c_i c_j.

use num_bigint::BigUint;

use super::StationaryError;

pub const MAX_ORDER: usize = 30;

#[derive(Debug, Clone)]
pub struct ExpansionCoeffs {
    c: Vec<BigUint>,
}

impl ExpansionCoeffs {
    /// Exact integer recurrence up to order K (1 <= K <= 30).
    pub fn new(order: usize) -> Result<Self, StationaryError> {
        if order == 0 || order > MAX_ORDER {
            return Err(StationaryError::OrderOutOfRange(order));
        }
        let mut c: Vec<BigUint> = Vec::with_capacity(order);
        c.push(BigUint::from(1u32));
        for k in 2..=order {
            let mut sum = BigUint::from(0u32);
            for j in 1..k {
                let i = k - j;
                sum += BigUint::from(2 * j as u32 + 1) * &c[i - 1] * &c[j - 1];
            }
            c.push(sum);
        }
        Ok(Self { c })
    }

    pub fn order(&self) -> usize {
        self.c.len()
    }

    /// Exact c_k (1-based).
    pub fn c_exact(&self, k: usize) -> &BigUint {
        &self.c[k - 1]
    }

    pub fn c(&self, k: usize) -> f64 {
        big_to_f64(&self.c[k - 1])
    }

    /// a_k = (-1)^{k+1} sqrt(2) c_k.
    pub fn a(&self, k: usize) -> f64 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * std::f64::consts::SQRT_2 * self.c(k)
    }

    /// Signed integer multiplier of sqrt(2) in a_k.
    pub fn a_over_sqrt2(&self, k: usize) -> f64 {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sign * self.c(k)
    }

    /// One-sided remainder coefficient M_k = |a_{k+1}| (needs order >= k+1).
    pub fn remainder_coefficient(&self, k: usize) -> f64 {
        std::f64::consts::SQRT_2 * self.c(k + 1)
    }

    /// Truncated series sum_{i<=k} a_i s^{(2i+1)/2}.
    pub fn series(&self, s: f64, k: usize) -> f64 {
        debug_assert!(k <= self.order());
        let root = s.sqrt();
        let mut power = s * root; // s^{3/2}
        let mut sum = 0.0;
        for i in 1..=k {
            sum += self.a(i) * power;
            power *= s;
        }
        sum
    }
}

fn big_to_f64(v: &BigUint) -> f64 {
    v.to_string().parse::<f64>().expect("BigUint parses as f64")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_five_match_known_values() {
        let e = ExpansionCoeffs::new(5).unwrap();
        let expected = [1u64, 3, 24, 285, 4284];
        for (k, want) in expected.iter().enumerate() {
            assert_eq!(e.c_exact(k + 1), &BigUint::from(*want));
            let a = e.a(k + 1);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let want_a = sign * std::f64::consts::SQRT_2 * *want as f64;
            assert!((a - want_a).abs() <= 1e-15 * want_a.abs());
        }
    }

    #[test]
    fn second_coefficient_is_single_term() {
        let e = ExpansionCoeffs::new(2).unwrap();
        assert_eq!(e.c_exact(2), &BigUint::from(3u32));
    }

    /// Independent route: by symmetry of the convolution,
    /// c_k = (k+1) * sum_{i+j=k} c_i c_j.
    #[test]
    fn sixth_coefficient_against_symmetrized_recurrence() {
        let mut c = [0u128; 7];
        c[1] = 1;
        for k in 2..=6usize {
            let mut conv = 0u128;
            for j in 1..k {
                conv += c[k - j] * c[j];
            }
            c[k] = (k as u128 + 1) * conv;
        }
        let e = ExpansionCoeffs::new(6).unwrap();
        assert_eq!(e.c_exact(6).to_string(), c[6].to_string());
        assert_eq!(c[6], 75_978);
    }

    #[test]
    fn order_limits() {
        assert!(ExpansionCoeffs::new(0).is_err());
        assert!(ExpansionCoeffs::new(31).is_err());
        let e = ExpansionCoeffs::new(30).unwrap();
        assert!(e.c(30).is_finite());
        // strictly alternating signs of a_k
        for k in 1..30 {
            assert!(e.a(k) * e.a(k + 1) < 0.0);
        }
    }

    #[test]
    fn series_leading_behavior() {
        let e = ExpansionCoeffs::new(3).unwrap();
        let s = 1e-6_f64;
        let lead = std::f64::consts::SQRT_2 * s.powf(1.5);
        assert!((e.series(s, 3) - lead).abs() < 4.0 * lead * s);
    }
}
