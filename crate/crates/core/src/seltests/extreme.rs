//! Extreme-value tests of the global null for orthogonal designs.

use crate::error::{Error, Result};
use crate::numkit::std_normal_quantile;
use crate::scalar::Scalar;

use super::{Method, TestOutcome};

/// Normalising constants for the maximum of p absolute standard normals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvConstants {
    pub p: usize,
    /// a_p = Φ⁻¹(1 − 1/(2p)), the exact quantile rather than its expansion.
    pub a_p: f64,
    /// b_p = √(2 log p)
    pub b_p: f64,
}

impl EvConstants {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::domain(format!("extreme-value constants need p >= 2, got {p}")));
        }
        let a_p = std_normal_quantile(1.0 - 1.0 / (2.0 * p as f64))?;
        let b_p = (2.0 * (p as f64).ln()).sqrt();
        Ok(Self { p, a_p, b_p })
    }
}

/// V₁ ≥ V₂, the two largest |U_j|.
fn top_two<T: Scalar>(u: &[T]) -> (f64, f64) {
    u.iter().fold((f64::NEG_INFINITY, f64::NEG_INFINITY), |(v1, v2), &x| {
        let a = x.abs().as_f64();
        if a > v1 {
            (a, v1)
        } else {
            (v1, v2.max(a))
        }
    })
}

fn check_len<T>(u: &[T], p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::domain(format!("need p >= 2, got {p}")));
    }
    if u.len() != p {
        return Err(Error::domain(format!("U has length {} but p = {p}", u.len())));
    }
    Ok(())
}

/// Gumbel test: g = V₁² − a_p², p-value from the upper tail of Gumbel(0, 2).
pub fn gumbel_pvalue<T: Scalar>(u: &[T], p: usize) -> Result<TestOutcome> {
    check_len(u, p)?;
    let ev = EvConstants::new(p)?;
    let (v1, _) = top_two(u);
    let g = v1 * v1 - ev.a_p * ev.a_p;
    Ok(TestOutcome::new(1, Method::Gumbel, g, gumbel_upper_tail(g, 2.0)))
}

/// P(G > g) for G ~ Gumbel(0, scale).
pub(crate) fn gumbel_upper_tail(g: f64, scale: f64) -> f64 {
    -(-(-g / scale).exp()).exp_m1()
}

/// Gap test: b_p(V₁ − V₂) with an Exp(1) reference.
pub fn gap_stat<T: Scalar>(u: &[T], p: usize) -> Result<TestOutcome> {
    check_len(u, p)?;
    let ev = EvConstants::new(p)?;
    let (v1, v2) = top_two(u);
    let stat = ev.b_p * (v1 - v2);
    Ok(TestOutcome::new(1, Method::Gap, stat, (-stat).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants() {
        let ev = EvConstants::new(10).unwrap();
        assert!((ev.a_p * ev.a_p - 2.705_543_454_095_413).abs() < 1e-9);
        assert!((ev.b_p - 2.145_966_026_289_347).abs() < 1e-12);
        assert!(EvConstants::new(1).is_err());
    }

    #[test]
    fn gumbel_at_location() {
        assert!((gumbel_upper_tail(0.0, 2.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((gumbel_upper_tail(0.0, 2.0) - 0.632_121).abs() < 1e-6);
    }

    #[test]
    fn gumbel_example() {
        let mut u = vec![0.1f64; 10];
        u[3] = -3.0;
        let out = gumbel_pvalue(&u, 10).unwrap();
        assert!((out.statistic - 6.294_456_545_904_588).abs() < 1e-9);
        // 1 − exp(−exp(−g/2)) evaluated independently in high precision
        assert!((out.pvalue - 0.042_060_893_346_271_83).abs() < 1e-9);
        assert_eq!(out.mc_se, None);
    }

    #[test]
    fn gumbel_tail_is_monotone() {
        let mut prev = 1.0;
        for i in 0..200 {
            let p = gumbel_upper_tail(i as f64 * 0.5, 2.0);
            assert!(p < prev || p == 0.0);
            prev = p;
        }
        assert!(gumbel_upper_tail(200.0, 2.0) < 1e-40);
    }

    #[test]
    fn gap_examples() {
        let mut u = vec![0.0f64; 10];
        u[0] = 2.0;
        u[5] = -2.0;
        let out = gap_stat(&u, 10).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert_eq!(out.pvalue, 1.0);

        u[5] = 1.5;
        let out = gap_stat(&u, 10).unwrap();
        assert!((out.statistic - 1.072_983_013_144_673_6).abs() < 1e-9);
        assert!((out.pvalue - 0.341_986_843_094_084_3).abs() < 1e-9);

        u[5] = 1.0;
        let doubled = gap_stat(&u, 10).unwrap();
        assert!((doubled.statistic - 2.0 * out.statistic).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(gumbel_pvalue(&[1.0], 1).is_err());
        assert!(gap_stat(&[1.0], 1).is_err());
        assert!(gumbel_pvalue(&[1.0, 2.0, 3.0], 2).is_err());
    }

    proptest! {
        #[test]
        fn permutation_invariance(mut u in prop::collection::vec(-5.0f64..5.0, 2..40), seed in any::<u64>()) {
            let p = u.len();
            let g = gumbel_pvalue(&u, p).unwrap();
            let gap = gap_stat(&u, p).unwrap();
            // deterministic shuffle
            let mut s = seed;
            for i in (1..p).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                u.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(gumbel_pvalue(&u, p).unwrap(), g);
            prop_assert_eq!(gap_stat(&u, p).unwrap(), gap);
        }
    }
}
