//! Sequential stopping rules over an ordered p-value sequence.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    ForwardStop,
    FirstExceed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopDecision {
    /// Number of leading steps rejected; 0 rejects nothing.
    pub k_hat: usize,
    pub rule: StopRule,
    pub alpha: f64,
    /// Y_i = −log(1 − p_i); empty for `FirstExceed`.
    pub transformed: Vec<f64>,
}

fn check(pvals: &[f64], alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if let Some((i, p)) = pvals.iter().enumerate().find(|(_, p)| !(**p >= 0.0 && **p <= 1.0)) {
        return Err(Error::Domain(format!("p-value {i} = {p} outside [0, 1]")));
    }
    Ok(())
}

/// ForwardStop: reject steps 1..=k̂ with k̂ = max{k : (1/k) Σ_{i≤k} Y_i ≤ α}.
pub fn forward_stop(pvals: &[f64], alpha: f64) -> Result<StopDecision> {
    check(pvals, alpha)?;
    if let Some(i) = pvals.iter().position(|&p| p == 1.0) {
        return Err(Error::Domain(format!(
            "p-value {i} equals 1, -log(1 - p) is infinite; clamp before calling"
        )));
    }
    let transformed: Vec<f64> = pvals.iter().map(|&p| -(-p).ln_1p()).collect();
    let mut k_hat = 0;
    let mut running = 0.0;
    for (k, y) in transformed.iter().enumerate() {
        running += y;
        if running / (k + 1) as f64 <= alpha {
            k_hat = k + 1;
        }
    }
    Ok(StopDecision { k_hat, rule: StopRule::ForwardStop, alpha, transformed })
}

/// Rejects up to (not including) the first p-value above α.
pub fn first_exceed(pvals: &[f64], alpha: f64) -> Result<StopDecision> {
    check(pvals, alpha)?;
    let k_hat = pvals.iter().position(|&p| p > alpha).unwrap_or(pvals.len());
    Ok(StopDecision { k_hat, rule: StopRule::FirstExceed, alpha, transformed: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn forward_stop_examples() {
        let d = forward_stop(&[0.01, 0.02, 0.9], 0.1).unwrap();
        assert_eq!(d.k_hat, 2);
        let expect = [0.010_050_335_853_501_44, 0.020_202_707_317_519_466, 2.302_585_092_994_045_5];
        for (a, b) in d.transformed.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let means = [expect[0], (expect[0] + expect[1]) / 2.0, expect.iter().sum::<f64>() / 3.0];
        assert!((means[1] - 0.015_13).abs() < 1e-5 && (means[2] - 0.777_61).abs() < 1e-5);

        let d = forward_stop(&[0.05; 3], 0.1).unwrap();
        assert_eq!(d.k_hat, 3);
        assert!((d.transformed[0] - 0.051_293_294_387_550_5).abs() < 1e-12);

        assert_eq!(forward_stop(&[0.99], 0.1).unwrap().k_hat, 0);
        assert_eq!(forward_stop(&[], 0.1).unwrap().k_hat, 0);
    }

    #[test]
    fn forward_stop_errors() {
        assert!(matches!(forward_stop(&[0.1, 1.0], 0.1), Err(Error::Domain(_))));
        assert!(forward_stop(&[0.1], 0.0).is_err());
        assert!(forward_stop(&[0.1], 1.0).is_err());
        assert!(forward_stop(&[-0.1], 0.5).is_err());
    }

    #[test]
    fn first_exceed_examples() {
        assert_eq!(first_exceed(&[0.01, 0.2, 0.01], 0.05).unwrap().k_hat, 1);
        assert_eq!(first_exceed(&[0.01, 0.02], 0.05).unwrap().k_hat, 2);
        assert_eq!(first_exceed(&[0.3, 0.2], 0.05).unwrap().k_hat, 0);
        assert_eq!(first_exceed(&[], 0.05).unwrap().k_hat, 0);
    }

    proptest! {
        #[test]
        fn forward_stop_monotone_in_alpha(
            pvals in prop::collection::vec(0.0f64..0.999, 0..30),
            a in 0.001f64..0.998,
            b in 0.001f64..0.998,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let k_lo = forward_stop(&pvals, lo).unwrap().k_hat;
            let k_hi = forward_stop(&pvals, hi).unwrap().k_hat;
            prop_assert!(k_lo <= k_hi);
            let fe = first_exceed(&pvals, lo).unwrap().k_hat;
            prop_assert!(k_lo <= pvals.len() && fe <= pvals.len());
        }

        #[test]
        fn prefix_permutation_keeps_k_hat(
            pvals in prop::collection::vec(prop_oneof![3 => 0.0f64..0.05, 1 => 0.0f64..0.999], 1..20),
            alpha in 0.01f64..0.5,
            seed in any::<u64>(),
        ) {
            let d = forward_stop(&pvals, alpha).unwrap();
            let k = d.k_hat;
            prop_assume!(k >= 2);
            let mut permuted = pvals.clone();
            let mut s = seed;
            for i in (1..k).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                permuted.swap(i, (s >> 33) as usize % (i + 1));
            }
            // premise: every prefix mean of the permuted sequence is within α
            let ys: Vec<f64> = permuted.iter().map(|&p| -(-p).ln_1p()).collect();
            let mut run = 0.0;
            let mut premise = true;
            for (i, y) in ys[..k].iter().enumerate() {
                run += y;
                premise &= run / (i + 1) as f64 <= alpha;
            }
            prop_assume!(premise);
            prop_assert_eq!(forward_stop(&permuted, alpha).unwrap().k_hat, k);
        }
    }
}
