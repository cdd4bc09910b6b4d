//! Standard normal distribution function, upper tail and quantile.
//!
//! Both tails are evaluated through `erfc`, so `std_normal_sf(6.0)` keeps
//! full relative precision instead of being computed as `1 - 0.999999999`.

use std::f64::consts::FRAC_1_SQRT_2;

use libm::erfc;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Lower tail Φ(x).
pub fn std_normal_cdf<T: Scalar>(x: T) -> T {
    T::lit(cdf_f64(x.as_f64()))
}

/// Upper tail 1 − Φ(x), computed directly.
pub fn std_normal_sf<T: Scalar>(x: T) -> T {
    T::lit(cdf_f64(-x.as_f64()))
}

fn cdf_f64(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Φ⁻¹(q) for q in the open unit interval.
pub fn std_normal_quantile<T: Scalar>(q: T) -> Result<T> {
    let q = q.as_f64();
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("quantile level {q} outside (0, 1)")));
    }
    Ok(T::lit(quantile_f64(q)))
}

fn quantile_f64(q: f64) -> f64 {
    if q > 0.5 {
        // 1 - q is exact here
        return -quantile_f64(1.0 - q);
    }
    if q == 0.5 {
        return 0.0;
    }
    let mut x = acklam(q);
    // q <= 0.5 so the residual is a lower tail with full relative accuracy.
    for _ in 0..2 {
        let pdf = std_normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let r = (cdf_f64(x) - q) / pdf;
        // Halley correction on top of Newton
        x -= r / (1.0 + 0.5 * x * r);
    }
    x
}

/// Rational initial approximation (relative error about 1e-9).
fn acklam(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.02425;

    if q < LOW {
        let t = (-2.0 * q.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    } else {
        let t = q - 0.5;
        let r = t * t;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * t
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// CDF of |N(0, variance)|.
pub fn half_normal_cdf(x: f64, variance: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        // 2Φ(x/s) − 1 = 1 − 2·sf(x/s)
        1.0 - 2.0 * cdf_f64(-x / variance.sqrt())
    }
}
