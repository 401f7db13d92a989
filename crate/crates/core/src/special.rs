//! Error functions and the standard normal law.
//!
//! `erf`/`erfc` come from `libm` (a port of the FreeBSD msun routines,
//! accurate to about one ulp, with `erfc` evaluated directly in the tail).

use std::f64::consts::FRAC_1_SQRT_2;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `exp(x^2) * erfc(x)`.
///
/// Finite for every `x` where the result is representable; for large
/// positive `x` it decays like `1 / (x sqrt(pi))` instead of underflowing.
pub fn erfcx(x: f64) -> f64 {
    if x < 26.0 {
        if x < -26.0 {
            return f64::INFINITY;
        }
        return (x * x).exp() * erfc(x);
    }
    // Continued fraction 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
    let mut tail = x;
    for k in (1..=40).rev() {
        tail = x + (k as f64 / 2.0) / tail;
    }
    FRAC_1_SQRT_PI / tail
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal distribution function, accurate in both tails.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// `exp(a) * norm_cdf(-z)` without overflow when `a` is large and `z`
/// large positive. `completed_square` must equal `a - z^2/2`.
pub(crate) fn exp_times_upper_tail(a: f64, z: f64, completed_square: f64) -> f64 {
    if a < 30.0 || z <= 0.0 {
        a.exp() * norm_cdf(-z)
    } else {
        0.5 * completed_square.exp() * erfcx(z * FRAC_1_SQRT_2)
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table values.
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-19);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_pdf(1.0) - 0.241_970_724_519_143_37).abs() < 1e-16);
    }

    #[test]
    fn erfc_tail_relative_accuracy() {
        // erfc(10) = 2.0884875837625447570e-45
        let v = erfc(10.0);
        assert!((v / 2.088_487_583_762_545e-45 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn erfcx_is_continuous_at_switch() {
        // mpmath: exp(x^2) erfc(x) at x = 25 and 26
        assert!((erfcx(25.0) / 0.022_549_572_432_641_36 - 1.0).abs() < 1e-12);
        assert!((erfcx(26.0) / 0.021_683_584_850_562_907 - 1.0).abs() < 1e-14);
        // asymptotic 1/(x sqrt(pi)) * (1 - 1/(2x^2))
        let x = 1e4;
        let approx = FRAC_1_SQRT_PI / x * (1.0 - 0.5 / (x * x));
        assert!((erfcx(x) / approx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_tail_matches_direct_product() {
        let (a, z) = (35.0_f64, 9.0_f64);
        let direct = a.exp() * norm_cdf(-z);
        let scaled = exp_times_upper_tail(a, z, a - z * z / 2.0);
        assert!((scaled / direct - 1.0).abs() < 1e-12);
    }
}
