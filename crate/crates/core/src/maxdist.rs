//! Running maximum of a drifted Brownian motion `x(t) = mu t + v W(t)`.
//!
//! The law of `M_T = max_{0<=t<=T} x(t)` follows from the method of images:
//! paths that never reach a barrier `h` have density
//!
//! ```text
//! P(x, t; h) = P0(x, t) - exp(2 mu h / v^2) P0(x - 2h, t),   x <= h
//! ```
//!
//! where `P0` is the free Gaussian kernel. Integrating over `x <= h` gives
//! `P(M_T <= h)`, and differentiating in `h` gives the density of `M_T`.
//! The density written in erf form,
//!
//! ```text
//! 2/sqrt(2 pi v^2 T) exp(-(h - mu T)^2 / (2 v^2 T))
//!     - mu/v^2 exp(2 mu h / v^2) erfc((h + mu T) / sqrt(2 v^2 T))
//! ```
//!
//! is exactly `d/dh` of the distribution function, using the identity
//! `exp(2 mu h / v^2) phi((h + mu T)/s) = phi((h - mu T)/s)` with `s = v sqrt(T)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{exp_times_upper_tail, norm_cdf, norm_pdf};
use crate::types::MaxDistParams;

/// Free Gaussian kernel: density of `x(t)` started at zero.
pub fn free_density(x: f64, t: f64, p: &MaxDistParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    let s = p.v * t.sqrt();
    Ok(norm_pdf((x - p.mu * t) / s) / s)
}

/// Image solution for an absorbing wall at `barrier`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSolution {
    /// `exp(2 mu h / v^2)`
    pub image_coefficient: f64,
    /// `2 h`
    pub image_shift: f64,
    pub barrier: f64,
    params: MaxDistParams,
}

impl BarrierSolution {
    pub fn new(barrier: f64, p: &MaxDistParams) -> Result<Self> {
        if !(barrier > 0.0) || !barrier.is_finite() {
            return Err(Error::Domain(format!("barrier must be positive, got {barrier}")));
        }
        Ok(Self {
            image_coefficient: (2.0 * p.mu * barrier / (p.v * p.v)).exp(),
            image_shift: 2.0 * barrier,
            barrier,
            params: *p,
        })
    }

    /// Density at `x <= h` of paths that have stayed below the wall up to `t`.
    pub fn density(&self, x: f64, t: f64) -> Result<f64> {
        if x > self.barrier {
            return Err(Error::Domain(format!(
                "x = {x} lies above the barrier {}",
                self.barrier
            )));
        }
        let p = &self.params;
        let free = free_density(x, t, p)?;
        // exp(2 mu h / v^2) P0(x - 2h, t) = P0(x, t) exp(-2h(h - x) / (v^2 t)),
        // so the difference vanishes exactly on the wall.
        let ratio = -2.0 * self.barrier * (self.barrier - x) / (p.v * p.v * t);
        Ok(-free * ratio.exp_m1())
    }
}

/// Density of surviving paths, see [`BarrierSolution::density`].
pub fn barrier_density(x: f64, h: f64, t: f64, p: &MaxDistParams) -> Result<f64> {
    BarrierSolution::new(h, p)?.density(x, t)
}

/// `exp(2 mu h / v^2) * Phi(-(h + mu T) / s)`, the reflected term of the
/// distribution function.
pub(crate) fn image_tail(h: f64, p: &MaxDistParams) -> f64 {
    let s = p.sigma();
    let z = (h + p.mu * p.horizon) / s;
    let a = 2.0 * p.mu * h / (p.v * p.v);
    let w = (h - p.mu * p.horizon) / s;
    exp_times_upper_tail(a, z, -0.5 * w * w)
}

/// `P(M_T <= h)`; zero for `h <= 0`.
pub fn max_cdf(h: f64, p: &MaxDistParams) -> f64 {
    if h.is_nan() {
        return f64::NAN;
    }
    if h < 0.0 {
        return 0.0;
    }
    if h == f64::INFINITY {
        return 1.0;
    }
    let s = p.sigma();
    norm_cdf((h - p.mu * p.horizon) / s) - image_tail(h, p)
}

/// `P(M_T > h)` computed without cancellation in the upper tail.
pub fn max_survival(h: f64, p: &MaxDistParams) -> f64 {
    if h < 0.0 {
        return 1.0;
    }
    if h == f64::INFINITY {
        return 0.0;
    }
    let s = p.sigma();
    norm_cdf((p.mu * p.horizon - h) / s) + image_tail(h, p)
}

/// Density of `M_T`; zero for `h < 0`.
pub fn max_pdf(h: f64, p: &MaxDistParams) -> f64 {
    if h < 0.0 {
        return 0.0;
    }
    let s = p.sigma();
    let gauss = 2.0 * norm_pdf((h - p.mu * p.horizon) / s) / s;
    gauss - 2.0 * p.mu / (p.v * p.v) * image_tail(h, p)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn params(mu: f64, v: f64, t: f64) -> MaxDistParams {
        MaxDistParams::new(mu, v, t).unwrap()
    }

    #[test]
    fn free_density_peak() {
        let p = params(-0.035, 0.1, 1.0);
        let peak = free_density(p.mu, 1.0, &p).unwrap();
        assert!((peak - 1.0 / (2.0 * PI * 0.01f64).sqrt()).abs() < 1e-14);
        assert!((peak - 3.98942).abs() < 1e-5);
    }

    #[test]
    fn free_density_one_sigma() {
        let p = params(0.0, 0.1, 1.0);
        let d = free_density(0.1, 1.0, &p).unwrap();
        assert!((d - 0.241_970_7 / 0.1).abs() < 1e-6);
    }

    #[test]
    fn free_density_rejects_non_positive_time() {
        let p = params(0.0, 0.1, 1.0);
        assert!(free_density(0.0, 0.0, &p).is_err());
        assert!(free_density(0.0, -1.0, &p).is_err());
    }

    #[test]
    fn barrier_density_vanishes_on_the_wall() {
        for &mu in &[-0.5, -0.035, 0.0, 0.2] {
            for &h in &[0.01, 0.3, 2.0] {
                let p = params(mu, 0.1, 1.0);
                let d = barrier_density(h, h, 0.7, &p).unwrap();
                assert!(d.abs() < 1e-12, "mu={mu} h={h} d={d}");
            }
        }
    }

    #[test]
    fn barrier_density_driftless_value() {
        let p = params(0.0, 0.1, 1.0);
        let d = barrier_density(0.0, 0.1, 1.0, &p).unwrap();
        let expected = (0.398_942_3 - 0.053_991_0) / 0.1;
        assert!((d - expected).abs() < 1e-5, "{d}");
        assert!((d - 3.44951).abs() < 1e-5);
    }

    #[test]
    fn barrier_solution_constants() {
        let p = params(-0.035, 0.1, 10.0);
        let b = BarrierSolution::new(0.25, &p).unwrap();
        assert_eq!(b.image_shift, 0.5);
        assert_eq!(b.image_coefficient, (2.0_f64 * -0.035 * 0.25 / (0.1 * 0.1)).exp());
    }

    #[test]
    fn barrier_density_rejects_points_above_wall() {
        let p = params(0.0, 0.1, 1.0);
        assert!(barrier_density(0.2, 0.1, 1.0, &p).is_err());
        assert!(barrier_density(0.0, 0.0, 1.0, &p).is_err());
    }

    #[test]
    fn cdf_is_zero_at_origin_for_any_drift() {
        for &mu in &[-1.0, -0.035, 0.0, 0.035, 1.0] {
            for &v in &[0.05, 0.1, 0.4] {
                assert_eq!(max_cdf(0.0, &params(mu, v, 10.0)), 0.0);
            }
        }
        assert_eq!(max_cdf(-0.3, &params(0.1, 0.1, 1.0)), 0.0);
        assert_eq!(max_pdf(-0.3, &params(0.1, 0.1, 1.0)), 0.0);
    }

    #[test]
    fn cdf_total_mass() {
        let p = params(-0.035, 0.1, 10.0);
        assert!((max_cdf(20.0, &p) - 1.0).abs() < 1e-12);
        assert_eq!(max_survival(20.0, &p), max_survival(20.0, &p).max(0.0));
        assert!(max_survival(20.0, &p) < 1e-12);
    }

    #[test]
    fn driftless_cdf_is_reflection_formula() {
        let p = params(0.0, 0.1, 1.0);
        assert!((max_cdf(0.1, &p) - 0.682_689_492_137_085_9).abs() < 1e-12);
    }

    #[test]
    fn driftless_pdf_is_folded_normal() {
        let p = params(0.0, 0.1, 1.0);
        assert!((max_pdf(0.0, &p) - 2.0 * 3.989_422_804_014_327).abs() < 1e-12);
        assert!((max_pdf(0.0, &p) - 7.97885).abs() < 1e-5);
    }

    #[test]
    fn pdf_matches_central_difference_of_cdf() {
        let p = params(-0.035, 0.1, 10.0);
        let d = 1e-6;
        for &h in &[0.05, 0.2, 0.5] {
            let fd = (max_cdf(h + d, &p) - max_cdf(h - d, &p)) / (2.0 * d);
            assert!((fd - max_pdf(h, &p)).abs() < 1e-5, "h={h}");
        }
    }

    #[test]
    fn survival_complements_cdf() {
        let p = params(0.03, 0.2, 5.0);
        for &h in &[0.0, 0.1, 0.5, 1.5] {
            assert!((max_cdf(h, &p) + max_survival(h, &p) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn large_positive_drift_does_not_overflow() {
        // 2 mu h / v^2 = 2 * 0.5 * 5 / 0.0025 = 2000
        let p = params(0.5, 0.05, 10.0);
        for &h in &[0.5, 5.0, 4.9, 8.0] {
            let f = max_cdf(h, &p);
            let g = max_pdf(h, &p);
            assert!(f.is_finite() && (0.0..=1.0).contains(&f), "h={h} f={f}");
            assert!(g.is_finite() && g >= 0.0, "h={h} g={g}");
        }
        let b = barrier_density(4.0, 5.0, 10.0, &p).unwrap();
        assert!(b.is_finite() && b >= 0.0);
    }
}
