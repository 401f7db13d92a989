//! Direct numerical pricing against the running-maximum density.
//!
//! This is the reference the closed form is checked against: it needs no
//! antiderivative and stays regular at `r - y - gamma = 0`, where the closed
//! form divides by zero.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::Monitoring;
use crate::error::{Error, Result};
use crate::maxdist::max_pdf;
use crate::types::{Contract, MaxDistParams, Method, PriceResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// Upper integration limit in log-return units. `None` derives it from
    /// the density's Gaussian tail bound so the dropped mass is below
    /// `abs_tol / 10`.
    pub upper_cutoff: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-14,
            max_subdivisions: 4000,
            upper_cutoff: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-12) {
            return Err(Error::Domain(format!(
                "rel_tol must be at least 1e-12, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::Domain("abs_tol and max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions: usize,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK[..7].iter().zip(&WGK[..7]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the total
/// estimate falls below `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&f, a, b);
    let (mut value, mut error) = (first.value, first.error);
    heap.push(first);
    let mut subdivisions = 0;
    while error > abs_tol.max(rel_tol * value.abs()) {
        if subdivisions >= max_subdivisions {
            return Err(Error::NonConvergence {
                subdivisions,
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&f, worst.a, mid);
        let right = kronrod(&f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // Re-add from scratch so the running sums' drift does not leak out.
    let mut segments: Vec<_> = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error_estimate = segments.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error_estimate,
        subdivisions,
    })
}

/// Point beyond which `int S e^h f(h) dh` is below `budget`.
fn tail_cutoff(lower: f64, p: &MaxDistParams, budget: f64) -> f64 {
    let s = p.sigma();
    let mt = p.mu * p.horizon;
    // For h >= |mu| T: f(h) <= c * exp(-(h - mu T)^2 / (2 s^2)).
    let c = 2.0 / (s * (2.0 * PI).sqrt()) + p.mu.abs() / (p.v * p.v);
    let scale = c * s * (2.0 * PI).sqrt() * (mt + 0.5 * s * s).exp();
    let mut h = lower.max(mt.abs()).max(mt + s * s);
    // Tail of the tilted Gaussian centred at mu T + s^2.
    while scale * crate::special::norm_cdf(-(h - mt - s * s) / s) > budget {
        h += 0.25 * s;
    }
    h
}

/// `E[(S e^M - X)^+]` where `M` is the running maximum under `p`.
pub fn expected_excess(spot: f64, strike: f64, p: &MaxDistParams, q: &QuadratureSpec) -> Result<f64> {
    q.check()?;
    if !(spot > 0.0) || !(strike > 0.0) {
        return Err(Error::Domain("spot and strike must be positive".into()));
    }
    let lower = (strike / spot).ln().max(0.0);
    let upper = q
        .upper_cutoff
        .unwrap_or_else(|| tail_cutoff(lower, p, q.abs_tol / (10.0 * spot)));
    if upper <= lower {
        return Ok(0.0);
    }
    let integrand = |h: f64| (spot * h.exp() - strike).max(0.0) * max_pdf(h, p);
    let out = integrate(integrand, lower, upper, q.rel_tol, q.abs_tol, q.max_subdivisions)?;
    Ok(out.value.max(0.0))
}

/// Contract value by integrating the payoff against the density.
///
/// With [`Monitoring::Discrete`], the strike is shifted to `X e^eps` and the
/// option part scaled by `e^-eps`; the guaranteed floor is left alone.
pub fn oracle_price(contract: &Contract, q: &QuadratureSpec, monitoring: Monitoring) -> Result<PriceResult> {
    let (spot, strike) = contract.normalized_spot_strike();
    let terms = contract.terms();
    let eps = monitoring.epsilon(contract.market().v, terms.delta_t());
    let p = contract.tilted_params();
    let excess = (-eps).exp() * expected_excess(spot, strike * eps.exp(), &p, q)?;
    let growth = ((terms.gamma - contract.market().r) * terms.maturity).exp();
    let value = terms.notional * growth * (strike + excess);
    let epsilon_used = match monitoring {
        Monitoring::Continuous => None,
        Monitoring::Discrete(_) => Some(eps),
    };
    Ok(PriceResult::deterministic(value, Method::Quadrature, epsilon_used))
}
