//! Closed-form contract values.
//!
//! For continuous monitoring the value is
//!
//! ```text
//! V = e^{gamma T} ( X e^{-rT} + 2 Call(S, X, v, r, y + gamma, T)
//!       + e^{-rT} { X Phi(d2)
//!                   - S/(v^2 + 2 mu) [ 2 mu Phi(d1) e^{(mu + v^2/2) T}
//!                                      + v^2 (X/S)^{1 + 2 mu/v^2} Phi(-(mu T + k)/s) ] } )
//! ```
//!
//! with `k = ln(X/S)`, `s = v sqrt(T)`, `d1 = (T(v^2 + mu) - k)/s`,
//! `d2 = (mu T - k)/s` and `mu = r - y - gamma - v^2/2` the log-drift of the
//! tilted fund. Note `v^2 + 2 mu = 2 (r - y - gamma)`, so the formula is
//! singular when the guarantee rate equals the fund's carry.
//!
//! Discrete observation every `dt` years is handled by shifting the running
//! maximum down by `eps = c v sqrt(dt)`: the strike becomes `X e^eps` and
//! the option part is scaled by `e^-eps`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxdist::image_tail;
use crate::quadrature::{oracle_price, QuadratureSpec};
use crate::special::norm_cdf;
use crate::types::{Contract, ContractState, ContractTerms, MarketParams, MaxDistParams, Method, PriceResult};

/// Below this `|r - y - gamma|` the closed form is refused outright.
pub const SINGULAR_TOL: f64 = 1e-8;
/// Below this `|r - y - gamma|` [`continuous_price`] reroutes to quadrature.
pub const FALLBACK_TOL: f64 = 1e-4;

/// Constant `c` in the log-shift `eps = c v sqrt(dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrectionConstant {
    /// `sqrt(2/pi)`: mean of the maximum of a Brownian motion over one
    /// observation interval.
    #[default]
    HalfNormalMean,
    /// `-zeta(1/2)/sqrt(2 pi)`, the discrete-barrier shift of Broadie,
    /// Glasserman and Kou.
    BroadieGlassermanKou,
}

impl CorrectionConstant {
    pub fn value(self) -> f64 {
        match self {
            CorrectionConstant::HalfNormalMean => (2.0 / PI).sqrt(),
            CorrectionConstant::BroadieGlassermanKou => 0.582_597_157_939_010_6,
        }
    }
}

/// How often the high-water mark is observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monitoring {
    Continuous,
    /// Every `T / N` years, with the given shift constant.
    Discrete(CorrectionConstant),
}

impl Monitoring {
    pub fn epsilon(self, v: f64, delta_t: f64) -> f64 {
        match self {
            Monitoring::Continuous => 0.0,
            Monitoring::Discrete(c) => c.value() * v * delta_t.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionParams {
    pub epsilon: f64,
    pub delta_t: f64,
}

/// `eps = v sqrt(2 dt / pi)`.
pub fn correction_epsilon(v: f64, delta_t: f64) -> Result<CorrectionParams> {
    if !(v > 0.0) || !(delta_t >= 0.0) {
        return Err(Error::Domain(format!(
            "correction needs v > 0 and dt >= 0, got v = {v}, dt = {delta_t}"
        )));
    }
    Ok(CorrectionParams {
        epsilon: v * (2.0 * delta_t / PI).sqrt(),
        delta_t,
    })
}

/// Black-Scholes call with continuous dividend yield `y`.
pub fn bs_call(spot: f64, strike: f64, v: f64, r: f64, y: f64, t: f64) -> Result<f64> {
    if !(spot > 0.0) || !(strike > 0.0) || !(t >= 0.0) {
        return Err(Error::Domain(format!(
            "call needs S, X > 0 and t >= 0, got S = {spot}, X = {strike}, t = {t}"
        )));
    }
    if t == 0.0 {
        return Ok((spot - strike).max(0.0));
    }
    if !(v > 0.0) {
        return Err(Error::Domain(format!("call needs v > 0 for t > 0, got {v}")));
    }
    let s = v * t.sqrt();
    let d1 = ((spot / strike).ln() + (r - y + 0.5 * v * v) * t) / s;
    let d2 = d1 - s;
    Ok(spot * (-y * t).exp() * norm_cdf(d1) - strike * (-r * t).exp() * norm_cdf(d2))
}

/// `E[(S e^M - X)^+]` for the tilted running maximum, via the closed form.
/// Requires `X >= S` and a non-singular drift.
fn closed_form_excess(spot: f64, strike: f64, market: &MarketParams, gamma: f64, p: &MaxDistParams) -> Result<f64> {
    let t = p.horizon;
    let v2 = p.v * p.v;
    let s = p.sigma();
    let k = (strike / spot).ln();
    let mu = p.mu;
    let carry = v2 + 2.0 * mu;
    let call = bs_call(spot, strike, p.v, market.r, market.y + gamma, t)?;
    let d1 = (t * (v2 + mu) - k) / s;
    let d2 = (mu * t - k) / s;
    // (X/S)^{1 + 2mu/v^2} Phi(-(mu T + k)/s), kept finite for large drifts.
    let reflected = k.exp() * image_tail(k, p);
    let bracket = strike * norm_cdf(d2)
        - spot / carry * (2.0 * mu * norm_cdf(d1) * ((mu + v2 / 2.0) * t).exp() + v2 * reflected);
    Ok((market.r * t).exp() * 2.0 * call + bracket)
}

fn check_singular(contract: &Contract, tol: f64) -> Result<()> {
    let gap = contract.singular_gap();
    if gap <= tol {
        return Err(Error::SingularParameterization { gap, tol });
    }
    Ok(())
}

/// Closed-form value under the given monitoring, refusing the singular
/// point `|r - y - gamma| <= SINGULAR_TOL`.
pub fn closed_form_price(contract: &Contract, monitoring: Monitoring) -> Result<PriceResult> {
    check_singular(contract, SINGULAR_TOL)?;
    let (spot, strike) = contract.normalized_spot_strike();
    let terms = contract.terms();
    let market = contract.market();
    let eps = monitoring.epsilon(market.v, terms.delta_t());
    let p = contract.tilted_params();
    let excess = (-eps).exp() * closed_form_excess(spot, strike * eps.exp(), market, terms.gamma, &p)?;
    let growth = ((terms.gamma - market.r) * terms.maturity).exp();
    // Rounding can push a worthless option part a hair below zero.
    let value = terms.notional * growth * (strike + excess.max(0.0));
    let (method, epsilon_used) = match monitoring {
        Monitoring::Continuous => (Method::AnalyticContinuous, None),
        Monitoring::Discrete(_) => (Method::AnalyticDiscrete, Some(eps)),
    };
    Ok(PriceResult::deterministic(value, method, epsilon_used))
}

fn price_or_fallback(contract: &Contract, monitoring: Monitoring) -> Result<PriceResult> {
    if contract.singular_gap() <= FALLBACK_TOL {
        let mut out = oracle_price(contract, &QuadratureSpec::default(), monitoring)?;
        out.warning = Some(format!(
            "|r - y - gamma| = {:e} is within {FALLBACK_TOL:e} of the closed form's singular point; priced by quadrature",
            contract.singular_gap()
        ));
        return Ok(out);
    }
    closed_form_price(contract, monitoring)
}

/// Continuously monitored value. Near `r - y - gamma = 0` the result comes
/// from the quadrature oracle and is tagged [`Method::Quadrature`].
pub fn continuous_price(contract: &Contract) -> Result<PriceResult> {
    price_or_fallback(contract, Monitoring::Continuous)
}

/// Value with `N` observation dates, using the `sqrt(2/pi)` shift.
pub fn discrete_price(contract: &Contract) -> Result<PriceResult> {
    discrete_price_with(contract, CorrectionConstant::default())
}

pub fn discrete_price_with(contract: &Contract, constant: CorrectionConstant) -> Result<PriceResult> {
    price_or_fallback(contract, Monitoring::Discrete(constant))
}

/// Value on the issue date (`S = S_H = S0 = 1`, `t_h = 0`).
pub fn initial_price(market: MarketParams, terms: ContractTerms) -> Result<PriceResult> {
    discrete_price(&crate::types::validate(&market, &terms, &ContractState::issue())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::validate;

    fn base(n: u32) -> Contract {
        Contract::issue(MarketParams::new(0.05, 0.0, 0.10), ContractTerms::new(0.08, 10.0, n)).unwrap()
    }

    #[test]
    fn call_at_expiry_is_intrinsic() {
        assert!((bs_call(1.2, 1.0, 0.2, 0.05, 0.0, 0.0).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(bs_call(0.8, 1.0, 0.2, 0.05, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn call_at_the_money_zero_rates() {
        // 2 Phi(v sqrt(t) / 2) - 1
        let c = bs_call(1.0, 1.0, 0.2, 0.0, 0.0, 1.0).unwrap();
        assert!((c - (2.0 * norm_cdf(0.1) - 1.0)).abs() < 1e-15);
        assert!((c - 0.079_655_7).abs() < 1e-7);
    }

    #[test]
    fn call_small_vol_limit_is_discounted_forward() {
        let c = bs_call(1.0, 1.0, 1e-9, 0.05, 0.0, 1.0).unwrap();
        let fwd = (-0.05f64).exp() * (0.05f64.exp() - 1.0);
        assert!((c - fwd).abs() < 1e-12);
        assert!((c - 0.048_771).abs() < 1e-6);
    }

    #[test]
    fn call_rejects_bad_inputs() {
        assert!(bs_call(-1.0, 1.0, 0.2, 0.0, 0.0, 1.0).is_err());
        assert!(bs_call(1.0, 0.0, 0.2, 0.0, 0.0, 1.0).is_err());
        assert!(bs_call(1.0, 1.0, 0.2, 0.0, 0.0, -1.0).is_err());
        assert!(bs_call(1.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(correction_epsilon(0.1, 0.0).unwrap().epsilon, 0.0);
        let e = correction_epsilon(0.1, 1.0 / 12.0).unwrap().epsilon;
        assert!((e - 0.023_032_9).abs() < 1e-7);
        let dt = 0.37;
        let a = correction_epsilon(0.2, dt).unwrap().epsilon;
        let b = correction_epsilon(0.2, 4.0 * dt).unwrap().epsilon;
        assert!((b - 2.0 * a).abs() < 1e-15);
        assert!(correction_epsilon(0.0, 0.1).is_err());
        assert!(correction_epsilon(0.1, -0.1).is_err());
    }

    #[test]
    fn monitoring_epsilon_matches_correction() {
        let e = Monitoring::Discrete(CorrectionConstant::HalfNormalMean).epsilon(0.1, 0.25);
        assert!((e - correction_epsilon(0.1, 0.25).unwrap().epsilon).abs() < 1e-16);
        assert_eq!(Monitoring::Continuous.epsilon(0.1, 0.25), 0.0);
    }

    #[test]
    fn floor_term() {
        let c = continuous_price(&base(12)).unwrap();
        assert_eq!(c.method, Method::AnalyticContinuous);
        assert!(c.value >= 0.3f64.exp());
        assert!((0.3f64.exp() - 1.349_859).abs() < 1e-6);
    }

    #[test]
    fn discrete_below_continuous_and_records_epsilon() {
        let c = continuous_price(&base(12)).unwrap().value;
        let d = discrete_price(&base(12)).unwrap();
        assert_eq!(d.method, Method::AnalyticDiscrete);
        assert!(d.value < c);
        let eps = d.epsilon_used.unwrap();
        assert!((eps - 0.1 * (2.0 * (10.0 / 12.0) / PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn initial_price_is_discrete_price_at_issue() {
        let m = MarketParams::new(0.05, 0.0, 0.10);
        let t = ContractTerms::new(0.08, 10.0, 40);
        let a = initial_price(m, t).unwrap();
        let b = discrete_price(&Contract::issue(m, t).unwrap()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    #[test]
    fn singular_point_is_refused_by_closed_form_and_rerouted() {
        let c = Contract::issue(MarketParams::new(0.05, 0.0, 0.1), ContractTerms::new(0.05, 10.0, 12)).unwrap();
        assert!(matches!(
            closed_form_price(&c, Monitoring::Continuous),
            Err(Error::SingularParameterization { .. })
        ));
        let out = continuous_price(&c).unwrap();
        assert_eq!(out.method, Method::Quadrature);
        assert!(out.warning.is_some());
        assert!(out.value.is_finite());
    }

    #[test]
    fn notional_scales_linearly() {
        let m = MarketParams::new(0.05, 0.01, 0.2);
        let t = ContractTerms::new(0.03, 5.0, 12);
        let one = continuous_price(&Contract::issue(m, t).unwrap()).unwrap().value;
        let many = continuous_price(&Contract::issue(m, t.with_notional(250.0)).unwrap()).unwrap().value;
        assert!((many - 250.0 * one).abs() < 1e-12 * many);
    }

    #[test]
    fn seasoned_spot_above_strike_equals_reset_contract() {
        // Spot above the accrued strike: priced as if the mark reset to spot.
        let m = MarketParams::new(0.05, 0.0, 0.15);
        let t = ContractTerms::new(0.04, 5.0, 12);
        let above = validate(&m, &t, &ContractState::seasoned(1.4, 1.1, 0.5, 1.0)).unwrap();
        let reset = validate(&m, &t, &ContractState::seasoned(1.4, 1.4, 0.0, 1.0)).unwrap();
        let a = continuous_price(&above).unwrap().value;
        let b = continuous_price(&reset).unwrap().value;
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn price_is_homogeneous_in_issue_spot() {
        let m = MarketParams::new(0.05, 0.0, 0.15);
        let t = ContractTerms::new(0.04, 5.0, 12);
        let a = validate(&m, &t, &ContractState::seasoned(0.9, 1.2, 1.0, 1.0)).unwrap();
        let b = validate(&m, &t, &ContractState::seasoned(90.0, 120.0, 1.0, 100.0)).unwrap();
        let pa = continuous_price(&a).unwrap().value;
        let pb = continuous_price(&b).unwrap().value;
        assert!((pa - pb).abs() < 1e-13);
    }
}
