//! Market, contract and distribution parameters shared by every pricer.
//!
//! Prices are computed per unit of issue spot and per unit notional; the
//! notional and `S0` are applied only when a [`PriceResult`] is produced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};

/// Flat market: continuously compounded rate, dividend yield, volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: f64,
    pub y: f64,
    pub v: f64,
}

impl MarketParams {
    pub fn new(r: f64, y: f64, v: f64) -> Self {
        Self { r, y, v }
    }

    fn check(&self, errs: &mut Vec<FieldError>) {
        if !self.r.is_finite() || self.r.abs() > 1.0 {
            errs.push(field("r", "rate must be finite with |r| <= 1"));
        }
        if !self.y.is_finite() || self.y.abs() > 1.0 {
            errs.push(field("y", "dividend yield must be finite with |y| <= 1"));
        }
        if !(self.v > 0.0) || !self.v.is_finite() {
            errs.push(field("v", "volatility must be positive"));
        } else if self.v > 5.0 {
            errs.push(field("v", "volatility must be <= 5"));
        }
    }
}

/// How the guarantee accrues between two observation dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Compounding {
    /// Growth factor `exp(gamma * dt)` per period.
    #[default]
    Continuous,
    /// Growth factor `1 + gamma * dt` per period.
    Simple,
}

impl Compounding {
    pub fn growth(self, gamma: f64, dt: f64) -> f64 {
        match self {
            Compounding::Continuous => (gamma * dt).exp(),
            Compounding::Simple => 1.0 + gamma * dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractTerms {
    /// Guaranteed accumulation rate per year.
    pub gamma: f64,
    /// Years to the payoff date.
    pub maturity: f64,
    pub notional: f64,
    /// Number of equally spaced observation dates in `(0, T]`.
    pub n_observations: u32,
    pub compounding: Compounding,
}

impl ContractTerms {
    pub fn new(gamma: f64, maturity: f64, n_observations: u32) -> Self {
        Self {
            gamma,
            maturity,
            notional: 1.0,
            n_observations,
            compounding: Compounding::Continuous,
        }
    }

    pub fn with_notional(mut self, notional: f64) -> Self {
        self.notional = notional;
        self
    }

    pub fn with_compounding(mut self, compounding: Compounding) -> Self {
        self.compounding = compounding;
        self
    }

    pub fn with_observations(mut self, n: u32) -> Self {
        self.n_observations = n;
        self
    }

    /// Spacing between observation dates, `T / N`.
    pub fn delta_t(&self) -> f64 {
        self.maturity / f64::from(self.n_observations)
    }

    fn check(&self, errs: &mut Vec<FieldError>) {
        if !(0.0..=1.0).contains(&self.gamma) {
            errs.push(field("gamma", "guarantee rate must lie in [0, 1]"));
        }
        if !(self.maturity > 0.0) || !self.maturity.is_finite() {
            errs.push(field("T", "maturity must be positive"));
        }
        if !(self.notional > 0.0) || !self.notional.is_finite() {
            errs.push(field("notional", "notional must be positive"));
        }
        if self.n_observations < 1 {
            errs.push(field("N", "observation count must be at least 1"));
        }
    }
}

/// Where a contract stands at valuation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractState {
    pub spot: f64,
    /// Highest observed fund price since issue.
    pub high_water: f64,
    /// Years since the observation that gives the highest guaranteed payoff.
    pub accrual_time: f64,
    /// Fund price at issue; the normalization base.
    pub issue_spot: f64,
}

impl ContractState {
    /// A contract on its issue date: `S = S_H = S0 = 1`, `t_h = 0`.
    pub fn issue() -> Self {
        Self {
            spot: 1.0,
            high_water: 1.0,
            accrual_time: 0.0,
            issue_spot: 1.0,
        }
    }

    pub fn seasoned(spot: f64, high_water: f64, accrual_time: f64, issue_spot: f64) -> Self {
        Self {
            spot,
            high_water,
            accrual_time,
            issue_spot,
        }
    }

    /// Accrued guarantee base `S_H * exp(gamma * t_h)`.
    pub fn accrued_strike(&self, gamma: f64) -> f64 {
        self.high_water * (gamma * self.accrual_time).exp()
    }

    /// Strike used for pricing: the accrued base, or the spot when the
    /// spot already exceeds it.
    pub fn effective_strike(&self, gamma: f64) -> f64 {
        self.accrued_strike(gamma).max(self.spot)
    }

    fn check(&self, errs: &mut Vec<FieldError>) {
        if !(self.spot > 0.0) || !self.spot.is_finite() {
            errs.push(field("S", "spot must be positive"));
        }
        if !(self.issue_spot > 0.0) || !self.issue_spot.is_finite() {
            errs.push(field("S0", "issue spot must be positive"));
        }
        if !self.high_water.is_finite() || self.high_water < self.issue_spot {
            errs.push(field("SH", "high-water mark below issue spot"));
        }
        if !(self.accrual_time >= 0.0) || !self.accrual_time.is_finite() {
            errs.push(field("th", "accrual time must be non-negative"));
        }
    }
}

/// Law of `x(t) = mu*t + v*W(t)` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxDistParams {
    pub mu: f64,
    pub v: f64,
    pub horizon: f64,
}

impl MaxDistParams {
    pub fn new(mu: f64, v: f64, horizon: f64) -> Result<Self> {
        let mut errs = Vec::new();
        if !mu.is_finite() {
            errs.push(field("mu", "drift must be finite"));
        }
        if !(v > 0.0) || !v.is_finite() {
            errs.push(field("v", "volatility must be positive"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            errs.push(field("T", "horizon must be positive"));
        }
        if errs.is_empty() {
            Ok(Self { mu, v, horizon })
        } else {
            Err(Error::Validation(errs))
        }
    }

    /// Log-drift of the tilted fund `S(t) exp(-gamma t)`: the dividend yield
    /// is shifted by `gamma`, giving `r - y - gamma - v^2/2`.
    pub fn tilted(market: &MarketParams, gamma: f64, horizon: f64) -> Result<Self> {
        Self::new(
            market.r - market.y - gamma - market.v * market.v / 2.0,
            market.v,
            horizon,
        )
    }

    /// Untilted log-drift `r - y - v^2/2`.
    pub fn risk_neutral(market: &MarketParams, horizon: f64) -> Result<Self> {
        Self::tilted(market, 0.0, horizon)
    }

    /// `v * sqrt(T)`
    pub fn sigma(&self) -> f64 {
        self.v * self.horizon.sqrt()
    }
}

/// Which route produced a price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    AnalyticContinuous,
    AnalyticDiscrete,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::AnalyticContinuous => "analytic-continuous",
            Method::AnalyticDiscrete => "analytic-discrete",
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceResult {
    pub value: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_used: Option<f64>,
    /// Set when a pricer had to reroute, e.g. to quadrature near the
    /// closed form's singular point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl PriceResult {
    pub(crate) fn deterministic(value: f64, method: Method, epsilon_used: Option<f64>) -> Self {
        debug_assert!(method != Method::MonteCarlo);
        debug_assert!(value.is_finite() && value >= 0.0, "price {value}");
        Self {
            value,
            method,
            std_error: None,
            epsilon_used,
            warning: None,
        }
    }
}

/// Inputs that passed [`validate`]. Pricers only accept this bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    market: MarketParams,
    terms: ContractTerms,
    state: ContractState,
}

impl Contract {
    pub fn market(&self) -> &MarketParams {
        &self.market
    }

    pub fn terms(&self) -> &ContractTerms {
        &self.terms
    }

    pub fn state(&self) -> &ContractState {
        &self.state
    }

    /// Issue-date contract, `S = S_H = S0 = 1`.
    pub fn issue(market: MarketParams, terms: ContractTerms) -> Result<Self> {
        validate(&market, &terms, &ContractState::issue())
    }

    /// Same contract with a different number of observation dates.
    pub fn with_observations(&self, n: u32) -> Result<Self> {
        validate(&self.market, &self.terms.with_observations(n), &self.state)
    }

    pub fn with_market(&self, market: MarketParams) -> Result<Self> {
        validate(&market, &self.terms, &self.state)
    }

    /// Spot and strike divided by the issue spot.
    pub(crate) fn normalized_spot_strike(&self) -> (f64, f64) {
        let s0 = self.state.issue_spot;
        (
            self.state.spot / s0,
            self.state.effective_strike(self.terms.gamma) / s0,
        )
    }

    /// Distribution of the tilted log-return over the remaining term.
    pub fn tilted_params(&self) -> MaxDistParams {
        MaxDistParams {
            mu: self.market.r - self.market.y - self.terms.gamma
                - self.market.v * self.market.v / 2.0,
            v: self.market.v,
            horizon: self.terms.maturity,
        }
    }

    /// `|r - y - gamma|`, the distance from the closed form's singular point.
    pub fn singular_gap(&self) -> f64 {
        (self.market.r - self.market.y - self.terms.gamma).abs()
    }
}

/// Checks every invariant and reports all violations at once.
pub fn validate(market: &MarketParams, terms: &ContractTerms, state: &ContractState) -> Result<Contract> {
    let mut errs = Vec::new();
    market.check(&mut errs);
    terms.check(&mut errs);
    state.check(&mut errs);
    if errs.is_empty() {
        Ok(Contract {
            market: *market,
            terms: *terms,
            state: *state,
        })
    } else {
        Err(Error::Validation(errs))
    }
}

fn field(field: &'static str, message: &str) -> FieldError {
    FieldError {
        field,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> (MarketParams, ContractTerms) {
        (MarketParams::new(0.05, 0.0, 0.10), ContractTerms::new(0.08, 10.0, 12))
    }

    fn messages(err: Error) -> Vec<String> {
        match err {
            Error::Validation(errs) => errs.into_iter().map(|e| e.message).collect(),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn base_parameters_are_valid() {
        let (m, t) = base();
        assert!(validate(&m, &t, &ContractState::issue()).is_ok());
    }

    #[test]
    fn zero_volatility_rejected() {
        let (mut m, t) = base();
        m.v = 0.0;
        let msgs = messages(validate(&m, &t, &ContractState::issue()).unwrap_err());
        assert_eq!(msgs, vec!["volatility must be positive"]);
    }

    #[test]
    fn high_water_below_issue_spot() {
        let (m, t) = base();
        let st = ContractState::seasoned(1.0, 0.9, 0.0, 1.0);
        let msgs = messages(validate(&m, &t, &st).unwrap_err());
        assert_eq!(msgs, vec!["high-water mark below issue spot"]);
    }

    #[test]
    fn all_violations_reported() {
        let m = MarketParams::new(2.0, f64::NAN, -1.0);
        let t = ContractTerms {
            gamma: 0.0,
            maturity: 0.0,
            notional: -1.0,
            n_observations: 0,
            compounding: Compounding::Simple,
        };
        let st = ContractState::seasoned(0.0, 0.5, -1.0, 1.0);
        match validate(&m, &t, &st).unwrap_err() {
            Error::Validation(errs) => {
                let fields: Vec<_> = errs.iter().map(|e| e.field).collect();
                assert_eq!(fields, ["r", "y", "v", "T", "notional", "N", "S", "SH", "th"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validate_is_idempotent() {
        let (m, t) = base();
        let a = validate(&m, &t, &ContractState::issue()).unwrap();
        let b = validate(a.market(), a.terms(), a.state()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tilted_drift_matches_definition() {
        let (m, t) = base();
        let p = MaxDistParams::tilted(&m, t.gamma, t.maturity).unwrap();
        assert_eq!(p.mu, 0.05 - 0.0 - 0.08 - 0.1 * 0.1 / 2.0);
        assert!((p.mu + 0.035).abs() < 1e-15);
        let c = Contract::issue(m, t).unwrap();
        assert_eq!(c.tilted_params(), p);
    }

    #[test]
    fn effective_strike_clamps_to_spot() {
        let st = ContractState::seasoned(1.5, 1.2, 1.0, 1.0);
        assert!((st.accrued_strike(0.08) - 1.2 * 0.08f64.exp()).abs() < 1e-15);
        assert_eq!(st.effective_strike(0.08), 1.5);
        let st = ContractState::seasoned(1.1, 1.2, 1.0, 1.0);
        assert_eq!(st.effective_strike(0.08), st.accrued_strike(0.08));
    }

    #[test]
    fn delta_t_derived_from_terms() {
        let t = ContractTerms::new(0.08, 10.0, 40);
        assert_eq!(t.delta_t(), 0.25);
    }
}
