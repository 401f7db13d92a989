//! Pricing of variable annuities whose guaranteed payoff resets to the
//! fund's high-water mark.
//!
//! At maturity the contract pays the largest of the fund values seen on the
//! observation dates, each grown at the guarantee rate `gamma` from its
//! observation date to maturity. In the continuous-observation limit this is
//! `e^{gamma T}` times the running maximum of the tilted fund
//! `S(t) e^{-gamma t}`, a geometric Brownian motion whose dividend yield is
//! shifted by `gamma`.
//!
//! Four routes to the same number:
//!
//! - [`analytic::continuous_price`]: closed form built on the law of the
//!   running maximum ([`maxdist`]);
//! - [`analytic::discrete_price`]: the same with a continuity correction for
//!   `N` observation dates;
//! - [`quadrature::oracle_price`]: direct integration against the density,
//!   used to check the closed form and to price near its singular point;
//! - [`mc::mc_price`]: Monte Carlo on the reset recursion itself.
//!
//! ```
//! use hwm::analytic::{continuous_price, discrete_price};
//! use hwm::types::{Contract, ContractTerms, MarketParams};
//!
//! let market = MarketParams::new(0.05, 0.0, 0.10);
//! let terms = ContractTerms::new(0.08, 10.0, 12);
//! let contract = Contract::issue(market, terms)?;
//!
//! let continuous = continuous_price(&contract)?.value;
//! let yearly = discrete_price(&contract)?.value;
//! assert!(yearly < continuous);
//! assert!(yearly > (0.3f64).exp()); // guaranteed floor e^{(gamma - r) T}
//! # Ok::<(), hwm::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod maxdist;
pub mod mc;
pub mod quadrature;
pub mod special;
pub mod sweep;
pub mod types;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/running-maximum.md")]
    mod running_maximum {}
    #[doc = include_str!("../../../book/src/closed-form.md")]
    mod closed_form {}
    #[doc = include_str!("../../../book/src/discrete-observation.md")]
    mod discrete_observation {}
    #[doc = include_str!("../../../book/src/quadrature.md")]
    mod quadrature {}
    #[doc = include_str!("../../../book/src/monte-carlo.md")]
    mod monte_carlo {}
}
