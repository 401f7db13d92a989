//! Run configuration: a flat JSON object whose keys match the CLI flags.
//! Flags override file values; unset values fall back to the defaults
//! below.

use std::path::{Path, PathBuf};

use hwm::analytic::CorrectionConstant;
use hwm::mc::{SimulationSpec, DEFAULT_BUDGET};
use hwm::quadrature::QuadratureSpec;
use hwm::types::{Compounding, ContractState, ContractTerms, MarketParams};
use serde::{Deserialize, Serialize};

/// Environment variable overriding the Monte-Carlo draw budget.
pub const BUDGET_ENV: &str = "HWM_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PriceMethod {
    Continuous,
    Discrete,
    Quadrature,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Correction {
    HalfNormal,
    Bgk,
}

impl From<Correction> for CorrectionConstant {
    fn from(c: Correction) -> Self {
        match c {
            Correction::HalfNormal => CorrectionConstant::HalfNormalMean,
            Correction::Bgk => CorrectionConstant::BroadieGlassermanKou,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CompoundingArg {
    Continuous,
    Simple,
}

impl From<CompoundingArg> for Compounding {
    fn from(c: CompoundingArg) -> Self {
        match c {
            CompoundingArg::Continuous => Compounding::Continuous,
            CompoundingArg::Simple => Compounding::Simple,
        }
    }
}

/// A number or a list of numbers, e.g. `"N": 12` or `"N": [10, 20]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// Every setting optional; used both for the config file and for flags.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Risk-free rate (continuously compounded, per year)
    #[arg(long)]
    pub r: Option<f64>,
    /// Dividend yield per year
    #[arg(long)]
    pub y: Option<f64>,
    /// Volatility per sqrt(year)
    #[arg(long)]
    pub v: Option<f64>,
    /// Guarantee rate per year
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Maturity in years
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub maturity: Option<f64>,
    /// Observation count; a comma-separated list for `sweep`
    #[arg(long = "N", value_delimiter = ',')]
    #[serde(rename = "N", default, deserialize_with = "one_or_many")]
    pub n: Option<Vec<u32>>,
    /// Current fund price
    #[arg(long = "S")]
    #[serde(rename = "S")]
    pub spot: Option<f64>,
    /// Historical high-water mark
    #[arg(long = "SH")]
    #[serde(rename = "SH")]
    pub high_water: Option<f64>,
    /// Years since the observation giving the highest guarantee
    #[arg(long)]
    pub th: Option<f64>,
    /// Fund price at issue
    #[arg(long = "S0")]
    #[serde(rename = "S0")]
    pub issue_spot: Option<f64>,
    #[arg(long)]
    pub notional: Option<f64>,
    /// Pricing routes for `price`, comma separated
    #[arg(long, value_delimiter = ',', value_enum)]
    #[serde(default, deserialize_with = "one_or_many")]
    pub method: Option<Vec<PriceMethod>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte-Carlo paths
    #[arg(long)]
    pub paths: Option<u64>,
    /// Simulation steps per observation period
    #[arg(long)]
    pub substeps: Option<u32>,
    #[arg(long, value_enum)]
    pub compounding: Option<CompoundingArg>,
    /// Continuity-correction constant for discrete observation
    #[arg(long, value_enum)]
    pub correction: Option<Correction>,
    /// Antithetic variates in Monte Carlo
    #[arg(long)]
    pub antithetic: Option<bool>,
    /// Worker threads for Monte Carlo (results do not depend on it)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Log-return grid for `density`, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub h: Option<Vec<f64>>,
    /// Upper end of the default `density` grid
    #[arg(long = "h-max")]
    #[serde(rename = "h-max")]
    pub h_max: Option<f64>,
    /// Number of points in the default `density` grid
    #[arg(long = "h-points")]
    #[serde(rename = "h-points")]
    pub h_points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Option::<OneOrMany<T>>::deserialize(d).map(|o| o.map(Into::into))
}

macro_rules! take_flags {
    ($base:ident, $flags:ident; $($f:ident),*) => {
        $( if $flags.$f.is_some() { $base.$f = $flags.$f.clone(); } )*
    };
}

impl Overrides {
    /// Layers `flags` over `self`.
    pub fn merge(mut self, flags: &Overrides) -> Overrides {
        take_flags!(self, flags; r, y, v, gamma, maturity, n, spot, high_water, th, issue_spot,
            notional, method, seed, paths, substeps, compounding, correction, antithetic, threads,
            h, h_max, h_points, out, format);
        self
    }

    pub fn from_file(path: &Path) -> Result<Overrides, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Fully resolved settings, echoed into every output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub r: f64,
    pub y: f64,
    pub v: f64,
    pub gamma: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
    #[serde(rename = "N")]
    pub n: Vec<u32>,
    #[serde(rename = "S")]
    pub spot: f64,
    #[serde(rename = "SH")]
    pub high_water: f64,
    pub th: f64,
    #[serde(rename = "S0")]
    pub issue_spot: f64,
    pub notional: f64,
    pub method: Vec<PriceMethod>,
    pub seed: u64,
    pub paths: u64,
    pub substeps: u32,
    pub compounding: CompoundingArg,
    pub correction: Correction,
    pub antithetic: bool,
    pub budget: u128,
    #[serde(skip)]
    pub threads: Option<usize>,
    #[serde(skip)]
    pub h: Option<Vec<f64>>,
    #[serde(skip)]
    pub h_max: Option<f64>,
    #[serde(skip)]
    pub h_points: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Option<Format>,
}

impl RunConfig {
    /// `budget` comes from [`BUDGET_ENV`] when set.
    pub fn resolve(o: Overrides, budget: Option<u128>) -> RunConfig {
        RunConfig {
            r: o.r.unwrap_or(0.05),
            y: o.y.unwrap_or(0.0),
            v: o.v.unwrap_or(0.10),
            gamma: o.gamma.unwrap_or(0.08),
            maturity: o.maturity.unwrap_or(10.0),
            n: o.n.unwrap_or_else(|| vec![12]),
            spot: o.spot.unwrap_or(1.0),
            high_water: o.high_water.or(o.issue_spot).unwrap_or(1.0),
            th: o.th.unwrap_or(0.0),
            issue_spot: o.issue_spot.unwrap_or(1.0),
            notional: o.notional.unwrap_or(1.0),
            method: o.method.unwrap_or_else(|| vec![PriceMethod::Continuous]),
            seed: o.seed.unwrap_or(42),
            paths: o.paths.unwrap_or(100_000),
            substeps: o.substeps.unwrap_or(1),
            compounding: o.compounding.unwrap_or(CompoundingArg::Continuous),
            correction: o.correction.unwrap_or(Correction::HalfNormal),
            antithetic: o.antithetic.unwrap_or(false),
            budget: budget.unwrap_or(DEFAULT_BUDGET),
            threads: o.threads,
            h: o.h,
            h_max: o.h_max,
            h_points: o.h_points.unwrap_or(201),
            out: o.out,
            format: o.format,
        }
    }

    pub fn market(&self) -> MarketParams {
        MarketParams::new(self.r, self.y, self.v)
    }

    /// Terms with the first entry of `N`.
    pub fn terms(&self) -> ContractTerms {
        ContractTerms::new(self.gamma, self.maturity, self.n.first().copied().unwrap_or(0))
            .with_notional(self.notional)
            .with_compounding(self.compounding.into())
    }

    pub fn state(&self) -> ContractState {
        ContractState::seasoned(self.spot, self.high_water, self.th, self.issue_spot)
    }

    pub fn simulation(&self) -> SimulationSpec {
        let mut spec = SimulationSpec::new(self.paths, self.seed)
            .with_substeps(self.substeps)
            .with_antithetic(self.antithetic)
            .with_budget(self.budget);
        spec.threads = self.threads;
        spec
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec::default()
    }
}

pub fn budget_from_env() -> Result<Option<u128>, String> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u128>()
            .map(Some)
            .map_err(|e| format!("{BUDGET_ENV}={v}: {e}")),
        Err(_) => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let file: Overrides = serde_json::from_str(r#"{"r": 0.03, "v": 0.2, "N": [10, 20], "method": "mc"}"#).unwrap();
        let flags = Overrides {
            r: Some(0.04),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(file.merge(&flags), None);
        assert_eq!(cfg.r, 0.04);
        assert_eq!(cfg.v, 0.2);
        assert_eq!(cfg.n, vec![10, 20]);
        assert_eq!(cfg.method, vec![PriceMethod::Mc]);
        assert_eq!(cfg.gamma, 0.08);
    }

    #[test]
    fn single_n_in_file() {
        let file: Overrides = serde_json::from_str(r#"{"N": 40, "T": 5, "SH": 1.2}"#).unwrap();
        let cfg = RunConfig::resolve(file, None);
        assert_eq!(cfg.n, vec![40]);
        assert_eq!(cfg.maturity, 5.0);
        assert_eq!(cfg.high_water, 1.2);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Overrides>(r#"{"sigma": 0.2}"#).is_err());
    }

    #[test]
    fn high_water_defaults_to_issue_spot() {
        let o = Overrides {
            issue_spot: Some(100.0),
            spot: Some(100.0),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(o, Some(10));
        assert_eq!(cfg.high_water, 100.0);
        assert_eq!(cfg.budget, 10);
    }
}
