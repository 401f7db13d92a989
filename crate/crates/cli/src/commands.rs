#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;

use hwm::analytic::{continuous_price, discrete_price_with, Monitoring};
use hwm::maxdist::{max_cdf, max_pdf};
use hwm::mc::mc_price;
use hwm::quadrature::oracle_price;
use hwm::sweep::{sweep, SWEEP_COLUMNS};
use hwm::types::{validate, Contract, MaxDistParams, Method};
use serde::Serialize;

use crate::config::{Format, PriceMethod, RunConfig};

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Validation(String),
    /// Exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<hwm::Error> for CliError {
    fn from(e: hwm::Error) -> Self {
        match e {
            hwm::Error::Validation(errs) => CliError::Validation(
                errs.iter()
                    .map(|e| format!("{}: {}", e.field, e.message))
                    .collect::<Vec<_>>()
                    .join("\n"),
            ),
            e @ (hwm::Error::Domain(_) | hwm::Error::BudgetExceeded { .. }) => CliError::Validation(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn params_comment(cfg: &RunConfig) -> String {
    format!("# params: {}\n", serde_json::to_string(cfg).expect("config serializes"))
}

fn contract(cfg: &RunConfig) -> Result<Contract, CliError> {
    if cfg.n.is_empty() {
        return Err(CliError::Validation("N: at least one observation count is required".into()));
    }
    Ok(validate(&cfg.market(), &cfg.terms(), &cfg.state())?)
}

#[derive(Debug, Serialize)]
pub struct PriceRecord<'a> {
    pub method: &'static str,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    pub params: &'a RunConfig,
}

pub fn cmd_price(cfg: &RunConfig) -> Result<String, CliError> {
    let c = contract(cfg)?;
    let mut records = Vec::new();
    for &m in &cfg.method {
        let (method, value, std_error, epsilon, warning) = match m {
            PriceMethod::Continuous => {
                let p = continuous_price(&c)?;
                (p.method, p.value, None, Some(0.0), p.warning)
            }
            PriceMethod::Discrete => {
                let p = discrete_price_with(&c, cfg.correction.into())?;
                (p.method, p.value, None, p.epsilon_used, p.warning)
            }
            PriceMethod::Quadrature => {
                let p = oracle_price(&c, &cfg.quadrature(), Monitoring::Continuous)?;
                (p.method, p.value, None, Some(0.0), None)
            }
            PriceMethod::Mc => {
                let e = mc_price(&c, &cfg.simulation())?;
                (Method::MonteCarlo, e.value, Some(e.std_error), None, None)
            }
        };
        records.push(PriceRecord {
            method: method.as_str(),
            value,
            std_error,
            epsilon,
            warning,
            params: cfg,
        });
    }
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => {
            let text = if records.len() == 1 {
                serde_json::to_string_pretty(&records[0])
            } else {
                serde_json::to_string_pretty(&records)
            };
            Ok(text.expect("records serialize") + "\n")
        }
        Format::Csv => {
            let mut out = params_comment(cfg);
            out.push_str("method,value,std_error,epsilon\n");
            for r in &records {
                let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
                writeln!(out, "{},{},{},{}", r.method, num(r.value), opt(r.std_error), opt(r.epsilon)).unwrap();
            }
            Ok(out)
        }
    }
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let c = contract(cfg)?;
    let rows = sweep(&c, &cfg.n, &cfg.simulation(), cfg.correction.into())?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = params_comment(cfg);
            out.push_str(&SWEEP_COLUMNS.join(","));
            out.push('\n');
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.n_observations,
                    num(r.delta_t),
                    num(r.epsilon),
                    num(r.analytic_discrete),
                    num(r.analytic_continuous),
                    num(r.mc_value),
                    num(r.mc_stderr)
                )
                .unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Sweep<'a> {
                params: &'a RunConfig,
                rows: &'a [hwm::sweep::SweepRow],
            }
            Ok(serde_json::to_string_pretty(&Sweep { params: cfg, rows: &rows }).expect("rows serialize") + "\n")
        }
    }
}

/// Grid from `--h`, or evenly spaced on `[0, h_max]`.
fn density_grid(cfg: &RunConfig, p: &MaxDistParams) -> Result<Vec<f64>, CliError> {
    if let Some(h) = &cfg.h {
        if h.is_empty() {
            return Err(CliError::Validation("h: grid is empty".into()));
        }
        if let Some(bad) = h.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(CliError::Validation(format!("h: grid values must be non-negative, got {bad}")));
        }
        return Ok(h.clone());
    }
    let h_max = cfg
        .h_max
        .unwrap_or_else(|| (p.mu * p.horizon).max(0.0) + 6.0 * p.sigma());
    if !(h_max > 0.0) || cfg.h_points < 2 {
        return Err(CliError::Validation("h-max must be positive and h-points at least 2".into()));
    }
    let step = h_max / (cfg.h_points - 1) as f64;
    Ok((0..cfg.h_points).map(|i| i as f64 * step).collect())
}

pub fn cmd_density(cfg: &RunConfig) -> Result<String, CliError> {
    let c = validate(&cfg.market(), &cfg.terms().with_observations(1), &cfg.state())?;
    let p = c.tilted_params();
    let grid = density_grid(cfg, &p)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut out = params_comment(cfg);
            out.push_str("h,pdf,cdf\n");
            for &h in &grid {
                writeln!(out, "{},{},{}", num(h), num(max_pdf(h, &p)), num(max_cdf(h, &p))).unwrap();
            }
            Ok(out)
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Point {
                h: f64,
                pdf: f64,
                cdf: f64,
            }
            #[derive(Serialize)]
            struct Density<'a> {
                params: &'a RunConfig,
                mu: f64,
                points: Vec<Point>,
            }
            let points = grid
                .iter()
                .map(|&h| Point {
                    h,
                    pdf: max_pdf(h, &p),
                    cdf: max_cdf(h, &p),
                })
                .collect();
            Ok(serde_json::to_string_pretty(&Density { params: cfg, mu: p.mu, points }).expect("density serializes") + "\n")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Overrides;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(0.1).len(), "1.0000000000000001e-1".len());
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn validation_errors_map_to_exit_two() {
        let cfg = RunConfig::resolve(
            Overrides {
                v: Some(0.0),
                ..Default::default()
            },
            None,
        );
        let err = cmd_price(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.message().contains("volatility must be positive"));
    }

    #[test]
    fn density_grid_rejects_negative_points() {
        let cfg = RunConfig::resolve(
            Overrides {
                h: Some(vec![0.0, -0.1]),
                ..Default::default()
            },
            None,
        );
        assert_eq!(cmd_density(&cfg).unwrap_err().exit_code(), 2);
    }
}
