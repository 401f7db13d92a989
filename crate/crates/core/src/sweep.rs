//! Contract value as a function of the number of observation dates.

use serde::{Deserialize, Serialize};

use crate::analytic::{continuous_price, discrete_price_with, CorrectionConstant};
use crate::error::{Error, Result};
use crate::mc::{mc_price, SimulationSpec};
use crate::types::Contract;

/// Column names, in output order.
pub const SWEEP_COLUMNS: [&str; 7] = [
    "n_observations",
    "delta_t",
    "epsilon",
    "analytic_discrete",
    "analytic_continuous",
    "mc_value",
    "mc_stderr",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n_observations: u32,
    pub delta_t: f64,
    pub epsilon: f64,
    pub analytic_discrete: f64,
    pub analytic_continuous: f64,
    pub mc_value: f64,
    pub mc_stderr: f64,
}

/// Prices `contract` once per entry of `n_list`; only the observation count
/// changes between rows. Every row reuses `sim.seed`.
pub fn sweep(
    contract: &Contract,
    n_list: &[u32],
    sim: &SimulationSpec,
    constant: CorrectionConstant,
) -> Result<Vec<SweepRow>> {
    if n_list.is_empty() {
        return Err(Error::Domain("observation list is empty".into()));
    }
    let continuous = continuous_price(contract)?.value;
    n_list
        .iter()
        .map(|&n| {
            let c = contract.with_observations(n)?;
            let discrete = discrete_price_with(&c, constant)?;
            let mc = mc_price(&c, sim)?;
            Ok(SweepRow {
                n_observations: n,
                delta_t: c.terms().delta_t(),
                epsilon: discrete.epsilon_used.unwrap_or(0.0),
                analytic_discrete: discrete.value,
                analytic_continuous: continuous,
                mc_value: mc.value,
                mc_stderr: mc.std_error,
            })
        })
        .collect()
}
