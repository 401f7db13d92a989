//! Monte-Carlo valuation on the observation grid.
//!
//! Each path draws its normals from its own ChaCha8 stream, selected by the
//! path (or antithetic pair) index, so the estimate depends only on the seed
//! and the inputs. Paths are grouped into fixed blocks; blocks may run on
//! any thread but are merged in index order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Compounding, Contract, MarketParams, MaxDistParams};

/// Default ceiling on normal draws per run (2^33).
pub const DEFAULT_BUDGET: u128 = 1 << 33;

const BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub n_paths: u64,
    pub seed: u64,
    /// Simulation steps per observation period. The high-water mark is
    /// checked on every step, so the effective observation count is
    /// `N * substeps_per_observation`.
    pub substeps_per_observation: u32,
    pub antithetic: bool,
    /// Worker threads; `None` uses the global rayon pool. Has no effect on
    /// the result.
    pub threads: Option<usize>,
    pub budget: u128,
}

impl SimulationSpec {
    pub fn new(n_paths: u64, seed: u64) -> Self {
        Self {
            n_paths,
            seed,
            substeps_per_observation: 1,
            antithetic: false,
            threads: None,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    pub fn with_substeps(mut self, substeps: u32) -> Self {
        self.substeps_per_observation = substeps;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Independent draws: one per pair in antithetic mode.
    fn draws(&self) -> u64 {
        if self.antithetic {
            self.n_paths.div_ceil(2)
        } else {
            self.n_paths
        }
    }

    fn check(&self, steps_per_path: u64) -> Result<()> {
        if self.n_paths == 0 || self.substeps_per_observation == 0 {
            return Err(Error::Domain("n_paths and substeps must be at least 1".into()));
        }
        let required = u128::from(self.draws()) * u128::from(steps_per_path);
        if required > self.budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn run<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T> {
        match self.threads {
            None => Ok(job()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: u64,
}

/// Generator for one path, fixed by `(seed, index)`.
pub fn path_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fills `out[n]` with `x(t_{n+1})` using the exact scheme
/// `x_{n+1} = x_n + mu dt + v sqrt(dt) Z_n`, starting from `x(0) = 0`.
pub fn fill_log_path(out: &mut [f64], mu: f64, v: f64, dt: f64, mut normal: impl FnMut() -> f64) {
    let drift = mu * dt;
    let diffusion = v * dt.sqrt();
    let mut x = 0.0;
    for slot in out.iter_mut() {
        x += drift + diffusion * normal();
        *slot = x;
    }
}

/// Log-returns `x(t_1), ..., x(t_n)` of the fund, or of the tilted fund
/// `S(t) e^{-gamma t}` when `gamma` is given.
pub fn simulate_log_returns(
    n_steps: usize,
    dt: f64,
    market: &MarketParams,
    gamma: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let mu = market.r - market.y - gamma.unwrap_or(0.0) - 0.5 * market.v * market.v;
    let mut out = vec![0.0; n_steps];
    fill_log_path(&mut out, mu, market.v, dt, || StandardNormal.sample(rng));
    out
}

/// Terminal value of the reset recursion
///
/// ```text
/// Hw(t_n) = max(S(t_n)/S(0), Hw(t_{n-1}))
/// V(t_n)  = max(Hw(t_n), g V(t_{n-1}))
/// ```
///
/// with `g` the one-period guarantee growth.
pub fn payoff_recursion(
    observed_ratios: &[f64],
    gamma: f64,
    dt: f64,
    compounding: Compounding,
    initial_hw: f64,
    initial_v: f64,
) -> f64 {
    let g = compounding.growth(gamma, dt);
    let mut hw = initial_hw;
    let mut value = initial_v;
    for &ratio in observed_ratios {
        hw = hw.max(ratio);
        value = hw.max(g * value);
    }
    debug_assert!({
        let maturity = dt * observed_ratios.len() as f64;
        let unrolled = payoff_unrolled(observed_ratios, gamma, maturity, compounding, initial_hw, initial_v);
        (value - unrolled).abs() <= 1e-12 * value.abs().max(1.0)
    });
    value
}

/// The recursion unrolled: `max(V0 G(T), max_n Hw(t_n) G(T - t_n))` where
/// `G(s)` is the guarantee growth over `s` years and `t_n = n T / N`.
///
/// Continuous growth is evaluated from the remaining time, so two grids
/// that share a date apply bit-identical factors on it.
pub fn payoff_unrolled(
    observed_ratios: &[f64],
    gamma: f64,
    maturity: f64,
    compounding: Compounding,
    initial_hw: f64,
    initial_v: f64,
) -> f64 {
    let n = observed_ratios.len();
    let dates = n as f64;
    let growth = |k: usize| match compounding {
        Compounding::Continuous => (gamma * (maturity - k as f64 * maturity / dates)).exp(),
        Compounding::Simple => (1.0 + gamma * maturity / dates).powi((n - k) as i32),
    };
    let mut hw = initial_hw;
    let mut best = initial_v * growth(0);
    for (i, &ratio) in observed_ratios.iter().enumerate() {
        hw = hw.max(ratio);
        best = best.max(hw * growth(i + 1));
    }
    best
}

/// Count, mean and sum of squared deviations; merged with Chan's formula.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + d * b.n / n,
            m2: a.m2 + b.m2 + d * d * a.n * b.n / n,
        }
    }
}

/// Merges in a fixed binary tree over block order.
fn tree_merge(blocks: &[Moments]) -> Moments {
    match blocks.len() {
        0 => Moments::default(),
        1 => blocks[0],
        n => {
            let (l, r) = blocks.split_at(n / 2);
            Moments::merge(tree_merge(l), tree_merge(r))
        }
    }
}

/// Per-path inputs shared by all paths of one pricing run.
struct PathModel {
    spot: f64,
    strike: f64,
    mu: f64,
    v: f64,
    dt: f64,
    gamma: f64,
    compounding: Compounding,
    steps: usize,
}

impl PathModel {
    fn payoff(&self, normals: &[f64], sign: f64, ratios: &mut [f64]) -> f64 {
        let mut it = normals.iter();
        fill_log_path(ratios, self.mu, self.v, self.dt, || sign * it.next().copied().unwrap_or(0.0));
        for r in ratios.iter_mut() {
            *r = self.spot * r.exp();
        }
        payoff_recursion(ratios, self.gamma, self.dt, self.compounding, self.strike, self.strike)
    }
}

/// Discounted expected payoff, simulating the untilted fund on the
/// observation grid and applying the reset recursion path by path.
pub fn mc_price(contract: &Contract, spec: &SimulationSpec) -> Result<McEstimate> {
    let terms = contract.terms();
    let market = contract.market();
    let steps = terms.n_observations as usize * spec.substeps_per_observation as usize;
    spec.check(steps as u64)?;
    let (spot, strike) = contract.normalized_spot_strike();
    let model = PathModel {
        spot,
        strike,
        mu: market.r - market.y - 0.5 * market.v * market.v,
        v: market.v,
        dt: terms.maturity / steps as f64,
        gamma: terms.gamma,
        compounding: terms.compounding,
        steps,
    };
    let scale = terms.notional * (-market.r * terms.maturity).exp();
    let draws = spec.draws();
    let n_blocks = draws.div_ceil(BLOCK as u64);
    let antithetic = spec.antithetic;
    let seed = spec.seed;

    let blocks: Vec<Moments> = spec.run(|| {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let mut normals = vec![0.0; model.steps];
                let mut ratios = vec![0.0; model.steps];
                let mut m = Moments::default();
                let start = b * BLOCK as u64;
                let end = (start + BLOCK as u64).min(draws);
                for i in start..end {
                    let mut rng = path_stream(seed, i);
                    for z in normals.iter_mut() {
                        *z = StandardNormal.sample(&mut rng);
                    }
                    let up = model.payoff(&normals, 1.0, &mut ratios);
                    let sample = if antithetic {
                        0.5 * (up + model.payoff(&normals, -1.0, &mut ratios))
                    } else {
                        up
                    };
                    m.push(scale * sample);
                }
                m
            })
            .collect()
    })?;

    let total = tree_merge(&blocks);
    let var = if total.n > 1.0 { total.m2 / (total.n - 1.0) } else { 0.0 };
    Ok(McEstimate {
        value: total.mean,
        std_error: (var / total.n).sqrt(),
        n_paths: if antithetic { 2 * draws } else { draws },
    })
}

/// Per-path maximum of `max(0, x(t_1), ..., x(t_n))` for `x` with drift
/// `p.mu` and volatility `p.v` over `[0, p.horizon]`.
pub fn mc_running_max_sample(spec: &SimulationSpec, p: &MaxDistParams, n_steps: usize) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Err(Error::Domain("n_steps must be at least 1".into()));
    }
    spec.check(n_steps as u64)?;
    let dt = p.horizon / n_steps as f64;
    let (mu, v, seed) = (p.mu, p.v, spec.seed);
    spec.run(|| {
        (0..spec.n_paths)
            .into_par_iter()
            .map_init(
                || vec![0.0; n_steps],
                |path, i| {
                    let mut rng = path_stream(seed, i);
                    fill_log_path(path, mu, v, dt, || StandardNormal.sample(&mut rng));
                    path.iter().fold(0.0_f64, |m, &x| m.max(x))
                },
            )
            .collect()
    })
}

/// Payoffs of the same paths observed on a coarse grid of `coarse_n` dates
/// and on the refined grid of `coarse_n * factor` dates. The fine path is
/// drawn first and the coarse grid reads every `factor`-th point; both use
/// [`payoff_unrolled`].
pub fn nested_grid_payoffs(
    contract: &Contract,
    spec: &SimulationSpec,
    coarse_n: u32,
    factor: u32,
) -> Result<Vec<(f64, f64)>> {
    if coarse_n == 0 || factor == 0 {
        return Err(Error::Domain("grid sizes must be at least 1".into()));
    }
    let fine_steps = coarse_n as usize * factor as usize;
    spec.check(fine_steps as u64)?;
    let terms = contract.terms();
    let market = contract.market();
    let (spot, strike) = contract.normalized_spot_strike();
    let mu = market.r - market.y - 0.5 * market.v * market.v;
    let fine_dt = terms.maturity / fine_steps as f64;
    let seed = spec.seed;
    spec.run(|| {
        (0..spec.n_paths)
            .into_par_iter()
            .map(|i| {
                let mut rng = path_stream(seed, i);
                let mut fine = vec![0.0; fine_steps];
                fill_log_path(&mut fine, mu, market.v, fine_dt, || StandardNormal.sample(&mut rng));
                for x in fine.iter_mut() {
                    *x = spot * x.exp();
                }
                let coarse: Vec<f64> = fine.iter().skip(factor as usize - 1).step_by(factor as usize).copied().collect();
                let c = payoff_unrolled(&coarse, terms.gamma, terms.maturity, terms.compounding, strike, strike);
                let f = payoff_unrolled(&fine, terms.gamma, terms.maturity, terms.compounding, strike, strike);
                (c, f)
            })
            .collect()
    })
}

/// Kolmogorov-Smirnov distance between a sample and a distribution function.
pub fn ks_distance(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs())
    })
}
