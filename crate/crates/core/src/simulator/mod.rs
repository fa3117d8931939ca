//! Monte Carlo simulation of the cellular model.
//!
//! Each replication samples Poisson BSs in a disk, then
//!
//! * records the sorted path-loss-fading values `ξ₀ ≤ ξ₁ ≤ …` seen from the
//!   origin (no BS placed there);
//! * adds a BS at the origin, samples Poisson users, associates every user to
//!   its best server and accumulates `n_o` and `S_o(f)` for the origin BS.
//!
//! All randomness is keyed by `(seed, replication, role, ids)`, so output is
//! independent of thread count and growing a window only adds points.

pub mod engine;
pub mod sizing;
pub mod stats;

use std::io::Write;

use rayon::prelude::*;

use crate::capacity::CapacityFunction;
use crate::channel::NetworkModel;
use crate::error::{Error, Result};
use crate::intensity::IntensityFunction;
use crate::numerics::{Point, RandomStream};

pub use engine::{path_loss_fading, sample_shells, Site, ORIGIN_BS_ID};
pub use sizing::Windows;
pub use stats::{
    batched_variance_standard_error, ks_critical_value, ks_statistic, ks_statistic_censored,
    summarize, summarize_with_cdf, Histogram, SummaryStats,
};

const TAG_BS: u64 = 1;
const TAG_USERS: u64 = 2;
const TAG_ORIGIN_FADING: u64 = 3;
const TAG_CELL_FADING: u64 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub network: NetworkModel,
    /// BS window radius; auto-sized when `None`.
    pub bs_window_radius: Option<f64>,
    /// User window radius; half the BS window when `None`.
    pub user_window_radius: Option<f64>,
    pub replications: usize,
    pub master_seed: u64,
    pub truncation_epsilon: f64,
    pub capacity_functions: Vec<CapacityFunction>,
    /// Levels at which outage and coverage counts will be read.
    pub thresholds: Vec<f64>,
    /// Number of order statistics `ξ₀, …` that must be resolved.
    pub tracked_orders: usize,
    /// Worker threads; the global pool when `None`.
    pub threads: Option<usize>,
}

impl SimulationConfig {
    pub fn new(network: NetworkModel) -> Self {
        Self {
            network,
            bs_window_radius: None,
            user_window_radius: None,
            replications: 1000,
            master_seed: 0,
            truncation_epsilon: 1e-3,
            capacity_functions: Vec::new(),
            thresholds: Vec::new(),
            tracked_orders: 3,
            threads: None,
        }
    }
}

/// Values seen from the origin in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginProcess {
    /// Uncensored values (`≤ β_max`), ascending.
    pub values: Vec<f64>,
    /// Number of values above `β_max`.
    pub censored: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub origin: OriginProcess,
    /// Users served by the origin BS.
    pub n_o: u64,
    /// `S_o(f)` per configured capacity function.
    pub capacities: Vec<f64>,
    /// Users simulated in the window.
    pub users: u64,
}

#[derive(Debug, Clone)]
pub struct Simulator {
    config: SimulationConfig,
    windows: Windows,
}

fn positive_radius(name: &str, r: f64) -> Result<f64> {
    if r > 0.0 && r.is_finite() {
        Ok(r)
    } else {
        Err(Error::domain(format!("{name} must be positive, got {r}")))
    }
}

impl Simulator {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        if config.replications < 1 {
            return Err(Error::domain("need at least one replication"));
        }
        let eps = config.truncation_epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("truncation epsilon must lie in (0, 1), got {eps}")));
        }
        if config.threads == Some(0) {
            return Err(Error::domain("thread count must be positive"));
        }
        let network = config.network;
        let intensity = IntensityFunction::new(&network)?;
        let beta_max = sizing::beta_max(
            &network,
            &intensity,
            &config.thresholds,
            &config.capacity_functions,
            config.tracked_orders,
            eps,
        )?;
        let windows = match (config.bs_window_radius, config.user_window_radius) {
            (None, None) => sizing::auto_windows(&network, &intensity, beta_max, eps)?,
            (bs, user) => {
                let bs_radius = match (bs, user) {
                    (Some(b), _) => positive_radius("BS window radius", b)?,
                    (None, Some(u)) => 2.0 * positive_radius("user window radius", u)?,
                    (None, None) => unreachable!(),
                };
                let user_radius = match user {
                    Some(u) => positive_radius("user window radius", u)?,
                    None => bs_radius / 2.0,
                };
                if user_radius > bs_radius {
                    return Err(Error::domain("user window must not exceed the BS window"));
                }
                let w = Windows {
                    bs_radius,
                    user_radius,
                    beta_max,
                };
                sizing::check_budget(&network, &w)?;
                w
            }
        };
        Ok(Self { config, windows })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    pub fn windows(&self) -> &Windows {
        &self.windows
    }

    fn bs_sites(&self, root: &RandomStream) -> Result<Vec<Site>> {
        sample_shells(
            self.config.network.lambda_b,
            self.windows.bs_radius,
            &root.substream(TAG_BS),
        )
    }

    fn user_sites(&self, root: &RandomStream) -> Result<Vec<Site>> {
        sample_shells(
            self.config.network.lambda_m,
            self.windows.user_radius,
            &root.substream(TAG_USERS),
        )
    }

    fn origin_process(&self, root: &RandomStream, bs: &[Site]) -> OriginProcess {
        let net = &self.config.network;
        let fading = root.substream(TAG_ORIGIN_FADING);
        let mut values = Vec::new();
        let mut censored = 0;
        for site in bs {
            let s = path_loss_fading(net, site.position, &mut fading.substream(site.id));
            if s <= self.windows.beta_max {
                values.push(s);
            } else {
                censored += 1;
            }
        }
        values.sort_by(f64::total_cmp);
        OriginProcess { values, censored }
    }

    /// One replication: the origin process and the typical cell.
    pub fn replicate(&self, replication: u64) -> Result<ReplicationRecord> {
        let net = &self.config.network;
        let root = RandomStream::new(self.config.master_seed, replication);
        let bs = self.bs_sites(&root)?;
        let origin = self.origin_process(&root, &bs);

        let users = self.user_sites(&root)?;
        let grid = engine::Grid::new(&bs, self.windows.bs_radius, 1.0 / net.lambda_b.sqrt());
        let fading = root.substream(TAG_CELL_FADING);
        let functions = &self.config.capacity_functions;
        let mut n_o = 0;
        let mut capacities = vec![0.0; functions.len()];
        for user in &users {
            let keyed = fading.substream(user.id);
            let s_o = path_loss_fading(net, user.position, &mut keyed.substream(ORIGIN_BS_ID));
            // The origin BS has index 0 and wins ties.
            let beaten = grid.any_outward(user.position, |i| {
                let y = &bs[i];
                let d = Point::new(user.position.x - y.position.x, user.position.y - y.position.y);
                path_loss_fading(net, d, &mut keyed.substream(y.id)) < s_o
            });
            if !beaten {
                n_o += 1;
                for (total, f) in capacities.iter_mut().zip(functions) {
                    *total += f.evaluate(s_o);
                }
            }
        }
        Ok(ReplicationRecord {
            origin,
            n_o,
            capacities,
            users: users.len() as u64,
        })
    }

    /// Full association of one replication: the number of users served by
    /// each BS, the origin BS first, then the sampled BSs in id order.
    pub fn cell_counts(&self, replication: u64) -> Result<Vec<u64>> {
        let net = &self.config.network;
        let root = RandomStream::new(self.config.master_seed, replication);
        let bs = self.bs_sites(&root)?;
        let users = self.user_sites(&root)?;
        let fading = root.substream(TAG_CELL_FADING);
        let mut counts = vec![0u64; bs.len() + 1];
        for user in &users {
            let keyed = fading.substream(user.id);
            let mut best = path_loss_fading(net, user.position, &mut keyed.substream(ORIGIN_BS_ID));
            let mut best_index = 0;
            for (i, y) in bs.iter().enumerate() {
                let d = Point::new(user.position.x - y.position.x, user.position.y - y.position.y);
                let s = path_loss_fading(net, d, &mut keyed.substream(y.id));
                if s < best {
                    best = s;
                    best_index = i + 1;
                }
            }
            counts[best_index] += 1;
        }
        Ok(counts)
    }

    pub fn run(&self) -> Result<SimulationOutput> {
        let reps = self.config.replications as u64;
        let work = || {
            (0..reps)
                .into_par_iter()
                .map(|r| self.replicate(r))
                .collect::<Result<Vec<_>>>()
        };
        let records = match self.config.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::domain(e.to_string()))?
                .install(work)?,
            None => work()?,
        };
        Ok(SimulationOutput {
            windows: self.windows,
            names: self.config.capacity_functions.iter().map(|f| f.name()).collect(),
            tracked_orders: self.config.tracked_orders,
            records,
        })
    }
}

/// Formats a float with 17 significant digits; infinities as `inf`/`-inf`.
pub fn format_float(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub windows: Windows,
    pub names: Vec<String>,
    pub tracked_orders: usize,
    pub records: Vec<ReplicationRecord>,
}

impl SimulationOutput {
    fn check_level(&self, t: f64) -> Result<()> {
        if t > self.windows.beta_max {
            return Err(Error::domain(format!(
                "level {t} exceeds the censoring level {}",
                self.windows.beta_max
            )));
        }
        Ok(())
    }

    /// Per replication, 1 if `ξ₀ > t` and 0 otherwise.
    pub fn outage_indicators(&self, t: f64) -> Result<Vec<f64>> {
        self.check_level(t)?;
        Ok(self
            .records
            .iter()
            .map(|r| match r.origin.values.first() {
                Some(&x) if x <= t => 0.0,
                _ => 1.0,
            })
            .collect())
    }

    /// Per replication, the number of values `≤ t` seen from the origin.
    pub fn coverage_counts(&self, t: f64) -> Result<Vec<f64>> {
        self.check_level(t)?;
        Ok(self
            .records
            .iter()
            .map(|r| r.origin.values.partition_point(|&x| x <= t) as f64)
            .collect())
    }

    /// Uncensored samples of `ξ_m`; the rest of the replications are
    /// censored at `β_max`.
    pub fn xi_observed(&self, m: usize) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.origin.values.get(m).copied())
            .collect()
    }

    pub fn n_o(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.n_o as f64).collect()
    }

    pub fn capacity(&self, index: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.capacities[index]).collect()
    }

    /// Long-format CSV: `replication,statistic_name,value,censored_flag`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["replication", "statistic_name", "value", "censored_flag"])
            .map_err(io)?;
        for (rep, r) in self.records.iter().enumerate() {
            let rep = rep.to_string();
            for m in 0..self.tracked_orders {
                let (v, c) = match r.origin.values.get(m) {
                    Some(&x) => (x, "0"),
                    None => (self.windows.beta_max, "1"),
                };
                w.write_record([rep.as_str(), &format!("xi_{m}"), &format_float(v), c])
                    .map_err(io)?;
            }
            w.write_record([rep.as_str(), "n_o", &r.n_o.to_string(), "0"])
                .map_err(io)?;
            w.write_record([rep.as_str(), "users", &r.users.to_string(), "0"])
                .map_err(io)?;
            for (name, v) in self.names.iter().zip(&r.capacities) {
                w.write_record([rep.as_str(), &format!("S_o:{name}"), &format_float(*v), "0"])
                    .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))?;
        Ok(())
    }
}
