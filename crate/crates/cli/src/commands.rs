//! Subcommand implementations. Each returns a finished CSV table; nothing is
//! written until the whole computation has succeeded.

use cellfade::analytics::Analytics;
use cellfade::channel::NetworkModel;
use cellfade::simulator::{format_float, summarize, SimulationConfig, SimulationOutput, Simulator};

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const DEFAULT_POINTS: usize = 25;
/// Default grid ends, as expected numbers `λ_B B(t)` of covering BSs.
const DEFAULT_LOW: f64 = 1e-2;
const DEFAULT_HIGH: f64 = 10.0;
/// 95% normal quantile, as used by `SummaryStats::ci95_halfwidth`.
const Z95: f64 = 1.96;
/// Flag level for `compare`.
pub const Z_LIMIT: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    OutageCurve,
    CellStats,
    XiDist,
    Simulate,
    Compare,
}

impl Command {
    pub fn file_stem(self) -> &'static str {
        match self {
            Command::OutageCurve => "outage_curve",
            Command::CellStats => "cell_stats",
            Command::XiDist => "xi_dist",
            Command::Simulate => "simulate",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub threads: Option<usize>,
    pub no_mc: bool,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub points: Option<usize>,
    /// Multiplies `B` on the analytic side only. Test hook for `compare`.
    pub b_scale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Output {
    pub command: Command,
    pub csv: Vec<u8>,
    /// Human-readable summary for the terminal.
    pub report: Option<String>,
    /// Some `compare` row has `|z| > 3`.
    pub mismatch: bool,
}

pub fn run(command: Command, config: &ScenarioConfig, options: &RunOptions) -> Result<Output, CliError> {
    let ctx = Context::new(config, options)?;
    let (table, report, mismatch) = match command {
        Command::OutageCurve => (ctx.outage_curve()?, None, false),
        Command::CellStats => (ctx.cell_stats()?, None, false),
        Command::XiDist => (ctx.xi_dist()?, None, false),
        Command::Simulate => {
            let out = ctx.simulate(Vec::new())?;
            let mut csv = Vec::new();
            out.write_csv(&mut csv)?;
            return Ok(Output {
                command,
                csv,
                report: None,
                mismatch: false,
            });
        }
        Command::Compare => {
            let (table, report, mismatch) = ctx.compare()?;
            (table, Some(report), mismatch)
        }
    };
    Ok(Output {
        command,
        csv: table.to_csv()?,
        report,
        mismatch,
    })
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

fn num(v: f64) -> String {
    format_float(v)
}

fn blank() -> String {
    String::new()
}

struct Context<'a> {
    network: NetworkModel,
    analytics: Analytics,
    config: &'a ScenarioConfig,
    options: &'a RunOptions,
}

impl<'a> Context<'a> {
    fn new(config: &'a ScenarioConfig, options: &'a RunOptions) -> Result<Self, CliError> {
        let network = config.network()?;
        let mut intensity = network.intensity()?;
        if let Some(s) = options.b_scale {
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Config(format!("--b-scale must be positive, got {s}")));
            }
            intensity = intensity.with_distortion(s);
        }
        Ok(Self {
            network,
            analytics: Analytics::with_intensity(&network, intensity),
            config,
            options,
        })
    }

    fn sim_config(&self, thresholds: Vec<f64>) -> Result<SimulationConfig, CliError> {
        let o = self.options;
        let mut cfg = self.config.simulation(o.seed, o.replications, o.threads)?;
        cfg.thresholds = thresholds;
        Ok(cfg)
    }

    fn simulate(&self, thresholds: Vec<f64>) -> Result<SimulationOutput, CliError> {
        Ok(Simulator::new(self.sim_config(thresholds)?)?.run()?)
    }

    /// Log-spaced levels; defaults span `λ_B B(t)` from 0.01 to 10.
    fn grid(&self) -> Result<Vec<f64>, CliError> {
        let o = self.options;
        let lb = self.network.lambda_b;
        let b = self.analytics.intensity();
        let t_min = match o.t_min {
            Some(t) => t,
            None => b.inverse(DEFAULT_LOW / lb)?,
        };
        let t_max = match o.t_max {
            Some(t) => t,
            None => b.inverse(DEFAULT_HIGH / lb)?,
        };
        let points = o.points.unwrap_or(DEFAULT_POINTS);
        if !(t_min > 0.0 && t_min < t_max && t_max.is_finite()) {
            return Err(CliError::Config(format!(
                "need 0 < t_min < t_max < inf, got t_min = {t_min}, t_max = {t_max}"
            )));
        }
        if points < 2 {
            return Err(CliError::Config(format!("need at least 2 points, got {points}")));
        }
        let ratio = (t_max / t_min).ln();
        let last = points - 1;
        Ok((0..points)
            .map(|i| match i {
                0 => t_min,
                i if i == last => t_max,
                i => t_min * (ratio * i as f64 / last as f64).exp(),
            })
            .collect())
    }

    fn outage_curve(&self) -> Result<Table, CliError> {
        let grid = self.grid()?;
        let mc = if self.options.no_mc {
            None
        } else {
            Some(self.simulate(grid.clone())?)
        };
        let mut table = Table::new(vec!["threshold", "outage_analytic", "outage_mc", "mc_ci95"]);
        for &t in &grid {
            let p = self.analytics.outage_probability(t)?;
            let mut row = vec![num(t), num(p)];
            match &mc {
                Some(out) => {
                    let s = summarize(&out.outage_indicators(t)?)?;
                    let n = s.count as f64;
                    let q = s.sample_mean;
                    row.push(num(q));
                    row.push(num(Z95 * (q * (1.0 - q) / n).sqrt()));
                }
                None => row.extend([blank(), blank()]),
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    fn cell_stats(&self) -> Result<Table, CliError> {
        let functions = self.config.capacity_functions()?;
        let mut table = Table::new(vec![
            "name", "m_f", "n_f", "var_lower", "var_upper", "mc_mean", "mc_var", "mc_ci95",
        ]);
        if functions.is_empty() {
            return Ok(table);
        }
        let mc = if self.options.no_mc {
            None
        } else {
            Some(self.simulate(Vec::new())?)
        };
        for (i, f) in functions.iter().enumerate() {
            let stats = self.analytics.cell_stats(f)?;
            let mut row = vec![
                f.name(),
                num(stats.mean),
                num(stats.n_value),
                num(stats.bounds.lower),
                num(stats.bounds.upper),
            ];
            match &mc {
                Some(out) => {
                    let s = summarize(&out.capacity(i))?;
                    row.push(num(s.sample_mean));
                    row.push(num(s.sample_variance));
                    row.push(num(s.ci95_halfwidth));
                }
                None => row.extend([blank(), blank(), blank()]),
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    fn xi_dist(&self) -> Result<Table, CliError> {
        let grid = self.grid()?;
        let orders = self.sim_config(Vec::new())?.tracked_orders;
        let mc = if self.options.no_mc {
            None
        } else {
            Some(self.simulate(grid.clone())?)
        };
        let mut table = Table::new(vec![
            "order", "threshold", "ccdf_analytic", "pdf_analytic", "ccdf_mc", "mc_ci95",
        ]);
        for m in 0..orders {
            // Censored values lie above every grid level.
            let observed = mc.as_ref().map(|out| {
                let mut v = out.xi_observed(m);
                v.sort_by(f64::total_cmp);
                (v, out.records.len() as f64)
            });
            for &t in &grid {
                let mut row = vec![
                    m.to_string(),
                    num(t),
                    num(self.analytics.xi_m_ccdf(m as u32, t)?),
                    num(self.analytics.xi_m_pdf(m as u32, t)?),
                ];
                match &observed {
                    Some((v, n)) => {
                        let q = 1.0 - v.partition_point(|&x| x <= t) as f64 / n;
                        row.push(num(q));
                        row.push(num(Z95 * (q * (1.0 - q) / n).sqrt()));
                    }
                    None => row.extend([blank(), blank()]),
                }
                table.rows.push(row);
            }
        }
        Ok(table)
    }

    fn compare(&self) -> Result<(Table, String, bool), CliError> {
        if self.options.no_mc {
            return Err(CliError::Config("compare needs the Monte Carlo run".into()));
        }
        let t = self.network.threshold;
        let functions = self.config.capacity_functions()?;
        let out = self.simulate(vec![t])?;
        let n = out.records.len() as f64;
        let mut rows: Vec<(String, f64, f64, f64)> = Vec::new();

        let p = self.analytics.outage_probability(t)?;
        let q = summarize(&out.outage_indicators(t)?)?.sample_mean;
        rows.push(("outage".into(), p, q, (p * (1.0 - p) / n).sqrt()));

        let mu = self.analytics.coverage_count_mean(t)?;
        let c = summarize(&out.coverage_counts(t)?)?.sample_mean;
        rows.push(("coverage_count_mean".into(), mu, c, (mu / n).sqrt()));

        let n_o = summarize(&out.n_o())?;
        rows.push(("mean_n_o".into(), self.network.load(), n_o.sample_mean, n_o.standard_error()));

        for (i, f) in functions.iter().enumerate() {
            let m = self.analytics.cell_capacity_mean(f)?;
            let s = summarize(&out.capacity(i))?;
            rows.push((format!("m({})", f.name()), m, s.sample_mean, s.standard_error()));
        }

        let mut table = Table::new(vec!["quantity", "analytic", "mc", "se", "z", "flagged"]);
        let mut report = format!(
            "compare: {} replications, T = {}, windows R_bs = {:.1}, R_user = {:.1}\n",
            out.records.len(),
            t,
            out.windows.bs_radius,
            out.windows.user_radius
        );
        let mut mismatch = false;
        for (name, analytic, mc, se) in rows {
            let z = z_score(analytic, mc, se);
            let flagged = z.abs() > Z_LIMIT;
            mismatch |= flagged;
            report.push_str(&format!(
                "  {name:<28} analytic {analytic:<12.6e} mc {mc:<12.6e} z {z:+.2}{}\n",
                if flagged { "  MISMATCH" } else { "" }
            ));
            table.rows.push(vec![
                name,
                num(analytic),
                num(mc),
                num(se),
                num(z),
                flagged.to_string(),
            ]);
        }
        report.push_str(if mismatch {
            "verdict: MISMATCH (|z| > 3)\n"
        } else {
            "verdict: ok\n"
        });
        Ok((table, report, mismatch))
    }
}

fn z_score(analytic: f64, mc: f64, se: f64) -> f64 {
    let d = mc - analytic;
    if se > 0.0 {
        d / se
    } else if d == 0.0 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}
