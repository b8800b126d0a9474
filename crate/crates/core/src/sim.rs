//! Discrete-event Monte Carlo oracle for infinite-server networks.
//!
//! With infinite servers customers never interact, so a replication is just:
//! draw the exogenous Poisson arrivals per node over `[0, horizon]`, walk
//! each customer's route through the network (every hop adds a sampled
//! service time, exits follow the routing row's leftover probability), and
//! union the resulting occupancy intervals. Busy periods are the maximal
//! intervals where at least one customer is present, recovered exactly from
//! the arrival and final-departure instants - no time discretization.
//!
//! Conventions:
//!
//! - When `condition_on_bp_start` is set (the default), one arrival is
//!   planted at `t = 0` so the horizon opens on a busy period, matching the
//!   convention under which the busy-period count bounds are stated. The
//!   planted customer enters at a node drawn from the exogenous-rate mix.
//! - The busy-period count is the number of busy periods beginning in
//!   `[0, horizon]`, the planted one included.
//! - Customers still in service at the horizon are followed to completion so
//!   the occupancy process stays exact, but a busy period that is still open
//!   at the horizon is marked incomplete: no new arrivals exist past the
//!   horizon to extend it, so its observed length is censored.
//! - Busy-period length and customers-served averages use only completed
//!   busy periods that also *begin in the first half of the horizon*. Ruling
//!   out late starters removes the horizon-end selection against long busy
//!   periods (a busy period's start time is independent of its own length,
//!   so the windowed sample is unbiased; whether a completed busy period is
//!   observed at all is not independent of its length near the horizon).
//!   Estimates pool busy periods across replications as a ratio, with the
//!   95% interval from the replication-level spread of that ratio.
//!
//! Replications use counter-based substreams of one seed (stream index =
//! replication index), so results are bit-identical for a fixed seed no
//! matter how many threads run them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::net::NetworkSpec;
use crate::repair::{self, RepairScenario, SubQueue};

/// Fraction of the horizon in which busy periods must begin to enter the
/// length/customers averages.
pub const SAMPLE_WINDOW_FRACTION: f64 = 0.5;

const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

/// One simulation setup.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub network: NetworkSpec,
    /// Weeks of exogenous arrivals per replication.
    pub horizon: f64,
    pub replications: u32,
    pub seed: u64,
    /// Plant an arrival at t = 0 (see module docs). Defaults to true.
    pub condition_on_bp_start: bool,
}

impl SimConfig {
    pub fn new(network: NetworkSpec, horizon: f64, replications: u32, seed: u64) -> Self {
        SimConfig {
            network,
            horizon,
            replications,
            seed,
            condition_on_bp_start: true,
        }
    }
}

/// Point estimate with a 95% normal-approximation half-width.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimulationEstimate {
    pub metric: &'static str,
    pub point: f64,
    pub ci_half_width: f64,
    pub replications: u32,
}

/// Estimates from one simulate run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SimReport {
    /// Mean busy-period length, weeks.
    pub mean_busy_period: SimulationEstimate,
    /// Mean number of busy periods beginning in `[0, horizon]`.
    pub busy_period_starts: SimulationEstimate,
    /// Mean customers served per busy period.
    pub customers_per_bp: SimulationEstimate,
    pub warnings: Vec<String>,
}

/// Per-replication tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct RepStats {
    arrivals: u64,
    bp_starts: u64,
    bp_completed: u64,
    bp_customers_total: u64,
    window_count: u64,
    window_length_sum: f64,
    window_customers_sum: f64,
}

/// Routing and sampling tables shared by all replications.
struct CompiledNetwork<'a> {
    rates: &'a [f64],
    entry_cumulative: Vec<f64>,
    route_cumulative: Vec<Vec<f64>>,
    services: &'a [crate::dist::ServiceDistribution],
}

impl<'a> CompiledNetwork<'a> {
    fn new(net: &'a NetworkSpec) -> Self {
        let total = net.total_rate();
        let mut acc = 0.0;
        let entry_cumulative = net
            .exo_rates()
            .iter()
            .map(|r| {
                acc += r / total;
                acc
            })
            .collect();
        let route_cumulative = net
            .routing()
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        CompiledNetwork {
            rates: net.exo_rates(),
            entry_cumulative,
            route_cumulative,
            services: net.services(),
        }
    }

    fn pick_entry_node<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.gen::<f64>();
        for (node, cum) in self.entry_cumulative.iter().enumerate() {
            if u < *cum {
                return node;
            }
        }
        self.entry_cumulative.len() - 1
    }

    /// Total network sojourn of a customer entering at `node`: its service
    /// there plus the services along its sampled route until it exits.
    fn sample_sojourn<R: Rng + ?Sized>(&self, mut node: usize, rng: &mut R) -> f64 {
        let mut total = 0.0;
        loop {
            total += self.services[node].sample(rng);
            let u = rng.gen::<f64>();
            let row = &self.route_cumulative[node];
            match row.iter().position(|cum| u < *cum) {
                Some(next) => node = next,
                None => return total,
            }
        }
    }
}

fn run_replication(
    net: &CompiledNetwork<'_>,
    horizon: f64,
    condition_on_bp_start: bool,
    rng: &mut ChaCha8Rng,
) -> RepStats {
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    if condition_on_bp_start {
        let node = net.pick_entry_node(rng);
        let sojourn = net.sample_sojourn(node, rng);
        intervals.push((0.0, sojourn));
    }
    for (node, &rate) in net.rates.iter().enumerate() {
        if rate <= 0.0 {
            continue;
        }
        let mut t = 0.0;
        loop {
            t += crate::dist::sample_exponential(1.0 / rate, rng);
            if t > horizon {
                break;
            }
            let sojourn = net.sample_sojourn(node, rng);
            intervals.push((t, t + sojourn));
        }
    }
    intervals.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    let window_end = SAMPLE_WINDOW_FRACTION * horizon;
    let mut stats = RepStats {
        arrivals: intervals.len() as u64,
        ..RepStats::default()
    };
    let mut current: Option<(f64, f64, u64)> = None;
    let close = |stats: &mut RepStats, (start, end, customers): (f64, f64, u64)| {
        stats.bp_starts += 1;
        stats.bp_customers_total += customers;
        if end <= horizon {
            stats.bp_completed += 1;
            if start <= window_end {
                stats.window_count += 1;
                stats.window_length_sum += end - start;
                stats.window_customers_sum += customers as f64;
            }
        }
    };
    for (arrival, departure) in intervals {
        match current {
            None => current = Some((arrival, departure, 1)),
            Some((start, end, customers)) => {
                if arrival >= end {
                    close(&mut stats, (start, end, customers));
                    current = Some((arrival, departure, 1));
                } else {
                    current = Some((start, end.max(departure), customers + 1));
                }
            }
        }
    }
    if let Some(open) = current {
        close(&mut stats, open);
    }

    debug_assert!(stats.bp_starts >= stats.bp_completed);
    debug_assert_eq!(stats.bp_customers_total, stats.arrivals);
    stats
}

fn ratio_estimate(
    metric: &'static str,
    pairs: &[(f64, f64)],
    replications: u32,
) -> SimulationEstimate {
    let n = pairs.len() as f64;
    let value_mean = pairs.iter().map(|(v, _)| v).sum::<f64>() / n;
    let count_mean = pairs.iter().map(|(_, c)| c).sum::<f64>() / n;
    if count_mean == 0.0 {
        return SimulationEstimate {
            metric,
            point: f64::NAN,
            ci_half_width: f64::NAN,
            replications,
        };
    }
    let point = value_mean / count_mean;
    let ci_half_width = if pairs.len() < 2 {
        f64::NAN
    } else {
        let spread = pairs
            .iter()
            .map(|(v, c)| {
                let d = v - point * c;
                d * d
            })
            .sum::<f64>()
            / (n - 1.0);
        Z_95 * (spread / n).sqrt() / count_mean
    };
    SimulationEstimate {
        metric,
        point,
        ci_half_width,
        replications,
    }
}

fn mean_estimate(metric: &'static str, values: &[f64], replications: u32) -> SimulationEstimate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ci_half_width = if values.len() < 2 {
        f64::NAN
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Z_95 * (var / n).sqrt()
    };
    SimulationEstimate {
        metric,
        point: mean,
        ci_half_width,
        replications,
    }
}

/// Runs the replications and aggregates the busy-period estimates.
///
/// Deterministic for a fixed `(seed, config)` regardless of how many threads
/// execute the replications.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport, SimError> {
    if cfg.replications < 1 {
        return Err(SimError::InvalidConfig("need at least 1 replication".into()));
    }
    if !(cfg.horizon.is_finite() && cfg.horizon > 0.0) {
        return Err(SimError::InvalidConfig(format!(
            "horizon must be finite and > 0, got {}",
            cfg.horizon
        )));
    }
    let diagnostics = cfg.network.validate();
    if !diagnostics.is_empty() {
        let list: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
        return Err(SimError::InvalidConfig(format!(
            "network failed validation: {}",
            list.join("; ")
        )));
    }

    let compiled = CompiledNetwork::new(&cfg.network);
    let stats: Vec<RepStats> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(u64::from(rep));
            run_replication(&compiled, cfg.horizon, cfg.condition_on_bp_start, &mut rng)
        })
        .collect();

    let length_pairs: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| (s.window_length_sum, s.window_count as f64))
        .collect();
    let customer_pairs: Vec<(f64, f64)> = stats
        .iter()
        .map(|s| (s.window_customers_sum, s.window_count as f64))
        .collect();
    let start_counts: Vec<f64> = stats.iter().map(|s| s.bp_starts as f64).collect();

    let mut warnings = Vec::new();
    if cfg.replications < 30 {
        warnings.push(format!(
            "{} replications: the normal-approximation 95% intervals are unreliable below 30",
            cfg.replications
        ));
    }
    if stats.iter().all(|s| s.window_count == 0) {
        warnings.push(
            "no completed busy periods began in the sampling window; length and customer \
             estimates are undefined"
                .into(),
        );
    }

    Ok(SimReport {
        mean_busy_period: ratio_estimate("mean_busy_period", &length_pairs, cfg.replications),
        busy_period_starts: mean_estimate("busy_period_starts", &start_counts, cfg.replications),
        customers_per_bp: ratio_estimate("customers_per_bp", &customer_pairs, cfg.replications),
        warnings,
    })
}

/// Shared knobs for the per-sub-queue runs.
#[derive(Debug, Clone, Copy)]
pub struct SimSettings {
    pub horizon: f64,
    pub replications: u32,
    pub seed: u64,
    pub condition_on_bp_start: bool,
}

impl SimSettings {
    pub fn new(horizon: f64, replications: u32, seed: u64) -> Self {
        SimSettings {
            horizon,
            replications,
            seed,
            condition_on_bp_start: true,
        }
    }
}

/// A single-node network standing in for one sub-queue.
pub fn single_queue_network(label: &str, rate: f64, service: crate::dist::ServiceDistribution) -> NetworkSpec {
    NetworkSpec::new(
        vec![label.to_string()],
        vec![rate],
        vec![vec![0.0]],
        vec![service],
    )
}

/// Simulates the four repair sub-queues independently (global mixture, base,
/// station, transport convolution), each on its own seed substream derived
/// from `settings.seed`. Zero-rate sub-queues are reported as absent rather
/// than simulated.
pub fn simulate_subqueues(
    sc: &RepairScenario,
    settings: &SimSettings,
) -> Result<Vec<(SubQueue, Option<SimReport>)>, SimError> {
    repair::sub_queues(sc)
        .into_iter()
        .map(|queue| {
            if queue.lambda_sub <= 0.0 {
                return Ok((queue, None));
            }
            let cfg = SimConfig {
                network: single_queue_network(
                    queue.kind.label(),
                    queue.lambda_sub,
                    queue.service.clone(),
                ),
                horizon: settings.horizon,
                replications: settings.replications,
                seed: derive_seed(settings.seed, queue.kind.index() as u64),
                condition_on_bp_start: settings.condition_on_bp_start,
            };
            let report = simulate(&cfg)?;
            Ok((queue, Some(report)))
        })
        .collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable substream seed for `(master, salt)` pairs, used to keep parallel
/// runs of different queues or sweep points on disjoint streams.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    splitmix64(master ^ splitmix64(salt.wrapping_add(0xD1B5_4A32_D192_ED03)))
}
