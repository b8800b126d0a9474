//! The two-echelon repair model.
//!
//! Failures of a fleet occur as a Poisson stream at rate `lambda`; a failure
//! is detected at the remote station with probability `q` (otherwise at the
//! base), and a station-detected failure is transported to the base for
//! repair with probability `p`. Service means the whole time from failure to
//! completed repair, so a transported item's service is transport time plus
//! base repair.
//!
//! That maps onto a three-node infinite-server network (base, station,
//! transport with the transport node routing into the base), which is in turn
//! equivalent to one M|G|infinity queue whose service law is the mixture
//! built by [`global_service`]. Four sub-queues are tracked: the global
//! system plus the base, remote-station and transport streams.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::busy::{self, BusyPeriodMetrics, QueueInputs};
use crate::dist::{MixtureComponent, ServiceDistribution};
use crate::net::NetworkSpec;

pub const DEFAULT_HORIZON_WEEKS: f64 = 52.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepairError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("degenerate failure log: {0}")]
    DegenerateLog(String),
    #[error("{0}")]
    Dist(#[from] crate::dist::DistError),
    #[error("{0}")]
    Busy(#[from] crate::busy::BusyError),
}

/// One configuration of the repair system.
#[derive(Debug, Clone, PartialEq)]
pub struct RepairScenario {
    /// Failures per week.
    pub lambda: f64,
    /// Probability a failure is detected at the remote station.
    pub q: f64,
    /// Probability a station-detected failure is transported to the base.
    pub p: f64,
    /// Base repair time law.
    pub g1: ServiceDistribution,
    /// Station repair time law.
    pub g2: ServiceDistribution,
    /// Transport time law.
    pub g3: ServiceDistribution,
    /// Observation horizon, weeks.
    pub horizon: f64,
}

impl RepairScenario {
    pub fn new(
        lambda: f64,
        q: f64,
        p: f64,
        g1: ServiceDistribution,
        g2: ServiceDistribution,
        g3: ServiceDistribution,
        horizon: f64,
    ) -> Result<Self, RepairError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(RepairError::Invalid(format!(
                "failure rate must be finite and > 0, got {lambda}"
            )));
        }
        for (name, prob) in [("q", q), ("p", p)] {
            if !(prob.is_finite() && (0.0..=1.0).contains(&prob)) {
                return Err(RepairError::Invalid(format!(
                    "{name} must lie in [0, 1], got {prob}"
                )));
            }
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(RepairError::Invalid(format!(
                "horizon must be finite and >= 0, got {horizon}"
            )));
        }
        for (name, d) in [("g1", &g1), ("g2", &g2), ("g3", &g3)] {
            d.validate()
                .map_err(|e| RepairError::Invalid(format!("{name}: {e}")))?;
        }
        Ok(RepairScenario {
            lambda,
            q,
            p,
            g1,
            g2,
            g3,
            horizon,
        })
    }

    /// Same scenario at a different transport probability.
    pub fn with_p(&self, p: f64) -> Result<Self, RepairError> {
        RepairScenario::new(
            self.lambda,
            self.q,
            p,
            self.g1.clone(),
            self.g2.clone(),
            self.g3.clone(),
            self.horizon,
        )
    }

    /// The worked example configuration: exponential unit-mean repairs at
    /// both echelons, one-week deterministic transport, q = 0.3, one failure
    /// per month, a one-year horizon.
    pub fn example(p: f64) -> Self {
        RepairScenario::new(
            0.25,
            0.3,
            p,
            ServiceDistribution::Exponential { mean: 1.0 },
            ServiceDistribution::Exponential { mean: 1.0 },
            ServiceDistribution::Deterministic { value: 1.0 },
            DEFAULT_HORIZON_WEEKS,
        )
        .expect("example parameters are valid")
    }
}

/// Which of the four tracked queues a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubQueueKind {
    Global,
    Base,
    Station,
    Transport,
}

impl SubQueueKind {
    pub const ALL: [SubQueueKind; 4] = [
        SubQueueKind::Global,
        SubQueueKind::Base,
        SubQueueKind::Station,
        SubQueueKind::Transport,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SubQueueKind::Global => "global",
            SubQueueKind::Base => "base",
            SubQueueKind::Station => "station",
            SubQueueKind::Transport => "transport",
        }
    }

    /// Stable position in [`Self::ALL`], used to salt per-queue seed
    /// substreams.
    pub fn index(self) -> usize {
        match self {
            SubQueueKind::Global => 0,
            SubQueueKind::Base => 1,
            SubQueueKind::Station => 2,
            SubQueueKind::Transport => 3,
        }
    }
}

impl std::fmt::Display for SubQueueKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// One M|G|infinity view of the repair system.
#[derive(Debug, Clone, PartialEq)]
pub struct SubQueue {
    pub kind: SubQueueKind,
    /// Arrivals per week into this view.
    pub lambda_sub: f64,
    pub service: ServiceDistribution,
    pub rho_sub: f64,
}

impl SubQueue {
    pub fn service_cv(&self) -> f64 {
        self.service.moments().cv
    }

    /// Busy-period inputs for this view. The global queue always goes through
    /// the cv-based customers-per-busy-period approximation, even when its
    /// mixture degenerates to a single exponential; the per-stream views use
    /// the exact exponential formula whenever their service is one.
    pub fn queue_inputs(&self) -> QueueInputs {
        let moments = self.service.moments();
        QueueInputs {
            lambda: self.lambda_sub,
            service_mean: moments.mean,
            service_cv: moments.cv,
            service_is_exponential: self.kind != SubQueueKind::Global
                && self.service.is_exponential(),
        }
    }

    pub fn metrics(&self, horizon: f64) -> Result<BusyPeriodMetrics, RepairError> {
        Ok(busy::metrics(&self.queue_inputs(), horizon)?)
    }
}

/// The three-node network: exogenous rates `((1-q)L, (1-p)qL, pqL)` and a
/// single routing edge from the transport node into the base.
pub fn build_network(sc: &RepairScenario) -> NetworkSpec {
    NetworkSpec::new(
        vec!["base".into(), "station".into(), "transport".into()],
        vec![
            (1.0 - sc.q) * sc.lambda,
            (1.0 - sc.p) * sc.q * sc.lambda,
            sc.p * sc.q * sc.lambda,
        ],
        vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
        ],
        vec![sc.g1.clone(), sc.g2.clone(), sc.g3.clone()],
    )
}

fn transport_service(sc: &RepairScenario) -> ServiceDistribution {
    ServiceDistribution::Convolution {
        factors: vec![sc.g1.clone(), sc.g3.clone()],
    }
}

/// Service law of the equivalent single queue: base repair with weight
/// `1-q`, station repair with weight `(1-p)q`, transport followed by base
/// repair with weight `pq`. Zero-weight branches are dropped; a single
/// surviving branch is returned as itself.
pub fn global_service(sc: &RepairScenario) -> ServiceDistribution {
    let mut components: Vec<MixtureComponent> = [
        (1.0 - sc.q, sc.g1.clone()),
        ((1.0 - sc.p) * sc.q, sc.g2.clone()),
        (sc.p * sc.q, transport_service(sc)),
    ]
    .into_iter()
    .filter(|(w, _)| *w > 0.0)
    .map(|(weight, service)| MixtureComponent { weight, service })
    .collect();
    if components.len() == 1 {
        components.pop().expect("one component").service
    } else {
        ServiceDistribution::Mixture { components }
    }
}

/// Coefficient of variation of the global service law, evaluated directly
/// from the branch moments:
/// `sqrt(weighted second moment / (weighted mean)^2 - 1)`.
///
/// This is an independent route to the same number as
/// `global_service(sc).moments().cv` and the two must agree to within
/// floating-point noise.
pub fn global_cv(sc: &RepairScenario) -> f64 {
    let m1 = sc.g1.moments();
    let m2 = sc.g2.moments();
    let m3 = sc.g3.moments();
    let (w1, w2, w3) = (1.0 - sc.q, (1.0 - sc.p) * sc.q, sc.p * sc.q);
    let tr_mean = m1.mean + m3.mean;
    let tr_var = m1.variance + m3.variance;
    let second = w1 * (m1.variance + m1.mean * m1.mean)
        + w2 * (m2.variance + m2.mean * m2.mean)
        + w3 * (tr_var + tr_mean * tr_mean);
    let mean = w1 * m1.mean + w2 * m2.mean + w3 * tr_mean;
    (second / (mean * mean) - 1.0).max(0.0).sqrt()
}

/// The four queue views: global mixture, base, station, transport (transport
/// service is the convolution of transport time and base repair, so its
/// traffic intensity is `pq lambda (a1 + a3)`).
pub fn sub_queues(sc: &RepairScenario) -> [SubQueue; 4] {
    let global_svc = global_service(sc);
    let global_mean = global_svc.moments().mean;
    let base_rate = (1.0 - sc.q) * sc.lambda;
    let station_rate = (1.0 - sc.p) * sc.q * sc.lambda;
    let transport_rate = sc.p * sc.q * sc.lambda;
    let transport_svc = transport_service(sc);
    [
        SubQueue {
            kind: SubQueueKind::Global,
            lambda_sub: sc.lambda,
            rho_sub: sc.lambda * global_mean,
            service: global_svc,
        },
        SubQueue {
            kind: SubQueueKind::Base,
            lambda_sub: base_rate,
            rho_sub: base_rate * sc.g1.moments().mean,
            service: sc.g1.clone(),
        },
        SubQueue {
            kind: SubQueueKind::Station,
            lambda_sub: station_rate,
            rho_sub: station_rate * sc.g2.moments().mean,
            service: sc.g2.clone(),
        },
        SubQueue {
            kind: SubQueueKind::Transport,
            lambda_sub: transport_rate,
            rho_sub: transport_rate * transport_svc.moments().mean,
            service: transport_svc,
        },
    ]
}

/// One transport-probability point of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub global: BusyPeriodMetrics,
    pub base: BusyPeriodMetrics,
    pub station: BusyPeriodMetrics,
    pub transport: BusyPeriodMetrics,
}

impl SweepRow {
    pub fn cell(&self, kind: SubQueueKind) -> &BusyPeriodMetrics {
        match kind {
            SubQueueKind::Global => &self.global,
            SubQueueKind::Base => &self.base,
            SubQueueKind::Station => &self.station,
            SubQueueKind::Transport => &self.transport,
        }
    }
}

/// Evaluates every sub-queue over the given transport probabilities, in the
/// given order. Zero-rate sub-queues degrade to their zero-rate limits.
pub fn sweep(sc: &RepairScenario, p_values: &[f64]) -> Result<Vec<SweepRow>, RepairError> {
    p_values
        .iter()
        .map(|&p| {
            let at_p = sc.with_p(p)?;
            let [global, base, station, transport] = sub_queues(&at_p);
            Ok(SweepRow {
                p,
                global: global.metrics(at_p.horizon)?,
                base: base.metrics(at_p.horizon)?,
                station: station.metrics(at_p.horizon)?,
                transport: transport.metrics(at_p.horizon)?,
            })
        })
        .collect()
}

/// Where a failure was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Site {
    Base,
    Station,
}

/// One failure record from an operations log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEvent {
    pub timestamp_weeks: f64,
    pub site: Site,
    /// Only meaningful for station events: whether the item went to the base.
    pub transported: bool,
}

/// Poisson-ness summary of the failure stream: index of dispersion of counts
/// in unit-week bins (about 1 under a Poisson process) and the matching
/// chi-square statistic. No verdict is attached; significance is the
/// operator's call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    /// Sample variance of per-bin counts over their mean.
    pub index: f64,
    /// `(bins - 1) * index`, chi-square distributed with `dof` degrees of
    /// freedom under the Poisson hypothesis.
    pub chi_square: f64,
    pub dof: u64,
    /// Number of complete unit-week bins used.
    pub bins: u64,
    pub mean_count_per_bin: f64,
}

/// Scenario parameters estimated from a failure log.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Events per week over the observed span.
    pub lambda_hat: f64,
    /// Fraction of failures detected at the station.
    pub q_hat: f64,
    /// Fraction of station failures transported; absent without station
    /// events.
    pub p_hat: Option<f64>,
    pub event_count: usize,
    pub span_weeks: f64,
    /// Absent when fewer than two complete unit-week bins fit in the span.
    pub dispersion: Option<DispersionReport>,
}

/// Estimates `(lambda, q, p)` from a chronological failure log and reports
/// the dispersion evidence for the Poisson-arrivals hypothesis that the whole
/// model rests on.
pub fn fit_scenario_from_log(events: &[LogEvent]) -> Result<FitReport, RepairError> {
    if events.len() < 2 {
        return Err(RepairError::DegenerateLog(format!(
            "need at least 2 events, got {}",
            events.len()
        )));
    }
    for (i, pair) in events.windows(2).enumerate() {
        if pair[1].timestamp_weeks < pair[0].timestamp_weeks {
            return Err(RepairError::DegenerateLog(format!(
                "timestamps must be nondecreasing; event {} at {} precedes event {} at {}",
                i + 1,
                pair[1].timestamp_weeks,
                i,
                pair[0].timestamp_weeks
            )));
        }
    }
    let t_first = events[0].timestamp_weeks;
    let t_last = events[events.len() - 1].timestamp_weeks;
    let span = t_last - t_first;
    if span.is_nan() || span <= 0.0 {
        return Err(RepairError::DegenerateLog(
            "all events share one timestamp (span is zero)".into(),
        ));
    }

    let station_events: Vec<&LogEvent> =
        events.iter().filter(|e| e.site == Site::Station).collect();
    let lambda_hat = events.len() as f64 / span;
    let q_hat = station_events.len() as f64 / events.len() as f64;
    let p_hat = if station_events.is_empty() {
        None
    } else {
        Some(
            station_events.iter().filter(|e| e.transported).count() as f64
                / station_events.len() as f64,
        )
    };

    // Complete unit-week bins anchored at the first event. Occupied bins are
    // kept sparsely so a long, thin log cannot blow up memory; empty bins
    // enter the variance in closed form.
    let whole_weeks = span.floor();
    let dispersion = if whole_weeks >= 2.0 && whole_weeks <= 9.0e15 {
        let bins = whole_weeks as u64;
        let mut counts: std::collections::BTreeMap<u64, u64> = std::collections::BTreeMap::new();
        for e in events {
            let offset = e.timestamp_weeks - t_first;
            if offset < whole_weeks {
                *counts.entry(offset.floor() as u64).or_insert(0) += 1;
            }
        }
        let n = whole_weeks;
        let mean = counts.values().sum::<u64>() as f64 / n;
        if mean > 0.0 {
            let occupied_sq: f64 = counts
                .values()
                .map(|&c| (c as f64 - mean).powi(2))
                .sum();
            let empty_bins = n - counts.len() as f64;
            let var = (occupied_sq + empty_bins * mean * mean) / (n - 1.0);
            let index = var / mean;
            Some(DispersionReport {
                index,
                chi_square: (n - 1.0) * index,
                dof: bins - 1,
                bins,
                mean_count_per_bin: mean,
            })
        } else {
            None
        }
    } else {
        None
    };

    Ok(FitReport {
        lambda_hat,
        q_hat,
        p_hat,
        event_count: events.len(),
        span_weeks: span,
        dispersion,
    })
}

/// Draws a synthetic failure log over `[0, weeks]`: Poisson failures at
/// `lambda`, station detection with probability `q`, transport with
/// probability `p`. Useful for exercising the fit path end to end.
pub fn synthesize_log<R: Rng + ?Sized>(
    lambda: f64,
    q: f64,
    p: f64,
    weeks: f64,
    rng: &mut R,
) -> Vec<LogEvent> {
    let mut events = Vec::new();
    let mut t = 0.0;
    loop {
        t += crate::dist::sample_exponential(1.0 / lambda, rng);
        if t > weeks {
            return events;
        }
        let station = rng.gen::<f64>() < q;
        let transported = station && rng.gen::<f64>() < p;
        events.push(LogEvent {
            timestamp_weeks: t,
            site: if station { Site::Station } else { Site::Base },
            transported,
        });
    }
}

/// On-disk scenario form:
/// `{"lambda":0.25,"q":0.3,"p":[0.9,...],"g1":{...},"g2":{...},"g3":{...},"horizon_weeks":52}`
/// where `p` carries the sweep points in presentation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub lambda: f64,
    pub q: f64,
    pub p: Vec<f64>,
    pub g1: ServiceDistribution,
    pub g2: ServiceDistribution,
    pub g3: ServiceDistribution,
    #[serde(default = "default_horizon")]
    pub horizon_weeks: f64,
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON_WEEKS
}

impl ScenarioFile {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }

    /// Scenario at one of the file's transport probabilities.
    pub fn scenario_at(&self, p: f64) -> Result<RepairScenario, RepairError> {
        RepairScenario::new(
            self.lambda,
            self.q,
            p,
            self.g1.clone(),
            self.g2.clone(),
            self.g3.clone(),
            self.horizon_weeks,
        )
    }

    /// Scenario at the first listed transport probability.
    pub fn primary_scenario(&self) -> Result<RepairScenario, RepairError> {
        let p = *self
            .p
            .first()
            .ok_or_else(|| RepairError::Invalid("scenario lists no p values".into()))?;
        self.scenario_at(p)
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn rates_conserve_and_cv_routes_agree(
            lambda in 0.01f64..4.0,
            q in 0.0f64..=1.0,
            p in 0.0f64..=1.0,
            g1_mean in 0.1f64..4.0,
            g2_mean in 0.1f64..4.0,
            g3_value in 0.1f64..4.0,
        ) {
            let sc = RepairScenario::new(
                lambda,
                q,
                p,
                ServiceDistribution::Exponential { mean: g1_mean },
                ServiceDistribution::Erlang { shape: 3, mean: g2_mean },
                ServiceDistribution::Deterministic { value: g3_value },
                52.0,
            ).unwrap();
            let [_, base, station, transport] = sub_queues(&sc);
            let total = base.lambda_sub + station.lambda_sub + transport.lambda_sub;
            prop_assert!((total - lambda).abs() <= 1e-14 * lambda.max(1.0));

            let direct = global_cv(&sc);
            let via_mixture = global_service(&sc).moments().cv;
            prop_assert!((direct - via_mixture).abs() <= 1e-12);

            let via_network = build_network(&sc).mean_sojourn_exact().unwrap();
            let via_service = global_service(&sc).moments().mean;
            prop_assert!((via_network - via_service).abs() <= 1e-12 * via_service);
        }
    }
}
