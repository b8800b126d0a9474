//! Analytic evaluation of open networks of infinite-server queues with
//! Poisson exogenous arrivals, plus a discrete-event Monte Carlo oracle to
//! check every analytic figure against.
//!
//! The pieces:
//!
//! - [`dist`]: service-time laws with closed-form Laplace-Stieltjes
//!   transforms, exact moments and sampling.
//! - [`busy`]: M|G|infinity busy-period figures (traffic intensity, mean
//!   busy period, start-count bounds, customers served per busy period).
//! - [`net`]: a network of infinite-server nodes reduced to its equivalent
//!   single queue via the sojourn-time transform.
//! - [`repair`]: the two-echelon repair model (base, remote station,
//!   transport) built on top of the network machinery, with parameter
//!   estimation from failure logs.
//! - [`cost`]: transport-cost differentials and investment screening.
//! - [`sim`]: the seeded, replication-based simulation oracle.
//!
//! ```
//! use mginf::{busy, repair, RepairScenario};
//!
//! // One failure a month, 30% detected at the remote station, 90% of those
//! // transported to the base for repair.
//! let scenario = RepairScenario::example(0.9);
//!
//! // The equivalent single queue sees the weighted service mixture.
//! let service = repair::global_service(&scenario);
//! assert!((service.moments().mean - 1.27).abs() < 1e-12);
//!
//! // Its busy-period figures over the one-year horizon.
//! let [global, _, _, _] = repair::sub_queues(&scenario);
//! let metrics = busy::metrics(&global.queue_inputs(), scenario.horizon).unwrap();
//! assert!((metrics.rho - 0.3175).abs() < 1e-12);
//! assert!((metrics.customers_per_bp - 2.037).abs() < 5e-4);
//! ```

pub mod busy;
pub mod cost;
pub mod dist;
pub mod linalg;
pub mod net;
pub mod repair;
pub mod sim;

pub use busy::{BusyPeriodMetrics, QueueInputs};
pub use dist::{Moments, ServiceDistribution};
pub use net::{NetworkSpec, SojournSummary};
pub use repair::{RepairScenario, ScenarioFile, SubQueueKind};
pub use sim::{SimConfig, SimReport, SimulationEstimate};
