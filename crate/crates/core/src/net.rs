//! Open networks of infinite-server nodes with Poisson exogenous arrivals.
//!
//! Such a network is equivalent to a single M|G|infinity queue whose service
//! time is the network sojourn time. With `L(s)_j = lambda_j * Gbar_j(s)`,
//! `P(s)_{jl} = p_{jl} * Gbar_l(s)` (the transform of the destination node's
//! service rides on each hop) and `q = (I - P) 1` the exit-probability
//! column, the sojourn-time transform is
//!
//! `Gbar(s) = L(s)^T (I - P(s))^{-1} q / lambda`.
//!
//! Exact mean sojourn comes from one real solve, `L^T (I - P)^{-1} abar /
//! lambda` with `abar` the node service means; higher moments come from
//! forward finite differences of the transform at zero, cross-checked
//! against the exact mean.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::ServiceDistribution;
use crate::linalg;

/// A network is open when the routing spectral radius sits below this line.
pub const OPENNESS_MARGIN: f64 = 1e-9;
/// Power-iteration budget for the openness check.
pub const SPECTRAL_ITERATIONS: usize = 200;
pub const SPECTRAL_TOLERANCE: f64 = 1e-10;
/// Forward-difference step for transform moments.
const MOMENT_STEP: f64 = 1e-4;
/// Numeric and exact mean must agree this tightly (relative).
const MEAN_CROSS_CHECK_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetError {
    #[error("invalid network: {0}")]
    Invalid(String),
    #[error("transform matrix singular at s = {s}")]
    SingularAt { s: f64 },
    #[error("{0}")]
    Dist(#[from] crate::dist::DistError),
    #[error(
        "numeric sojourn mean {numeric} disagrees with exact mean {exact} beyond {tolerance:e} \
         relative; finite-difference step is pathological for this network"
    )]
    MomentCrossCheck {
        numeric: f64,
        exact: f64,
        tolerance: f64,
    },
}

/// One validation finding, naming the offending row or field.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub location: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

/// Sojourn-time summary of the equivalent M|G|infinity queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SojournSummary {
    /// Total exogenous arrival rate, per week.
    pub total_rate: f64,
    /// E[T], weeks (from the exact linear-solve route).
    pub mean: f64,
    /// E[T^2], weeks^2 (from the transform).
    pub second_moment: f64,
    /// Coefficient of variation of the sojourn time.
    pub cv: f64,
}

/// An open network of infinite-server nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    names: Vec<String>,
    exo_rates: Vec<f64>,
    /// Row-major routing probabilities; entry (j, l) routes node j to node l.
    routing: Vec<Vec<f64>>,
    services: Vec<ServiceDistribution>,
}

impl NetworkSpec {
    pub fn new(
        names: Vec<String>,
        exo_rates: Vec<f64>,
        routing: Vec<Vec<f64>>,
        services: Vec<ServiceDistribution>,
    ) -> Self {
        NetworkSpec {
            names,
            exo_rates,
            routing,
            services,
        }
    }

    pub fn node_count(&self) -> usize {
        self.exo_rates.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn exo_rates(&self) -> &[f64] {
        &self.exo_rates
    }

    pub fn routing(&self) -> &[Vec<f64>] {
        &self.routing
    }

    pub fn services(&self) -> &[ServiceDistribution] {
        &self.services
    }

    pub fn total_rate(&self) -> f64 {
        self.exo_rates.iter().sum()
    }

    /// Exit probability per node, `1 - sum of its routing row`.
    pub fn exit_probabilities(&self) -> Vec<f64> {
        self.routing
            .iter()
            .map(|row| 1.0 - row.iter().sum::<f64>())
            .collect()
    }

    fn dims_ok(&self) -> bool {
        let j = self.node_count();
        j >= 1
            && self.names.len() == j
            && self.services.len() == j
            && self.routing.len() == j
            && self.routing.iter().all(|row| row.len() == j)
    }

    /// Checks every structural invariant and returns the findings; an empty
    /// list means the network is usable. Nothing is thrown: callers decide
    /// severity.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let j = self.node_count();
        if j == 0 {
            out.push(Diagnostic {
                location: "nodes".into(),
                message: "network needs at least one node".into(),
            });
            return out;
        }
        if !self.dims_ok() {
            out.push(Diagnostic {
                location: "routing".into(),
                message: format!(
                    "dimension mismatch: {} nodes, {} names, {} services, routing {}x{}",
                    j,
                    self.names.len(),
                    self.services.len(),
                    self.routing.len(),
                    self.routing.first().map_or(0, Vec::len)
                ),
            });
            return out;
        }
        for (idx, rate) in self.exo_rates.iter().enumerate() {
            if !rate.is_finite() || *rate < 0.0 {
                out.push(Diagnostic {
                    location: format!("nodes[{idx}].exo_rate"),
                    message: format!("must be finite and >= 0, got {rate}"),
                });
            }
        }
        let total = self.total_rate();
        if total.is_nan() || total <= 0.0 {
            out.push(Diagnostic {
                location: "nodes".into(),
                message: "at least one exogenous arrival stream must have positive rate".into(),
            });
        }
        for (r, row) in self.routing.iter().enumerate() {
            for (c, p) in row.iter().enumerate() {
                if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                    out.push(Diagnostic {
                        location: format!("routing[{r}][{c}]"),
                        message: format!("must lie in [0, 1], got {p}"),
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if sum > 1.0 + 1e-9 {
                out.push(Diagnostic {
                    location: format!("routing row {r}"),
                    message: format!("sum {sum} > 1"),
                });
            }
        }
        for (idx, service) in self.services.iter().enumerate() {
            if let Err(e) = service.validate() {
                out.push(Diagnostic {
                    location: format!("nodes[{idx}].service"),
                    message: e.to_string(),
                });
            }
        }
        if out.is_empty() {
            let radius =
                linalg::spectral_radius(&self.routing, SPECTRAL_ITERATIONS, SPECTRAL_TOLERANCE);
            if radius >= 1.0 - OPENNESS_MARGIN {
                out.push(Diagnostic {
                    location: "routing".into(),
                    message: format!("network not open (spectral radius {radius})"),
                });
            }
        }
        out
    }

    fn require_dims(&self) -> Result<(), NetError> {
        if self.dims_ok() {
            Ok(())
        } else {
            Err(NetError::Invalid(
                "inconsistent node/routing/service dimensions".into(),
            ))
        }
    }

    /// Laplace-Stieltjes transform of the network sojourn time at `s >= 0`.
    pub fn sojourn_lt(&self, s: f64) -> Result<f64, NetError> {
        self.require_dims()?;
        let j = self.node_count();
        let mut transforms = Vec::with_capacity(j);
        for service in &self.services {
            transforms.push(service.laplace(s)?);
        }
        // I - P(s), with the destination node's transform on each entry.
        let mut a = vec![vec![0.0f64; j]; j];
        for (r, (a_row, p_row)) in a.iter_mut().zip(&self.routing).enumerate() {
            for (c, (cell, p)) in a_row.iter_mut().zip(p_row).enumerate() {
                let v = p * transforms[c];
                *cell = if r == c { 1.0 - v } else { -v };
            }
        }
        let exits = self.exit_probabilities();
        let x = linalg::solve(&a, &exits).map_err(|e| match e {
            linalg::LinalgError::Singular { .. } => NetError::SingularAt { s },
            linalg::LinalgError::Dimension(d) => NetError::Invalid(d),
        })?;
        let total = self.total_rate();
        let weighted: f64 = (0..j)
            .map(|n| self.exo_rates[n] * transforms[n] * x[n])
            .sum();
        Ok(weighted / total)
    }

    /// Exact mean sojourn E[T] via one real solve: the solve yields the
    /// expected remaining sojourn from each node, averaged over the entry
    /// distribution.
    pub fn mean_sojourn_exact(&self) -> Result<f64, NetError> {
        self.require_dims()?;
        let j = self.node_count();
        let mut a = vec![vec![0.0f64; j]; j];
        for (r, (a_row, p_row)) in a.iter_mut().zip(&self.routing).enumerate() {
            for (c, (cell, p)) in a_row.iter_mut().zip(p_row).enumerate() {
                *cell = if r == c { 1.0 - p } else { -p };
            }
        }
        let means: Vec<f64> = self.services.iter().map(|d| d.moments().mean).collect();
        let remaining = linalg::solve(&a, &means).map_err(|e| match e {
            linalg::LinalgError::Singular { .. } => NetError::SingularAt { s: 0.0 },
            linalg::LinalgError::Dimension(d) => NetError::Invalid(d),
        })?;
        let total = self.total_rate();
        Ok((0..j).map(|n| self.exo_rates[n] * remaining[n]).sum::<f64>() / total)
    }

    /// First two sojourn moments and cv.
    ///
    /// E[T] and E[T^2] come from forward differences of the transform at zero
    /// with one Richardson step (the transform may not exist left of zero, so
    /// no central differences); the numeric mean is cross-checked against
    /// [`Self::mean_sojourn_exact`] and the exact value is the one reported.
    pub fn sojourn_moments(&self) -> Result<SojournSummary, NetError> {
        let exact_mean = self.mean_sojourn_exact()?;
        let h = MOMENT_STEP;
        let f_h2 = self.sojourn_lt(h / 2.0)?;
        let f_h = self.sojourn_lt(h)?;
        let f_2h = self.sojourn_lt(2.0 * h)?;

        let d1 = (f_h - 1.0) / h;
        let d2 = (f_h2 - 1.0) / (h / 2.0);
        let numeric_mean = -(2.0 * d2 - d1);
        if (numeric_mean - exact_mean).abs() > MEAN_CROSS_CHECK_TOLERANCE * exact_mean.abs() {
            return Err(NetError::MomentCrossCheck {
                numeric: numeric_mean,
                exact: exact_mean,
                tolerance: MEAN_CROSS_CHECK_TOLERANCE,
            });
        }

        // Three-point forward second difference, Richardson-extrapolated,
        // then clamped so rounding noise cannot push E[T^2] under E[T]^2.
        let f2_h = (f_2h - 2.0 * f_h + 1.0) / (h * h);
        let f2_h2 = (f_h - 2.0 * f_h2 + 1.0) / (h * h / 4.0);
        let second_moment = (2.0 * f2_h2 - f2_h).max(exact_mean * exact_mean);

        let variance = second_moment - exact_mean * exact_mean;
        Ok(SojournSummary {
            total_rate: self.total_rate(),
            mean: exact_mean,
            second_moment,
            cv: variance.sqrt() / exact_mean,
        })
    }
}

/// On-disk form of a network scenario:
/// `{"nodes":[{"name":...,"exo_rate":...,"service":{...}}],"routing":[[...]]}`
/// with a row-major routing matrix and rates in per-week units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub nodes: Vec<NodeEntry>,
    pub routing: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub name: String,
    pub exo_rate: f64,
    pub service: ServiceDistribution,
}

impl From<NetworkFile> for NetworkSpec {
    fn from(file: NetworkFile) -> Self {
        let mut names = Vec::with_capacity(file.nodes.len());
        let mut rates = Vec::with_capacity(file.nodes.len());
        let mut services = Vec::with_capacity(file.nodes.len());
        for node in file.nodes {
            names.push(node.name);
            rates.push(node.exo_rate);
            services.push(node.service);
        }
        NetworkSpec::new(names, rates, file.routing, services)
    }
}

impl From<&NetworkSpec> for NetworkFile {
    fn from(spec: &NetworkSpec) -> Self {
        NetworkFile {
            nodes: spec
                .names
                .iter()
                .zip(&spec.exo_rates)
                .zip(&spec.services)
                .map(|((name, rate), service)| NodeEntry {
                    name: name.clone(),
                    exo_rate: *rate,
                    service: service.clone(),
                })
                .collect(),
            routing: spec.routing.clone(),
        }
    }
}

impl NetworkSpec {
    /// Parses the JSON scenario form. Structural validation is left to
    /// [`NetworkSpec::validate`] so callers can report every finding at once.
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let file: NetworkFile = serde_json::from_str(json)?;
        Ok(file.into())
    }
}
