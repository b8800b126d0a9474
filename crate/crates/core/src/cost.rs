//! Transport-cost differentials and investment screening.
//!
//! Transport spend is proportional to the transport probability, so dropping
//! `p` from `p_i` by `delta_p` saves `c_i * delta_p / p_i` per year. A
//! station investment of `k` per year is viable when it does not exceed that
//! saving. All figures are flows per year, not stocks.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// Inputs to the differential-cost screen. Every money field is per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostInputs {
    /// Transport cost per year at the initial transport probability.
    pub annual_transport_cost: f64,
    /// Initial transport probability, in (0, 1].
    pub p_initial: f64,
    /// Reduction of the transport probability, in [0, p_initial].
    pub delta_p: f64,
    /// Station investment per year needed to achieve the reduction.
    pub annual_investment: f64,
}

impl CostInputs {
    pub fn new(
        annual_transport_cost: f64,
        p_initial: f64,
        delta_p: f64,
        annual_investment: f64,
    ) -> Result<Self, CostError> {
        if !(annual_transport_cost.is_finite() && annual_transport_cost >= 0.0) {
            return Err(CostError::Domain(format!(
                "transport cost must be finite and >= 0, got {annual_transport_cost}"
            )));
        }
        if !(p_initial.is_finite() && p_initial > 0.0 && p_initial <= 1.0) {
            return Err(CostError::Domain(format!(
                "initial probability must lie in (0, 1], got {p_initial}"
            )));
        }
        if !(delta_p.is_finite() && delta_p >= 0.0) {
            return Err(CostError::Domain(format!(
                "probability reduction must be finite and >= 0, got {delta_p}"
            )));
        }
        if delta_p > p_initial {
            return Err(CostError::Domain(format!(
                "probability reduction {delta_p} exceeds initial probability {p_initial}"
            )));
        }
        if !(annual_investment.is_finite() && annual_investment >= 0.0) {
            return Err(CostError::Domain(format!(
                "investment must be finite and >= 0, got {annual_investment}"
            )));
        }
        Ok(CostInputs {
            annual_transport_cost,
            p_initial,
            delta_p,
            annual_investment,
        })
    }
}

/// Saving and leftover transport cost after a probability reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferentialCost {
    /// Transport saving per year.
    pub savings: f64,
    /// Transport cost per year at the reduced probability.
    pub final_cost: f64,
}

/// Outcome of the investment screen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Viability {
    pub viable: bool,
    /// Saving minus investment, per year.
    pub margin: f64,
}

/// Proportional-cost differential: saving `c_i * delta_p / p_i` and the
/// remaining cost `c_i - saving`.
pub fn differential_cost(inputs: &CostInputs) -> DifferentialCost {
    let savings = inputs.annual_transport_cost * inputs.delta_p / inputs.p_initial;
    DifferentialCost {
        savings,
        final_cost: inputs.annual_transport_cost - savings,
    }
}

/// Non-strict screen `k <= savings`, with a whisker of floating-point slack
/// so a boundary stated in round decimals is not rejected over the last bit
/// of the division.
pub fn investment_viable(inputs: &CostInputs) -> Viability {
    let savings = differential_cost(inputs).savings;
    let margin = savings - inputs.annual_investment;
    let slack = 1e-9 * savings.abs().max(inputs.annual_investment.abs()).max(1.0);
    Viability {
        viable: inputs.annual_investment <= savings + slack,
        margin,
    }
}
