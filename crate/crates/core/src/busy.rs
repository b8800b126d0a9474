//! Busy-period analytics for the M|G|infinity queue.
//!
//! A busy period begins when a customer arrives to an empty system and ends
//! when a departure leaves it empty again. With arrival rate `lambda` and
//! mean service `alpha` the classical results used here are
//!
//! - traffic intensity `rho = lambda * alpha`,
//! - mean busy-period length `E[B] = (exp(rho) - 1) / lambda`,
//! - the mean number of busy periods beginning in `[0, t]` (with `t = 0`
//!   the start of a busy period) lies between `exp(-rho) (1 + lambda t)`
//!   and `1 + lambda t`,
//! - mean customers served per busy period: `exp(rho)` when service is
//!   exponential, otherwise the cv-based approximation of
//!   [`customers_per_bp_general`].
//!
//! All functions are pure and return full-precision values; rounding is a
//! rendering concern.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BusyError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// Inputs describing one M|G|infinity queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueInputs {
    /// Arrivals per week, >= 0.
    pub lambda: f64,
    /// Mean service time in weeks, > 0.
    pub service_mean: f64,
    /// Coefficient of variation of the service time, >= 0.
    pub service_cv: f64,
    /// Selects the exact exponential customers-per-busy-period formula.
    pub service_is_exponential: bool,
}

/// Busy-period figures for one queue over a horizon of `horizon` weeks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusyPeriodMetrics {
    pub rho: f64,
    /// E[B], weeks.
    pub mean_busy_period: f64,
    /// Lower bound on the mean number of busy periods beginning in [0, horizon].
    pub r_lower: f64,
    /// Upper bound on the same count.
    pub r_upper: f64,
    /// Mean customers served per busy period.
    pub customers_per_bp: f64,
    pub horizon: f64,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), BusyError> {
    if cond {
        Ok(())
    } else {
        Err(BusyError::Domain(msg()))
    }
}

fn check_rate_and_mean(lambda: f64, alpha: f64) -> Result<(), BusyError> {
    check(lambda.is_finite() && lambda >= 0.0, || {
        format!("arrival rate must be finite and >= 0, got {lambda}")
    })?;
    check(alpha.is_finite() && alpha > 0.0, || {
        format!("mean service time must be finite and > 0, got {alpha}")
    })
}

/// `rho = lambda * alpha`.
pub fn traffic_intensity(lambda: f64, alpha: f64) -> Result<f64, BusyError> {
    check_rate_and_mean(lambda, alpha)?;
    Ok(lambda * alpha)
}

/// Mean busy-period length `(exp(lambda alpha) - 1) / lambda`, with the
/// `lambda -> 0` limit `alpha`. `exp_m1` keeps the small-rate regime exact.
pub fn mean_busy_period(lambda: f64, alpha: f64) -> Result<f64, BusyError> {
    check_rate_and_mean(lambda, alpha)?;
    if lambda == 0.0 {
        Ok(alpha)
    } else {
        Ok((lambda * alpha).exp_m1() / lambda)
    }
}

/// Bounds on the mean number of busy periods beginning in `[0, t]`, taking
/// `t = 0` as the start of a busy period (so both bounds are >= 1 at t=0,
/// degenerating to (1, 1) when `lambda = 0`).
pub fn busy_period_count_bounds(lambda: f64, alpha: f64, t: f64) -> Result<(f64, f64), BusyError> {
    check_rate_and_mean(lambda, alpha)?;
    check(t.is_finite() && t >= 0.0, || {
        format!("horizon must be finite and >= 0, got {t}")
    })?;
    let rho = lambda * alpha;
    let upper = 1.0 + lambda * t;
    Ok(((-rho).exp() * upper, upper))
}

/// `exp(rho)`: mean customers served per busy period when service is
/// exponential.
pub fn customers_per_bp_exponential(rho: f64) -> Result<f64, BusyError> {
    check(rho.is_finite() && rho >= 0.0, || {
        format!("traffic intensity must be finite and >= 0, got {rho}")
    })?;
    Ok(rho.exp())
}

/// Approximate mean customers served per busy period for a general service
/// law with coefficient of variation `gamma_s`.
///
/// With `x = rho (gamma_s^2 + 1)` the value is
/// `(exp(x) (x + 1) + x - 1) / (2 x)`.
///
/// At `rho = 0` this returns 1 (an empty system serves exactly its opening
/// customer) even though the formula's own `x -> 0` limit is 1.5; the raw
/// approximation is reported faithfully everywhere else, including the
/// small-rho regime where it exceeds the exact exponential answer.
pub fn customers_per_bp_general(rho: f64, gamma_s: f64) -> Result<f64, BusyError> {
    check(rho.is_finite() && rho >= 0.0, || {
        format!("traffic intensity must be finite and >= 0, got {rho}")
    })?;
    check(gamma_s.is_finite() && gamma_s >= 0.0, || {
        format!("coefficient of variation must be finite and >= 0, got {gamma_s}")
    })?;
    if rho == 0.0 {
        return Ok(1.0);
    }
    let x = rho * (gamma_s * gamma_s + 1.0);
    Ok((x.exp() * (x + 1.0) + x - 1.0) / (2.0 * x))
}

/// Assembles all busy-period figures for one queue.
pub fn metrics(q: &QueueInputs, horizon: f64) -> Result<BusyPeriodMetrics, BusyError> {
    check(q.service_cv.is_finite() && q.service_cv >= 0.0, || {
        format!("coefficient of variation must be finite and >= 0, got {}", q.service_cv)
    })?;
    let rho = traffic_intensity(q.lambda, q.service_mean)?;
    let (r_lower, r_upper) = busy_period_count_bounds(q.lambda, q.service_mean, horizon)?;
    let customers_per_bp = if rho == 0.0 {
        1.0
    } else if q.service_is_exponential {
        customers_per_bp_exponential(rho)?
    } else {
        customers_per_bp_general(rho, q.service_cv)?
    };
    Ok(BusyPeriodMetrics {
        rho,
        mean_busy_period: mean_busy_period(q.lambda, q.service_mean)?,
        r_lower,
        r_upper,
        customers_per_bp,
        horizon,
    })
}
