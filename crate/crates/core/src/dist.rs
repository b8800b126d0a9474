//! Service-time distributions.
//!
//! Every law exposes its Laplace-Stieltjes transform in closed form, exact
//! first and second moments, and random sampling, so one object can drive
//! both the analytic pipeline and the simulation oracle. Values are
//! immutable after construction and safe to share across threads; sampling
//! takes a caller-supplied random stream.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mixture weights must sum to one within this tolerance. Off-by-more is an
/// error, not something to renormalize away: a bad weight vector is a caller
/// bug we want surfaced.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid distribution: {0}")]
    Invalid(String),
    #[error("Laplace transform is only defined for s >= 0, got s = {0}")]
    NegativeTransformPoint(f64),
}

/// Exact mean (weeks), variance (weeks^2) and coefficient of variation of a
/// service-time law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// sqrt(variance) / mean
    pub cv: f64,
}

impl Moments {
    fn from_mean_var(mean: f64, variance: f64) -> Self {
        // Guard tiny negative variances produced by cancellation in mixture
        // second moments.
        let variance = variance.max(0.0);
        Moments {
            mean,
            variance,
            cv: variance.sqrt() / mean,
        }
    }
}

/// One weighted branch of a [`ServiceDistribution::Mixture`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub service: ServiceDistribution,
}

/// A service-time law with times in weeks.
///
/// Leaf kinds carry closed-form transforms; `Convolution` is the law of a sum
/// of independent draws from its factors, `Mixture` a probabilistic choice
/// among its components.
///
/// Serialized form is a tagged object, e.g.
/// `{"kind":"exponential","mean":1.0}`, `{"kind":"deterministic","value":1.0}`,
/// `{"kind":"erlang","shape":2,"mean":1.0}`, `{"kind":"uniform","low":0.5,"high":1.5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ServiceDistribution {
    Exponential { mean: f64 },
    Deterministic { value: f64 },
    Erlang { shape: u32, mean: f64 },
    Uniform { low: f64, high: f64 },
    Convolution { factors: Vec<ServiceDistribution> },
    Mixture { components: Vec<MixtureComponent> },
}

impl ServiceDistribution {
    pub fn exponential(mean: f64) -> Result<Self, DistError> {
        let d = ServiceDistribution::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn deterministic(value: f64) -> Result<Self, DistError> {
        let d = ServiceDistribution::Deterministic { value };
        d.validate()?;
        Ok(d)
    }

    pub fn erlang(shape: u32, mean: f64) -> Result<Self, DistError> {
        let d = ServiceDistribution::Erlang { shape, mean };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self, DistError> {
        let d = ServiceDistribution::Uniform { low, high };
        d.validate()?;
        Ok(d)
    }

    pub fn convolution(factors: Vec<ServiceDistribution>) -> Result<Self, DistError> {
        let d = ServiceDistribution::Convolution { factors };
        d.validate()?;
        Ok(d)
    }

    pub fn mixture(components: Vec<(f64, ServiceDistribution)>) -> Result<Self, DistError> {
        let d = ServiceDistribution::Mixture {
            components: components
                .into_iter()
                .map(|(weight, service)| MixtureComponent { weight, service })
                .collect(),
        };
        d.validate()?;
        Ok(d)
    }

    /// True for a single exponential leaf (the case with an exact
    /// customers-per-busy-period formula downstream).
    pub fn is_exponential(&self) -> bool {
        matches!(self, ServiceDistribution::Exponential { .. })
    }

    /// Checks the structural invariants of the law, recursively.
    ///
    /// Deserialized values must pass through here before use; the named
    /// constructors call it for you.
    pub fn validate(&self) -> Result<(), DistError> {
        match self {
            ServiceDistribution::Exponential { mean } => {
                require_positive("exponential mean", *mean)
            }
            ServiceDistribution::Deterministic { value } => {
                require_positive("deterministic value", *value)
            }
            ServiceDistribution::Erlang { shape, mean } => {
                if *shape == 0 {
                    return Err(DistError::Invalid("erlang shape must be >= 1".into()));
                }
                require_positive("erlang mean", *mean)
            }
            ServiceDistribution::Uniform { low, high } => {
                if !low.is_finite() || !high.is_finite() || *low < 0.0 || low >= high {
                    return Err(DistError::Invalid(format!(
                        "uniform requires 0 <= low < high, got low={low}, high={high}"
                    )));
                }
                Ok(())
            }
            ServiceDistribution::Convolution { factors } => {
                if factors.len() < 2 {
                    return Err(DistError::Invalid(format!(
                        "convolution needs at least 2 factors, got {}",
                        factors.len()
                    )));
                }
                factors.iter().try_for_each(ServiceDistribution::validate)
            }
            ServiceDistribution::Mixture { components } => {
                if components.len() < 2 {
                    return Err(DistError::Invalid(format!(
                        "mixture needs at least 2 components, got {}",
                        components.len()
                    )));
                }
                let mut sum = 0.0;
                for (i, c) in components.iter().enumerate() {
                    if !c.weight.is_finite() || c.weight < 0.0 {
                        return Err(DistError::Invalid(format!(
                            "mixture weight {i} must be finite and >= 0, got {}",
                            c.weight
                        )));
                    }
                    c.service.validate()?;
                    sum += c.weight;
                }
                if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
                    return Err(DistError::Invalid(format!(
                        "mixture weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOLERANCE:e}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Laplace-Stieltjes transform `E[exp(-s S)]` at `s >= 0`.
    ///
    /// Closed form per kind; a convolution multiplies factor transforms and a
    /// mixture takes the weighted sum.
    pub fn laplace(&self, s: f64) -> Result<f64, DistError> {
        if s.is_nan() || s < 0.0 {
            return Err(DistError::NegativeTransformPoint(s));
        }
        Ok(match self {
            ServiceDistribution::Exponential { mean } => 1.0 / (1.0 + mean * s),
            ServiceDistribution::Deterministic { value } => (-s * value).exp(),
            ServiceDistribution::Erlang { shape, mean } => {
                let k = f64::from(*shape);
                powk(k / (k + mean * s), *shape)
            }
            ServiceDistribution::Uniform { low, high } => {
                let width = high - low;
                let u = s * width;
                if u == 0.0 {
                    1.0
                } else {
                    // (exp(-s*low) - exp(-s*high)) / (s*width), written via
                    // exp_m1 so small s does not cancel.
                    (-s * low).exp() * (-((-u).exp_m1())) / u
                }
            }
            ServiceDistribution::Convolution { factors } => {
                let mut prod = 1.0;
                for f in factors {
                    prod *= f.laplace(s)?;
                }
                prod
            }
            ServiceDistribution::Mixture { components } => {
                let mut sum = 0.0;
                for c in components {
                    sum += c.weight * c.service.laplace(s)?;
                }
                sum
            }
        })
    }

    /// Exact mean and variance.
    ///
    /// A convolution sums means and variances; a mixture combines first and
    /// second raw moments.
    pub fn moments(&self) -> Moments {
        match self {
            ServiceDistribution::Exponential { mean } => {
                Moments::from_mean_var(*mean, mean * mean)
            }
            ServiceDistribution::Deterministic { value } => Moments::from_mean_var(*value, 0.0),
            ServiceDistribution::Erlang { shape, mean } => {
                Moments::from_mean_var(*mean, mean * mean / f64::from(*shape))
            }
            ServiceDistribution::Uniform { low, high } => {
                let width = high - low;
                Moments::from_mean_var((low + high) / 2.0, width * width / 12.0)
            }
            ServiceDistribution::Convolution { factors } => {
                let (mut mean, mut var) = (0.0, 0.0);
                for f in factors {
                    let m = f.moments();
                    mean += m.mean;
                    var += m.variance;
                }
                Moments::from_mean_var(mean, var)
            }
            ServiceDistribution::Mixture { components } => {
                let (mut mean, mut second) = (0.0, 0.0);
                for c in components {
                    let m = c.service.moments();
                    mean += c.weight * m.mean;
                    second += c.weight * (m.variance + m.mean * m.mean);
                }
                Moments::from_mean_var(mean, second - mean * mean)
            }
        }
    }

    /// Draws one variate (weeks) from the law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ServiceDistribution::Exponential { mean } => sample_exponential(*mean, rng),
            ServiceDistribution::Deterministic { value } => *value,
            ServiceDistribution::Erlang { shape, mean } => {
                let stage_mean = mean / f64::from(*shape);
                (0..*shape).map(|_| sample_exponential(stage_mean, rng)).sum()
            }
            ServiceDistribution::Uniform { low, high } => low + rng.gen::<f64>() * (high - low),
            ServiceDistribution::Convolution { factors } => {
                factors.iter().map(|f| f.sample(rng)).sum()
            }
            ServiceDistribution::Mixture { components } => {
                let u = rng.gen::<f64>();
                let mut acc = 0.0;
                for c in components.iter().take(components.len() - 1) {
                    acc += c.weight;
                    if u < acc {
                        return c.service.sample(rng);
                    }
                }
                components[components.len() - 1].service.sample(rng)
            }
        }
    }
}

/// Inverse-CDF exponential draw; `1 - U` keeps the argument of `ln` in (0, 1].
pub(crate) fn sample_exponential<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> f64 {
    -mean * (1.0 - rng.gen::<f64>()).ln()
}

fn require_positive(what: &str, value: f64) -> Result<(), DistError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DistError::Invalid(format!(
            "{what} must be finite and > 0, got {value}"
        )))
    }
}

fn powk(base: f64, k: u32) -> f64 {
    if k <= i32::MAX as u32 {
        base.powi(k as i32)
    } else {
        base.powf(f64::from(k))
    }
}
