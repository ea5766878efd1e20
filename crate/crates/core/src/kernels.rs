//! Memory kernels: pointwise values, closed-form integrals and branching factors.
//!
//! Four families are supported:
//!
//! ```text
//! Exponential        phi(x)   = alpha * exp(-delta * x)
//! PowerLaw           phi(x)   = alpha / (x + delta)^(eta + 1)
//! MarkedPowerLaw     phi_m(x) = kappa * m^beta * (x + c)^-(1 + theta)
//! MarkedExponential  phi_m(x) = kappa * m^beta * theta * exp(-theta * x)
//! ```
//!
//! Unmarked families ignore the mark argument. All families are
//! nonincreasing in the lag, which the thinning sampler relies on.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, HawkesError, Result};

/// Upper limit of a lag integral. `Infinite` is exact, not a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LagLimit {
    Finite(f64),
    Infinite,
}

impl From<f64> for LagLimit {
    fn from(value: f64) -> Self {
        if value == f64::INFINITY {
            LagLimit::Infinite
        } else {
            LagLimit::Finite(value)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialParams {
    pub alpha: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawParams {
    pub alpha: f64,
    pub delta: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPowerLawParams {
    pub kappa: f64,
    pub beta: f64,
    pub c: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedExponentialParams {
    pub kappa: f64,
    pub beta: f64,
    pub theta: f64,
}

impl ExponentialParams {
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        let p = Self { alpha, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("alpha", self.alpha)?;
        positive("delta", self.delta)?;
        Ok(())
    }
}

impl PowerLawParams {
    pub fn new(alpha: f64, delta: f64, eta: f64) -> Result<Self> {
        let p = Self { alpha, delta, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("alpha", self.alpha)?;
        positive("delta", self.delta)?;
        positive("eta", self.eta)?;
        Ok(())
    }
}

impl MarkedPowerLawParams {
    pub fn new(kappa: f64, beta: f64, c: f64, theta: f64) -> Result<Self> {
        let p = Self {
            kappa,
            beta,
            c,
            theta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Domain check. `kappa = 0` is accepted as the degenerate "no offspring"
    /// kernel used by prediction and simulation edge cases.
    pub fn validate(&self) -> Result<()> {
        nonnegative("kappa", self.kappa)?;
        nonnegative("beta", self.beta)?;
        positive("c", self.c)?;
        positive("theta", self.theta)?;
        Ok(())
    }
}

impl MarkedExponentialParams {
    pub fn new(kappa: f64, beta: f64, theta: f64) -> Result<Self> {
        let p = Self { kappa, beta, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("kappa", self.kappa)?;
        nonnegative("beta", self.beta)?;
        positive("theta", self.theta)?;
        Ok(())
    }
}

/// Pareto mark law `P(m) = (alpha - 1) m^-alpha` on `[1, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkDistribution {
    pub exponent: f64,
}

impl MarkDistribution {
    pub fn new(exponent: f64) -> Result<Self> {
        if exponent.is_finite() && exponent > 1.0 {
            Ok(Self { exponent })
        } else {
            Err(HawkesError::domain(
                "mark_exponent",
                exponent,
                "must be finite and > 1",
            ))
        }
    }

    /// `E[m^beta] = (alpha - 1) / (alpha - beta - 1)`, finite only for `beta < alpha - 1`.
    pub fn moment(&self, beta: f64) -> Result<f64> {
        let bound = self.exponent - 1.0;
        if beta < bound {
            Ok(bound / (bound - beta))
        } else {
            Err(HawkesError::DivergentMarkMoment { beta, bound })
        }
    }

    /// Inverse-transform draw from a uniform `u` in (0, 1).
    pub fn sample(&self, u: f64) -> f64 {
        u.powf(-1.0 / (self.exponent - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum KernelSpec {
    Exponential(ExponentialParams),
    PowerLaw(PowerLawParams),
    #[serde(rename = "marked-powerlaw")]
    MarkedPowerLaw(MarkedPowerLawParams),
    MarkedExponential(MarkedExponentialParams),
}

impl From<ExponentialParams> for KernelSpec {
    fn from(p: ExponentialParams) -> Self {
        KernelSpec::Exponential(p)
    }
}

impl From<PowerLawParams> for KernelSpec {
    fn from(p: PowerLawParams) -> Self {
        KernelSpec::PowerLaw(p)
    }
}

impl From<MarkedPowerLawParams> for KernelSpec {
    fn from(p: MarkedPowerLawParams) -> Self {
        KernelSpec::MarkedPowerLaw(p)
    }
}

impl From<MarkedExponentialParams> for KernelSpec {
    fn from(p: MarkedExponentialParams) -> Self {
        KernelSpec::MarkedExponential(p)
    }
}

/// `(x0 + s)^-p - (x1 + s)^-p` without cancellation for nearby bounds.
fn power_difference(x0: f64, x1: LagLimit, shift: f64, p: f64) -> f64 {
    let head = (x0 + shift).powf(-p);
    match x1 {
        LagLimit::Infinite => head,
        LagLimit::Finite(x1) => {
            let log_ratio = ((x1 - x0) / (x0 + shift)).ln_1p();
            head * -(-p * log_ratio).exp_m1()
        }
    }
}

/// `exp(-r x0) - exp(-r x1)` without cancellation.
fn exp_difference(x0: f64, x1: LagLimit, rate: f64) -> f64 {
    let head = (-rate * x0).exp();
    match x1 {
        LagLimit::Infinite => head,
        LagLimit::Finite(x1) => head * -(-rate * (x1 - x0)).exp_m1(),
    }
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Exponential(p) => p.validate(),
            KernelSpec::PowerLaw(p) => p.validate(),
            KernelSpec::MarkedPowerLaw(p) => p.validate(),
            KernelSpec::MarkedExponential(p) => p.validate(),
        }
    }

    pub fn is_marked(&self) -> bool {
        matches!(
            self,
            KernelSpec::MarkedPowerLaw(_) | KernelSpec::MarkedExponential(_)
        )
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::Exponential(_) => "exponential",
            KernelSpec::PowerLaw(_) => "power-law",
            KernelSpec::MarkedPowerLaw(_) => "marked-powerlaw",
            KernelSpec::MarkedExponential(_) => "marked-exponential",
        }
    }

    /// Decay rate for the exponential families, whose excitation is Markov.
    pub fn exponential_decay(&self) -> Option<f64> {
        match self {
            KernelSpec::Exponential(p) => Some(p.delta),
            KernelSpec::MarkedExponential(p) => Some(p.theta),
            _ => None,
        }
    }

    /// Mark scaling `m^beta`; 1 for unmarked families.
    #[inline]
    pub fn mark_weight(&self, mark: f64) -> f64 {
        match self {
            KernelSpec::MarkedPowerLaw(p) => mark.powf(p.beta),
            KernelSpec::MarkedExponential(p) => mark.powf(p.beta),
            _ => 1.0,
        }
    }

    /// `phi_m(lag)` for `lag >= 0`.
    pub fn value(&self, mark: f64, lag: f64) -> Result<f64> {
        if !(lag >= 0.0) {
            return Err(HawkesError::Argument(format!(
                "kernel lag must be >= 0, got {lag}"
            )));
        }
        Ok(self.value_at(mark, lag))
    }

    /// Unchecked pointwise value; callers guarantee `lag >= 0`.
    #[inline]
    pub(crate) fn value_at(&self, mark: f64, lag: f64) -> f64 {
        match *self {
            KernelSpec::Exponential(p) => p.alpha * (-p.delta * lag).exp(),
            KernelSpec::PowerLaw(p) => p.alpha * (lag + p.delta).powf(-(p.eta + 1.0)),
            KernelSpec::MarkedPowerLaw(p) => {
                p.kappa * mark.powf(p.beta) * (lag + p.c).powf(-(1.0 + p.theta))
            }
            KernelSpec::MarkedExponential(p) => {
                p.kappa * mark.powf(p.beta) * p.theta * (-p.theta * lag).exp()
            }
        }
    }

    /// `int_{lag0}^{lag1} phi_m(x) dx` in closed form.
    pub fn integral(&self, mark: f64, lag0: f64, lag1: impl Into<LagLimit>) -> Result<f64> {
        let lag1 = lag1.into();
        if !(lag0 >= 0.0) {
            return Err(HawkesError::Argument(format!(
                "integral lower bound must be >= 0, got {lag0}"
            )));
        }
        if let LagLimit::Finite(x1) = lag1 {
            if !(x1 >= lag0) {
                return Err(HawkesError::Argument(format!(
                    "integral bounds reversed: [{lag0}, {x1}]"
                )));
            }
        }
        Ok(self.integral_between(mark, lag0, lag1))
    }

    #[inline]
    pub(crate) fn integral_between(&self, mark: f64, lag0: f64, lag1: LagLimit) -> f64 {
        if lag1 == LagLimit::Finite(lag0) {
            return 0.0;
        }
        match *self {
            KernelSpec::Exponential(p) => p.alpha / p.delta * exp_difference(lag0, lag1, p.delta),
            KernelSpec::PowerLaw(p) => {
                p.alpha / p.eta * power_difference(lag0, lag1, p.delta, p.eta)
            }
            KernelSpec::MarkedPowerLaw(p) => {
                p.kappa * mark.powf(p.beta) / p.theta
                    * power_difference(lag0, lag1, p.c, p.theta)
            }
            KernelSpec::MarkedExponential(p) => {
                p.kappa * mark.powf(p.beta) * exp_difference(lag0, lag1, p.theta)
            }
        }
    }

    /// Branching factor `int_0^inf phi` of an unmarked kernel.
    pub fn branching_factor(&self) -> Result<f64> {
        match *self {
            KernelSpec::Exponential(p) => Ok(p.alpha / p.delta),
            KernelSpec::PowerLaw(p) => Ok(p.alpha / (p.eta * p.delta.powf(p.eta))),
            _ => Err(HawkesError::KernelContract(format!(
                "{} is a marked kernel; use marked_branching_factor",
                self.family_name()
            ))),
        }
    }

    /// Branching factor of a marked kernel, with the mark expectation taken
    /// under `dist`.
    pub fn marked_branching_factor(&self, dist: &MarkDistribution) -> Result<f64> {
        match *self {
            KernelSpec::MarkedPowerLaw(p) => {
                let moment = dist.moment(p.beta)?;
                Ok(p.kappa * moment / (p.theta * p.c.powf(p.theta)))
            }
            KernelSpec::MarkedExponential(p) => Ok(p.kappa * dist.moment(p.beta)?),
            _ => Err(HawkesError::KernelContract(format!(
                "{} is unmarked; use branching_factor",
                self.family_name()
            ))),
        }
    }

    /// Branching factor for either kind of family. Marked families need a mark law.
    pub fn expected_branching_factor(&self, dist: Option<&MarkDistribution>) -> Result<f64> {
        if self.is_marked() {
            let dist = dist.ok_or_else(|| {
                HawkesError::KernelContract(format!(
                    "{} needs a mark distribution for its branching factor",
                    self.family_name()
                ))
            })?;
            self.marked_branching_factor(dist)
        } else {
            self.branching_factor()
        }
    }
}
