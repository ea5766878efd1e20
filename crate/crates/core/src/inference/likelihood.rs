//! Log-likelihoods and their analytic gradients.
//!
//! The generic path evaluates `-int_0^T lambda + sum log lambda(T_i)` by direct
//! summation (quadratic in the number of events) and is the reference for the
//! specialised closed forms below. The compensator always runs to the
//! observation end `T`, not to the last event.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, HawkesError, Result};
use crate::kernels::{ExponentialParams, LagLimit, MarkedExponentialParams, MarkedPowerLawParams};
use crate::process::{compensator_unchecked, BackgroundSpec, EventSequence, HawkesModel};

/// Arguments of `log` are floored here; a floored evaluation is flagged.
pub const LOG_FLOOR: f64 = 1e-300;

/// The pieces of the generic log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTerms {
    /// `log lambda(T_i)` per event (`-inf` where the intensity vanishes).
    pub log_intensities: Vec<f64>,
    /// `int_0^T lambda`.
    pub compensator: f64,
}

impl LikelihoodTerms {
    pub fn total(&self) -> f64 {
        self.log_intensities.iter().sum::<f64>() - self.compensator
    }
}

fn require_events(seq: &EventSequence) -> Result<()> {
    if seq.is_empty() {
        Err(HawkesError::Argument(
            "log-likelihood needs at least one event".into(),
        ))
    } else {
        Ok(())
    }
}

/// Direct evaluation of every term.
pub fn likelihood_terms(model: &HawkesModel, seq: &EventSequence) -> Result<LikelihoodTerms> {
    model.validate()?;
    require_events(seq)?;
    let events = seq.events();
    let log_intensities = events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let lambda = model.background.value(e.time) + model.excitation(&events[..i], e.time);
            if lambda > 0.0 {
                lambda.ln()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let compensator =
        compensator_unchecked(model, events, 0.0, LagLimit::Finite(seq.observation_end()));
    Ok(LikelihoodTerms {
        log_intensities,
        compensator,
    })
}

/// Generic log-likelihood. Returns `-inf` when the intensity vanishes at an event.
pub fn log_likelihood(model: &HawkesModel, seq: &EventSequence) -> Result<f64> {
    Ok(likelihood_terms(model, seq)?.total())
}

/// Constant background with an unmarked exponential kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialHawkesParams {
    pub lambda0: f64,
    pub alpha: f64,
    pub delta: f64,
}

impl ExponentialHawkesParams {
    pub fn new(lambda0: f64, alpha: f64, delta: f64) -> Result<Self> {
        let p = Self {
            lambda0,
            alpha,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda0", self.lambda0)?;
        nonnegative("alpha", self.alpha)?;
        positive("delta", self.delta)?;
        Ok(())
    }

    pub fn model(&self) -> Result<HawkesModel> {
        HawkesModel::new(
            BackgroundSpec::Constant { rate: self.lambda0 },
            ExponentialParams::new(self.alpha, self.delta)?.into(),
        )
    }

    pub fn branching_factor(&self) -> f64 {
        self.alpha / self.delta
    }
}

/// A likelihood value with its gradient in natural parameter coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// A log argument hit [`LOG_FLOOR`].
    pub floored: bool,
}

#[inline]
fn floored_ln(x: f64, floored: &mut bool) -> f64 {
    if x < LOG_FLOOR {
        *floored = true;
        LOG_FLOOR.ln()
    } else {
        x.ln()
    }
}

/// Linear-time exponential log-likelihood via
/// `R_i = exp(-delta (T_i - T_{i-1})) (1 + R_{i-1})`, `lambda(T_i) = lambda0 + alpha R_i`.
pub fn log_likelihood_exponential_recursive(
    params: &ExponentialHawkesParams,
    seq: &EventSequence,
) -> Result<f64> {
    Ok(exponential_evaluation(params, seq, false)?.value)
}

/// Gradient of the exponential log-likelihood in `(lambda0, alpha, delta)`.
pub fn gradient_exponential(params: &ExponentialHawkesParams, seq: &EventSequence) -> Result<[f64; 3]> {
    let g = exponential_evaluation(params, seq, true)?.gradient;
    Ok([g[0], g[1], g[2]])
}

pub(crate) fn exponential_evaluation(
    p: &ExponentialHawkesParams,
    seq: &EventSequence,
    with_gradient: bool,
) -> Result<Evaluation> {
    p.validate()?;
    require_events(seq)?;
    let ExponentialHawkesParams {
        lambda0,
        alpha,
        delta,
    } = *p;
    let end = seq.observation_end();
    let mut value = 0.0;
    let mut g = [0.0f64; 3];
    let mut floored = false;
    let mut r = 0.0f64;
    let mut dr = 0.0f64;
    let mut previous: Option<f64> = None;
    for e in seq.events() {
        if let Some(prev) = previous {
            let gap = e.time - prev;
            let decay = (-delta * gap).exp();
            if with_gradient {
                dr = decay * (dr - gap * (1.0 + r));
            }
            r = decay * (1.0 + r);
        }
        previous = Some(e.time);
        let lambda = lambda0 + alpha * r;
        value += floored_ln(lambda, &mut floored);
        if with_gradient {
            g[0] += 1.0 / lambda;
            g[1] += r / lambda;
            g[2] += alpha * dr / lambda;
        }
    }
    let mut mass = 0.0;
    let mut mass_ddelta = 0.0;
    for e in seq.events() {
        let x = end - e.time;
        let tail = (-delta * x).exp();
        let one_minus = -(-delta * x).exp_m1();
        mass += one_minus;
        if with_gradient {
            mass_ddelta += -one_minus / (delta * delta) + x * tail / delta;
        }
    }
    value -= lambda0 * end + alpha / delta * mass;
    if with_gradient {
        g[0] -= end;
        g[1] -= mass / delta;
        g[2] -= alpha * mass_ddelta;
    }
    Ok(Evaluation {
        value,
        gradient: if with_gradient { g.to_vec() } else { Vec::new() },
        floored,
    })
}

/// Closed-form log-likelihood of the marked power-law cascade model.
///
/// The first event is the immigrant: the excitation log-sum starts at the
/// second event, while every event (immigrant included) contributes to the
/// compensator up to the observation end.
pub fn log_likelihood_marked_powerlaw(p: &MarkedPowerLawParams, seq: &EventSequence) -> Result<f64> {
    Ok(marked_powerlaw_evaluation(p, seq, false)?.value)
}

/// Partial derivatives in `(kappa, beta, c, theta)`.
pub fn gradient_marked_powerlaw(p: &MarkedPowerLawParams, seq: &EventSequence) -> Result<[f64; 4]> {
    let g = marked_powerlaw_evaluation(p, seq, true)?.gradient;
    Ok([g[0], g[1], g[2], g[3]])
}

pub(crate) fn marked_powerlaw_evaluation(
    p: &MarkedPowerLawParams,
    seq: &EventSequence,
    with_gradient: bool,
) -> Result<Evaluation> {
    p.validate()?;
    require_events(seq)?;
    let MarkedPowerLawParams {
        kappa,
        beta,
        c,
        theta,
    } = *p;
    let events = seq.events();
    let end = seq.observation_end();
    let mut value = 0.0;
    let mut g = [0.0f64; 4];
    let mut floored = false;

    let offspring = events.len() - 1;
    if offspring > 0 {
        value += offspring as f64 * kappa.ln();
        g[0] += offspring as f64 / kappa;
    }
    for (i, ei) in events.iter().enumerate().skip(1) {
        let (mut s, mut s_beta, mut s_c, mut s_theta) = (0.0, 0.0, 0.0, 0.0);
        for ej in &events[..i] {
            let y = ei.time - ej.time + c;
            let ly = y.ln();
            let lm = ej.mark.ln();
            let w = (beta * lm - (1.0 + theta) * ly).exp();
            s += w;
            if with_gradient {
                s_beta += lm * w;
                s_c += w / y;
                s_theta += ly * w;
            }
        }
        value += floored_ln(s, &mut floored);
        if with_gradient && s > 0.0 {
            g[1] += s_beta / s;
            g[2] -= (1.0 + theta) * s_c / s;
            g[3] -= s_theta / s;
        }
    }

    let c_pow = c.powf(-theta);
    for e in events {
        let x = end - e.time;
        let y = x + c;
        let mb = e.mark.powf(beta);
        // [c^-theta - (x + c)^-theta] / theta
        let bracket = c_pow * -(-theta * (x / c).ln_1p()).exp_m1() / theta;
        value -= kappa * mb * bracket;
        if with_gradient {
            let y_pow = y.powf(-theta);
            g[0] -= mb * bracket;
            g[1] -= kappa * mb * e.mark.ln() * bracket;
            let d_c = -c_pow / c + y_pow / y;
            g[2] -= kappa * mb * d_c;
            let d_theta = (-c.ln() * c_pow + y.ln() * y_pow) / theta - bracket / theta;
            g[3] -= kappa * mb * d_theta;
        }
    }
    Ok(Evaluation {
        value,
        gradient: if with_gradient { g.to_vec() } else { Vec::new() },
        floored,
    })
}

/// Log-likelihood of the marked exponential cascade model (same immigrant
/// convention as the power-law form), computed with a linear recursion.
pub fn log_likelihood_marked_exponential(
    p: &MarkedExponentialParams,
    seq: &EventSequence,
) -> Result<f64> {
    Ok(marked_exponential_evaluation(p, seq, false)?.value)
}

/// Partial derivatives in `(kappa, beta, theta)`.
pub fn gradient_marked_exponential(
    p: &MarkedExponentialParams,
    seq: &EventSequence,
) -> Result<[f64; 3]> {
    let g = marked_exponential_evaluation(p, seq, true)?.gradient;
    Ok([g[0], g[1], g[2]])
}

pub(crate) fn marked_exponential_evaluation(
    p: &MarkedExponentialParams,
    seq: &EventSequence,
    with_gradient: bool,
) -> Result<Evaluation> {
    p.validate()?;
    require_events(seq)?;
    let MarkedExponentialParams { kappa, beta, theta } = *p;
    let events = seq.events();
    let end = seq.observation_end();
    let mut value = 0.0;
    let mut g = [0.0f64; 3];
    let mut floored = false;

    let offspring = events.len() - 1;
    if offspring > 0 {
        value += offspring as f64 * (kappa.ln() + theta.ln());
        g[0] += offspring as f64 / kappa;
        g[2] += offspring as f64 / theta;
    }
    // s = sum_j m_j^beta e^{-theta lag}, with beta- and lag-weighted companions.
    let (mut s, mut s_beta, mut s_lag) = (0.0f64, 0.0f64, 0.0f64);
    for w in events.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        let gap = cur.time - prev.time;
        let decay = (-theta * gap).exp();
        let mb = prev.mark.powf(beta);
        s_lag = decay * (s_lag + gap * (s + mb));
        s_beta = decay * (s_beta + prev.mark.ln() * mb);
        s = decay * (s + mb);
        value += floored_ln(s, &mut floored);
        if with_gradient && s > 0.0 {
            g[1] += s_beta / s;
            g[2] -= s_lag / s;
        }
    }
    for e in events {
        let x = end - e.time;
        let mb = e.mark.powf(beta);
        let mass = -(-theta * x).exp_m1();
        value -= kappa * mb * mass;
        if with_gradient {
            g[0] -= mb * mass;
            g[1] -= kappa * mb * e.mark.ln() * mass;
            g[2] -= kappa * mb * x * (-theta * x).exp();
        }
    }
    Ok(Evaluation {
        value,
        gradient: if with_gradient { g.to_vec() } else { Vec::new() },
        floored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ExponentialParams;
    use crate::process::Event;

    fn poisson_model(rate: f64) -> HawkesModel {
        HawkesModel::new(
            BackgroundSpec::Constant { rate },
            ExponentialParams::new(0.0, 1.0).unwrap().into(),
        )
        .unwrap()
    }

    #[test]
    fn homogeneous_poisson_value() {
        let seq = EventSequence::from_times(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(log_likelihood(&poisson_model(1.0), &seq).unwrap(), -3.0);
        let p = ExponentialHawkesParams::new(1.0, 0.0, 1.0).unwrap();
        assert_eq!(log_likelihood_exponential_recursive(&p, &seq).unwrap(), -3.0);
    }

    #[test]
    fn poisson_mle_is_n_over_t() {
        let seq = EventSequence::new(
            [0.4, 1.1, 2.5, 2.9, 4.2].iter().map(|&t| Event::unmarked(t)).collect(),
            6.0,
        )
        .unwrap();
        let best = 5.0 / 6.0;
        let at = |r: f64| log_likelihood(&poisson_model(r), &seq).unwrap();
        assert!(at(best) > at(best * 1.01));
        assert!(at(best) > at(best * 0.99));
    }

    #[test]
    fn recursion_matches_hand_expansion() {
        // Three events: lambda(T1) = l0, lambda(T2) = l0 + a e^{-d g1},
        // lambda(T3) = l0 + a (e^{-d (t3-t1)} + e^{-d (t3-t2)}).
        let (l0, a, d) = (0.7, 0.9, 1.3);
        let t = [0.2, 0.5, 1.4];
        let end = 2.0;
        let seq = EventSequence::new(t.iter().map(|&x| Event::unmarked(x)).collect(), end).unwrap();
        let lam = [
            l0,
            l0 + a * (-d * (t[1] - t[0])).exp(),
            l0 + a * ((-d * (t[2] - t[0])).exp() + (-d * (t[2] - t[1])).exp()),
        ];
        let comp = l0 * end + a / d * t.iter().map(|&x| 1.0 - (-d * (end - x)).exp()).sum::<f64>();
        let want = lam.iter().map(|l| l.ln()).sum::<f64>() - comp;
        let p = ExponentialHawkesParams::new(l0, a, d).unwrap();
        let got = log_likelihood_exponential_recursive(&p, &seq).unwrap();
        assert!((got - want).abs() < 1e-14);
        let generic = log_likelihood(&p.model().unwrap(), &seq).unwrap();
        assert!((generic - want).abs() < 1e-14);
    }

    #[test]
    fn single_event_cascade_is_compensator_only() {
        let p = MarkedPowerLawParams::new(0.8, 0.6, 10.0, 0.8).unwrap();
        let seq = EventSequence::new(vec![Event::new(0.0, 1000.0)], 50.0).unwrap();
        let want = -0.8 * 1000f64.powf(0.6) * (10f64.powf(-0.8) - 60f64.powf(-0.8)) / 0.8;
        let got = log_likelihood_marked_powerlaw(&p, &seq).unwrap();
        assert!((got - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn two_event_cascade_hand_value() {
        let p = MarkedPowerLawParams::new(1.0, 0.0, 1.0, 1.0).unwrap();
        let seq = EventSequence::new(vec![Event::new(0.0, 1.0), Event::new(1.0, 1.0)], 1.0).unwrap();
        let want = 0.25f64.ln() - 0.5;
        let got = log_likelihood_marked_powerlaw(&p, &seq).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn kappa_partial_closed_form() {
        let p = MarkedPowerLawParams::new(0.7, 0.4, 2.0, 0.9).unwrap();
        let seq = EventSequence::new(
            vec![
                Event::new(0.0, 30.0),
                Event::new(0.6, 2.0),
                Event::new(1.7, 150.0),
                Event::new(2.2, 1.0),
            ],
            5.0,
        )
        .unwrap();
        let bracket: f64 = seq
            .events()
            .iter()
            .map(|e| e.mark.powf(0.4) * (2f64.powf(-0.9) - (5.0 + 2.0 - e.time).powf(-0.9)) / 0.9)
            .sum();
        let g = gradient_marked_powerlaw(&p, &seq).unwrap();
        assert!((g[0] - (3.0 / 0.7 - bracket)).abs() < 1e-12);
    }

    #[test]
    fn vanishing_intensity_is_neg_infinity() {
        let m = HawkesModel::new(
            BackgroundSpec::Zero,
            MarkedPowerLawParams::new(1.0, 0.0, 1.0, 1.0).unwrap().into(),
        )
        .unwrap();
        let seq = EventSequence::new(vec![Event::new(0.0, 1.0)], 1.0).unwrap();
        assert_eq!(log_likelihood(&m, &seq).unwrap(), f64::NEG_INFINITY);
        let empty = EventSequence::new(vec![], 1.0).unwrap();
        assert!(log_likelihood(&m, &empty).is_err());
    }

    #[test]
    fn marked_exponential_matches_generic_offspring_terms() {
        let p = MarkedExponentialParams::new(0.3, 0.5, 0.8).unwrap();
        let seq = EventSequence::new(
            vec![
                Event::new(0.0, 12.0),
                Event::new(0.3, 1.0),
                Event::new(1.1, 40.0),
                Event::new(2.6, 3.0),
            ],
            4.0,
        )
        .unwrap();
        let model = HawkesModel::new(BackgroundSpec::Zero, p.into()).unwrap();
        let terms = likelihood_terms(&model, &seq).unwrap();
        let want = terms.log_intensities[1..].iter().sum::<f64>() - terms.compensator;
        let got = log_likelihood_marked_exponential(&p, &seq).unwrap();
        assert!((got - want).abs() < 1e-12 * want.abs());
    }
}
