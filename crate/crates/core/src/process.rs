//! Event sequences, Hawkes models, and the intensity / compensator evaluation
//! shared by simulation, inference and prediction.
//!
//! History convention: an event at `T_i` contributes to `lambda(t)` only for
//! `T_i < t`. At an event time the intensity is the left limit; use
//! [`intensity_right_limit`] to include the event's own jump.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, HawkesError, Result};
use crate::kernels::{KernelSpec, LagLimit, MarkDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    /// Seconds since the start of observation.
    pub time: f64,
    /// Event magnitude; 1.0 for unmarked processes.
    pub mark: f64,
    /// Index of the triggering event; `None` for immigrants.
    pub parent: Option<usize>,
}

impl Event {
    pub fn new(time: f64, mark: f64) -> Self {
        Self {
            time,
            mark,
            parent: None,
        }
    }

    pub fn unmarked(time: f64) -> Self {
        Self::new(time, 1.0)
    }
}

/// A realization on the observation window `[0, observation_end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    events: Vec<Event>,
    observation_end: f64,
}

impl EventSequence {
    /// Validates strict time ordering, marks `>= 1`, parent links pointing
    /// backwards, and all times inside `[0, observation_end]`.
    pub fn new(events: Vec<Event>, observation_end: f64) -> Result<Self> {
        nonnegative("observation_end", observation_end)?;
        let mut previous = f64::NEG_INFINITY;
        for (i, e) in events.iter().enumerate() {
            if !(e.time.is_finite() && e.time >= 0.0) {
                return Err(HawkesError::Argument(format!(
                    "event {i}: time {} must be finite and >= 0",
                    e.time
                )));
            }
            if e.time <= previous {
                return Err(HawkesError::Argument(format!(
                    "event {i}: time {} does not strictly follow {previous}",
                    e.time
                )));
            }
            if e.time > observation_end {
                return Err(HawkesError::Argument(format!(
                    "event {i}: time {} is after the observation end {observation_end}",
                    e.time
                )));
            }
            if !(e.mark.is_finite() && e.mark >= 1.0) {
                return Err(HawkesError::Argument(format!(
                    "event {i}: mark {} must be finite and >= 1",
                    e.mark
                )));
            }
            if let Some(p) = e.parent {
                if p >= i {
                    return Err(HawkesError::Argument(format!(
                        "event {i}: parent {p} does not precede it"
                    )));
                }
            }
            previous = e.time;
        }
        Ok(Self {
            events,
            observation_end,
        })
    }

    /// Unmarked sequence observed until its last event.
    pub fn from_times(times: &[f64]) -> Result<Self> {
        let end = times.last().copied().unwrap_or(0.0);
        Self::new(times.iter().map(|&t| Event::unmarked(t)).collect(), end)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn observation_end(&self) -> f64 {
        self.observation_end
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().map(|e| e.time)
    }

    pub fn has_parents(&self) -> bool {
        self.events.iter().any(|e| e.parent.is_some())
    }

    /// Same events observed on a wider window. The new end must cover every event.
    pub fn with_observation_end(self, observation_end: f64) -> Result<Self> {
        Self::new(self.events, observation_end)
    }

    /// Events with `time <= window`, observed on `[0, window]`. Parent links
    /// into the dropped tail cannot occur since parents precede children.
    pub fn observed_until(&self, window: f64) -> Result<Self> {
        nonnegative("window", window)?;
        let kept = self.events.partition_point(|e| e.time <= window);
        Self::new(self.events[..kept].to_vec(), window)
    }

    /// Number of events with `time < t`.
    #[inline]
    pub(crate) fn count_before(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time < t)
    }
}

/// `N_t`: number of events with time `<= t` (right-continuous).
pub fn counting_process(seq: &EventSequence, t: f64) -> usize {
    seq.events.partition_point(|e| e.time <= t)
}

/// Immigrant (background) intensity `lambda_0(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum BackgroundSpec {
    Zero,
    Constant {
        rate: f64,
    },
    /// `a + (lambda0 - a) exp(-delta t)`.
    ExponentialDecay {
        a: f64,
        lambda0: f64,
        delta: f64,
    },
}

impl BackgroundSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BackgroundSpec::Zero => Ok(()),
            BackgroundSpec::Constant { rate } => positive("lambda0", rate).map(|_| ()),
            BackgroundSpec::ExponentialDecay { a, lambda0, delta } => {
                nonnegative("a", a)?;
                nonnegative("lambda0", lambda0)?;
                positive("delta", delta)?;
                if lambda0 < a {
                    return Err(HawkesError::domain("lambda0", lambda0, "must be >= a"));
                }
                Ok(())
            }
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            BackgroundSpec::Zero => 0.0,
            BackgroundSpec::Constant { rate } => rate,
            BackgroundSpec::ExponentialDecay { a, lambda0, delta } => {
                a + (lambda0 - a) * (-delta * t).exp()
            }
        }
    }

    /// `int_{t0}^{t1} lambda_0`.
    pub fn integral(&self, t0: f64, t1: LagLimit) -> f64 {
        if t1 == LagLimit::Finite(t0) {
            return 0.0;
        }
        match (*self, t1) {
            (BackgroundSpec::Zero, _) => 0.0,
            (BackgroundSpec::Constant { rate }, LagLimit::Finite(t1)) => rate * (t1 - t0),
            (BackgroundSpec::Constant { .. }, LagLimit::Infinite) => f64::INFINITY,
            (BackgroundSpec::ExponentialDecay { a, lambda0, delta }, t1) => {
                let head = (-delta * t0).exp();
                match t1 {
                    LagLimit::Finite(t1) => {
                        a * (t1 - t0) + (lambda0 - a) / delta * head * -(-delta * (t1 - t0)).exp_m1()
                    }
                    LagLimit::Infinite if a > 0.0 => f64::INFINITY,
                    LagLimit::Infinite => lambda0 / delta * head,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HawkesModel {
    pub background: BackgroundSpec,
    pub kernel: KernelSpec,
    /// Mark law used by marked prediction and mark sampling.
    pub mark_law: Option<MarkDistribution>,
}

impl HawkesModel {
    pub fn new(background: BackgroundSpec, kernel: KernelSpec) -> Result<Self> {
        background.validate()?;
        kernel.validate()?;
        Ok(Self {
            background,
            kernel,
            mark_law: None,
        })
    }

    pub fn with_mark_law(mut self, law: MarkDistribution) -> Self {
        self.mark_law = Some(law);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.background.validate()?;
        self.kernel.validate()
    }

    /// Excitation `sum phi` over the first `count` events, evaluated at `t`.
    #[inline]
    pub(crate) fn excitation(&self, events: &[Event], t: f64) -> f64 {
        events
            .iter()
            .map(|e| self.kernel.value_at(e.mark, t - e.time))
            .sum()
    }
}

/// `lambda(t | H_t)`; only events strictly before `t` contribute.
pub fn intensity_at(model: &HawkesModel, seq: &EventSequence, t: f64) -> Result<f64> {
    model.validate()?;
    check_time(t)?;
    let before = seq.count_before(t);
    Ok(model.background.value(t) + model.excitation(&seq.events[..before], t))
}

/// Right limit `lambda(t+)`, including the jumps of events at exactly `t`.
pub fn intensity_right_limit(model: &HawkesModel, seq: &EventSequence, t: f64) -> Result<f64> {
    model.validate()?;
    check_time(t)?;
    let upto = counting_process(seq, t);
    Ok(model.background.value(t) + model.excitation(&seq.events[..upto], t))
}

/// `int_{t0}^{t1} lambda(s) ds` from the closed-form antiderivatives.
pub fn compensator(model: &HawkesModel, seq: &EventSequence, t0: f64, t1: f64) -> Result<f64> {
    model.validate()?;
    check_time(t0)?;
    if !(t1 >= t0) {
        return Err(HawkesError::Argument(format!(
            "compensator bounds reversed: [{t0}, {t1}]"
        )));
    }
    Ok(compensator_unchecked(model, seq.events(), t0, LagLimit::from(t1)))
}

pub(crate) fn compensator_unchecked(
    model: &HawkesModel,
    events: &[Event],
    t0: f64,
    t1: LagLimit,
) -> f64 {
    if t1 == LagLimit::Finite(t0) {
        return 0.0;
    }
    let contributing = match t1 {
        LagLimit::Finite(t1) => events.partition_point(|e| e.time < t1),
        LagLimit::Infinite => events.len(),
    };
    let excitation: f64 = events[..contributing]
        .iter()
        .map(|e| {
            let lag0 = (t0 - e.time).max(0.0);
            let lag1 = match t1 {
                LagLimit::Finite(t1) => LagLimit::Finite(t1 - e.time),
                LagLimit::Infinite => LagLimit::Infinite,
            };
            model.kernel.integral_between(e.mark, lag0, lag1)
        })
        .sum();
    model.background.integral(t0, t1) + excitation
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(HawkesError::Argument(format!(
            "time must be finite and >= 0, got {t}"
        )))
    }
}
