//! Event generation: Ogata thinning for any nonincreasing kernel, cluster
//! simulation from a single immigrant, and the linear-time decomposition
//! sampler for exponential Hawkes processes.
//!
//! Accepted events carry a parent link sampled in proportion to each
//! source's contribution to the intensity at the accepted time, so every
//! simulated sequence exposes its branching structure.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, HawkesError, Result};
use crate::kernels::{KernelSpec, LagLimit, MarkDistribution};
use crate::process::{BackgroundSpec, Event, EventSequence, HawkesModel};
use crate::rng::RunStreams;

/// Consecutive rejections (or infinite waits) tolerated before giving up.
pub const DEFAULT_STALL_BUDGET: u64 = 10_000_000;

/// Remaining expected event count below which a process with finite total
/// background mass is treated as extinct.
pub const EXTINCTION_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Stop once the output holds this many events.
    MaxEvents(usize),
    /// Stop at the first proposal beyond this time.
    Horizon(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum MarkSource {
    Unit,
    /// Marks taken in order for successive new events, cycling when exhausted.
    FixedList(Vec<f64>),
    ParetoDraw(MarkDistribution),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub stop: StopRule,
    pub seed: u64,
    /// Run index within a batch; selects the random streams.
    pub run: u64,
    pub marks: MarkSource,
    pub stall_budget: u64,
}

impl SimulationConfig {
    pub fn new(stop: StopRule, seed: u64) -> Self {
        Self {
            stop,
            seed,
            run: 0,
            marks: MarkSource::Unit,
            stall_budget: DEFAULT_STALL_BUDGET,
        }
    }

    pub fn with_marks(mut self, marks: MarkSource) -> Self {
        self.marks = marks;
        self
    }

    pub fn with_run(mut self, run: u64) -> Self {
        self.run = run;
        self
    }

    pub fn with_stall_budget(mut self, budget: u64) -> Self {
        self.stall_budget = budget;
        self
    }

    fn validate(&self) -> Result<()> {
        if let StopRule::Horizon(h) = self.stop {
            nonnegative("horizon", h)?;
        }
        match &self.marks {
            MarkSource::FixedList(marks) => {
                if marks.is_empty() {
                    return Err(HawkesError::Argument("fixed mark list is empty".into()));
                }
                if let Some(bad) = marks.iter().find(|m| !(m.is_finite() && **m >= 1.0)) {
                    return Err(HawkesError::domain("mark", *bad, "must be finite and >= 1"));
                }
            }
            MarkSource::ParetoDraw(d) => {
                MarkDistribution::new(d.exponent)?;
            }
            MarkSource::Unit => {}
        }
        if self.stall_budget == 0 {
            return Err(HawkesError::Argument("stall budget must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// The configured stop rule ended the run.
    StopRule,
    /// No further event can occur (zero intensity, infinite wait, or
    /// negligible remaining mass).
    Extinct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSequence {
    pub events: Vec<Event>,
    /// Generation per event; 0 for immigrants.
    pub generation: Vec<u32>,
    /// Thinning proposals that were rejected.
    pub rejected_count: u64,
    pub observation_end: f64,
    pub termination: Termination,
}

impl SimulatedSequence {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.time).collect()
    }

    pub fn inter_arrivals(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.events
            .iter()
            .map(|e| {
                let d = e.time - prev;
                prev = e.time;
                d
            })
            .collect()
    }

    pub fn to_event_sequence(&self) -> Result<EventSequence> {
        EventSequence::new(self.events.clone(), self.observation_end)
    }
}

/// Markov state of an exponentially decaying excitation.
#[derive(Debug, Clone, Copy)]
struct DecayState {
    rate: f64,
    anchor: f64,
    level: f64,
}

impl DecayState {
    #[inline]
    fn at(&self, t: f64) -> f64 {
        self.level * (-self.rate * (t - self.anchor)).exp()
    }
}

struct Thinning<'m> {
    model: &'m HawkesModel,
    events: Vec<Event>,
    generation: Vec<u32>,
    decay: Option<DecayState>,
    finite_background_mass: bool,
}

impl<'m> Thinning<'m> {
    fn new(model: &'m HawkesModel, history: Vec<Event>) -> Self {
        let mut generation = Vec::with_capacity(history.len());
        for e in &history {
            generation.push(e.parent.map_or(0, |p| generation[p] + 1));
        }
        let decay = model.kernel.exponential_decay().map(|rate| {
            let mut state = DecayState {
                rate,
                anchor: 0.0,
                level: 0.0,
            };
            for e in &history {
                state.level = state.at(e.time) + model.kernel.value_at(e.mark, 0.0);
                state.anchor = e.time;
            }
            state
        });
        let finite_background_mass = match model.background {
            BackgroundSpec::Zero => true,
            BackgroundSpec::Constant { .. } => false,
            BackgroundSpec::ExponentialDecay { a, .. } => a == 0.0,
        };
        Self {
            model,
            events: history,
            generation,
            decay,
            finite_background_mass,
        }
    }

    /// Excitation at `t`, for `t` not before the last event; an event at
    /// exactly `t` is included (right limit).
    #[inline]
    fn excitation(&self, t: f64) -> f64 {
        match &self.decay {
            Some(state) => state.at(t),
            None => self.model.excitation(&self.events, t),
        }
    }

    /// Expected number of events after `t` if no further event occurred.
    fn remaining_mass(&self, t: f64) -> f64 {
        let background = self.model.background.integral(t, LagLimit::Infinite);
        let excitation = match &self.decay {
            Some(state) => state.at(t) / state.rate,
            None => self
                .events
                .iter()
                .map(|e| {
                    self.model
                        .kernel
                        .integral_between(e.mark, t - e.time, LagLimit::Infinite)
                })
                .sum(),
        };
        background + excitation
    }

    fn attribute(&self, t: f64, intensity: f64, v: f64) -> Option<usize> {
        let mut target = v * intensity;
        let background = self.model.background.value(t);
        if target < background || self.events.is_empty() {
            return None;
        }
        target -= background;
        let kernel: &KernelSpec = &self.model.kernel;
        for (j, e) in self.events.iter().enumerate().rev() {
            let c = kernel.value_at(e.mark, t - e.time);
            if target < c {
                return Some(j);
            }
            target -= c;
        }
        // Only reachable through rounding; the newest event dominates.
        Some(self.events.len() - 1)
    }

    fn push(&mut self, time: f64, mark: f64, parent: Option<usize>) {
        let generation = parent.map_or(0, |p| self.generation[p] + 1);
        if let Some(state) = &mut self.decay {
            state.level = state.at(time) + self.model.kernel.value_at(mark, 0.0);
            state.anchor = time;
        }
        self.events.push(Event { time, mark, parent });
        self.generation.push(generation);
    }

    /// Runs Ogata thinning from `start`. Returns the termination reason and
    /// the number of rejected proposals, or the stall reason.
    fn run(
        &mut self,
        start: f64,
        cfg: &SimulationConfig,
        streams: &mut RunStreams,
        mut rejected: u64,
    ) -> std::result::Result<(Termination, u64, f64), (String, u64, f64)> {
        let background = self.model.background;
        let mut t = start;
        let mut new_events = 0usize;
        let mut consecutive = 0u64;
        loop {
            if let StopRule::MaxEvents(n) = cfg.stop {
                if self.events.len() >= n {
                    return Ok((Termination::StopRule, rejected, t));
                }
            }
            let lambda_star = background.value(t) + self.excitation(t);
            if !(lambda_star > 0.0)
                || (self.finite_background_mass && self.remaining_mass(t) < EXTINCTION_TAIL)
            {
                return Ok((Termination::Extinct, rejected, t));
            }
            t += -streams.arrivals.next_open().ln() / lambda_star;
            if let StopRule::Horizon(h) = cfg.stop {
                if t > h {
                    return Ok((Termination::StopRule, rejected, h));
                }
            }
            if !t.is_finite() {
                return Ok((Termination::Extinct, rejected, t));
            }
            let s = streams.arrivals.next_open();
            let lambda_t = background.value(t) + self.excitation(t);
            debug_assert!(
                lambda_t <= lambda_star * (1.0 + 1e-9),
                "thinning bound violated: {lambda_t} > {lambda_star}"
            );
            if s <= lambda_t / lambda_star {
                let time = match self.events.last() {
                    Some(last) if t <= last.time => last.time.next_up(),
                    _ => t,
                };
                t = time;
                let parent = self.attribute(time, lambda_t, streams.attribution.next_open());
                let mark = match &cfg.marks {
                    MarkSource::Unit => 1.0,
                    MarkSource::FixedList(list) => list[new_events % list.len()],
                    MarkSource::ParetoDraw(d) => d.sample(streams.marks.next_open()),
                };
                self.push(time, mark, parent);
                new_events += 1;
                consecutive = 0;
            } else {
                rejected += 1;
                consecutive += 1;
                if consecutive >= cfg.stall_budget {
                    return Err((
                        format!("{consecutive} consecutive rejected proposals"),
                        rejected,
                        t,
                    ));
                }
            }
        }
    }

    fn finish(self, rejected: u64, end: f64, termination: Termination) -> SimulatedSequence {
        let last = self.events.last().map_or(0.0, |e| e.time);
        SimulatedSequence {
            events: self.events,
            generation: self.generation,
            rejected_count: rejected,
            observation_end: end.max(last),
            termination,
        }
    }
}

fn end_time(stop: StopRule, last_event: f64) -> f64 {
    match stop {
        StopRule::Horizon(h) => h,
        StopRule::MaxEvents(_) => last_event,
    }
}

/// Thinning continuation of `history` from `start`. Extinction is a normal
/// end; stalls keep the partial sequence.
pub(crate) fn thin_from(
    model: &HawkesModel,
    history: Vec<Event>,
    start: f64,
    cfg: &SimulationConfig,
) -> Result<SimulatedSequence> {
    model.validate()?;
    cfg.validate()?;
    let mut streams = RunStreams::new(cfg.seed, cfg.run);
    let mut engine = Thinning::new(model, history);
    match engine.run(start, cfg, &mut streams, 0) {
        Ok((termination, rejected, _)) => {
            let last = engine.events.last().map_or(start, |e| e.time);
            let end = end_time(cfg.stop, last);
            Ok(engine.finish(rejected, end, termination))
        }
        Err((reason, rejected, _)) => {
            let last = engine.events.last().map_or(start, |e| e.time);
            Err(HawkesError::Stalled {
                partial: Box::new(engine.finish(rejected, last, Termination::StopRule)),
                reason,
            })
        }
    }
}

/// Ogata thinning from an empty history on `[0, ...)`.
///
/// With a `MaxEvents` rule, a process that can no longer produce events is a
/// stall error carrying the partial sequence; with a `Horizon` rule it simply
/// ends early.
pub fn simulate_thinning(model: &HawkesModel, cfg: &SimulationConfig) -> Result<SimulatedSequence> {
    let out = thin_from(model, Vec::new(), 0.0, cfg)?;
    if out.termination == Termination::Extinct {
        if let StopRule::MaxEvents(n) = cfg.stop {
            return Err(HawkesError::Stalled {
                reason: format!("intensity vanished before reaching {n} events"),
                partial: Box::new(out),
            });
        }
    }
    Ok(out)
}

/// The cluster of offspring of one immigrant at time 0 (zero background).
/// Extinction of the cluster is the normal end of the run.
pub fn simulate_cluster(
    model: &HawkesModel,
    immigrant: Event,
    cfg: &SimulationConfig,
) -> Result<SimulatedSequence> {
    if model.background != BackgroundSpec::Zero {
        return Err(HawkesError::Argument(
            "cluster simulation requires a zero background".into(),
        ));
    }
    if immigrant.time != 0.0 {
        return Err(HawkesError::Argument(format!(
            "cluster immigrant must be at time 0, got {}",
            immigrant.time
        )));
    }
    if !(immigrant.mark.is_finite() && immigrant.mark >= 1.0) {
        return Err(HawkesError::domain(
            "immigrant mark",
            immigrant.mark,
            "must be finite and >= 1",
        ));
    }
    let immigrant = Event {
        parent: None,
        ..immigrant
    };
    thin_from(model, vec![immigrant], 0.0, cfg)
}

/// Parameters of `a + (lambda0 - a) e^{-delta t} + sum gamma e^{-delta (t - T_i)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub a: f64,
    pub lambda0: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl DecompositionParams {
    pub fn new(a: f64, lambda0: f64, delta: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            a,
            lambda0,
            delta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("a", self.a)?;
        nonnegative("lambda0", self.lambda0)?;
        positive("delta", self.delta)?;
        nonnegative("gamma", self.gamma)?;
        if self.lambda0 < self.a {
            return Err(HawkesError::domain("lambda0", self.lambda0, "must be >= a"));
        }
        Ok(())
    }

    /// The equivalent model for thinning and likelihood evaluation.
    pub fn model(&self) -> Result<HawkesModel> {
        let background = if self.a == self.lambda0 && self.a > 0.0 {
            BackgroundSpec::Constant { rate: self.a }
        } else {
            BackgroundSpec::ExponentialDecay {
                a: self.a,
                lambda0: self.lambda0,
                delta: self.delta,
            }
        };
        HawkesModel::new(
            background,
            crate::kernels::ExponentialParams::new(self.gamma, self.delta)?.into(),
        )
    }
}

/// Linear-time exact sampler for exponential Hawkes processes with an
/// exponentially decaying immigrant rate.
///
/// Each step draws a background waiting time `s0` (skipped when `a = 0`) and
/// a waiting time `s1` for the decaying part by inverting its CDF; the next
/// event comes after `min(s0, s1)`. When neither is finite the process has
/// died out and the partial sequence is returned with `Termination::Extinct`.
/// Marks are always 1.
pub fn simulate_exp_decomposition(
    params: &DecompositionParams,
    cfg: &SimulationConfig,
) -> Result<SimulatedSequence> {
    params.validate()?;
    cfg.validate()?;
    if cfg.marks != MarkSource::Unit {
        return Err(HawkesError::Argument(
            "the decomposition sampler produces unmarked events".into(),
        ));
    }
    let DecompositionParams {
        a,
        lambda0,
        delta,
        gamma,
    } = *params;
    let mut streams = RunStreams::new(cfg.seed, cfg.run);
    let mut events: Vec<Event> = Vec::new();
    let mut generation: Vec<u32> = Vec::new();
    let mut t = 0.0f64;
    let mut lambda_plus = lambda0;
    let mut excitation_plus = 0.0f64;

    let termination = loop {
        if let StopRule::MaxEvents(n) = cfg.stop {
            if events.len() >= n {
                break Termination::StopRule;
            }
        }
        let s0 = if a > 0.0 {
            -streams.arrivals.next_open().ln() / a
        } else {
            f64::INFINITY
        };
        let u1 = streams.arrivals.next_open();
        let excess = lambda_plus - a;
        let s1 = if excess > 0.0 {
            let d = 1.0 + delta * u1.ln() / excess;
            if d > 0.0 {
                -d.ln() / delta
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        let tau = s0.min(s1);
        if !tau.is_finite() {
            break Termination::Extinct;
        }
        let next = t + tau;
        if let StopRule::Horizon(h) = cfg.stop {
            if next > h {
                break Termination::StopRule;
            }
        }
        let time = match events.last() {
            Some(last) if next <= last.time => last.time.next_up(),
            _ => next,
        };
        let decay = (-delta * tau).exp();
        let lambda_minus = excess * decay + a;
        let excitation_minus = excitation_plus * decay;

        let parent = if s0 <= s1 {
            None
        } else {
            let immigrant_part = (lambda0 - a) * (-delta * time).exp();
            let mut target =
                streams.attribution.next_open() * (immigrant_part + excitation_minus);
            if target < immigrant_part || events.is_empty() {
                None
            } else {
                target -= immigrant_part;
                let mut chosen = events.len() - 1;
                for (j, e) in events.iter().enumerate().rev() {
                    let c = gamma * (-delta * (time - e.time)).exp();
                    if target < c {
                        chosen = j;
                        break;
                    }
                    target -= c;
                }
                Some(chosen)
            }
        };

        generation.push(parent.map_or(0, |p| generation[p] + 1));
        events.push(Event {
            time,
            mark: 1.0,
            parent,
        });
        t = time;
        lambda_plus = lambda_minus + gamma;
        excitation_plus = excitation_minus + gamma;
    };

    let last = events.last().map_or(0.0, |e| e.time);
    let observation_end = match cfg.stop {
        StopRule::Horizon(h) => h,
        StopRule::MaxEvents(_) => last,
    };
    Ok(SimulatedSequence {
        events,
        generation,
        rejected_count: 0,
        observation_end,
        termination,
    })
}
