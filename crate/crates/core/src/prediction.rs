//! Cascade size prediction: expected direct children after the observation
//! window, total expected size, and a Monte Carlo continuation check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HawkesError, Result};
use crate::kernels::{KernelSpec, LagLimit, MarkDistribution};
use crate::process::{BackgroundSpec, EventSequence, HawkesModel};
use crate::simulation::{
    thin_from, MarkSource, SimulationConfig, StopRule, Termination, DEFAULT_STALL_BUDGET,
};

/// Branching factors this close below 1 are reported as numerically unstable.
pub const INSTABILITY_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Subcritical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub a1: f64,
    pub n_star: f64,
    pub n_observed: usize,
    /// `None` when supercritical.
    pub n_infinity: Option<f64>,
    pub regime: Regime,
    pub numerically_unstable: bool,
}

/// Expected number of events triggered directly by the observed events after
/// the end of the observation window, i.e. the compensator on `[T, inf)`
/// under a zero background.
pub fn expected_direct_children(kernel: &KernelSpec, seq: &EventSequence) -> Result<f64> {
    kernel.validate()?;
    let end = seq.observation_end();
    Ok(seq
        .events()
        .iter()
        .map(|e| kernel.integral_between(e.mark, end - e.time, LagLimit::Infinite))
        .sum())
}

/// Expected cluster size `1 / (1 - n*)` of one immigrant, including itself.
pub fn cluster_size_unmarked(n_star: f64) -> Result<f64> {
    if !(n_star >= 0.0) || n_star.is_infinite() {
        return Err(HawkesError::domain("n_star", n_star, "must be >= 0"));
    }
    if n_star >= 1.0 {
        return Err(HawkesError::Supercritical { n_star });
    }
    Ok(1.0 / (1.0 - n_star))
}

/// `N_inf = n + A1 / (1 - n*)`. Marked kernels need the mark law.
pub fn total_cascade_size(
    kernel: &KernelSpec,
    dist: Option<&MarkDistribution>,
    seq: &EventSequence,
) -> Result<PredictionReport> {
    let a1 = expected_direct_children(kernel, seq)?;
    let n_star = kernel.expected_branching_factor(dist)?;
    let n_observed = seq.len();
    let (regime, n_infinity) = if n_star >= 1.0 {
        (Regime::Supercritical, None)
    } else {
        (
            Regime::Subcritical,
            Some(n_observed as f64 + a1 / (1.0 - n_star)),
        )
    };
    Ok(PredictionReport {
        a1,
        n_star,
        n_observed,
        n_infinity,
        regime,
        numerically_unstable: regime == Regime::Subcritical && n_star >= 1.0 - INSTABILITY_BAND,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationConfig {
    pub runs: usize,
    pub seed: u64,
    pub stall_budget: u64,
    /// Cap on the total size of one continuation; reaching it truncates the run.
    pub max_events: usize,
}

impl ContinuationConfig {
    pub fn new(runs: usize, seed: u64) -> Self {
        Self {
            runs,
            seed,
            stall_budget: DEFAULT_STALL_BUDGET,
            max_events: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContinuationStatus {
    Extinct,
    Capped,
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuationRun {
    /// Observed plus simulated events.
    pub final_size: usize,
    pub status: ContinuationStatus,
}

/// Continues the observed cascade past its window by thinning until
/// extinction, once per run. Future marks are drawn from `dist` (unit marks
/// when `None`). Runs are independent and executed in parallel.
pub fn simulate_continuations(
    kernel: &KernelSpec,
    dist: Option<&MarkDistribution>,
    seq: &EventSequence,
    cfg: &ContinuationConfig,
) -> Result<Vec<ContinuationRun>> {
    if cfg.runs == 0 {
        return Err(HawkesError::Argument("runs must be >= 1".into()));
    }
    if kernel.is_marked() && dist.is_none() {
        return Err(HawkesError::Argument(
            "marked kernels need a mark law for future events".into(),
        ));
    }
    let mut model = HawkesModel::new(BackgroundSpec::Zero, *kernel)?;
    let marks = match dist {
        Some(d) => {
            model = model.with_mark_law(*d);
            MarkSource::ParetoDraw(*d)
        }
        None => MarkSource::Unit,
    };
    let cap = cfg.max_events.max(seq.len());
    let base = SimulationConfig::new(StopRule::MaxEvents(cap), cfg.seed)
        .with_marks(marks)
        .with_stall_budget(cfg.stall_budget);
    (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let sim_cfg = base.clone().with_run(run as u64);
            match thin_from(&model, seq.events().to_vec(), seq.observation_end(), &sim_cfg) {
                Ok(out) => Ok(ContinuationRun {
                    final_size: out.len(),
                    status: match out.termination {
                        Termination::Extinct => ContinuationStatus::Extinct,
                        Termination::StopRule => ContinuationStatus::Capped,
                    },
                }),
                Err(HawkesError::Stalled { partial, .. }) => Ok(ContinuationRun {
                    final_size: partial.len(),
                    status: ContinuationStatus::Stalled,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{ExponentialParams, MarkedPowerLawParams};
    use crate::process::Event;
    use crate::stats::{median, Summary};

    fn mpl(kappa: f64, beta: f64, c: f64, theta: f64) -> KernelSpec {
        MarkedPowerLawParams::new(kappa, beta, c, theta).unwrap().into()
    }

    #[test]
    fn single_event_direct_children() {
        let seq = EventSequence::new(vec![Event::new(0.0, 1.0)], 0.0).unwrap();
        let a1 = expected_direct_children(&mpl(1.0, 0.0, 1.0, 1.0), &seq).unwrap();
        assert!((a1 - 1.0).abs() < 1e-15);
        assert_eq!(expected_direct_children(&mpl(0.0, 0.5, 1.0, 1.0), &seq).unwrap(), 0.0);
    }

    #[test]
    fn direct_children_closed_form() {
        let (kappa, beta, c, theta) = (0.7, 0.4, 3.0, 0.9);
        let events = vec![Event::new(0.0, 50.0), Event::new(2.0, 3.0), Event::new(7.5, 1.2)];
        let seq = EventSequence::new(events.clone(), 10.0).unwrap();
        let a1 = expected_direct_children(&mpl(kappa, beta, c, theta), &seq).unwrap();
        let expected: f64 = events
            .iter()
            .map(|e| kappa * e.mark.powf(beta) / (theta * (10.0 + c - e.time).powf(theta)))
            .sum();
        assert!((a1 / expected - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cluster_sizes() {
        assert_eq!(cluster_size_unmarked(0.5).unwrap(), 2.0);
        assert_eq!(cluster_size_unmarked(0.0).unwrap(), 1.0);
        assert!((cluster_size_unmarked(0.92).unwrap() - 12.5).abs() < 1e-12);
        assert!(matches!(cluster_size_unmarked(1.0), Err(HawkesError::Supercritical { .. })));
    }

    #[test]
    fn zero_kappa_predicts_observed_size() {
        let seq = EventSequence::new(vec![Event::new(0.0, 10.0), Event::new(1.0, 2.0)], 5.0).unwrap();
        let dist = MarkDistribution::new(2.3).unwrap();
        let k = mpl(0.0, 0.5, 1.0, 1.0);
        let r = total_cascade_size(&k, Some(&dist), &seq).unwrap();
        assert_eq!(r.n_infinity, Some(2.0));
        let runs = simulate_continuations(&k, Some(&dist), &seq, &ContinuationConfig::new(20, 1)).unwrap();
        assert!(runs.iter().all(|r| r.final_size == 2 && r.status == ContinuationStatus::Extinct));
    }

    #[test]
    fn supercritical_is_a_report_state() {
        let seq = EventSequence::new(vec![Event::unmarked(0.0)], 1.0).unwrap();
        let k: KernelSpec = ExponentialParams::new(2.0, 1.0).unwrap().into();
        let r = total_cascade_size(&k, None, &seq).unwrap();
        assert_eq!(r.regime, Regime::Supercritical);
        assert_eq!(r.n_infinity, None);
        let k: KernelSpec = ExponentialParams::new(1.0 - 1e-10, 1.0).unwrap().into();
        let r = total_cascade_size(&k, None, &seq).unwrap();
        assert!(r.numerically_unstable && r.regime == Regime::Subcritical);
    }

    #[test]
    fn continuation_mean_matches_closed_form() {
        let k: KernelSpec = ExponentialParams::new(0.5, 1.0).unwrap().into();
        let seq = EventSequence::new(
            vec![Event::unmarked(0.0), Event::unmarked(0.4), Event::unmarked(1.1)],
            1.5,
        )
        .unwrap();
        let report = total_cascade_size(&k, None, &seq).unwrap();
        let runs = simulate_continuations(&k, None, &seq, &ContinuationConfig::new(20_000, 5)).unwrap();
        let s = Summary::of(runs.iter().map(|r| r.final_size as f64));
        assert!(s.z_against(report.n_infinity.unwrap()).abs() < 3.0, "{s:?} {report:?}");
    }

    #[test]
    fn near_critical_continuations_are_right_skewed() {
        let k: KernelSpec = ExponentialParams::new(0.9, 1.0).unwrap().into();
        let seq = EventSequence::new(vec![Event::unmarked(0.0)], 0.0).unwrap();
        let runs = simulate_continuations(&k, None, &seq, &ContinuationConfig::new(5_000, 2)).unwrap();
        let sizes: Vec<f64> = runs.iter().map(|r| r.final_size as f64).collect();
        let s = Summary::of(sizes.iter().copied());
        assert!(median(&sizes) < s.mean);
    }
}
