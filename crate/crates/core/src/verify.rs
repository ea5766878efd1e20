//! Cross-module oracle suites. Each suite runs a fixed-seed experiment and
//! reports one check per configuration with its statistic and verdict.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HawkesError, Result};
use crate::inference::{
    fit_mle, gradient_exponential, gradient_marked_exponential, gradient_marked_powerlaw,
    likelihood_terms, log_likelihood_exponential_recursive, log_likelihood_marked_exponential,
    log_likelihood_marked_powerlaw, ExponentialHawkesParams, FitConfig, FitFamily, FittedParams,
};
use crate::kernels::{ExponentialParams, KernelSpec, MarkDistribution, MarkedExponentialParams, MarkedPowerLawParams};
use crate::poisson::{homogeneous_arrivals, memorylessness_check, superpose, ExponentialLaw};
use crate::prediction::{
    cluster_size_unmarked, simulate_continuations, total_cascade_size, ContinuationConfig,
    ContinuationStatus,
};
use crate::process::{BackgroundSpec, Event, EventSequence, HawkesModel};
use crate::rng::{StreamPurpose, UniformStream};
use crate::simulation::{
    simulate_cluster, simulate_exp_decomposition, simulate_thinning, DecompositionParams,
    MarkSource, SimulationConfig, StopRule,
};
use crate::stats::{ks_one_sample, ks_two_sample, Summary};

pub const KS_LEVEL: f64 = 0.01;
pub const Z_BAND: f64 = 3.0;
pub const LIKELIHOOD_RTOL: f64 = 1e-9;
pub const GRADIENT_RTOL: f64 = 1e-4;
pub const RECOVERY_RTOL: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ks,
    Likelihood,
    Gradient,
    Prediction,
    Cluster,
    Poisson,
    Recovery,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Ks,
        Suite::Likelihood,
        Suite::Gradient,
        Suite::Prediction,
        Suite::Cluster,
        Suite::Poisson,
        Suite::Recovery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ks => "ks",
            Suite::Likelihood => "likelihood",
            Suite::Gradient => "gradient",
            Suite::Prediction => "prediction",
            Suite::Cluster => "cluster",
            Suite::Poisson => "poisson",
            Suite::Recovery => "recovery",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|s| s.name() == name)
    }

    /// What the `n` override controls.
    pub fn size_meaning(self) -> &'static str {
        match self {
            Suite::Ks => "events per sampler",
            Suite::Likelihood => "random instances",
            Suite::Gradient => "random instances per family",
            Suite::Prediction => "continuations per cascade",
            Suite::Cluster => "clusters per setting",
            Suite::Poisson => "draws per check",
            Suite::Recovery => "events per simulated data set",
        }
    }

    fn default_size(self) -> usize {
        match self {
            Suite::Ks => 100_000,
            Suite::Likelihood => 100,
            Suite::Gradient => 50,
            Suite::Prediction => 10_000,
            Suite::Cluster => 20_000,
            Suite::Poisson => 100_000,
            Suite::Recovery => 20_000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Overrides the suite's main sample size.
    pub size: Option<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 20_240_601, size: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub statistic: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{verdict} {} {}: {}", self.suite, c.label, c.statistic)?;
        }
        Ok(())
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let size = cfg.size.unwrap_or(suite.default_size());
    if size == 0 {
        return Err(HawkesError::Argument("suite size must be >= 1".into()));
    }
    let checks = match suite {
        Suite::Ks => sampler_equivalence(size, cfg.seed)?,
        Suite::Likelihood => likelihood_oracle(size, cfg.seed)?,
        Suite::Gradient => gradient_oracle(size, cfg.seed)?,
        Suite::Prediction => prediction_oracle(size, cfg.seed)?,
        Suite::Cluster => cluster_law(size, cfg.seed)?,
        Suite::Poisson => poisson_suite(size, cfg.seed)?,
        Suite::Recovery => recovery(size, cfg.seed)?,
    };
    Ok(SuiteReport { suite, checks })
}

fn uniform_in(stream: &mut UniformStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * stream.next_open()
}

fn log_uniform_in(stream: &mut UniformStream, lo: f64, hi: f64) -> f64 {
    uniform_in(stream, lo.ln(), hi.ln()).exp()
}

/// Thinning and decomposition inter-arrival laws for `a = lambda0`.
///
/// Gaps along one path are dependent, and the dependence grows with the
/// branching factor; beyond about 0.3 the two-sample test rejects far more
/// often than its level even between two runs of the same sampler. The
/// settings keep the branching factor in the range where it is calibrated.
pub fn sampler_equivalence(events: usize, seed: u64) -> Result<Vec<Check>> {
    let settings = [(1.0, 1.0, 0.2), (2.0, 1.5, 0.45), (2.0, 4.0, 1.0)];
    settings
        .par_iter()
        .enumerate()
        .map(|(i, &(rate, delta, gamma))| {
            let params = DecompositionParams::new(rate, rate, delta, gamma)?;
            let stop = StopRule::MaxEvents(events);
            let fast = simulate_exp_decomposition(
                &params,
                &SimulationConfig::new(stop, seed).with_run(2 * i as u64),
            )?;
            let thin = simulate_thinning(
                &params.model()?,
                &SimulationConfig::new(stop, seed).with_run(2 * i as u64 + 1),
            )?;
            let ks = ks_two_sample(&fast.inter_arrivals(), &thin.inter_arrivals());
            Ok(Check {
                label: format!("a=lambda0={rate} delta={delta} gamma={gamma} n={events}"),
                statistic: format!("D={:.5} p={:.4}", ks.statistic, ks.p_value),
                passed: ks.p_value > KS_LEVEL,
            })
        })
        .collect()
}

fn random_exponential_params(stream: &mut UniformStream) -> ExponentialHawkesParams {
    let lambda0 = log_uniform_in(stream, 0.1, 5.0);
    let delta = log_uniform_in(stream, 0.1, 10.0);
    let n_star = uniform_in(stream, 0.0, 0.9);
    ExponentialHawkesParams {
        lambda0,
        alpha: n_star * delta,
        delta,
    }
}

/// Recursive against brute-force exponential log-likelihood.
pub fn likelihood_oracle(instances: usize, seed: u64) -> Result<Vec<Check>> {
    let worst: Vec<(usize, usize, f64)> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut stream = UniformStream::new(seed, i as u64, StreamPurpose::Initialization);
            let size = if i == 0 {
                10_000
            } else {
                log_uniform_in(&mut stream, 10.0, 10_000.0).round() as usize
            };
            let truth = random_exponential_params(&mut stream);
            let data = simulate_exp_decomposition(
                &DecompositionParams::new(truth.lambda0, truth.lambda0, truth.delta, truth.alpha)?,
                &SimulationConfig::new(StopRule::MaxEvents(size), seed).with_run(i as u64),
            )?;
            let tail = uniform_in(&mut stream, 0.0, 2.0);
            let end = data.observation_end + tail;
            let seq = EventSequence::new(data.events, end)?;
            let at = random_exponential_params(&mut stream);
            let fast = log_likelihood_exponential_recursive(&at, &seq)?;
            let brute = likelihood_terms(&at.model()?, &seq)?.total();
            Ok((i, seq.len(), (fast - brute).abs() / brute.abs().max(f64::MIN_POSITIVE)))
        })
        .collect::<Result<_>>()?;
    let (i, n, err) = worst
        .iter()
        .copied()
        .max_by(|a, b| a.2.total_cmp(&b.2))
        .expect("at least one instance");
    let largest = worst.iter().map(|w| w.1).max().unwrap_or(0);
    Ok(vec![Check {
        label: format!("recursive vs direct, {instances} instances, up to {largest} events"),
        statistic: format!("max relative error {err:.3e} (instance {i}, {n} events)"),
        passed: err <= LIKELIHOOD_RTOL,
    }])
}

fn random_marked_sequence(stream: &mut UniformStream, marks: &MarkDistribution) -> Result<EventSequence> {
    let size = log_uniform_in(stream, 20.0, 400.0).round() as usize;
    let end = log_uniform_in(stream, 10.0, 5_000.0);
    let mut times: Vec<f64> = (1..size).map(|_| uniform_in(stream, 0.0, end)).collect();
    times.push(0.0);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let events = times
        .into_iter()
        .map(|t| Event::new(t, marks.sample(stream.next_open())))
        .collect();
    EventSequence::new(events, end)
}

/// Richardson-extrapolated central difference in each coordinate.
fn numerical_gradient(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64]) -> Result<Vec<f64>> {
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = 1e-4 * x[i].abs().max(1e-3);
        let central = |h: f64| -> Result<f64> {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            Ok((f(&up)? - f(&down)?) / (2.0 * h))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        g.push((4.0 * fine - coarse) / 3.0);
    }
    Ok(g)
}

fn gradient_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6 * scale).max(1e-300))
        .fold(0.0, f64::max)
}

/// Analytic against finite-difference gradients for every fitted family.
pub fn gradient_oracle(instances: usize, seed: u64) -> Result<Vec<Check>> {
    type Case = fn(&mut UniformStream) -> Result<f64>;
    let families: [(&str, Case); 3] = [
        ("marked power-law (kappa, beta, c, theta)", |s| {
            let marks = MarkDistribution::new(uniform_in(s, 2.05, 3.0))?;
            let seq = random_marked_sequence(s, &marks)?;
            let p = MarkedPowerLawParams::new(
                log_uniform_in(s, 0.05, 2.0),
                uniform_in(s, 0.05, 0.95 * (marks.exponent - 1.0)),
                log_uniform_in(s, 0.5, 300.0),
                uniform_in(s, 0.2, 2.0),
            )?;
            let g = gradient_marked_powerlaw(&p, &seq)?;
            let fd = numerical_gradient(
                |x| log_likelihood_marked_powerlaw(&MarkedPowerLawParams { kappa: x[0], beta: x[1], c: x[2], theta: x[3] }, &seq),
                &[p.kappa, p.beta, p.c, p.theta],
            )?;
            Ok(gradient_error(&g, &fd))
        }),
        ("marked exponential (kappa, beta, theta)", |s| {
            let marks = MarkDistribution::new(uniform_in(s, 2.05, 3.0))?;
            let seq = random_marked_sequence(s, &marks)?;
            let p = MarkedExponentialParams::new(
                log_uniform_in(s, 1e-3, 1.0),
                uniform_in(s, 0.05, 0.95 * (marks.exponent - 1.0)),
                log_uniform_in(s, 1e-3, 1.0),
            )?;
            let g = gradient_marked_exponential(&p, &seq)?;
            let fd = numerical_gradient(
                |x| log_likelihood_marked_exponential(&MarkedExponentialParams { kappa: x[0], beta: x[1], theta: x[2] }, &seq),
                &[p.kappa, p.beta, p.theta],
            )?;
            Ok(gradient_error(&g, &fd))
        }),
        ("exponential (lambda0, alpha, delta)", |s| {
            let truth = random_exponential_params(s);
            let size = log_uniform_in(s, 20.0, 2_000.0).round() as usize;
            let data = simulate_exp_decomposition(
                &DecompositionParams::new(truth.lambda0, truth.lambda0, truth.delta, truth.alpha)?,
                &SimulationConfig::new(StopRule::MaxEvents(size), s.next_u64()),
            )?;
            let seq = data.to_event_sequence()?;
            let p = random_exponential_params(s);
            let g = gradient_exponential(&p, &seq)?;
            let fd = numerical_gradient(
                |x| log_likelihood_exponential_recursive(&ExponentialHawkesParams { lambda0: x[0], alpha: x[1], delta: x[2] }, &seq),
                &[p.lambda0, p.alpha, p.delta],
            )?;
            Ok(gradient_error(&g, &fd))
        }),
    ];
    families
        .iter()
        .enumerate()
        .map(|(f, (label, case))| {
            let errors: Vec<f64> = (0..instances)
                .into_par_iter()
                .map(|i| {
                    let run = (f * instances + i) as u64;
                    case(&mut UniformStream::new(seed, run, StreamPurpose::Initialization))
                })
                .collect::<Result<_>>()?;
            let worst = errors.iter().copied().fold(0.0, f64::max);
            Ok(Check {
                label: format!("{label}, {instances} instances"),
                statistic: format!("max relative error {worst:.3e}"),
                passed: worst <= GRADIENT_RTOL,
            })
        })
        .collect()
}

/// Mark law and shape shared by the prediction oracle cascades.
pub const PREDICTION_MARK_EXPONENT: f64 = 3.0;
const PREDICTION_SHAPE: (f64, f64, f64) = (0.5, 1.0, 1.0);

/// Marked power-law kernel with the oracle shape scaled to branching factor `n_star`.
pub fn prediction_kernel(n_star: f64) -> Result<MarkedPowerLawParams> {
    let (beta, c, theta) = PREDICTION_SHAPE;
    let moment = MarkDistribution::new(PREDICTION_MARK_EXPONENT)?.moment(beta)?;
    MarkedPowerLawParams::new(n_star * theta * c.powf(theta) / moment, beta, c, theta)
}

/// Closed-form total size against the mean of simulated continuations.
pub fn prediction_oracle(runs: usize, seed: u64) -> Result<Vec<Check>> {
    let marks = MarkDistribution::new(PREDICTION_MARK_EXPONENT)?;
    [0.2, 0.5, 0.8]
        .iter()
        .enumerate()
        .map(|(i, &n_star)| {
            let kernel: KernelSpec = prediction_kernel(n_star)?.into();
            let model = HawkesModel::new(BackgroundSpec::Zero, kernel)?.with_mark_law(marks);
            let window = 5.0;
            let cluster = simulate_cluster(
                &model,
                Event::new(0.0, 1000.0),
                &SimulationConfig::new(StopRule::Horizon(window), seed)
                    .with_run(i as u64)
                    .with_marks(MarkSource::ParetoDraw(marks)),
            )?;
            let observed = cluster.to_event_sequence()?.observed_until(window)?;
            let report = total_cascade_size(&kernel, Some(&marks), &observed)?;
            let predicted = report.n_infinity.expect("subcritical oracle setting");
            let sims = simulate_continuations(
                &kernel,
                Some(&marks),
                &observed,
                &ContinuationConfig::new(runs, seed.wrapping_add(1 + i as u64)),
            )?;
            let clean = sims.iter().all(|r| r.status == ContinuationStatus::Extinct);
            let s = Summary::of(sims.iter().map(|r| r.final_size as f64));
            let z = s.z_against(predicted);
            Ok(Check {
                label: format!("n*={n_star} observed={} runs={runs}", observed.len()),
                statistic: format!(
                    "closed form {predicted:.3}, simulated mean {:.3} (se {:.3}), z={z:.2}",
                    s.mean,
                    s.standard_error()
                ),
                passed: clean && z < Z_BAND,
            })
        })
        .collect()
}

/// Mean cluster size of unmarked exponential clusters against `1/(1-n*)`.
pub fn cluster_law(clusters: usize, seed: u64) -> Result<Vec<Check>> {
    [0.3, 0.6]
        .iter()
        .enumerate()
        .map(|(k, &n_star)| {
            let delta = 1.3;
            let kernel: KernelSpec = ExponentialParams::new(n_star * delta, delta)?.into();
            let model = HawkesModel::new(BackgroundSpec::Zero, kernel)?;
            let base = SimulationConfig::new(StopRule::Horizon(f64::MAX), seed);
            let sizes: Vec<f64> = (0..clusters)
                .into_par_iter()
                .map(|i| {
                    let run = (k * clusters + i) as u64;
                    simulate_cluster(&model, Event::unmarked(0.0), &base.clone().with_run(run))
                        .map(|c| c.len() as f64)
                })
                .collect::<Result<_>>()?;
            let expected = cluster_size_unmarked(kernel.branching_factor()?)?;
            let s = Summary::of(sizes);
            let z = s.z_against(expected);
            Ok(Check {
                label: format!("n*={n_star} clusters={clusters}"),
                statistic: format!(
                    "expected {expected:.4}, simulated mean {:.4} (se {:.4}), z={z:.2}",
                    s.mean,
                    s.standard_error()
                ),
                passed: z < Z_BAND,
            })
        })
        .collect()
}

/// Memorylessness, superposition and mean inter-arrival checks, plus the
/// count law of the homogeneous simulator.
pub fn poisson_suite(draws: usize, seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    for (i, &(rate, m, t)) in [(1.0, 0.5, 1.0), (3.0, 1.0, 0.2), (0.2, 4.0, 2.0)].iter().enumerate() {
        let law = ExponentialLaw::new(rate)?;
        let r = memorylessness_check(&law, m, t, draws.max(10_000), seed.wrapping_add(i as u64))?;
        checks.push(Check {
            label: format!("memorylessness lambda={rate} m={m} t={t}"),
            statistic: format!(
                "survivors {}, conditional {:.5} vs {:.5}, z={:.2}",
                r.survivors, r.conditional_survival, r.expected, r.z
            ),
            passed: !r.inconclusive && r.z.abs() < Z_BAND,
        });
    }

    let (l1, l2) = (1.5, 0.7);
    let horizon = draws as f64 / (l1 + l2);
    let a = homogeneous_arrivals(l1, horizon, &mut UniformStream::new(seed, 0, StreamPurpose::Arrivals));
    let b = homogeneous_arrivals(l2, horizon, &mut UniformStream::new(seed, 1, StreamPurpose::Arrivals));
    let merged = superpose(&a, &b);
    let gaps: Vec<f64> = std::iter::once(merged[0])
        .chain(merged.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let law = ExponentialLaw::new(l1 + l2)?;
    let ks = ks_one_sample(&gaps, |x| law.cdf(x));
    checks.push(Check {
        label: format!("superposition {l1}+{l2}, {} gaps", gaps.len()),
        statistic: format!("D={:.5} p={:.4}", ks.statistic, ks.p_value),
        passed: ks.p_value > KS_LEVEL,
    });

    let rate = 4.0;
    let law = ExponentialLaw::new(rate)?;
    let mut stream = UniformStream::new(seed, 2, StreamPurpose::Arrivals);
    let s = Summary::of((0..draws * 10).map(|_| law.sample(stream.next_open())));
    let z = s.z_against(law.mean());
    checks.push(Check {
        label: format!("mean inter-arrival lambda={rate}, {} draws", s.n),
        statistic: format!("mean {:.6} vs {:.6}, z={z:.2}", s.mean, law.mean()),
        passed: z < Z_BAND,
    });

    let (rate, horizon) = (2.5, 8.0);
    let model = HawkesModel::new(
        BackgroundSpec::Constant { rate },
        ExponentialParams::new(0.0, 1.0)?.into(),
    )?;
    let runs = (draws / 20).max(500);
    let base = SimulationConfig::new(StopRule::Horizon(horizon), seed.wrapping_add(7));
    let counts: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|i| simulate_thinning(&model, &base.clone().with_run(i as u64)).map(|s| s.len() as f64))
        .collect::<Result<_>>()?;
    let s = Summary::of(counts);
    let mu = rate * horizon;
    let z_mean = s.z_against(mu);
    // sampling variance of the sample variance for Poisson counts
    let r = runs as f64;
    let mu4 = mu * (1.0 + 3.0 * mu);
    let var_se = ((mu4 - mu * mu * (r - 3.0) / (r - 1.0)) / r).sqrt();
    let z_var = (s.variance - mu).abs() / var_se;
    checks.push(Check {
        label: format!("homogeneous counts lambda={rate} T={horizon}, {runs} runs"),
        statistic: format!(
            "mean {:.4}, variance {:.4} vs {mu}, z_mean={z_mean:.2} z_var={z_var:.2}",
            s.mean, s.variance
        ),
        passed: z_mean < Z_BAND && z_var < Z_BAND,
    });
    Ok(checks)
}

/// Parameters used to generate the recovery data sets.
pub const RECOVERY_TRUTH: ExponentialHawkesParams = ExponentialHawkesParams {
    lambda0: 0.5,
    alpha: 0.8,
    delta: 1.2,
};

/// Fits simulated exponential Hawkes data and compares with the truth.
pub fn recovery(events: usize, seed: u64) -> Result<Vec<Check>> {
    let truth = RECOVERY_TRUTH;
    (0..5u64)
        .map(|k| {
            let run_seed = seed.wrapping_add(k);
            let data = simulate_thinning(
                &truth.model()?,
                &SimulationConfig::new(StopRule::MaxEvents(events), run_seed),
            )?;
            let seq = data.to_event_sequence()?;
            let fit = fit_mle(&seq, &FitConfig::new(FitFamily::Exponential).with_seed(run_seed))?;
            let FittedParams::Exponential(p) = fit.params else {
                unreachable!("exponential family requested")
            };
            let errors = [
                (p.lambda0 - truth.lambda0).abs() / truth.lambda0,
                (p.alpha - truth.alpha).abs() / truth.alpha,
                (p.delta - truth.delta).abs() / truth.delta,
            ];
            let worst = errors.iter().copied().fold(0.0, f64::max);
            Ok(Check {
                label: format!("seed {run_seed}, {} events", seq.len()),
                statistic: format!(
                    "lambda0={:.4} alpha={:.4} delta={:.4}, max relative error {worst:.3}{}",
                    p.lambda0,
                    p.alpha,
                    p.delta,
                    if fit.converged { "" } else { " (not converged)" }
                ),
                passed: fit.converged && worst <= RECOVERY_RTOL,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(Suite::from_name(s.name()), Some(s));
        }
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn small_suites_run() {
        let cfg = VerifyConfig { seed: 3, size: Some(2_000) };
        let report = run_suite(Suite::Ks, &cfg).unwrap();
        assert_eq!(report.checks.len(), 3);
        let report = run_suite(Suite::Cluster, &cfg).unwrap();
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn gradient_error_is_relative() {
        assert!(gradient_error(&[1.0, 2.0], &[1.0 + 1e-6, 2.0]) < 2e-6);
        assert!(gradient_error(&[1.0, 0.0], &[1.0, 1e-10]) < 1e-3);
    }
}
