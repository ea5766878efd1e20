//! Closed forms against independent references: values computed once with
//! 50-digit arithmetic, and adaptive quadrature of the intensity.

use hawkes_core::inference::{
    log_likelihood, log_likelihood_exponential_recursive, log_likelihood_marked_exponential,
    log_likelihood_marked_powerlaw, ExponentialHawkesParams,
};
use hawkes_core::kernels::{
    ExponentialParams, KernelSpec, MarkDistribution, MarkedExponentialParams, MarkedPowerLawParams, PowerLawParams,
};
use hawkes_core::prediction::{expected_direct_children, total_cascade_size};
use hawkes_core::process::{compensator, intensity_at, BackgroundSpec, Event, EventSequence, HawkesModel};
use hawkes_core::rng::{StreamPurpose, UniformStream};

fn close(actual: f64, expected: f64, rtol: f64) {
    let err = (actual - expected).abs() / expected.abs();
    assert!(err <= rtol, "{actual} vs {expected} (relative error {err:e})");
}

fn cascade() -> EventSequence {
    EventSequence::new(
        vec![
            Event::new(0.0, 1000.0),
            Event::new(2.5, 30.0),
            Event::new(7.0, 4.0),
            Event::new(11.2, 150.0),
        ],
        15.0,
    )
    .unwrap()
}

fn mpl() -> MarkedPowerLawParams {
    MarkedPowerLawParams::new(0.8, 0.6, 10.0, 0.8).unwrap()
}

#[test]
fn marked_powerlaw_reference_values() {
    let seq = cascade();
    close(log_likelihood_marked_powerlaw(&mpl(), &seq).unwrap(), -9.6650546910927354454, 1e-13);
    let kernel: KernelSpec = mpl().into();
    close(expected_direct_children(&kernel, &seq).unwrap(), 8.1455900600339457437, 1e-13);
    let dist = MarkDistribution::new(2.3).unwrap();
    let report = total_cascade_size(&kernel, Some(&dist), &seq).unwrap();
    close(report.n_star, 0.29433730717134964725, 1e-14);
    close(report.n_infinity.unwrap(), 15.543177984062514722, 1e-13);
}

#[test]
fn marked_exponential_reference_value() {
    let p = MarkedExponentialParams::new(0.02, 0.9, 0.3).unwrap();
    close(log_likelihood_marked_exponential(&p, &cascade()).unwrap(), -14.312641857987450688, 1e-13);
}

#[test]
fn exponential_reference_values() {
    let seq = EventSequence::new(
        [0.0, 0.3, 1.1, 1.15, 2.9].iter().map(|&t| Event::unmarked(t)).collect(),
        4.0,
    )
    .unwrap();
    let p = ExponentialHawkesParams::new(0.7, 0.9, 1.7).unwrap();
    close(log_likelihood_exponential_recursive(&p, &seq).unwrap(), -5.0221169744878414321, 1e-13);
    close(log_likelihood(&p.model().unwrap(), &seq).unwrap(), -5.0221169744878414321, 1e-13);
    close(compensator(&p.model().unwrap(), &seq, 0.0, 4.0).unwrap(), 5.3559013612461322045, 1e-14);
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson on `[a, b]`; the integrand must be smooth inside.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integral of a piecewise smooth intensity, split at the event times.
fn piecewise(f: &dyn Fn(f64) -> f64, seq: &EventSequence, t0: f64, t1: f64, tol: f64) -> f64 {
    let mut cuts = vec![t0];
    cuts.extend(seq.times().filter(|&t| t > t0 && t < t1));
    cuts.push(t1);
    // the value at an event time is the left limit, so nudge the segment start
    cuts.windows(2)
        .map(|w| integrate(f, w[0] + (w[1] - w[0]) * 1e-15, w[1], tol))
        .sum()
}

fn random_sequence(stream: &mut UniformStream, marked: bool) -> EventSequence {
    let n = 2 + (stream.next_open() * 30.0) as usize;
    let end = 1.0 + 50.0 * stream.next_open();
    let mut times: Vec<f64> = (0..n).map(|_| end * stream.next_open()).collect();
    times.sort_by(f64::total_cmp);
    let events = times
        .into_iter()
        .map(|t| {
            let mark = if marked { stream.next_open().powf(-1.0 / 1.5) } else { 1.0 };
            Event::new(t, mark)
        })
        .collect();
    EventSequence::new(events, end).unwrap()
}

#[test]
fn compensator_matches_quadrature() {
    let kernels: Vec<KernelSpec> = vec![
        ExponentialParams::new(0.7, 1.3).unwrap().into(),
        PowerLawParams::new(0.4, 0.8, 1.2).unwrap().into(),
        MarkedPowerLawParams::new(0.3, 0.5, 2.0, 0.7).unwrap().into(),
        MarkedExponentialParams::new(0.05, 0.8, 0.4).unwrap().into(),
    ];
    let backgrounds = [
        BackgroundSpec::Zero,
        BackgroundSpec::Constant { rate: 0.6 },
        BackgroundSpec::ExponentialDecay { a: 0.2, lambda0: 1.5, delta: 0.9 },
    ];
    for (i, kernel) in kernels.iter().enumerate() {
        for (j, background) in backgrounds.iter().enumerate() {
            let model = HawkesModel::new(*background, *kernel).unwrap();
            for r in 0..5u64 {
                let run = (i * 100 + j * 10) as u64 + r;
                let mut stream = UniformStream::new(11, run, StreamPurpose::Initialization);
                let seq = random_sequence(&mut stream, kernel.is_marked());
                let t0 = seq.observation_end() * 0.3 * stream.next_open();
                let t1 = seq.observation_end();
                let f = |t: f64| intensity_at(&model, &seq, t).unwrap();
                let reference = piecewise(&f, &seq, t0, t1, 1e-12);
                let closed = compensator(&model, &seq, t0, t1).unwrap();
                assert!(
                    (closed - reference).abs() <= 1e-8 * reference.abs().max(1.0),
                    "{} / {background:?}: {closed} vs {reference}",
                    kernel.family_name()
                );
            }
        }
    }
}

#[test]
fn direct_children_match_quadrature_with_tail() {
    for r in 0..10u64 {
        let mut stream = UniformStream::new(5, r, StreamPurpose::Initialization);
        let seq = random_sequence(&mut stream, true);
        let p = MarkedPowerLawParams::new(
            0.1 + stream.next_open(),
            0.9 * stream.next_open(),
            0.5 + 20.0 * stream.next_open(),
            0.3 + 1.5 * stream.next_open(),
        )
        .unwrap();
        let kernel: KernelSpec = p.into();
        let model = HawkesModel::new(BackgroundSpec::Zero, kernel).unwrap();
        let end = seq.observation_end();
        let far = end + 1e8;
        let f = |t: f64| intensity_at(&model, &seq, t).unwrap();
        // geometric segments keep the slowly decaying tail resolved
        let mut cuts = vec![end];
        let mut width = 1e-2;
        while end + width < far {
            cuts.push(end + width);
            width *= 2.0;
        }
        cuts.push(far);
        let body: f64 = cuts.windows(2).map(|w| integrate(&f, w[0].next_up(), w[1], 1e-13)).sum();
        let tail: f64 = seq
            .events()
            .iter()
            .map(|e| p.kappa * e.mark.powf(p.beta) / (p.theta * (far + p.c - e.time).powf(p.theta)))
            .sum();
        let a1 = expected_direct_children(&kernel, &seq).unwrap();
        assert!((a1 - (body + tail)).abs() <= 1e-6 * a1.max(1.0), "{a1} vs {}", body + tail);
    }
}

#[test]
fn size_is_monotone_in_theta_and_kappa() {
    let seq = cascade();
    let dist = MarkDistribution::new(2.3).unwrap();
    let size = |kappa: f64, theta: f64| {
        let k: KernelSpec = MarkedPowerLawParams::new(kappa, 0.6, 10.0, theta).unwrap().into();
        total_cascade_size(&k, Some(&dist), &seq).unwrap().n_infinity
    };
    let thetas = [0.4, 0.5, 0.6, 0.8, 1.0, 1.5, 2.0];
    let kappas = [0.0, 0.1, 0.3, 0.6, 1.0];
    for &kappa in &kappas {
        let sizes: Vec<f64> = thetas.iter().filter_map(|&t| size(kappa, t)).collect();
        assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "theta grid at kappa={kappa}: {sizes:?}");
    }
    for &theta in &thetas {
        let sizes: Vec<f64> = kappas.iter().map_while(|&k| size(k, theta)).collect();
        assert!(sizes.windows(2).all(|w| w[1] >= w[0]), "kappa grid at theta={theta}: {sizes:?}");
    }
}
