//! Homogeneous Poisson primitives: the exponential inter-arrival law,
//! inverse-transform sampling, and the memorylessness check.

use crate::error::{positive, HawkesError, Result};
use crate::rng::{StreamPurpose, UniformStream};

/// Exponential inter-arrival law with rate `lambda > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialLaw {
    rate: f64,
}

impl ExponentialLaw {
    pub fn new(rate: f64) -> Result<Self> {
        positive("rate", rate)?;
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * t).exp()
        }
    }

    /// `1 - survival(t)`, computed from the same exponential so the two sum to 1.
    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            1.0
        } else {
            (-self.rate * t).exp()
        }
    }

    pub fn mean(&self) -> f64 {
        1.0 / self.rate
    }

    /// Inverse-transform draw from a uniform in (0, 1).
    pub fn sample(&self, u: f64) -> f64 {
        -u.ln() / self.rate
    }
}

/// `tau = -ln(u) / lambda`.
pub fn sample_poisson_interarrival(rate: f64, u: f64) -> Result<f64> {
    positive("rate", rate)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(HawkesError::Argument(format!(
            "uniform draw must lie in (0, 1), got {u}"
        )));
    }
    Ok(-u.ln() / rate)
}

/// Arrival times of a homogeneous Poisson process on `[0, horizon]`.
pub fn homogeneous_arrivals(rate: f64, horizon: f64, stream: &mut UniformStream) -> Vec<f64> {
    let law = ExponentialLaw { rate };
    let mut t = 0.0;
    let mut out = Vec::new();
    loop {
        t += law.sample(stream.next_open());
        if t > horizon {
            return out;
        }
        out.push(t);
    }
}

/// Merge two sorted arrival streams.
pub fn superpose(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemorylessnessCheck {
    /// Draws exceeding `m`.
    pub survivors: usize,
    /// Empirical `P(tau > m + t | tau > m)`.
    pub conditional_survival: f64,
    /// `exp(-lambda t)`.
    pub expected: f64,
    pub z: f64,
    /// Fewer than 100 survivors: the statistic is not meaningful.
    pub inconclusive: bool,
}

const MIN_SURVIVORS: usize = 100;

/// Compare the empirical conditional survival of draws exceeding `m` against
/// `exp(-lambda t)` and report a binomial z-score.
pub fn memorylessness_check(
    law: &ExponentialLaw,
    m: f64,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<MemorylessnessCheck> {
    if !(m >= 0.0 && t >= 0.0) {
        return Err(HawkesError::Argument(format!(
            "memorylessness offsets must be >= 0, got m={m}, t={t}"
        )));
    }
    let mut stream = UniformStream::new(seed, 0, StreamPurpose::Arrivals);
    let mut survivors = 0usize;
    let mut beyond = 0usize;
    for _ in 0..samples {
        let tau = law.sample(stream.next_open());
        if tau > m {
            survivors += 1;
            if tau > m + t {
                beyond += 1;
            }
        }
    }
    let expected = law.survival(t);
    if survivors < MIN_SURVIVORS {
        return Ok(MemorylessnessCheck {
            survivors,
            conditional_survival: f64::NAN,
            expected,
            z: f64::NAN,
            inconclusive: true,
        });
    }
    let observed = beyond as f64 / survivors as f64;
    let variance = expected * (1.0 - expected) / survivors as f64;
    let z = if variance > 0.0 {
        (observed - expected) / variance.sqrt()
    } else {
        0.0
    };
    Ok(MemorylessnessCheck {
        survivors,
        conditional_survival: observed,
        expected,
        z,
        inconclusive: false,
    })
}
