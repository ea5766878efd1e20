//! Flat `key=value` fit reports: written by `fit`, read back by `predict`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use hawkes_core::inference::{FitFamily, FitResult};
use hawkes_core::kernels::{ExponentialParams, KernelSpec, MarkedExponentialParams, MarkedPowerLawParams};

pub fn render_fit(fit: &FitResult, events: usize, observation_end: f64, mark_exponent: Option<f64>) -> String {
    let mut out = String::new();
    let names = fit.family.parameter_names();
    let _ = writeln!(out, "family={}", fit.family.label());
    let _ = writeln!(out, "events={events}");
    let _ = writeln!(out, "observation_end={observation_end}");
    if let Some(a) = mark_exponent {
        let _ = writeln!(out, "mark_exponent={a}");
    }
    let _ = writeln!(out, "converged={}", fit.converged);
    let _ = writeln!(out, "log_likelihood={}", fit.log_likelihood);
    let _ = writeln!(out, "n_star={}", fit.n_star);
    for (name, v) in names.iter().zip(fit.params.values()) {
        let _ = writeln!(out, "{name}={v}");
    }
    let _ = writeln!(out, "best_start={}", fit.best_start);
    let _ = writeln!(out, "starts={}", fit.starts.len());
    for s in &fit.starts {
        let i = s.index;
        let _ = writeln!(out, "start.{i}.status={}", s.status.label());
        let _ = writeln!(out, "start.{i}.iterations={}", s.iterations);
        let _ = writeln!(out, "start.{i}.penalty_rounds={}", s.penalty_rounds);
        let _ = writeln!(out, "start.{i}.log_likelihood={}", s.log_likelihood);
        let _ = writeln!(out, "start.{i}.n_star={}", s.n_star);
        let _ = writeln!(out, "start.{i}.suspect={}", s.suspect);
        for (name, v) in names.iter().zip(&s.init) {
            let _ = writeln!(out, "start.{i}.init.{name}={v}");
        }
        for (name, v) in names.iter().zip(&s.estimate) {
            let _ = writeln!(out, "start.{i}.{name}={v}");
        }
    }
    out
}

pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("report line {}: expected key=value", n + 1))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Kernel and mark exponent recorded in a fit report.
pub fn kernel_from_report(text: &str) -> Result<(KernelSpec, Option<f64>), String> {
    let map = parse_pairs(text)?;
    let num = |key: &str| -> Result<f64, String> {
        let raw = map.get(key).ok_or_else(|| format!("fit report lacks `{key}`"))?;
        raw.parse().map_err(|_| format!("fit report `{key}={raw}` is not a number"))
    };
    let family = map.get("family").ok_or("fit report lacks `family`")?;
    let kernel: KernelSpec = match family.as_str() {
        f if f == FitFamily::MarkedPowerLaw.label() => MarkedPowerLawParams::new(num("kappa")?, num("beta")?, num("c")?, num("theta")?)
            .map_err(|e| e.to_string())?
            .into(),
        f if f == FitFamily::MarkedExponential.label() => {
            MarkedExponentialParams::new(num("kappa")?, num("beta")?, num("theta")?)
                .map_err(|e| e.to_string())?
                .into()
        }
        f if f == FitFamily::Exponential.label() => ExponentialParams::new(num("alpha")?, num("delta")?)
            .map_err(|e| e.to_string())?
            .into(),
        other => return Err(format!("fit report has unknown family `{other}`")),
    };
    let mark_exponent = if map.contains_key("mark_exponent") {
        Some(num("mark_exponent")?)
    } else {
        None
    };
    Ok((kernel, mark_exponent))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_marked_report() {
        let text = "family=marked-powerlaw\nmark_exponent=2.3\nkappa=1\nbeta=0.5\nc=10\ntheta=0.8\nstart.0.kappa=4\n";
        let (k, a) = kernel_from_report(text).unwrap();
        assert_eq!(a, Some(2.3));
        assert_eq!(k, MarkedPowerLawParams::new(1.0, 0.5, 10.0, 0.8).unwrap().into());
        assert!(kernel_from_report("family=marked-powerlaw\nkappa=1\n").is_err());
        assert!(kernel_from_report("nonsense").is_err());
    }
}
