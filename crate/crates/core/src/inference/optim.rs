//! Dense BFGS with Armijo backtracking, for the handful of unconstrained
//! coordinates used by the likelihood fits.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Converged when the infinity norm of the gradient falls below this.
    pub gradient_tolerance: f64,
    /// Converged when a step improves the objective by less than this, relatively.
    pub function_tolerance: f64,
    /// Largest coordinate change of a single step.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            gradient_tolerance: 1e-7,
            function_tolerance: 1e-13,
            max_step: 4.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptimStatus {
    GradientConverged,
    FunctionConverged,
    MaxIterations,
    LineSearchFailed,
    NonFiniteStart,
}

impl OptimStatus {
    pub fn converged(self) -> bool {
        matches!(
            self,
            OptimStatus::GradientConverged | OptimStatus::FunctionConverged
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            OptimStatus::GradientConverged => "gradient-converged",
            OptimStatus::FunctionConverged => "function-converged",
            OptimStatus::MaxIterations => "max-iterations",
            OptimStatus::LineSearchFailed => "line-search-failed",
            OptimStatus::NonFiniteStart => "non-finite-start",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub status: OptimStatus,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn identity(n: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { scale } else { 0.0 }).collect())
        .collect()
}

/// Minimize `objective`, which returns the value and gradient at a point.
/// Non-finite values are treated as infeasible and trigger backtracking.
pub fn minimize<F>(mut objective: F, x0: &[f64], opts: &BfgsOptions) -> OptimOutcome
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = objective(&x);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return OptimOutcome {
            x,
            value: f,
            gradient: g,
            iterations: 0,
            status: OptimStatus::NonFiniteStart,
        };
    }
    let mut h = identity(n, 1.0);
    let mut fresh = true;

    for iter in 0..opts.max_iterations {
        if inf_norm(&g) <= opts.gradient_tolerance {
            return OptimOutcome {
                x,
                value: f,
                gradient: g,
                iterations: iter,
                status: OptimStatus::GradientConverged,
            };
        }
        let mut dir: Vec<f64> = h.iter().map(|row| -dot(row, &g)).collect();
        let mut slope = dot(&dir, &g);
        if !(slope < 0.0) {
            h = identity(n, 1.0);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
        }
        let longest = inf_norm(&dir);
        if longest > opts.max_step {
            let shrink = opts.max_step / longest;
            dir.iter_mut().for_each(|d| *d *= shrink);
            slope *= shrink;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let (ft, gt) = objective(&trial);
            if ft.is_finite()
                && gt.iter().all(|v| v.is_finite())
                && ft <= f + 1e-4 * step * slope
            {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new, g_new)) = accepted else {
            if !fresh {
                h = identity(n, 1.0);
                fresh = true;
                continue;
            }
            return OptimOutcome {
                x,
                value: f,
                gradient: g,
                iterations: iter,
                status: OptimStatus::LineSearchFailed,
            };
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let decrease = f - f_new;
        x = x_new;
        g = g_new;
        let f_old = f;
        f = f_new;
        if decrease.abs() <= opts.function_tolerance * f_old.abs().max(1.0) {
            let status = if inf_norm(&g) <= opts.gradient_tolerance {
                OptimStatus::GradientConverged
            } else {
                OptimStatus::FunctionConverged
            };
            return OptimOutcome {
                x,
                value: f,
                gradient: g,
                iterations: iter + 1,
                status,
            };
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = identity(n, scale);
            }
            // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            let rho = 1.0 / sy;
            let hy: Vec<f64> = h.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            for i in 0..n {
                for j in 0..n {
                    h[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j])
                        + (rho * rho * yhy + rho) * s[i] * s[j];
                }
            }
            fresh = false;
        }
    }
    OptimOutcome {
        x,
        value: f,
        gradient: g,
        iterations: opts.max_iterations,
        status: OptimStatus::MaxIterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x| {
                let (a, b) = (x[0], x[1]);
                let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
                let g = vec![
                    -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                    200.0 * (b - a * a),
                ];
                (f, g)
            },
            &[-1.2, 1.0],
            &BfgsOptions::default(),
        );
        assert!(out.status.converged(), "{:?}", out.status);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        // Minimum at x = 0.5 inside the feasible half-line x < 1.
        let out = minimize(
            |x| {
                if x[0] >= 1.0 {
                    (f64::INFINITY, vec![0.0])
                } else {
                    ((x[0] - 0.5).powi(2) - (1.0 - x[0]).ln() * 1e-9, vec![2.0 * (x[0] - 0.5) + 1e-9 / (1.0 - x[0])])
                }
            },
            &[-3.0],
            &BfgsOptions::default(),
        );
        assert!(out.status.converged());
        assert!((out.x[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn non_finite_start() {
        let out = minimize(|_| (f64::NAN, vec![0.0]), &[0.0], &BfgsOptions::default());
        assert_eq!(out.status, OptimStatus::NonFiniteStart);
    }
}
