//! Derivative-free unconstrained minimization used by the fitting routines.
//!
//! The method is Nelder-Mead simplex search with the dimension-adaptive
//! coefficients of Gao and Han, plus optional restarts from the best point.
//! The max-of-planes least-squares objectives fitted in this crate are
//! piecewise smooth with gradient discontinuities at plane switchovers, which
//! derivative-free search handles without special casing.

use crate::error::{Error, Result};

/// Stopping and restart controls for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerOptions {
    /// Iteration budget per run.
    pub max_iterations: usize,
    /// Simplex size threshold (max coordinate distance from the best vertex).
    pub x_tolerance: f64,
    /// Objective spread threshold across the simplex.
    pub f_tolerance: f64,
    /// Total number of runs; each run after the first rebuilds the simplex
    /// around the best point found so far.
    pub restarts: usize,
}

impl OptimizerOptions {
    /// Defaults for a given parameter count: `200 * dim` iterations,
    /// `x_tolerance` 1e-6, `f_tolerance` 1e-9, a single run.
    pub fn for_dimension(dim: usize) -> OptimizerOptions {
        OptimizerOptions {
            max_iterations: 200 * dim.max(1),
            x_tolerance: 1e-6,
            f_tolerance: 1e-9,
            restarts: 1,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> OptimizerOptions {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> OptimizerOptions {
        self.max_iterations = max_iterations;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || self.restarts == 0 {
            return Err(Error::Parameter(
                "iteration and restart counts must be at least 1".into(),
            ));
        }
        if !(self.x_tolerance > 0.0) || !(self.f_tolerance > 0.0) {
            return Err(Error::Parameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Result of a [`minimize`] call.
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// True when the stopping tolerances were met before the iteration
    /// budget ran out (on the final run).
    pub converged: bool,
}

/// Initial simplex step: 5% of the coordinate magnitude, absolute 0.05 for
/// zero coordinates.
fn simplex_step(coord: f64) -> f64 {
    if coord == 0.0 {
        0.05
    } else {
        0.05 * coord.abs()
    }
}

/// Minimizes `objective` starting from `x0`.
///
/// Non-finite objective values during the search are treated as +inf and the
/// search continues; a non-finite value at `x0` itself is an error.
pub fn minimize<F>(mut objective: F, x0: &[f64], options: &OptimizerOptions) -> Result<MinimizeResult>
where
    F: FnMut(&[f64]) -> f64,
{
    options.validate()?;
    if x0.is_empty() {
        return Err(Error::Parameter("empty parameter vector".into()));
    }
    let mut eval = move |x: &[f64]| -> f64 {
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let f0 = eval(x0);
    if !f0.is_finite() {
        return Err(Error::InvalidStart(format!(
            "objective is not finite at the starting point (got {f0})"
        )));
    }

    let mut best_x = x0.to_vec();
    let mut best_f = f0;
    let mut converged = false;
    for _ in 0..options.restarts {
        let (x, f, conv) = nelder_mead_run(&mut eval, &best_x, best_f, options);
        if f < best_f {
            best_f = f;
            best_x = x;
        }
        converged = conv;
    }
    Ok(MinimizeResult {
        x: best_x,
        value: best_f,
        converged,
    })
}

fn nelder_mead_run<F>(
    eval: &mut F,
    x0: &[f64],
    f0: f64,
    options: &OptimizerOptions,
) -> (Vec<f64>, f64, bool)
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let dimf = dim as f64;
    // Gao-Han adaptive coefficients.
    let alpha = 1.0;
    let beta = 1.0 + 2.0 / dimf;
    let gamma = (0.75 - 1.0 / (2.0 * dimf)).max(0.1);
    let delta = (1.0 - 1.0 / dimf).max(0.5);

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += simplex_step(x[i]);
        let f = eval(&x);
        simplex.push((x, f));
    }

    let mut converged = false;
    for _ in 0..options.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[dim].1 - simplex[0].1;
        let size = simplex
            .iter()
            .flat_map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
            })
            .fold(0.0, f64::max);
        if (spread.is_nan() || spread <= options.f_tolerance) && size <= options.x_tolerance {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dimf)
            .collect();
        let worst = simplex[dim].clone();
        let second_worst_f = simplex[dim - 1].1;
        let best_f = simplex[0].1;

        let reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst.0)
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let f_reflected = eval(&reflected);

        if f_reflected < best_f {
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + beta * (r - c))
                .collect();
            let f_expanded = eval(&expanded);
            simplex[dim] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < second_worst_f {
            simplex[dim] = (reflected, f_reflected);
        } else if f_reflected < worst.1 {
            // Outside contraction.
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(&reflected)
                .map(|(c, r)| c + gamma * (r - c))
                .collect();
            let f_contracted = eval(&contracted);
            if f_contracted <= f_reflected {
                simplex[dim] = (contracted, f_contracted);
            } else {
                shrink(&mut simplex, delta, eval);
            }
        } else {
            // Inside contraction.
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c - gamma * (c - w))
                .collect();
            let f_contracted = eval(&contracted);
            if f_contracted < worst.1 {
                simplex[dim] = (contracted, f_contracted);
            } else {
                shrink(&mut simplex, delta, eval);
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    (x, f, converged)
}

fn shrink<F>(simplex: &mut [(Vec<f64>, f64)], delta: f64, eval: &mut F)
where
    F: FnMut(&[f64]) -> f64,
{
    let best = simplex[0].0.clone();
    for entry in simplex.iter_mut().skip(1) {
        for (x, b) in entry.0.iter_mut().zip(&best) {
            *x = b + delta * (*x - b);
        }
        entry.1 = eval(&entry.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::RefCell;

    #[test]
    fn quadratic_converges_to_origin() {
        let opts = OptimizerOptions::for_dimension(2);
        let result = minimize(
            |x| x.iter().map(|v| v * v).sum(),
            &[1.0, 1.0],
            &opts,
        )
        .unwrap();
        assert!(result.value < 1e-8, "f_best {}", result.value);
        assert!(result.x.iter().all(|v| v.abs() < 1e-3));
        assert!(result.converged);
    }

    #[test]
    fn rosenbrock_with_restarts() {
        let rosenbrock = |x: &[f64]| {
            let (a, b) = (1.0, 100.0);
            (a - x[0]).powi(2) + b * (x[1] - x[0] * x[0]).powi(2)
        };
        let opts = OptimizerOptions::for_dimension(2).with_restarts(3);
        let result = minimize(rosenbrock, &[-1.2, 1.0], &opts).unwrap();
        assert!(result.value < 1e-6, "f_best {}", result.value);
        assert!((result.x[0] - 1.0).abs() < 1e-2);
        assert!((result.x[1] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn constant_objective_converges_at_start() {
        let opts = OptimizerOptions::for_dimension(3);
        let result = minimize(|_| 2.5, &[0.3, -0.4, 7.0], &opts).unwrap();
        assert!(result.converged);
        assert_eq!(result.x, vec![0.3, -0.4, 7.0]);
        assert_eq!(result.value, 2.5);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let opts = OptimizerOptions::for_dimension(1);
        let err = minimize(|x| 1.0 / x[0], &[0.0], &opts).unwrap_err();
        assert!(matches!(err, Error::InvalidStart(_)));
    }

    #[test]
    fn non_finite_trials_are_skipped() {
        // NaN wall close to the optimum on one side.
        let objective = |x: &[f64]| {
            if x[0] < -0.5 {
                f64::NAN
            } else {
                (x[0] - 0.25).powi(2)
            }
        };
        let opts = OptimizerOptions::for_dimension(1).with_restarts(2);
        let result = minimize(objective, &[-0.4], &opts).unwrap();
        assert!(result.value < 1e-8);
    }

    #[test]
    fn result_is_the_minimum_of_all_evaluations() {
        let evals = RefCell::new(Vec::new());
        let objective = |x: &[f64]| {
            let f = (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2) * 3.0;
            evals.borrow_mut().push(f);
            f
        };
        let opts = OptimizerOptions::for_dimension(2);
        let result = minimize(objective, &[0.0, 0.0], &opts).unwrap();
        let recorded_min = evals
            .borrow()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        assert_eq!(result.value, recorded_min);
    }

    #[test]
    fn deterministic_across_runs() {
        let objective = |x: &[f64]| (x[0] - 0.7).powi(4) + (x[1] * x[0]).powi(2);
        let opts = OptimizerOptions::for_dimension(2).with_restarts(2);
        let a = minimize(objective, &[3.0, -2.0], &opts).unwrap();
        let b = minimize(objective, &[3.0, -2.0], &opts).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.value, b.value);
    }
}
