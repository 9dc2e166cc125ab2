//! Smoothed-l0 sparse recovery.
//!
//! The sparsity measure counts entries through a Gaussian bump: with
//! `f_sigma(s) = N - sum_i exp(-s_i^2 / (2 sigma^2))` small `sigma` makes
//! `f_sigma` approach the l0 count. Each outer pass shrinks `sigma`
//! geometrically and runs a few gradient steps on `f_sigma`, projecting back
//! onto the constraint set `{s : As = b}` after every step.

use nalgebra::DVector;

use crate::accel::{accelerate, AccelConfig, IterateWindow};
use crate::error::{Error, Result};
use crate::operators::PseudoInverseProjector;
use crate::signal::Shape;

/// Where the four-iterate extrapolation attaches, if anywhere.
#[derive(Clone, Debug, Default)]
pub enum Sl0Acceleration {
    #[default]
    Off,
    /// Window over the last four raw inner estimations, streamed across
    /// pass boundaries; applied at the end of each pass once the stream
    /// holds four, and the result replaces the running iterate.
    Inner(AccelConfig),
    /// Window over the last four outer iterates.
    Outer(AccelConfig),
}

#[derive(Clone, Debug)]
pub struct Sl0Config {
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Gradient step scale; the step taken is `mu0 * sigma^2` times the
    /// gradient of `f_sigma`.
    pub mu0: f64,
    /// Starting `sigma`; `None` derives `2 * max|s0|` from the minimum-norm
    /// start `s0`.
    pub sigma0: Option<f64>,
    /// Geometric factor applied to `sigma` between outer passes.
    pub sigma_decay: f64,
    pub acceleration: Sl0Acceleration,
}

impl Default for Sl0Config {
    fn default() -> Self {
        Sl0Config {
            outer_iterations: 8,
            inner_iterations: 3,
            mu0: 2.0,
            sigma0: None,
            sigma_decay: 0.5,
            acceleration: Sl0Acceleration::Off,
        }
    }
}

/// Outcome of a smoothed-l0 run.
#[derive(Clone, Debug)]
pub struct Sl0Run {
    /// Solution after each outer pass; index 0 is the minimum-norm start.
    pub outer_trace: Vec<DVector<f64>>,
    /// The `sigma` used by each outer pass.
    pub sigmas: Vec<f64>,
}

impl Sl0Run {
    pub fn final_solution(&self) -> &DVector<f64> {
        self.outer_trace.last().expect("trace is never empty")
    }
}

/// Smoothed sparsity measure: the approximate number of nonzero entries.
pub fn f_sigma(s: &[f64], sigma: f64) -> f64 {
    let sum: f64 = s.iter().map(|&v| (-v * v / (2.0 * sigma * sigma)).exp()).sum();
    s.len() as f64 - sum
}

/// Gradient of [`f_sigma`].
pub fn grad_f_sigma(s: &[f64], sigma: f64) -> Vec<f64> {
    let s2 = sigma * sigma;
    s.iter()
        .map(|&v| (v / s2) * (-v * v / (2.0 * s2)).exp())
        .collect()
}

fn accelerate_window(
    history: &[DVector<f64>; 3],
    fresh: &DVector<f64>,
    cfg: &AccelConfig,
    projector: &PseudoInverseProjector,
    b: &DVector<f64>,
) -> Result<DVector<f64>> {
    let window = IterateWindow::new(
        history[0].as_slice(),
        history[1].as_slice(),
        history[2].as_slice(),
        fresh.as_slice(),
    )?;
    let combined = accelerate(&window, Shape::OneD(fresh.len()), cfg)?;
    projector.project(&DVector::from_vec(combined), b)
}

/// Runs the recovery from the minimum-norm solution of `As = b`.
pub fn run_sl0(
    projector: &PseudoInverseProjector,
    b: &DVector<f64>,
    cfg: &Sl0Config,
) -> Result<Sl0Run> {
    if cfg.outer_iterations == 0 || cfg.inner_iterations == 0 {
        return Err(Error::invalid("iterations", "outer and inner must be positive"));
    }
    if !(cfg.mu0 > 0.0) || !cfg.mu0.is_finite() {
        return Err(Error::invalid("mu0", "must be positive and finite"));
    }
    if !(cfg.sigma_decay > 0.0 && cfg.sigma_decay < 1.0) {
        return Err(Error::invalid("sigma_decay", "must lie in (0, 1)"));
    }
    if matches!(cfg.acceleration, Sl0Acceleration::Inner(_)) && cfg.inner_iterations < 3 {
        return Err(Error::invalid(
            "inner_iterations",
            "windowed inner acceleration needs at least 3",
        ));
    }

    let mut s = projector.min_norm_solution(b)?;
    let sigma0 = match cfg.sigma0 {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(_) => return Err(Error::invalid("sigma0", "must be positive and finite")),
        None => {
            let m = s.amax();
            if m == 0.0 {
                return Err(Error::Numerical(
                    "minimum-norm start is zero; supply sigma0 explicitly".into(),
                ));
            }
            2.0 * m
        }
    };

    let mut outer_trace = vec![s.clone()];
    let mut sigmas = Vec::with_capacity(cfg.outer_iterations);
    let mut sigma = sigma0;
    // Raw inner estimations, streamed across pass boundaries; the
    // extrapolation output below is not part of this stream.
    let mut inner_stream: Vec<DVector<f64>> = Vec::new();
    for _ in 0..cfg.outer_iterations {
        sigmas.push(sigma);
        for _ in 0..cfg.inner_iterations {
            let mut stepped = s.clone();
            for (v, g) in stepped.iter_mut().zip(grad_f_sigma(s.as_slice(), sigma)) {
                *v -= cfg.mu0 * sigma * sigma * g;
            }
            s = projector.project(&stepped, b)?;
            if matches!(cfg.acceleration, Sl0Acceleration::Inner(_)) {
                inner_stream.push(s.clone());
                if inner_stream.len() > 4 {
                    inner_stream.remove(0);
                }
            }
        }
        if let Sl0Acceleration::Inner(accel_cfg) = &cfg.acceleration {
            // The window covers the last four estimations of the inner
            // stream, which with three steps per pass only fills during the
            // second pass; the first pass therefore ends unaccelerated.
            if let [x0, x1, x2, x3] = &inner_stream[..] {
                let history = [x0.clone(), x1.clone(), x2.clone()];
                s = accelerate_window(&history, x3, accel_cfg, projector, b)?;
            }
        }
        if let Sl0Acceleration::Outer(accel_cfg) = &cfg.acceleration {
            // Same warm-up as the generic hook: the first window is built
            // once iterates 1 through 4 exist, skipping the start.
            if outer_trace.len() >= 4 {
                let h = &outer_trace[outer_trace.len() - 3..];
                let history = [h[0].clone(), h[1].clone(), h[2].clone()];
                s = accelerate_window(&history, &s, accel_cfg, projector, b)?;
            }
        }
        outer_trace.push(s.clone());
        sigma *= cfg.sigma_decay;
    }
    Ok(Sl0Run {
        outer_trace,
        sigmas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::{gen_gaussian_matrix, RandomStream};

    fn sparse_problem() -> (nalgebra::DMatrix<f64>, DVector<f64>, DVector<f64>) {
        let a = gen_gaussian_matrix(32, 64, &RandomStream::new(101, 0)).unwrap();
        let mut s_true = DVector::zeros(64);
        s_true[5] = 1.0;
        s_true[20] = -2.0;
        s_true[40] = 0.5;
        let b = &a * &s_true;
        (a, s_true, b)
    }

    #[test]
    fn smoothed_count_and_gradient_take_known_values() {
        let sigma = 2.0;
        assert_eq!(f_sigma(&[0.0, 0.0], sigma), 0.0);
        let f = f_sigma(&[sigma], sigma);
        assert!((f - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        let g = grad_f_sigma(&[sigma], sigma);
        assert!((g[0] - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
        let far = f_sigma(&[1e6], 1.0);
        assert!((far - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_vectors_are_recovered_from_few_measurements() {
        let (a, s_true, b) = sparse_problem();
        let projector = PseudoInverseProjector::new(a).unwrap();
        let run = run_sl0(&projector, &b, &Sl0Config::default()).unwrap();
        let start_err = (&run.outer_trace[0] - &s_true).norm();
        let end_err = (run.final_solution() - &s_true).norm();
        assert!(
            end_err < 0.05 * s_true.norm(),
            "relative error {}",
            end_err / s_true.norm()
        );
        assert!(end_err < 0.2 * start_err);
        assert_eq!(run.sigmas.len(), 8);
        for m in 1..8 {
            assert!((run.sigmas[m] - run.sigmas[0] * 0.5f64.powi(m as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn every_outer_iterate_stays_feasible() {
        let (a, _, b) = sparse_problem();
        let projector = PseudoInverseProjector::new(a.clone()).unwrap();
        for accel in [
            Sl0Acceleration::Off,
            Sl0Acceleration::Inner(AccelConfig::default()),
            Sl0Acceleration::Outer(AccelConfig::default()),
        ] {
            let cfg = Sl0Config {
                acceleration: accel,
                ..Sl0Config::default()
            };
            let run = run_sl0(&projector, &b, &cfg).unwrap();
            for (m, s) in run.outer_trace.iter().enumerate() {
                let residual = (&a * s - &b).norm();
                assert!(
                    residual <= 1e-8 * b.norm(),
                    "outer {m} residual {residual}"
                );
                assert!(s.iter().all(|v| v.is_finite()));
            }
        }
    }

    #[test]
    fn inner_acceleration_requires_a_full_window() {
        let (a, _, b) = sparse_problem();
        let projector = PseudoInverseProjector::new(a).unwrap();
        let cfg = Sl0Config {
            inner_iterations: 2,
            acceleration: Sl0Acceleration::Inner(AccelConfig::default()),
            ..Sl0Config::default()
        };
        assert!(run_sl0(&projector, &b, &cfg).is_err());
    }
}
