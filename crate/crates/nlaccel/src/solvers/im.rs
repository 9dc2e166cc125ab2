//! Relaxed fixed-point iteration for inverting a linear distortion.
//!
//! Given an observation `y = G(x)` the update is
//! `x_k = lambda * (y - G(x_{k-1})) + x_{k-1}`, which converges when the
//! spectrum of `G` lies inside `(0, 2 / lambda)` and diverges geometrically
//! otherwise.

use crate::error::{Error, Result};
use crate::operators::LinearDistortion;
use crate::signal::Signal;
use crate::solvers::{MnlHook, RunRecorder, SolverRun};

#[derive(Clone, Debug)]
pub struct ImConfig {
    /// Relaxation factor `lambda`.
    pub relaxation: f64,
    pub iterations: usize,
}

impl Default for ImConfig {
    fn default() -> Self {
        ImConfig {
            relaxation: 1.0,
            iterations: 20,
        }
    }
}

/// Runs the iteration from `init`, reporting every iterate.
pub fn iterate_im(
    distortion: &LinearDistortion,
    observed: &Signal,
    init: &Signal,
    cfg: &ImConfig,
    reference: Option<&Signal>,
    hook: Option<&MnlHook>,
) -> Result<SolverRun> {
    if !cfg.relaxation.is_finite() || cfg.relaxation <= 0.0 {
        return Err(Error::invalid("relaxation", "must be positive and finite"));
    }
    if observed.shape() != init.shape() {
        return Err(Error::ShapeMismatch {
            expected: observed.shape(),
            got: init.shape(),
        });
    }
    let mut rec = RunRecorder::new(init.clone(), reference, hook)?;
    for _ in 0..cfg.iterations {
        let prev = rec.running();
        let distorted = distortion.apply(prev)?;
        let data: Vec<f64> = observed
            .data()
            .iter()
            .zip(distorted.data())
            .zip(prev.data())
            .map(|((&y, &gx), &x)| cfg.relaxation * (y - gx) + x)
            .collect();
        if !rec.record(Signal::from_shape(init.shape(), data)?)? {
            break;
        }
    }
    Ok(rec.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::AccelConfig;
    use crate::solvers::MnlHook;

    #[test]
    fn scalar_halving_contraction_follows_the_known_trace() {
        let g = LinearDistortion::Scale(0.5);
        let obs = Signal::new_1d(vec![1.0]);
        let cfg = ImConfig {
            relaxation: 1.0,
            iterations: 4,
        };
        let run = iterate_im(&g, &obs, &obs, &cfg, None, None).unwrap();
        let values: Vec<f64> = run.trace.iter().map(|s| s.data()[0]).collect();
        assert_eq!(values, vec![1.0, 1.5, 1.75, 1.875, 1.9375]);
    }

    #[test]
    fn acceleration_lands_on_the_fixed_point_in_one_window() {
        let g = LinearDistortion::Scale(0.5);
        let obs = Signal::new_1d(vec![1.0]);
        let reference = Signal::new_1d(vec![2.0]);
        let cfg = ImConfig {
            relaxation: 1.0,
            iterations: 4,
        };
        let plain = iterate_im(&g, &obs, &obs, &cfg, Some(&reference), None).unwrap();
        let errs = plain.error_norms.unwrap();
        assert_eq!(errs[4], 0.0625);

        let hook = MnlHook::feedback(AccelConfig::default());
        let accel = iterate_im(&g, &obs, &obs, &cfg, Some(&reference), Some(&hook)).unwrap();
        assert_eq!(accel.trace[4].data(), &[2.0]);
        assert_eq!(accel.error_norms.unwrap()[4], 0.0);
    }

    #[test]
    fn expansive_distortions_are_flagged_as_divergent() {
        let g = LinearDistortion::Scale(-2.0);
        let obs = Signal::new_1d(vec![1.0]);
        let init = Signal::new_1d(vec![0.0]);
        let reference = Signal::new_1d(vec![-0.5]);
        let cfg = ImConfig {
            relaxation: 1.0,
            iterations: 20,
        };
        let run = iterate_im(&g, &obs, &init, &cfg, Some(&reference), None).unwrap();
        assert_eq!(run.diverged_at, Some(13));
        assert_eq!(run.trace.len(), 14);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let g = LinearDistortion::Identity;
        let obs = Signal::new_1d(vec![1.0, 2.0]);
        let init = Signal::new_1d(vec![0.0]);
        let cfg = ImConfig::default();
        assert!(iterate_im(&g, &obs, &init, &cfg, None, None).is_err());
    }
}
