//! Chebyshev-weighted two-step iteration for inverting a linear distortion
//! whose spectrum is known to lie in `[spectrum_min, spectrum_max]`.

use crate::error::{Error, Result};
use crate::operators::LinearDistortion;
use crate::signal::Signal;
use crate::solvers::{MnlHook, RunRecorder, SolverRun};

#[derive(Clone, Debug)]
pub struct ChebyshevConfig {
    /// Lower spectral bound `A` (strictly positive).
    pub spectrum_min: f64,
    /// Upper spectral bound `B >= A`.
    pub spectrum_max: f64,
    /// Starting weight; the classical choice is 1.
    pub lambda1: f64,
    pub iterations: usize,
}

impl Default for ChebyshevConfig {
    fn default() -> Self {
        ChebyshevConfig {
            spectrum_min: 0.25,
            spectrum_max: 0.75,
            lambda1: 1.0,
            iterations: 20,
        }
    }
}

/// Runs the accelerated polynomial iteration.
///
/// With `g = 2 / (A + B)` and `rho = (B - A) / (A + B)` the recurrence is
///
/// ```text
/// x_1 = g * y
/// lambda_k = 1 / (1 - rho^2 lambda_{k-1} / 4)
/// x_k = lambda_k * (x_1 + x_{k-1} - g * G(x_{k-1}) - x_{k-2}) + x_{k-2}
/// ```
///
/// Modes of `G` with eigenvalue above `A + B` make the recurrence grow
/// instead of contract, which is what the divergence flag watches for.
pub fn iterate_chebyshev(
    distortion: &LinearDistortion,
    observed: &Signal,
    init: &Signal,
    cfg: &ChebyshevConfig,
    reference: Option<&Signal>,
    hook: Option<&MnlHook>,
) -> Result<SolverRun> {
    let (a, b) = (cfg.spectrum_min, cfg.spectrum_max);
    if !(a > 0.0) || !(b >= a) || !b.is_finite() {
        return Err(Error::invalid(
            "spectrum",
            format!("need 0 < min <= max, got [{a}, {b}]"),
        ));
    }
    if observed.shape() != init.shape() {
        return Err(Error::ShapeMismatch {
            expected: observed.shape(),
            got: init.shape(),
        });
    }
    let g = 2.0 / (a + b);
    let rho = (b - a) / (a + b);
    let shape = init.shape();
    let x1: Vec<f64> = observed.data().iter().map(|&y| g * y).collect();

    let mut rec = RunRecorder::new(init.clone(), reference, hook)?;
    let mut two_back = init.data().to_vec();
    let mut lambda = cfg.lambda1;
    for k in 1..=cfg.iterations {
        let step = if k == 1 {
            Signal::from_shape(shape, x1.clone())?
        } else {
            lambda = 1.0 / (1.0 - 0.25 * rho * rho * lambda);
            let prev = rec.running().clone();
            let gx = distortion.apply(&prev)?;
            let data: Vec<f64> = (0..shape.len())
                .map(|i| {
                    lambda * (x1[i] + prev.data()[i] - g * gx.data()[i] - two_back[i])
                        + two_back[i]
                })
                .collect();
            two_back = prev.into_data();
            Signal::from_shape(shape, data)?
        };
        if !rec.record(step)? {
            break;
        }
    }
    Ok(rec.finish())
}
