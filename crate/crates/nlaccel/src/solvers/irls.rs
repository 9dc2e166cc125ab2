//! Iteratively reweighted least squares for lp-minimal solutions of
//! underdetermined systems.
//!
//! Each pass solves a weighted minimum-norm problem
//! `s = D A' (A D A')^{-1} b` with weights `d_i = (s_i^2 + eps)^{1 - p/2}`,
//! which tilts the energy toward entries that are already large and drives
//! the rest toward zero as `eps` shrinks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::solvers::{MnlHook, RunRecorder, SolverRun};

/// How the smoothing floor evolves across iterations.
#[derive(Clone, Debug)]
pub enum EpsilonSchedule {
    /// Explicit per-iteration values; the last one persists.
    Fixed(Vec<f64>),
    /// Halve whenever the iterate's relative change drops below
    /// `sqrt(eps) / 100`.
    AdaptiveHalving { initial: f64 },
}

#[derive(Clone, Debug)]
pub struct IrlsConfig {
    /// Sparsity exponent in `(0, 2)`; 1 targets the l1 solution.
    pub p: f64,
    pub iterations: usize,
    pub epsilon: EpsilonSchedule,
}

impl Default for IrlsConfig {
    fn default() -> Self {
        IrlsConfig {
            p: 1.0,
            iterations: 30,
            epsilon: EpsilonSchedule::AdaptiveHalving { initial: 1.0 },
        }
    }
}

/// A run together with the smoothing floor active at each iteration.
#[derive(Clone, Debug)]
pub struct IrlsRun {
    pub run: SolverRun,
    pub epsilons: Vec<f64>,
}

fn solve_spd(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    if let Some(chol) = m.clone().cholesky() {
        return Ok(chol.solve(rhs));
    }
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::Numerical("weighted normal matrix is singular".into()))
}

/// Runs the reweighting iteration from the zero vector; the first pass
/// therefore lands on the (weighted) minimum-norm solution.
pub fn run_irls(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    cfg: &IrlsConfig,
    reference: Option<&Signal>,
    hook: Option<&MnlHook>,
) -> Result<IrlsRun> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::invalid("a", "matrix must be non-empty"));
    }
    if b.len() != a.nrows() {
        return Err(Error::invalid("b", "length must match the matrix rows"));
    }
    if !(cfg.p > 0.0 && cfg.p < 2.0) {
        return Err(Error::invalid("p", "must lie in (0, 2)"));
    }
    match &cfg.epsilon {
        EpsilonSchedule::Fixed(v) => {
            if v.is_empty() || v.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
                return Err(Error::invalid(
                    "epsilon",
                    "fixed schedule needs positive finite values",
                ));
            }
        }
        EpsilonSchedule::AdaptiveHalving { initial } => {
            if !(*initial > 0.0) || !initial.is_finite() {
                return Err(Error::invalid("epsilon", "initial value must be positive"));
            }
        }
    }

    let n = a.ncols();
    let expo = 1.0 - cfg.p / 2.0;
    let mut rec = RunRecorder::new(Signal::new_1d(vec![0.0; n]), reference, hook)?;
    let mut epsilons = Vec::with_capacity(cfg.iterations);
    let mut adaptive_eps = match &cfg.epsilon {
        EpsilonSchedule::AdaptiveHalving { initial } => *initial,
        EpsilonSchedule::Fixed(_) => f64::NAN,
    };
    for k in 1..=cfg.iterations {
        let eps = match &cfg.epsilon {
            EpsilonSchedule::Fixed(v) => v[(k - 1).min(v.len() - 1)],
            EpsilonSchedule::AdaptiveHalving { .. } => adaptive_eps,
        };
        epsilons.push(eps);
        let s_old = DVector::from_column_slice(rec.running().data());
        let d: DVector<f64> = s_old.map(|v| (v * v + eps).powf(expo));
        // A D A' assembled as (A * diag(d)) * A'.
        let mut ad = a.clone();
        for (j, mut col) in ad.column_iter_mut().enumerate() {
            col *= d[j];
        }
        let gram = &ad * a.transpose();
        let y = solve_spd(&gram, b)?;
        let s_new = ad.transpose() * y;
        if let EpsilonSchedule::AdaptiveHalving { .. } = cfg.epsilon {
            let denom = s_old.norm();
            if denom > 0.0 && (&s_new - &s_old).norm() / denom < eps.sqrt() / 100.0 {
                adaptive_eps *= 0.5;
            }
        }
        if !rec.record(Signal::new_1d(s_new.as_slice().to_vec()))? {
            break;
        }
    }
    Ok(IrlsRun {
        run: rec.finish(),
        epsilons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::PseudoInverseProjector;
    use crate::signals::{gen_gaussian_matrix, RandomStream};

    #[test]
    fn square_systems_are_solved_on_the_first_pass_whatever_the_weights() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_column_slice(&[3.0, 5.0]);
        let exact = a.clone().lu().solve(&b).unwrap();
        for (p, eps) in [(0.5, 1e6), (1.0, 1e-6), (1.5, 1.0)] {
            let cfg = IrlsConfig {
                p,
                iterations: 1,
                epsilon: EpsilonSchedule::Fixed(vec![eps]),
            };
            let out = run_irls(&a, &b, &cfg, None, None).unwrap();
            let got = out.run.trace[1].data();
            for i in 0..2 {
                assert!(
                    (got[i] - exact[i]).abs() < 1e-10,
                    "p={p} eps={eps}: {got:?} vs {exact:?}"
                );
            }
        }
    }

    #[test]
    fn an_overwhelming_floor_reduces_to_the_minimum_norm_solution() {
        let a = gen_gaussian_matrix(3, 8, &RandomStream::new(33, 0)).unwrap();
        let b = DVector::from_column_slice(&[1.0, -2.0, 0.5]);
        let cfg = IrlsConfig {
            p: 1.0,
            iterations: 1,
            epsilon: EpsilonSchedule::Fixed(vec![1e12]),
        };
        let out = run_irls(&a, &b, &cfg, None, None).unwrap();
        let projector = PseudoInverseProjector::new(a).unwrap();
        let min_norm = projector.min_norm_solution(&b).unwrap();
        for (got, want) in out.run.trace[1].data().iter().zip(min_norm.iter()) {
            assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn sparse_vectors_emerge_under_the_adaptive_schedule() {
        let a = gen_gaussian_matrix(20, 50, &RandomStream::new(77, 0)).unwrap();
        let mut s_true = DVector::zeros(50);
        s_true[4] = 1.5;
        s_true[23] = -1.0;
        s_true[41] = 0.7;
        let b = &a * &s_true;
        let cfg = IrlsConfig {
            p: 0.5,
            iterations: 120,
            epsilon: EpsilonSchedule::AdaptiveHalving { initial: 1.0 },
        };
        let out = run_irls(&a, &b, &cfg, None, None).unwrap();
        let s = DVector::from_column_slice(out.run.final_iterate().data());
        let rel = (&s - &s_true).norm() / s_true.norm();
        assert!(rel < 1e-3, "relative error {rel}");
        for w in out.epsilons.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(*out.epsilons.last().unwrap() < 1.0, "floor never moved");
    }

    #[test]
    fn fixed_schedules_persist_their_last_value() {
        let a = gen_gaussian_matrix(3, 8, &RandomStream::new(9, 0)).unwrap();
        let b = DVector::from_column_slice(&[1.0, 2.0, 3.0]);
        let cfg = IrlsConfig {
            p: 1.0,
            iterations: 4,
            epsilon: EpsilonSchedule::Fixed(vec![1.0, 0.1]),
        };
        let out = run_irls(&a, &b, &cfg, None, None).unwrap();
        assert_eq!(out.epsilons, vec![1.0, 0.1, 0.1, 0.1]);
    }

    #[test]
    fn invalid_exponents_and_schedules_are_rejected() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_column_slice(&[1.0, 1.0]);
        let bad_p = IrlsConfig {
            p: 2.0,
            ..IrlsConfig::default()
        };
        assert!(run_irls(&a, &b, &bad_p, None, None).is_err());
        let bad_eps = IrlsConfig {
            epsilon: EpsilonSchedule::Fixed(vec![]),
            ..IrlsConfig::default()
        };
        assert!(run_irls(&a, &b, &bad_eps, None, None).is_err());
    }
}
