//! ADMM for the lasso and its group variant, in scaled dual form.
//!
//! The split is `min 0.5 ||Ax - b||^2 + lambda P(z)` subject to `x = z`,
//! where `P` is the l1 norm or a sum of block l2 norms. The `x` update
//! reuses one Cholesky factorization of `A'A + rho I` across all
//! iterations; the reported iterate is `z`, the variable the penalty acts
//! on.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::solvers::{MnlHook, RunRecorder, SolverRun};

/// Sparsity penalty applied through the `z` update.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Penalty {
    /// Elementwise l1.
    Lasso,
    /// l2 norms of contiguous equal-length blocks; `block_len` must divide
    /// the problem size.
    GroupLasso { block_len: usize },
}

#[derive(Clone, Debug)]
pub struct AdmmConfig {
    pub rho: f64,
    /// Penalty weight `lambda`.
    pub lambda_reg: f64,
    /// Relaxation mix: 1 is the plain update, below 1 under-relaxes.
    pub alpha_relax: f64,
    pub iterations: usize,
    pub penalty: Penalty,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: 1.0,
            lambda_reg: 0.1,
            alpha_relax: 1.0,
            iterations: 50,
            penalty: Penalty::Lasso,
        }
    }
}

/// Shrinks `v` toward zero by `t`, flooring at zero.
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn prox(v: &DVector<f64>, kappa: f64, penalty: &Penalty) -> DVector<f64> {
    match penalty {
        Penalty::Lasso => v.map(|x| soft_threshold(x, kappa)),
        Penalty::GroupLasso { block_len } => {
            let mut out = v.clone();
            for blk in 0..v.len() / block_len {
                let range = blk * block_len..(blk + 1) * block_len;
                let norm = v.rows(range.start, *block_len).norm();
                let scale = if norm > kappa { 1.0 - kappa / norm } else { 0.0 };
                for i in range {
                    out[i] = v[i] * scale;
                }
            }
            out
        }
    }
}

/// Factorization reused across iterations and, when the problem repeats,
/// across runs.
pub struct AdmmOperator {
    a: DMatrix<f64>,
    atb_chol: Cholesky<f64, Dyn>,
    rho: f64,
}

impl AdmmOperator {
    pub fn new(a: DMatrix<f64>, rho: f64) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::invalid("a", "matrix must be non-empty"));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::invalid("rho", "must be positive and finite"));
        }
        let n = a.ncols();
        let mut gram = a.transpose() * &a;
        for i in 0..n {
            gram[(i, i)] += rho;
        }
        let atb_chol = gram
            .cholesky()
            .ok_or_else(|| Error::Numerical("A'A + rho I is not positive definite".into()))?;
        Ok(AdmmOperator { a, atb_chol, rho })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }
}

/// Runs ADMM from `x = z = u = 0`, reporting `z` at every iteration.
pub fn run_admm(
    op: &AdmmOperator,
    b: &DVector<f64>,
    cfg: &AdmmConfig,
    reference: Option<&Signal>,
    hook: Option<&MnlHook>,
) -> Result<SolverRun> {
    if b.len() != op.a.nrows() {
        return Err(Error::invalid("b", "length must match the matrix rows"));
    }
    if cfg.rho != op.rho {
        return Err(Error::invalid("rho", "config and operator disagree"));
    }
    if !(cfg.lambda_reg >= 0.0) {
        return Err(Error::invalid("lambda_reg", "must be non-negative"));
    }
    if !(cfg.alpha_relax > 0.0 && cfg.alpha_relax < 2.0) {
        return Err(Error::invalid("alpha_relax", "must lie in (0, 2)"));
    }
    if let Penalty::GroupLasso { block_len } = cfg.penalty {
        if block_len == 0 || op.a.ncols() % block_len != 0 {
            return Err(Error::invalid(
                "block_len",
                "must be positive and divide the problem size",
            ));
        }
    }

    let n = op.a.ncols();
    let atb = op.a.transpose() * b;
    let kappa = cfg.lambda_reg / cfg.rho;
    let mut z = DVector::<f64>::zeros(n);
    let mut u = DVector::<f64>::zeros(n);
    let mut rec = RunRecorder::new(Signal::new_1d(vec![0.0; n]), reference, hook)?;
    for _ in 0..cfg.iterations {
        let rhs = &atb + (&z - &u) * cfg.rho;
        let x = op.atb_chol.solve(&rhs);
        let xhat = &x * cfg.alpha_relax + &z * (1.0 - cfg.alpha_relax);
        let v = &xhat + &u;
        z = prox(&v, kappa, &cfg.penalty);
        u = u + &xhat - &z;
        if !rec.record(Signal::new_1d(z.as_slice().to_vec()))? {
            break;
        }
    }
    Ok(rec.finish())
}
