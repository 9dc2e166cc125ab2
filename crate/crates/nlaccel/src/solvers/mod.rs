//! Iterative recovery algorithms and the shared run machinery.
//!
//! Every solver produces a [`SolverRun`]: the reported iterate sequence, the
//! error norms against a reference when one is supplied, and a divergence
//! marker. Acceleration plugs in through [`MnlHook`], which watches the last
//! four iterates and either feeds the extrapolated value back into the
//! iteration or only reports it alongside the untouched run.

pub mod admm;
pub mod chebyshev;
pub mod im;
pub mod imat;
pub mod irls;
pub mod sl0;

use std::collections::VecDeque;

use crate::accel::{accelerate, AccelConfig, IterateWindow};
use crate::error::{Error, Result};
use crate::signal::{Shape, Signal};

/// A run is flagged as diverged once its reported error exceeds the starting
/// error by this factor.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

/// What happens to an extrapolated iterate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefreshMode {
    /// The extrapolated value replaces the running iterate.
    Feedback,
    /// The iteration continues untouched; only the reported trace is
    /// accelerated.
    ReportOnly,
}

/// Acceleration attachment for a solver run.
#[derive(Clone, Debug)]
pub struct MnlHook {
    pub accel: AccelConfig,
    pub refresh: RefreshMode,
}

impl MnlHook {
    pub fn feedback(accel: AccelConfig) -> Self {
        MnlHook {
            accel,
            refresh: RefreshMode::Feedback,
        }
    }

    pub fn report_only(accel: AccelConfig) -> Self {
        MnlHook {
            accel,
            refresh: RefreshMode::ReportOnly,
        }
    }
}

/// Outcome of a solver run.
#[derive(Clone, Debug)]
pub struct SolverRun {
    /// Reported iterates; index 0 is the starting point.
    pub trace: Vec<Signal>,
    /// `l2` distance to the reference at each trace entry, when a reference
    /// was supplied.
    pub error_norms: Option<Vec<f64>>,
    /// Index of the first trace entry whose error crossed
    /// [`DIVERGENCE_FACTOR`] times the starting error; the trace stops there.
    pub diverged_at: Option<usize>,
}

impl SolverRun {
    pub fn final_iterate(&self) -> &Signal {
        self.trace.last().expect("trace is never empty")
    }
}

/// Bookkeeping shared by all solvers: trace collection, error tracking,
/// divergence cutoff and the four-iterate acceleration window.
pub(crate) struct RunRecorder<'a> {
    shape: Shape,
    reference: Option<&'a Signal>,
    hook: Option<&'a MnlHook>,
    err0: Option<f64>,
    history: VecDeque<Vec<f64>>,
    running: Signal,
    trace: Vec<Signal>,
    errors: Option<Vec<f64>>,
    diverged_at: Option<usize>,
    step: usize,
}

impl<'a> RunRecorder<'a> {
    pub(crate) fn new(
        init: Signal,
        reference: Option<&'a Signal>,
        hook: Option<&'a MnlHook>,
    ) -> Result<Self> {
        if init.is_empty() {
            return Err(Error::invalid("init", "starting point must be non-empty"));
        }
        let shape = init.shape();
        let mut errors = None;
        let mut err0 = None;
        if let Some(r) = reference {
            let e = r.l2_distance(&init)?;
            err0 = Some(e);
            errors = Some(vec![e]);
        }
        let mut history = VecDeque::with_capacity(3);
        history.push_back(init.data().to_vec());
        Ok(RunRecorder {
            shape,
            reference,
            hook,
            err0,
            history,
            running: init.clone(),
            trace: vec![init],
            errors,
            diverged_at: None,
            step: 0,
        })
    }

    /// The iterate the solver should advance from.
    pub(crate) fn running(&self) -> &Signal {
        &self.running
    }

    /// Records the next raw iterate. Returns `false` once the run is flagged
    /// as diverged, at which point the solver should stop.
    pub(crate) fn record(&mut self, raw: Signal) -> Result<bool> {
        if raw.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                got: raw.shape(),
            });
        }
        self.step += 1;
        let mut reported = raw;
        if let Some(hook) = self.hook {
            if self.step >= 4 {
                let window = IterateWindow::new(
                    &self.history[0],
                    &self.history[1],
                    &self.history[2],
                    reported.data(),
                )?;
                let combined = accelerate(&window, self.shape, &hook.accel)?;
                match hook.refresh {
                    RefreshMode::Feedback => {
                        reported = Signal::from_shape(self.shape, combined)?;
                    }
                    RefreshMode::ReportOnly => {
                        let plain = reported;
                        self.push_history(plain.data().to_vec());
                        self.running = plain;
                        let accelerated = Signal::from_shape(self.shape, combined)?;
                        return self.report(accelerated);
                    }
                }
            }
        }
        self.push_history(reported.data().to_vec());
        self.running = reported.clone();
        self.report(reported)
    }

    fn push_history(&mut self, data: Vec<f64>) {
        if self.history.len() == 3 {
            self.history.pop_front();
        }
        self.history.push_back(data);
    }

    fn report(&mut self, reported: Signal) -> Result<bool> {
        let mut keep_going = true;
        if let Some(r) = self.reference {
            let e = r.l2_distance(&reported)?;
            let err0 = self.err0.expect("err0 set with reference");
            if err0 > 0.0 && e > DIVERGENCE_FACTOR * err0 {
                self.diverged_at = Some(self.trace.len());
                keep_going = false;
            }
            self.errors.as_mut().expect("errors set with reference").push(e);
        }
        self.trace.push(reported);
        Ok(keep_going)
    }

    pub(crate) fn finish(self) -> SolverRun {
        SolverRun {
            trace: self.trace,
            error_norms: self.errors,
            diverged_at: self.diverged_at,
        }
    }
}
