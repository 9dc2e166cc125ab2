//! Nonlinear acceleration and stabilization for iterative signal recovery.
//!
//! The crate is organized around a small extrapolation kernel and the
//! iterative solvers it plugs into:
//!
//! * [`accel`] — the three-point nonlinear (NL) extrapolation step, its
//!   window-selecting variant (MNL), and the stabilizers (clipping,
//!   substitution, median filtering) that keep extrapolated iterates sane.
//! * [`operators`] — linear signal distortions (sampling masks, low-pass
//!   filters, smoothers), orthonormal transforms, and pseudo-inverse
//!   projection.
//! * [`solvers`] — iterative recovery methods (fixed-point iteration,
//!   thresholded variants, Chebyshev acceleration, smoothed-L0, IRLS,
//!   ADMM-LASSO) with an optional MNL hook.
//! * [`signals`] — seeded synthesis of test signals, masks, matrices and
//!   images, plus PGM I/O.
//! * [`metrics`] — SNR, PSNR, SSIM and MS-SSIM quality measures.
//! * [`convlab`] — a small laboratory for the one-dimensional error-recursion
//!   cases that predict when NL extrapolation contracts the error.
//! * [`cli`] — configuration structs and commands for the `nlaccel` binary.

pub mod accel;
pub mod cli;
pub mod convlab;
pub mod error;
pub mod metrics;
pub mod operators;
pub mod signal;
pub mod signals;
pub mod solvers;

pub use error::{Error, Result};
pub use signal::{Shape, Signal};
