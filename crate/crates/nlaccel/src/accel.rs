//! Nonlinear extrapolation of iterate sequences and its stabilizers.
//!
//! Given three successive iterates whose error decays (or grows) roughly
//! geometrically, the three-point NL step extrapolates the limit:
//!
//! ```text
//! NL(x1, x2, x3) = x3 - (x3 - x2)^2 / (x3 - 2 x2 + x1)
//! ```
//!
//! applied elementwise. For an exactly geometric sequence
//! `x_k = c + a r^k` the result is the limit `c` regardless of `r`. The
//! four-point MNL variant keeps two overlapping three-point windows and, per
//! element, uses the window with the larger second difference, which is the
//! better-conditioned denominator.
//!
//! Raw extrapolation output can be wild when the geometric model is a poor
//! fit, so a [`StabilizerPolicy`] optionally clamps values, substitutes the
//! newest iterate for out-of-range entries, or median-filters the result.

use crate::error::{Error, Result};
use crate::signal::Shape;

/// Four successive iterates, oldest first. All slices share one length.
pub struct IterateWindow<'a> {
    x0: &'a [f64],
    x1: &'a [f64],
    x2: &'a [f64],
    x3: &'a [f64],
}

impl<'a> IterateWindow<'a> {
    pub fn new(x0: &'a [f64], x1: &'a [f64], x2: &'a [f64], x3: &'a [f64]) -> Result<Self> {
        let n = x0.len();
        if n == 0 {
            return Err(Error::invalid("window", "iterates must be non-empty"));
        }
        if x1.len() != n || x2.len() != n || x3.len() != n {
            return Err(Error::invalid("window", "iterates must share one length"));
        }
        Ok(IterateWindow { x0, x1, x2, x3 })
    }

    pub fn len(&self) -> usize {
        self.x0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x0.is_empty()
    }

    /// Newest iterate; the fallback value wherever extrapolation is skipped.
    pub fn newest(&self) -> &'a [f64] {
        self.x3
    }
}

/// How the denominator guard is derived.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DenominatorEps {
    /// Fixed threshold.
    Absolute(f64),
    /// Multiple of the dynamic range (max - min) of the newest iterate.
    RangeRelative(f64),
}

impl DenominatorEps {
    pub fn resolve(&self, newest: &[f64]) -> f64 {
        match *self {
            DenominatorEps::Absolute(e) => e,
            DenominatorEps::RangeRelative(rel) => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &v in newest {
                    if v.is_finite() {
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                if hi > lo {
                    rel * (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }
}

impl Default for DenominatorEps {
    fn default() -> Self {
        DenominatorEps::RangeRelative(1e-12)
    }
}

/// Whether MNL picks its window per element or once for the whole vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowSelection {
    PerElement,
    WholeVector,
}

/// One post-processing stage for extrapolated iterates.
#[derive(Clone, Debug, PartialEq)]
pub enum StabilizerStage {
    /// Clamp into `[lo, hi]`. NaN input stays NaN; substitution is the stage
    /// that handles non-finite values.
    Clip { lo: f64, hi: f64 },
    /// Replace entries outside `[lo, hi]`, and non-finite entries, by the
    /// corresponding element of the newest iterate.
    Substitute { lo: f64, hi: f64 },
    /// Median filter with an odd window (`window` per axis; windows shrink at
    /// boundaries).
    Median { window: usize },
}

impl StabilizerStage {
    fn validate(&self) -> Result<()> {
        match *self {
            StabilizerStage::Clip { lo, hi } | StabilizerStage::Substitute { lo, hi } => {
                if !(lo < hi) {
                    return Err(Error::invalid("bounds", format!("need lo < hi, got [{lo}, {hi}]")));
                }
            }
            StabilizerStage::Median { window } => {
                if window < 3 || window % 2 == 0 {
                    return Err(Error::invalid("window", "must be odd and at least 3"));
                }
            }
        }
        Ok(())
    }
}

/// Ordered list of stabilizer stages, applied left to right.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StabilizerPolicy {
    stages: Vec<StabilizerStage>,
}

impl StabilizerPolicy {
    pub fn none() -> Self {
        StabilizerPolicy::default()
    }

    pub fn new(stages: Vec<StabilizerStage>) -> Result<Self> {
        for s in &stages {
            s.validate()?;
        }
        Ok(StabilizerPolicy { stages })
    }

    pub fn clip(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![StabilizerStage::Clip { lo, hi }])
    }

    pub fn substitute(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![StabilizerStage::Substitute { lo, hi }])
    }

    pub fn median(window: usize) -> Result<Self> {
        Self::new(vec![StabilizerStage::Median { window }])
    }

    pub fn stages(&self) -> &[StabilizerStage] {
        &self.stages
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }
}

/// Full configuration of one acceleration step.
#[derive(Clone, Debug)]
pub struct AccelConfig {
    pub eps: DenominatorEps,
    pub selection: WindowSelection,
    pub policy: StabilizerPolicy,
}

impl Default for AccelConfig {
    fn default() -> Self {
        AccelConfig {
            eps: DenominatorEps::default(),
            selection: WindowSelection::PerElement,
            policy: StabilizerPolicy::none(),
        }
    }
}

fn aitken(x2: f64, x3: f64, denom: f64) -> f64 {
    let d = x3 - x2;
    x3 - d * d / denom
}

/// Three-point NL extrapolation, elementwise.
///
/// Wherever the second difference `x3 - 2 x2 + x1` is at most `eps` in
/// magnitude the element falls back to `x3`.
pub fn nl_combine(x1: &[f64], x2: &[f64], x3: &[f64], eps: f64) -> Result<Vec<f64>> {
    let n = x1.len();
    if x2.len() != n || x3.len() != n {
        return Err(Error::invalid("x1..x3", "iterates must share one length"));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let denom = x3[i] - 2.0 * x2[i] + x1[i];
        out.push(if denom.abs() <= eps {
            x3[i]
        } else {
            aitken(x2[i], x3[i], denom)
        });
    }
    Ok(out)
}

/// Four-point MNL extrapolation.
///
/// Two second differences are formed per element: `s0 = x2 - 2 x1 + x0` for
/// the older window and `s1 = x3 - 2 x2 + x1` for the newer one. The window
/// with the larger `|s|` supplies the extrapolation; ties go to the newer
/// window. Elements where both differences are at most `eps` fall back to
/// `x3`. With [`WindowSelection::WholeVector`] the older/newer decision is
/// made once by comparing the max-norms of `s0` and `s1`.
pub fn mnl_combine(w: &IterateWindow, eps: f64, selection: WindowSelection) -> Vec<f64> {
    let n = w.len();
    let mut out = Vec::with_capacity(n);
    match selection {
        WindowSelection::PerElement => {
            for i in 0..n {
                let s0 = w.x2[i] - 2.0 * w.x1[i] + w.x0[i];
                let s1 = w.x3[i] - 2.0 * w.x2[i] + w.x1[i];
                out.push(if s0.abs().max(s1.abs()) <= eps {
                    w.x3[i]
                } else if s0.abs() <= s1.abs() {
                    aitken(w.x2[i], w.x3[i], s1)
                } else {
                    aitken(w.x1[i], w.x2[i], s0)
                });
            }
        }
        WindowSelection::WholeVector => {
            let mut max0 = 0.0f64;
            let mut max1 = 0.0f64;
            for i in 0..n {
                max0 = max0.max((w.x2[i] - 2.0 * w.x1[i] + w.x0[i]).abs());
                max1 = max1.max((w.x3[i] - 2.0 * w.x2[i] + w.x1[i]).abs());
            }
            let use_newer = max0 <= max1;
            for i in 0..n {
                let denom = if use_newer {
                    w.x3[i] - 2.0 * w.x2[i] + w.x1[i]
                } else {
                    w.x2[i] - 2.0 * w.x1[i] + w.x0[i]
                };
                out.push(if denom.abs() <= eps {
                    w.x3[i]
                } else if use_newer {
                    aitken(w.x2[i], w.x3[i], denom)
                } else {
                    aitken(w.x1[i], w.x2[i], denom)
                });
            }
        }
    }
    out
}

/// Median filter with shrinking windows at the boundaries.
///
/// `window` is the nominal odd width per axis; a 2-D signal uses the full
/// `window x window` neighborhood. Where the window extends past the signal
/// it is truncated, and even-sized truncated windows take the mean of the two
/// central order statistics.
pub fn median_filter(x: &[f64], shape: Shape, window: usize) -> Result<Vec<f64>> {
    if window < 3 || window % 2 == 0 {
        return Err(Error::invalid("window", "must be odd and at least 3"));
    }
    if x.len() != shape.len() {
        return Err(Error::invalid(
            "x",
            format!("{} samples for shape {shape:?}", x.len()),
        ));
    }
    let r = (window / 2) as isize;
    let median_of = |buf: &mut Vec<f64>| -> f64 {
        buf.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let n = buf.len();
        if n % 2 == 1 {
            buf[n / 2]
        } else {
            0.5 * (buf[n / 2 - 1] + buf[n / 2])
        }
    };
    let mut buf = Vec::with_capacity(window * window);
    match shape {
        Shape::OneD(n) => {
            let mut out = Vec::with_capacity(n);
            for i in 0..n as isize {
                buf.clear();
                for j in (i - r).max(0)..=(i + r).min(n as isize - 1) {
                    buf.push(x[j as usize]);
                }
                out.push(median_of(&mut buf));
            }
            Ok(out)
        }
        Shape::TwoD { rows, cols } => {
            let mut out = Vec::with_capacity(rows * cols);
            for i in 0..rows as isize {
                for j in 0..cols as isize {
                    buf.clear();
                    for di in (i - r).max(0)..=(i + r).min(rows as isize - 1) {
                        for dj in (j - r).max(0)..=(j + r).min(cols as isize - 1) {
                            buf.push(x[(di * cols as isize + dj) as usize]);
                        }
                    }
                    out.push(median_of(&mut buf));
                }
            }
            Ok(out)
        }
    }
}

/// Runs a candidate iterate through the policy's stages in order.
///
/// `window` supplies the newest raw iterate used by the substitution stage,
/// and `shape` gives the median stage its geometry.
pub fn stabilize(
    mut candidate: Vec<f64>,
    window: &IterateWindow,
    shape: Shape,
    policy: &StabilizerPolicy,
) -> Result<Vec<f64>> {
    if candidate.len() != window.len() {
        return Err(Error::invalid("candidate", "length mismatch with window"));
    }
    if candidate.len() != shape.len() {
        return Err(Error::invalid("candidate", "length mismatch with shape"));
    }
    for stage in policy.stages() {
        match *stage {
            StabilizerStage::Clip { lo, hi } => {
                for v in candidate.iter_mut() {
                    *v = v.clamp(lo, hi);
                }
            }
            StabilizerStage::Substitute { lo, hi } => {
                let newest = window.newest();
                for (v, &fallback) in candidate.iter_mut().zip(newest) {
                    if !v.is_finite() || *v < lo || *v > hi {
                        *v = fallback;
                    }
                }
            }
            StabilizerStage::Median { window: w } => {
                candidate = median_filter(&candidate, shape, w)?;
            }
        }
    }
    Ok(candidate)
}

/// One full acceleration step: MNL extrapolation followed by stabilization.
pub fn accelerate(w: &IterateWindow, shape: Shape, cfg: &AccelConfig) -> Result<Vec<f64>> {
    if w.len() != shape.len() {
        return Err(Error::invalid("window", "length mismatch with shape"));
    }
    let eps = cfg.eps.resolve(w.newest());
    let candidate = mnl_combine(w, eps, cfg.selection);
    stabilize(candidate, w, shape, &cfg.policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nl_scalar(x1: f64, x2: f64, x3: f64) -> f64 {
        nl_combine(&[x1], &[x2], &[x3], 0.0).unwrap()[0]
    }

    #[test]
    fn geometric_sequences_extrapolate_to_their_limit() {
        // x_k = 2 - 0.5^k: iterates 1.5, 1.75, 1.875 -> exactly 2.
        assert_eq!(nl_scalar(1.5, 1.75, 1.875), 2.0);
        // Growing ratio also lands on the fixed point of the recursion.
        // x_k = 1 + 3^k: 4, 10, 28 -> 1.
        assert_eq!(nl_scalar(4.0, 10.0, 28.0), 1.0);
        // Alternating ratio r = -0.6 around limit 5.
        let (c, a, r) = (5.0, 2.0, -0.6f64);
        let x = |k: i32| c + a * r.powi(k);
        let y = nl_scalar(x(1), x(2), x(3));
        assert!((y - c).abs() < 1e-12);
    }

    #[test]
    fn tiny_denominator_falls_back_to_newest() {
        // Arithmetic progression: second difference is zero.
        let y = nl_combine(&[1.0, 0.0], &[2.0, 0.0], &[3.0, 0.0], 1e-9).unwrap();
        assert_eq!(y, vec![3.0, 0.0]);
    }

    #[test]
    fn mnl_prefers_the_better_conditioned_window() {
        // Second differences: s0 = 1.2 + 1.8 - 2.8 = 0.2, s1 = 0.1; the older
        // window wins and extrapolates to 1.0.
        let w = IterateWindow::new(&[1.8], &[1.4], &[1.2], &[1.1]).unwrap();
        let y = mnl_combine(&w, 0.0, WindowSelection::PerElement);
        assert!((y[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mnl_matches_nl_when_the_newer_window_dominates() {
        // Geometric with r = 0.5 from 1: second differences shrink, so the
        // newer window has the smaller one; ties and smaller-s0 cases aside,
        // construct s0 < s1 explicitly.
        let w = IterateWindow::new(&[0.0], &[0.1], &[0.3], &[1.0]).unwrap();
        // s0 = 0.3 - 0.2 + 0.0 = 0.1, s1 = 1.0 - 0.6 + 0.1 = 0.5.
        let y = mnl_combine(&w, 0.0, WindowSelection::PerElement);
        let nl = nl_scalar(0.1, 0.3, 1.0);
        assert_eq!(y[0], nl);
    }

    #[test]
    fn mnl_whole_vector_uses_one_window_for_all_elements() {
        // Element 0 prefers the newer window, element 1 the older; the
        // max-norm comparison is driven by element 1 (s0 = 2, s1 = 0.5),
        // so whole-vector mode uses the older window everywhere.
        let x0 = [0.0, 0.0];
        let x1 = [0.1, 2.0];
        let x2 = [0.3, 6.0];
        let x3 = [1.0, 10.5];
        let w = IterateWindow::new(&x0, &x1, &x2, &x3).unwrap();
        let per = mnl_combine(&w, 0.0, WindowSelection::PerElement);
        let whole = mnl_combine(&w, 0.0, WindowSelection::WholeVector);
        // s0[1] = 6 - 4 + 0 = 2, s1[1] = 10.5 - 12 + 2 = 0.5.
        assert_ne!(per[0], whole[0]);
        assert_eq!(per[1], whole[1]);
        // Older window for element 0: aitken(0, 0.1, 0.3) over s0 = 0.1.
        let older = 0.3 - (0.3 - 0.1) * (0.3 - 0.1) / 0.1;
        assert!((whole[0] - older).abs() < 1e-12);
    }

    #[test]
    fn mnl_eps_fallback_keeps_newest() {
        let w = IterateWindow::new(&[7.0], &[7.0], &[7.0], &[7.0]).unwrap();
        let y = mnl_combine(&w, 1e-12, WindowSelection::PerElement);
        assert_eq!(y, vec![7.0]);
    }

    #[test]
    fn range_relative_eps_scales_with_dynamic_range() {
        let newest = [0.0, 128.0, 255.0];
        let eps = DenominatorEps::RangeRelative(1e-12).resolve(&newest);
        assert!((eps - 255.0e-12).abs() < 1e-24);
        assert_eq!(DenominatorEps::Absolute(0.5).resolve(&newest), 0.5);
        // Constant iterate: zero range, zero guard.
        assert_eq!(DenominatorEps::RangeRelative(1e-12).resolve(&[3.0; 4]), 0.0);
    }

    #[test]
    fn clip_clamps_and_substitute_replaces() {
        let x0 = [0.0, 0.0, 0.0, 0.0];
        let x1 = [1.0, 1.0, 1.0, 1.0];
        let x2 = [2.0, 2.0, 2.0, 2.0];
        let x3 = [3.0, 30.0, 200.0, 250.0];
        let w = IterateWindow::new(&x0, &x1, &x2, &x3).unwrap();
        let candidate = vec![-10.0, 300.0, f64::INFINITY, 100.0];

        let clipped = stabilize(
            candidate.clone(),
            &w,
            Shape::OneD(4),
            &StabilizerPolicy::clip(0.0, 255.0).unwrap(),
        )
        .unwrap();
        assert_eq!(clipped, vec![0.0, 255.0, 255.0, 100.0]);

        let substituted = stabilize(
            candidate,
            &w,
            Shape::OneD(4),
            &StabilizerPolicy::substitute(0.0, 255.0).unwrap(),
        )
        .unwrap();
        assert_eq!(substituted, vec![3.0, 30.0, 200.0, 100.0]);
    }

    #[test]
    fn median_filter_matches_hand_computed_example() {
        let y = median_filter(&[5.0, 1.0, 2.0, 9.0, 3.0], Shape::OneD(5), 3).unwrap();
        assert_eq!(y, vec![3.0, 2.0, 2.0, 3.0, 6.0]);
    }

    #[test]
    fn median_filter_2d_uses_square_neighborhoods() {
        // 3x3 image; center uses all nine samples, corners four.
        let img = [9.0, 2.0, 7.0, 4.0, 5.0, 6.0, 3.0, 8.0, 1.0];
        let y = median_filter(&img, Shape::TwoD { rows: 3, cols: 3 }, 3).unwrap();
        assert_eq!(y[4], 5.0);
        // Top-left corner: window {9, 2, 4, 5} -> (4 + 5) / 2.
        assert_eq!(y[0], 4.5);
    }

    #[test]
    fn median_filter_kills_isolated_spikes() {
        let mut x = vec![1.0; 21];
        x[10] = 1e9;
        let y = median_filter(&x, Shape::OneD(21), 3).unwrap();
        assert!(y.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn stages_apply_in_listed_order() {
        let x0 = [0.0; 3];
        let x1 = [0.0; 3];
        let x2 = [0.0; 3];
        let x3 = [0.0; 3];
        let w = IterateWindow::new(&x0, &x1, &x2, &x3).unwrap();
        let candidate = vec![0.0, 9.0, 0.0];
        // Clipping first caps the spike at 4, so the boundary windows
        // average {0, 4}. Filtering first leaves the raw 9 in those
        // windows and the clip only acts afterwards.
        let clip_then_median = StabilizerPolicy::new(vec![
            StabilizerStage::Clip { lo: 0.0, hi: 4.0 },
            StabilizerStage::Median { window: 3 },
        ])
        .unwrap();
        let median_then_clip = StabilizerPolicy::new(vec![
            StabilizerStage::Median { window: 3 },
            StabilizerStage::Clip { lo: 0.0, hi: 4.0 },
        ])
        .unwrap();
        let a = stabilize(candidate.clone(), &w, Shape::OneD(3), &clip_then_median).unwrap();
        let b = stabilize(candidate, &w, Shape::OneD(3), &median_then_clip).unwrap();
        assert_eq!(a, vec![2.0, 0.0, 2.0]);
        assert_eq!(b, vec![4.0, 0.0, 4.0]);
    }

    #[test]
    fn policy_validation_rejects_bad_stages() {
        assert!(StabilizerPolicy::clip(1.0, 1.0).is_err());
        assert!(StabilizerPolicy::substitute(2.0, -2.0).is_err());
        assert!(StabilizerPolicy::median(4).is_err());
        assert!(StabilizerPolicy::median(1).is_err());
        assert!(StabilizerPolicy::median(3).is_ok());
    }

    #[test]
    fn accelerate_runs_mnl_then_policy() {
        // Geometric per-element sequences with limit (2, -1).
        let x = |k: i32| {
            [
                2.0 - 0.5f64.powi(k),
                -1.0 + 2.0 * 0.25f64.powi(k),
            ]
        };
        let (x0, x1, x2, x3) = (x(0), x(1), x(2), x(3));
        let w = IterateWindow::new(&x0, &x1, &x2, &x3).unwrap();
        let cfg = AccelConfig {
            policy: StabilizerPolicy::clip(0.0, 10.0).unwrap(),
            ..AccelConfig::default()
        };
        let y = accelerate(&w, Shape::OneD(2), &cfg).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-12);
        // The true limit -1 violates the clip range and is clamped.
        assert_eq!(y[1], 0.0);
    }

    proptest! {
        /// The update form x3 - d^2/s equals the rational form
        /// (x3 x1 - x2^2) / (x3 + x1 - 2 x2) wherever both are well posed.
        #[test]
        fn update_and_rational_forms_agree(
            x1 in -1e3f64..1e3,
            d2 in -1e2f64..1e2,
            d3 in -1e2f64..1e2,
        ) {
            let x2 = x1 + d2;
            let x3 = x2 + d3;
            let s = x3 - 2.0 * x2 + x1;
            prop_assume!(s.abs() > 1e-6);
            let update = nl_scalar(x1, x2, x3);
            let rational = (x3 * x1 - x2 * x2) / s;
            let scale = update.abs().max(rational.abs()).max(1.0);
            prop_assert!((update - rational).abs() <= 1e-10 * scale,
                "update {update} vs rational {rational}");
        }

        /// NL commutes with affine maps: NL(a x + b) = a NL(x) + b.
        #[test]
        fn nl_is_affine_equivariant(
            x1 in -1e2f64..1e2,
            d2 in -1e1f64..1e1,
            d3 in -1e1f64..1e1,
            a in prop::sample::select(vec![-3.0f64, -0.5, 0.25, 2.0, 10.0]),
            b in -1e2f64..1e2,
        ) {
            let x2 = x1 + d2;
            let x3 = x2 + d3;
            let s = x3 - 2.0 * x2 + x1;
            prop_assume!(s.abs() > 1e-3);
            let direct = a * nl_scalar(x1, x2, x3) + b;
            let mapped = nl_scalar(a * x1 + b, a * x2 + b, a * x3 + b);
            let scale = direct.abs().max(mapped.abs()).max(1.0);
            prop_assert!((direct - mapped).abs() <= 1e-9 * scale,
                "direct {direct} vs mapped {mapped}");
        }

        /// MNL with both windows valid never picks the smaller denominator.
        #[test]
        fn mnl_divides_by_the_larger_second_difference(
            x0 in -1e2f64..1e2,
            d1 in -1e1f64..1e1,
            d2 in -1e1f64..1e1,
            d3 in -1e1f64..1e1,
        ) {
            let x1 = x0 + d1;
            let x2 = x1 + d2;
            let x3 = x2 + d3;
            let s0 = x2 - 2.0 * x1 + x0;
            let s1 = x3 - 2.0 * x2 + x1;
            prop_assume!(s0.abs() > 1e-6 && s1.abs() > 1e-6);
            let xs0 = [x0]; let xs1 = [x1]; let xs2 = [x2]; let xs3 = [x3];
            let w = IterateWindow::new(&xs0, &xs1, &xs2, &xs3).unwrap();
            let y = mnl_combine(&w, 0.0, WindowSelection::PerElement)[0];
            let newer = x3 - (x3 - x2) * (x3 - x2) / s1;
            let older = x2 - (x2 - x1) * (x2 - x1) / s0;
            let want = if s0.abs() <= s1.abs() { newer } else { older };
            prop_assert_eq!(y, want);
        }

        /// Geometric vectors extrapolate to their limit under MNL too.
        #[test]
        fn mnl_is_exact_on_geometric_sequences(
            c in -1e2f64..1e2,
            amp in prop::sample::select(vec![0.5f64, -2.0, 1.5, 0.01]),
            r in prop::sample::select(vec![0.5f64, -0.6, 0.9, 2.0, -1.5]),
        ) {
            let x = |k: i32| [c + amp * r.powi(k)];
            let (x0, x1, x2, x3) = (x(0), x(1), x(2), x(3));
            let w = IterateWindow::new(&x0, &x1, &x2, &x3).unwrap();
            let y = mnl_combine(&w, 0.0, WindowSelection::PerElement)[0];
            let scale = c.abs().max(1.0);
            prop_assert!((y - c).abs() <= 1e-8 * scale, "got {y}, want {c}");
        }
    }
}
