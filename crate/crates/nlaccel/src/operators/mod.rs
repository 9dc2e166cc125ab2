//! Linear signal distortions and the transforms they are built from.
//!
//! A [`LinearDistortion`] models the degradation `G` that an iterative
//! recovery method repeatedly re-applies: sample loss, band-limitation,
//! smoothing, scaling, or compositions of those.

pub mod fourier;
mod pinv;

pub use pinv::PseudoInverseProjector;

use crate::error::{Error, Result};
use crate::signal::{Shape, Signal};

/// Keep/drop pattern over a fixed shape. Dropped samples are zeroed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplingMask {
    shape: Shape,
    keep: Vec<bool>,
}

impl SamplingMask {
    pub fn new(shape: Shape, keep: Vec<bool>) -> Result<Self> {
        if keep.len() != shape.len() {
            return Err(Error::invalid(
                "keep",
                format!("{} flags for shape {shape:?}", keep.len()),
            ));
        }
        Ok(SamplingMask { shape, keep })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn keep_flags(&self) -> &[bool] {
        &self.keep
    }

    pub fn kept_indices(&self) -> Vec<usize> {
        self.keep
            .iter()
            .enumerate()
            .filter_map(|(i, &k)| k.then_some(i))
            .collect()
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        if x.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                got: x.shape(),
            });
        }
        let data = x
            .data()
            .iter()
            .zip(&self.keep)
            .map(|(&v, &k)| if k { v } else { 0.0 })
            .collect();
        Signal::from_shape(self.shape, data)
    }
}

/// Ideal low-pass filter in the DFT domain.
///
/// A bin survives when its alias-free frequency index (`min(k, L - k)` along
/// each axis) is at most the per-axis band, so the passband of a length-`L`
/// axis with band `B` is `{0..=B} ∪ {L-B..L-1}`. Applying the filter twice
/// equals applying it once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowPassDftFilter {
    shape: Shape,
    band_rows: usize,
    band_cols: usize,
}

impl LowPassDftFilter {
    pub fn new_1d(len: usize, band: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::invalid("len", "must be positive"));
        }
        if band > len / 2 {
            return Err(Error::invalid(
                "band",
                format!("band {band} exceeds len/2 = {}", len / 2),
            ));
        }
        Ok(LowPassDftFilter {
            shape: Shape::OneD(len),
            band_rows: 0,
            band_cols: band,
        })
    }

    pub fn new_2d(rows: usize, cols: usize, band_rows: usize, band_cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("shape", "must be non-empty"));
        }
        if band_rows > rows / 2 {
            return Err(Error::invalid(
                "band_rows",
                format!("band {band_rows} exceeds rows/2 = {}", rows / 2),
            ));
        }
        if band_cols > cols / 2 {
            return Err(Error::invalid(
                "band_cols",
                format!("band {band_cols} exceeds cols/2 = {}", cols / 2),
            ));
        }
        Ok(LowPassDftFilter {
            shape: Shape::TwoD { rows, cols },
            band_rows,
            band_cols,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        if x.shape() != self.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                got: x.shape(),
            });
        }
        match self.shape {
            Shape::OneD(_) => {
                let mut spectrum = fourier::dft_forward(x.data());
                fourier::truncate_band(&mut spectrum, self.band_cols);
                Ok(Signal::new_1d(fourier::dft_inverse_real(spectrum)))
            }
            Shape::TwoD { rows, cols } => {
                let mut spectrum = fourier::dft2_forward(rows, cols, x.data());
                for r in 0..rows {
                    let keep_row = fourier::canonical_bin(r, rows) <= self.band_rows;
                    for c in 0..cols {
                        let keep = keep_row && fourier::canonical_bin(c, cols) <= self.band_cols;
                        if !keep {
                            spectrum[r * cols + c] = rustfft::num_complex::Complex64::new(0.0, 0.0);
                        }
                    }
                }
                Signal::new_2d(rows, cols, fourier::dft2_inverse_real(rows, cols, spectrum))
            }
        }
    }
}

/// Normalized Gaussian smoothing kernel applied by circular convolution,
/// separably along each axis. Circular wrap-around plus the unit kernel sum
/// make the sample mean invariant under smoothing.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSmoother {
    sigma: f64,
    radius: usize,
    kernel: Vec<f64>,
}

impl GaussianSmoother {
    /// Kernel radius defaults to `ceil(3 sigma)`.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        Self::with_radius(sigma, (3.0 * sigma).ceil() as usize)
    }

    pub fn with_radius(sigma: f64, radius: usize) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(Error::invalid("sigma", "must be positive"));
        }
        let mut kernel = Vec::with_capacity(2 * radius + 1);
        for i in -(radius as isize)..=(radius as isize) {
            let t = i as f64 / sigma;
            kernel.push((-0.5 * t * t).exp());
        }
        let sum: f64 = kernel.iter().sum();
        for k in kernel.iter_mut() {
            *k /= sum;
        }
        Ok(GaussianSmoother {
            sigma,
            radius,
            kernel,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    fn convolve_line(&self, line: &[f64], out: &mut [f64]) {
        let n = line.len() as isize;
        let r = self.radius as isize;
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &w) in self.kernel.iter().enumerate() {
                let idx = (i as isize + j as isize - r).rem_euclid(n) as usize;
                acc += w * line[idx];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        if x.is_empty() {
            return Err(Error::invalid("x", "must be non-empty"));
        }
        match x.shape() {
            Shape::OneD(n) => {
                let mut out = vec![0.0; n];
                self.convolve_line(x.data(), &mut out);
                Ok(Signal::new_1d(out))
            }
            Shape::TwoD { rows, cols } => {
                let mut tmp = vec![0.0; rows * cols];
                for r in 0..rows {
                    self.convolve_line(
                        &x.data()[r * cols..(r + 1) * cols],
                        &mut tmp[r * cols..(r + 1) * cols],
                    );
                }
                let mut out = vec![0.0; rows * cols];
                let mut col_in = vec![0.0; rows];
                let mut col_out = vec![0.0; rows];
                for c in 0..cols {
                    for r in 0..rows {
                        col_in[r] = tmp[r * cols + c];
                    }
                    self.convolve_line(&col_in, &mut col_out);
                    for r in 0..rows {
                        out[r * cols + c] = col_out[r];
                    }
                }
                Signal::new_2d(rows, cols, out)
            }
        }
    }
}

/// A linear degradation model.
///
/// `Compose(f, g)` applies right-to-left: `(f ∘ g)(x) = f(g(x))`.
#[derive(Clone, Debug)]
pub enum LinearDistortion {
    Identity,
    Scale(f64),
    Mask(SamplingMask),
    LowPass(LowPassDftFilter),
    Smooth(GaussianSmoother),
    Compose(Box<LinearDistortion>, Box<LinearDistortion>),
}

impl LinearDistortion {
    pub fn compose(outer: LinearDistortion, inner: LinearDistortion) -> LinearDistortion {
        LinearDistortion::Compose(Box::new(outer), Box::new(inner))
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        match self {
            LinearDistortion::Identity => Ok(x.clone()),
            LinearDistortion::Scale(c) => {
                let mut y = x.clone();
                for v in y.data_mut() {
                    *v *= c;
                }
                Ok(y)
            }
            LinearDistortion::Mask(m) => m.apply(x),
            LinearDistortion::LowPass(f) => f.apply(x),
            LinearDistortion::Smooth(s) => s.apply(x),
            LinearDistortion::Compose(outer, inner) => outer.apply(&inner.apply(x)?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(n: usize, scale: f64) -> Vec<f64> {
        (0..n)
            .map(|i| scale * (((i * 2654435761) % 10007) as f64 / 10007.0 - 0.5))
            .collect()
    }

    fn mask_1d(n: usize, period: usize) -> SamplingMask {
        let keep = (0..n).map(|i| i % period != 0).collect();
        SamplingMask::new(Shape::OneD(n), keep).unwrap()
    }

    #[test]
    fn mask_zeroes_dropped_samples_only() {
        let m = mask_1d(10, 3);
        let x = Signal::new_1d((0..10).map(|i| i as f64 + 1.0).collect());
        let y = m.apply(&x).unwrap();
        for i in 0..10 {
            let want = if i % 3 == 0 { 0.0 } else { i as f64 + 1.0 };
            assert_eq!(y.data()[i], want);
        }
        assert_eq!(m.kept_count(), 6);
    }

    #[test]
    fn lowpass_band_validation() {
        assert!(LowPassDftFilter::new_1d(10, 5).is_ok());
        assert!(LowPassDftFilter::new_1d(10, 6).is_err());
        assert!(LowPassDftFilter::new_2d(8, 6, 4, 4).is_err());
    }

    #[test]
    fn lowpass_is_idempotent() {
        let f = LowPassDftFilter::new_1d(64, 9).unwrap();
        let x = Signal::new_1d(noise(64, 2.0));
        let once = f.apply(&x).unwrap();
        let twice = f.apply(&once).unwrap();
        assert!(once.l2_distance(&twice).unwrap() < 1e-12 * once.l2_norm().max(1.0));
    }

    #[test]
    fn lowpass_keeps_inband_and_kills_outband_tones() {
        let n = 48;
        let f = LowPassDftFilter::new_1d(n, 5).unwrap();
        let tone = |freq: usize| {
            Signal::new_1d(
                (0..n)
                    .map(|t| {
                        (2.0 * std::f64::consts::PI * freq as f64 * t as f64 / n as f64).cos()
                    })
                    .collect(),
            )
        };
        let kept = f.apply(&tone(4)).unwrap();
        assert!(kept.l2_distance(&tone(4)).unwrap() < 1e-10);
        let killed = f.apply(&tone(11)).unwrap();
        assert!(killed.l2_norm() < 1e-10);
    }

    #[test]
    fn lowpass_2d_passband_is_separable() {
        let (rows, cols) = (16, 12);
        let f = LowPassDftFilter::new_2d(rows, cols, 3, 2).unwrap();
        let tone = |fr: usize, fc: usize| {
            let data = (0..rows * cols)
                .map(|i| {
                    let (r, c) = (i / cols, i % cols);
                    (2.0 * std::f64::consts::PI
                        * (fr as f64 * r as f64 / rows as f64
                            + fc as f64 * c as f64 / cols as f64))
                        .cos()
                })
                .collect();
            Signal::new_2d(rows, cols, data).unwrap()
        };
        let inband = tone(3, 2);
        assert!(f.apply(&inband).unwrap().l2_distance(&inband).unwrap() < 1e-9);
        // Row frequency passes alone but the column frequency is out of band.
        let outband = tone(2, 5);
        assert!(f.apply(&outband).unwrap().l2_norm() < 1e-9);
    }

    #[test]
    fn smoother_preserves_mean_exactly() {
        let s = GaussianSmoother::new(2.0).unwrap();
        let x = Signal::new_1d(noise(37, 10.0));
        let y = s.apply(&x).unwrap();
        let mean_in: f64 = x.data().iter().sum::<f64>() / 37.0;
        let mean_out: f64 = y.data().iter().sum::<f64>() / 37.0;
        assert!((mean_in - mean_out).abs() <= 1e-12 * mean_in.abs().max(1.0));

        let img = Signal::new_2d(9, 11, noise(99, 200.0)).unwrap();
        let smoothed = s.apply(&img).unwrap();
        let m_in: f64 = img.data().iter().sum::<f64>() / 99.0;
        let m_out: f64 = smoothed.data().iter().sum::<f64>() / 99.0;
        assert!((m_in - m_out).abs() <= 1e-12 * m_in.abs().max(1.0));
    }

    #[test]
    fn smoother_default_radius_is_three_sigma() {
        let s = GaussianSmoother::new(2.0).unwrap();
        assert_eq!(s.radius(), 6);
        let s = GaussianSmoother::new(1.5).unwrap();
        assert_eq!(s.radius(), 5);
    }

    #[test]
    fn smoother_flattens_constants() {
        let s = GaussianSmoother::new(1.0).unwrap();
        let x = Signal::new_1d(vec![3.25; 20]);
        let y = s.apply(&x).unwrap();
        for &v in y.data() {
            assert!((v - 3.25).abs() < 1e-13);
        }
    }

    #[test]
    fn distortions_are_linear() {
        let n = 40;
        let g = LinearDistortion::compose(
            LinearDistortion::Smooth(GaussianSmoother::new(1.2).unwrap()),
            LinearDistortion::compose(
                LinearDistortion::Mask(mask_1d(n, 4)),
                LinearDistortion::Scale(1.7),
            ),
        );
        let x = Signal::new_1d(noise(n, 1.0));
        let y = Signal::new_1d(noise(n, 3.0).into_iter().rev().collect());
        let (a, b) = (2.5, -0.75);
        let mut combo = Signal::new_1d(vec![0.0; n]);
        for i in 0..n {
            combo.data_mut()[i] = a * x.data()[i] + b * y.data()[i];
        }
        let lhs = g.apply(&combo).unwrap();
        let gx = g.apply(&x).unwrap();
        let gy = g.apply(&y).unwrap();
        for i in 0..n {
            let rhs = a * gx.data()[i] + b * gy.data()[i];
            assert!((lhs.data()[i] - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_applies_right_to_left() {
        let n = 6;
        let mask = SamplingMask::new(Shape::OneD(n), vec![true, false, true, false, true, false])
            .unwrap();
        // Scale then mask: masked entries are zero.
        let g = LinearDistortion::compose(
            LinearDistortion::Mask(mask.clone()),
            LinearDistortion::Scale(2.0),
        );
        let x = Signal::new_1d(vec![1.0; n]);
        let y = g.apply(&x).unwrap();
        assert_eq!(y.data(), &[2.0, 0.0, 2.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = mask_1d(10, 2);
        let img = Signal::new_2d(2, 5, vec![1.0; 10]).unwrap();
        assert!(matches!(
            m.apply(&img),
            Err(crate::error::Error::ShapeMismatch { .. })
        ));
    }
}
