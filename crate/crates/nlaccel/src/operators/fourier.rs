//! FFT/DCT plumbing and the real Fourier basis.
//!
//! Planners are cached per thread so repeated transforms of the same length
//! reuse their twiddle tables even when runs execute on a rayon pool.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::DMatrix;
use rustdct::{DctPlanner, TransformType2And3};
use rustfft::{Fft, FftPlanner};

pub use rustfft::num_complex::Complex64;

thread_local! {
    static FFT_PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static DCT_PLANNER: RefCell<DctPlanner<f64>> = RefCell::new(DctPlanner::new());
}

fn plan_fft(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    FFT_PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

fn plan_dct2(len: usize) -> Arc<dyn TransformType2And3<f64>> {
    DCT_PLANNER.with(|p| p.borrow_mut().plan_dct2(len))
}

fn plan_dct3(len: usize) -> Arc<dyn TransformType2And3<f64>> {
    DCT_PLANNER.with(|p| p.borrow_mut().plan_dct3(len))
}

/// Forward DFT of a real sequence.
pub fn dft_forward(x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    if buf.len() > 1 {
        plan_fft(buf.len(), false).process(&mut buf);
    }
    buf
}

/// Inverse DFT, returning the real part of the normalized result.
///
/// Callers are expected to hand in conjugate-symmetric spectra; any residual
/// imaginary content is rounding noise and is dropped.
pub fn dft_inverse_real(mut spectrum: Vec<Complex64>) -> Vec<f64> {
    let n = spectrum.len();
    if n > 1 {
        plan_fft(n, true).process(&mut spectrum);
    }
    let scale = 1.0 / n as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

/// The alias-free frequency index of DFT bin `k` for length `n`: bins `k` and
/// `n - k` describe the same absolute frequency of a real signal.
pub fn canonical_bin(k: usize, n: usize) -> usize {
    k.min(n - k)
}

/// Zeroes every bin whose canonical frequency index exceeds `band`.
pub fn truncate_band(spectrum: &mut [Complex64], band: usize) {
    let n = spectrum.len();
    for (k, c) in spectrum.iter_mut().enumerate() {
        if canonical_bin(k, n) > band {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Row-major 2-D DFT.
pub fn dft2_forward(rows: usize, cols: usize, x: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    dft2_in_place(rows, cols, &mut buf, false);
    buf
}

/// Inverse of [`dft2_forward`], dropping rounding-level imaginary residue.
pub fn dft2_inverse_real(rows: usize, cols: usize, mut spectrum: Vec<Complex64>) -> Vec<f64> {
    dft2_in_place(rows, cols, &mut spectrum, true);
    let scale = 1.0 / (rows * cols) as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

fn dft2_in_place(rows: usize, cols: usize, buf: &mut [Complex64], inverse: bool) {
    assert_eq!(buf.len(), rows * cols);
    if cols > 1 {
        let fft = plan_fft(cols, inverse);
        for r in 0..rows {
            fft.process(&mut buf[r * cols..(r + 1) * cols]);
        }
    }
    if rows > 1 {
        let fft = plan_fft(rows, inverse);
        let mut col = vec![Complex64::new(0.0, 0.0); rows];
        for c in 0..cols {
            for r in 0..rows {
                col[r] = buf[r * cols + c];
            }
            fft.process(&mut col);
            for r in 0..rows {
                buf[r * cols + c] = col[r];
            }
        }
    }
}

/// Orthonormal DCT-II in place. Round-trips exactly with
/// [`dct_inverse_ortho`] and preserves the Euclidean norm.
pub fn dct_forward_ortho(x: &mut [f64]) {
    let n = x.len();
    if n == 0 {
        return;
    }
    if n == 1 {
        return;
    }
    plan_dct2(n).process_dct2(x);
    let scale = (2.0 / n as f64).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
    x[0] /= std::f64::consts::SQRT_2;
}

/// Orthonormal DCT-III in place, the inverse of [`dct_forward_ortho`].
pub fn dct_inverse_ortho(x: &mut [f64]) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    x[0] *= std::f64::consts::SQRT_2;
    plan_dct3(n).process_dct3(x);
    let scale = (2.0 / n as f64).sqrt();
    for v in x.iter_mut() {
        *v *= scale;
    }
}

/// Orthonormal 2-D DCT-II over a row-major image, rows first then columns.
pub fn dct2d_forward_ortho(rows: usize, cols: usize, x: &mut [f64]) {
    assert_eq!(x.len(), rows * cols);
    for r in 0..rows {
        dct_forward_ortho(&mut x[r * cols..(r + 1) * cols]);
    }
    let mut col = vec![0.0; rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = x[r * cols + c];
        }
        dct_forward_ortho(&mut col);
        for r in 0..rows {
            x[r * cols + c] = col[r];
        }
    }
}

/// Inverse of [`dct2d_forward_ortho`].
pub fn dct2d_inverse_ortho(rows: usize, cols: usize, x: &mut [f64]) {
    assert_eq!(x.len(), rows * cols);
    let mut col = vec![0.0; rows];
    for c in 0..cols {
        for r in 0..rows {
            col[r] = x[r * cols + c];
        }
        dct_inverse_ortho(&mut col);
        for r in 0..rows {
            x[r * cols + c] = col[r];
        }
    }
    for r in 0..rows {
        dct_inverse_ortho(&mut x[r * cols..(r + 1) * cols]);
    }
}

/// Orthogonal real Fourier basis of size `n`.
///
/// Column 0 is the constant vector; columns `2j - 1` and `2j` hold the
/// cosine/sine pair at frequency `j`; for even `n` the last column is the
/// alternating Nyquist vector. Sparsity in this basis is the real-signal
/// equivalent of conjugate-symmetric sparsity in the complex DFT.
pub fn real_fourier_basis(n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    for t in 0..n {
        m[(t, 0)] = inv_sqrt_n;
    }
    let amp = (2.0 / n as f64).sqrt();
    let mut col = 1;
    let mut j = 1;
    while 2 * j < n {
        for t in 0..n {
            let phase = 2.0 * std::f64::consts::PI * (j as f64) * (t as f64) / n as f64;
            m[(t, col)] = amp * phase.cos();
            m[(t, col + 1)] = amp * phase.sin();
        }
        col += 2;
        j += 1;
    }
    if n % 2 == 0 && n > 1 {
        for t in 0..n {
            m[(t, n - 1)] = if t % 2 == 0 { inv_sqrt_n } else { -inv_sqrt_n };
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64;
                    acc += Complex64::new(v * ang.cos(), v * ang.sin());
                }
                acc
            })
            .collect()
    }

    fn naive_dct2_ortho(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let c = if k == 0 {
                    (1.0 / n as f64).sqrt()
                } else {
                    (2.0 / n as f64).sqrt()
                };
                let sum: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(t, &v)| {
                        v * (std::f64::consts::PI * k as f64 * (2 * t + 1) as f64
                            / (2 * n) as f64)
                            .cos()
                    })
                    .sum();
                c * sum
            })
            .collect()
    }

    fn ramp(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i * 37 + 11) % 19) as f64 - 9.0).collect()
    }

    #[test]
    fn dft_matches_direct_summation() {
        let x = ramp(24);
        let fast = dft_forward(&x);
        let slow = naive_dft(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn dft_round_trip() {
        let x = ramp(63);
        let back = dft_inverse_real(dft_forward(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dct_matches_direct_summation_and_round_trips() {
        let x = ramp(20);
        let mut fast = x.clone();
        dct_forward_ortho(&mut fast);
        let slow = naive_dct2_ortho(&x);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        let norm_in: f64 = x.iter().map(|v| v * v).sum();
        let norm_out: f64 = fast.iter().map(|v| v * v).sum();
        assert!((norm_in - norm_out).abs() < 1e-9 * norm_in.max(1.0));
        dct_inverse_ortho(&mut fast);
        for (a, b) in x.iter().zip(&fast) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dct2d_round_trips_and_preserves_norm() {
        let (rows, cols) = (9, 14);
        let x = ramp(rows * cols);
        let mut y = x.clone();
        dct2d_forward_ortho(rows, cols, &mut y);
        let e_in: f64 = x.iter().map(|v| v * v).sum();
        let e_out: f64 = y.iter().map(|v| v * v).sum();
        assert!((e_in - e_out).abs() < 1e-9 * e_in);
        dct2d_inverse_ortho(rows, cols, &mut y);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dft2_round_trip() {
        let (rows, cols) = (8, 12);
        let x = ramp(rows * cols);
        let back = dft2_inverse_real(rows, cols, dft2_forward(rows, cols, &x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn real_fourier_basis_is_orthonormal() {
        for n in [1usize, 2, 5, 8, 9, 16] {
            let phi = real_fourier_basis(n);
            let gram = phi.transpose() * &phi;
            for r in 0..n {
                for c in 0..n {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!(
                        (gram[(r, c)] - want).abs() < 1e-12,
                        "n={n} gram[{r},{c}]={}",
                        gram[(r, c)]
                    );
                }
            }
        }
    }

    #[test]
    fn canonical_bin_folds_conjugate_pairs() {
        assert_eq!(canonical_bin(0, 16), 0);
        assert_eq!(canonical_bin(3, 16), 3);
        assert_eq!(canonical_bin(13, 16), 3);
        assert_eq!(canonical_bin(8, 16), 8);
    }
}
