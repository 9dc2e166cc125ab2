//! Seeded synthesis of test signals, masks, matrices and images.
//!
//! All generators draw from a [`RandomStream`], a `(seed, stream)` pair
//! backed by ChaCha8. Streams with the same seed are statistically
//! independent, so per-trial substreams give identical results whether
//! trials run serially or in parallel.

mod pgm;

pub use pgm::{load_pgm, save_pgm};

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::operators::fourier::real_fourier_basis;
use crate::operators::{LowPassDftFilter, SamplingMask};
use crate::signal::{Shape, Signal};

/// A reproducible randomness source: one ChaCha8 stream of a fixed seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RandomStream { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// White Gaussian noise shaped to a low-pass band, at unit RMS.
///
/// The band is `B = floor(len / (2 * osr))` DFT bins per side; `osr` values
/// so large that `B` would be zero are rejected.
pub fn gen_lp_signal(len: usize, osr: usize, stream: &RandomStream) -> Result<Signal> {
    if len < 2 {
        return Err(Error::invalid("len", "need at least 2 samples"));
    }
    if osr == 0 {
        return Err(Error::invalid("osr", "must be at least 1"));
    }
    let band = len / (2 * osr);
    if band == 0 {
        return Err(Error::invalid(
            "osr",
            format!("len {len} over-sampled {osr}x leaves an empty band"),
        ));
    }
    let mut rng = stream.rng();
    let noise: Vec<f64> = (0..len).map(|_| standard_normal(&mut rng)).collect();
    let filter = LowPassDftFilter::new_1d(len, band)?;
    let mut shaped = filter.apply(&Signal::new_1d(noise))?;
    let rms = (shaped.data().iter().map(|v| v * v).sum::<f64>() / len as f64).sqrt();
    if rms == 0.0 {
        return Err(Error::Numerical("generated signal is identically zero".into()));
    }
    for v in shaped.data_mut() {
        *v /= rms;
    }
    Ok(shaped)
}

/// Random sampling mask: each position is dropped independently with
/// probability `loss_rate`.
pub fn gen_mask(shape: Shape, loss_rate: f64, stream: &RandomStream) -> Result<SamplingMask> {
    if !(0.0..1.0).contains(&loss_rate) {
        return Err(Error::invalid("loss_rate", "must lie in [0, 1)"));
    }
    let mut rng = stream.rng();
    let keep: Vec<bool> = (0..shape.len()).map(|_| !rng.random_bool(loss_rate)).collect();
    SamplingMask::new(shape, keep)
}

/// Basis in which a sparse signal's coefficients live.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SparsityDomain {
    /// Coefficients are the time samples themselves.
    Identity,
    /// Coefficients in the orthogonal real Fourier basis, i.e. DFT-domain
    /// sparsity with conjugate symmetry built in, so time signals are real.
    RealFourier,
}

/// Parameters for [`gen_sparse_signal`].
#[derive(Clone, Copy, Debug)]
pub struct SparseSpec {
    pub len: usize,
    /// Probability that a coefficient belongs to the support.
    pub p_nz: f64,
    /// Standard deviation of off-support coefficients (0 for exact sparsity).
    pub sigma_off: f64,
    pub domain: SparsityDomain,
}

/// A sparse signal: its coefficient vector and the time-domain samples.
#[derive(Clone, Debug)]
pub struct SparseSignal {
    pub coeffs: Vec<f64>,
    pub time: Signal,
}

/// Draws support positions Bernoulli(`p_nz`) with unit-normal amplitudes;
/// off-support entries are `N(0, sigma_off^2)`.
pub fn gen_sparse_signal(spec: &SparseSpec, stream: &RandomStream) -> Result<SparseSignal> {
    if spec.len == 0 {
        return Err(Error::invalid("len", "must be positive"));
    }
    if !(0.0..=1.0).contains(&spec.p_nz) {
        return Err(Error::invalid("p_nz", "must lie in [0, 1]"));
    }
    if !(spec.sigma_off >= 0.0) {
        return Err(Error::invalid("sigma_off", "must be non-negative"));
    }
    let mut rng = stream.rng();
    let coeffs: Vec<f64> = (0..spec.len)
        .map(|_| {
            if rng.random_bool(spec.p_nz) {
                standard_normal(&mut rng)
            } else if spec.sigma_off > 0.0 {
                spec.sigma_off * standard_normal(&mut rng)
            } else {
                0.0
            }
        })
        .collect();
    let time = match spec.domain {
        SparsityDomain::Identity => Signal::new_1d(coeffs.clone()),
        SparsityDomain::RealFourier => {
            let basis = real_fourier_basis(spec.len);
            let c = nalgebra::DVector::from_column_slice(&coeffs);
            Signal::new_1d((basis * c).as_slice().to_vec())
        }
    };
    Ok(SparseSignal { coeffs, time })
}

/// Measurement matrix with i.i.d. `N(0, 1/rows)` entries, drawn row-major.
pub fn gen_gaussian_matrix(rows: usize, cols: usize, stream: &RandomStream) -> Result<DMatrix<f64>> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("rows/cols", "must be positive"));
    }
    let mut rng = stream.rng();
    let scale = 1.0 / (rows as f64).sqrt();
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(scale * standard_normal(&mut rng));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &data))
}

fn bilinear_lattice(
    rows: usize,
    cols: usize,
    cell: usize,
    amp: f64,
    rng: &mut ChaCha8Rng,
    acc: &mut [f64],
) {
    let lat_rows = rows / cell + 2;
    let lat_cols = cols / cell + 2;
    let lattice: Vec<f64> = (0..lat_rows * lat_cols)
        .map(|_| rng.random::<f64>() * 2.0 - 1.0)
        .collect();
    for r in 0..rows {
        let fr = r as f64 / cell as f64;
        let r0 = fr.floor() as usize;
        let tr = fr - r0 as f64;
        for c in 0..cols {
            let fc = c as f64 / cell as f64;
            let c0 = fc.floor() as usize;
            let tc = fc - c0 as f64;
            let v00 = lattice[r0 * lat_cols + c0];
            let v01 = lattice[r0 * lat_cols + c0 + 1];
            let v10 = lattice[(r0 + 1) * lat_cols + c0];
            let v11 = lattice[(r0 + 1) * lat_cols + c0 + 1];
            let top = v00 + (v01 - v00) * tc;
            let bot = v10 + (v11 - v10) * tc;
            acc[r * cols + c] += amp * (top + (bot - top) * tr);
        }
    }
}

/// Procedural grayscale test image in `[0, 255]`: layered value noise for
/// texture plus a few hard-edged rectangles and discs for structure. Pixel
/// values are rounded to integers so PGM round trips are exact.
pub fn gen_texture_image(rows: usize, cols: usize, stream: &RandomStream) -> Result<Signal> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("rows/cols", "must be positive"));
    }
    let mut rng = stream.rng();
    let mut field = vec![0.0; rows * cols];
    for (cell, amp) in [(32usize, 1.0), (16, 0.6), (8, 0.35), (4, 0.2)] {
        bilinear_lattice(rows, cols, cell, amp, &mut rng, &mut field);
    }
    let n_shapes = 4 + (rows * cols) / 16384;
    for _ in 0..n_shapes {
        let level = rng.random::<f64>() * 2.0 - 1.0;
        let cr = rng.random_range(0..rows);
        let cc = rng.random_range(0..cols);
        let extent = 3 + rng.random_range(0..(rows.min(cols) / 3).max(1));
        let disc = rng.random_bool(0.5);
        let r_lo = cr.saturating_sub(extent);
        let r_hi = (cr + extent).min(rows - 1);
        let c_lo = cc.saturating_sub(extent);
        let c_hi = (cc + extent).min(cols - 1);
        for r in r_lo..=r_hi {
            for c in c_lo..=c_hi {
                let inside = if disc {
                    let dr = r as f64 - cr as f64;
                    let dc = c as f64 - cc as f64;
                    dr * dr + dc * dc <= (extent * extent) as f64
                } else {
                    true
                };
                if inside {
                    let i = r * cols + c;
                    field[i] = 0.7 * level + 0.3 * field[i];
                }
            }
        }
    }
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let data: Vec<f64> = if hi > lo {
        field
            .iter()
            .map(|v| (255.0 * (v - lo) / (hi - lo)).round())
            .collect()
    } else {
        vec![128.0; rows * cols]
    };
    Signal::new_2d(rows, cols, data)
}
