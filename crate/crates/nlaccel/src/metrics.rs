//! Signal and image quality measures, and the tabular report they feed.

use std::io::Write;

use crate::error::{Error, Result};
use crate::signal::{Shape, Signal};

/// Cap reported for exact (or numerically exact) matches, in dB.
pub const QUALITY_CAP_DB: f64 = 300.0;

/// Standard five-scale weights for [`ms_ssim`].
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_L: f64 = 255.0;

/// Signal-to-noise ratio of `estimate` against `reference`, in dB:
/// `10 log10(||ref||^2 / ||ref - est||^2)`, capped at [`QUALITY_CAP_DB`].
pub fn snr_db(reference: &Signal, estimate: &Signal) -> Result<f64> {
    if reference.shape() != estimate.shape() {
        return Err(Error::ShapeMismatch {
            expected: reference.shape(),
            got: estimate.shape(),
        });
    }
    let signal_energy: f64 = reference.data().iter().map(|v| v * v).sum();
    if signal_energy == 0.0 {
        return Err(Error::invalid("reference", "zero signal has no SNR"));
    }
    let noise_energy: f64 = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(r, e)| (r - e) * (r - e))
        .sum();
    if noise_energy == 0.0 {
        return Ok(QUALITY_CAP_DB);
    }
    Ok((10.0 * (signal_energy / noise_energy).log10()).min(QUALITY_CAP_DB))
}

/// Peak signal-to-noise ratio in dB against a given peak value
/// (255 for 8-bit images), capped at [`QUALITY_CAP_DB`].
pub fn psnr_db(reference: &Signal, estimate: &Signal, max_val: f64) -> Result<f64> {
    if reference.shape() != estimate.shape() {
        return Err(Error::ShapeMismatch {
            expected: reference.shape(),
            got: estimate.shape(),
        });
    }
    if !(max_val > 0.0) {
        return Err(Error::invalid("max_val", "must be positive"));
    }
    let n = reference.len();
    if n == 0 {
        return Err(Error::invalid("reference", "must be non-empty"));
    }
    let mse: f64 = reference
        .data()
        .iter()
        .zip(estimate.data())
        .map(|(r, e)| (r - e) * (r - e))
        .sum::<f64>()
        / n as f64;
    if mse == 0.0 {
        return Ok(QUALITY_CAP_DB);
    }
    Ok((10.0 * (max_val * max_val / mse).log10()).min(QUALITY_CAP_DB))
}

fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as isize;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let t = (i as isize - c) as f64 / SSIM_SIGMA;
        *v = (-0.5 * t * t).exp();
        sum += *v;
    }
    for v in k.iter_mut() {
        *v /= sum;
    }
    k
}

/// Separable valid-mode filtering with the 11-tap Gaussian window.
/// Output dims are `(h - 10) x (w - 10)`.
fn valid_gauss_filter(img: &[f64], h: usize, w: usize, k: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - (SSIM_WINDOW - 1);
    let oh = h - (SSIM_WINDOW - 1);
    let mut horiz = vec![0.0; h * ow];
    for r in 0..h {
        for c in 0..ow {
            let mut acc = 0.0;
            for (j, &kv) in k.iter().enumerate() {
                acc += kv * img[r * w + c + j];
            }
            horiz[r * ow + c] = acc;
        }
    }
    let mut out = vec![0.0; oh * ow];
    for r in 0..oh {
        for c in 0..ow {
            let mut acc = 0.0;
            for (j, &kv) in k.iter().enumerate() {
                acc += kv * horiz[(r + j) * ow + c];
            }
            out[r * ow + c] = acc;
        }
    }
    out
}

fn image_dims(s: &Signal, name: &'static str) -> Result<(usize, usize)> {
    match s.shape() {
        Shape::TwoD { rows, cols } => Ok((rows, cols)),
        Shape::OneD(_) => Err(Error::invalid(name, "expected a 2-D image")),
    }
}

/// Mean SSIM map value and mean contrast-structure value over valid windows.
fn ssim_and_cs(a: &Signal, b: &Signal) -> Result<(f64, f64)> {
    let (h, w) = image_dims(a, "a")?;
    if b.shape() != a.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            got: b.shape(),
        });
    }
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::invalid(
            "a",
            format!("SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {h}x{w}"),
        ));
    }
    let k = gaussian_window();
    let pa = a.data();
    let pb = b.data();
    let sq_a: Vec<f64> = pa.iter().map(|v| v * v).collect();
    let sq_b: Vec<f64> = pb.iter().map(|v| v * v).collect();
    let ab: Vec<f64> = pa.iter().zip(pb).map(|(x, y)| x * y).collect();

    let mu_a = valid_gauss_filter(pa, h, w, &k);
    let mu_b = valid_gauss_filter(pb, h, w, &k);
    let e_aa = valid_gauss_filter(&sq_a, h, w, &k);
    let e_bb = valid_gauss_filter(&sq_b, h, w, &k);
    let e_ab = valid_gauss_filter(&ab, h, w, &k);

    let c1 = (SSIM_K1 * SSIM_L) * (SSIM_K1 * SSIM_L);
    let c2 = (SSIM_K2 * SSIM_L) * (SSIM_K2 * SSIM_L);
    let mut ssim_sum = 0.0;
    let mut cs_sum = 0.0;
    for i in 0..mu_a.len() {
        let (m1, m2) = (mu_a[i], mu_b[i]);
        let var_a = e_aa[i] - m1 * m1;
        let var_b = e_bb[i] - m2 * m2;
        let cov = e_ab[i] - m1 * m2;
        let l = (2.0 * m1 * m2 + c1) / (m1 * m1 + m2 * m2 + c1);
        let cs = (2.0 * cov + c2) / (var_a + var_b + c2);
        ssim_sum += l * cs;
        cs_sum += cs;
    }
    let n = mu_a.len() as f64;
    Ok((ssim_sum / n, cs_sum / n))
}

/// Structural similarity over an 8-bit value range, using an 11x11 Gaussian
/// window (sigma 1.5) in valid mode. Both images must be at least 11x11.
pub fn ssim(a: &Signal, b: &Signal) -> Result<f64> {
    Ok(ssim_and_cs(a, b)?.0)
}

/// Halves both dimensions by 2x2 mean pooling, dropping odd remainders.
fn downsample_2x(img: &Signal) -> Result<Signal> {
    let (h, w) = image_dims(img, "img")?;
    let (oh, ow) = (h / 2, w / 2);
    let mut out = vec![0.0; oh * ow];
    let data = img.data();
    for r in 0..oh {
        for c in 0..ow {
            let i = 2 * r * w + 2 * c;
            out[r * ow + c] = 0.25 * (data[i] + data[i + 1] + data[i + w] + data[i + w + 1]);
        }
    }
    Signal::new_2d(oh, ow, out)
}

/// Multi-scale SSIM with one weight per scale.
///
/// Scale `j` contributes its mean contrast-structure value raised to
/// `weights[j]`; the coarsest scale contributes its full SSIM instead. Both
/// factors are clamped to zero from below before exponentiation. With a
/// single weight of 1 this reduces to plain [`ssim`].
pub fn ms_ssim_weighted(a: &Signal, b: &Signal, weights: &[f64]) -> Result<f64> {
    if weights.is_empty() {
        return Err(Error::invalid("weights", "need at least one scale"));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::invalid("weights", "must be finite"));
    }
    let scales = weights.len();
    let (h, w) = image_dims(a, "a")?;
    let shrink = 1usize << (scales - 1);
    if (h / shrink) < SSIM_WINDOW || (w / shrink) < SSIM_WINDOW {
        return Err(Error::invalid(
            "a",
            format!(
                "{h}x{w} image is too small for {scales} scales (needs {} per axis)",
                SSIM_WINDOW * shrink
            ),
        ));
    }
    let mut cur_a = a.clone();
    let mut cur_b = b.clone();
    let mut product = 1.0;
    for (j, &weight) in weights.iter().enumerate() {
        let (s, cs) = ssim_and_cs(&cur_a, &cur_b)?;
        if j + 1 == scales {
            product *= s.max(0.0).powf(weight);
        } else {
            product *= cs.max(0.0).powf(weight);
            cur_a = downsample_2x(&cur_a)?;
            cur_b = downsample_2x(&cur_b)?;
        }
    }
    Ok(product)
}

/// Five-scale MS-SSIM with the standard weights. Requires at least 176
/// pixels per axis so the coarsest scale still fits the 11x11 window.
pub fn ms_ssim(a: &Signal, b: &Signal) -> Result<f64> {
    ms_ssim_weighted(a, b, &MS_SSIM_WEIGHTS)
}

/// Column-oriented numeric table written as comma-separated text.
///
/// Values are printed with the shortest representation that round-trips, so
/// serialization is byte-deterministic for identical inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl QualityReport {
    pub fn new(columns: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::invalid("columns", "need at least one column"));
        }
        if columns.iter().any(|c| c.contains(',') || c.contains('\n')) {
            return Err(Error::invalid("columns", "names must not contain ',' or newlines"));
        }
        Ok(QualityReport {
            columns,
            rows: Vec::new(),
        })
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(
                "row",
                format!("{} values for {} columns", row.len(), self.columns.len()),
            ));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut first = true;
            for v in row {
                if !first {
                    write!(out, ",")?;
                }
                write!(out, "{v}")?;
                first = false;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }
}
