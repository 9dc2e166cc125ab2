//! Dense real signals in one or two dimensions.

use crate::error::{Error, Result};

/// Logical layout of a [`Signal`]: a flat sample vector or a row-major image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    OneD(usize),
    TwoD { rows: usize, cols: usize },
}

impl Shape {
    /// Total number of samples.
    pub fn len(&self) -> usize {
        match *self {
            Shape::OneD(n) => n,
            Shape::TwoD { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A real-valued signal together with its layout.
///
/// Two-dimensional data is stored row-major. All samples are `f64`; image
/// pipelines keep pixel values in `[0, 255]` by convention but the type does
/// not enforce a range.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    shape: Shape,
    data: Vec<f64>,
}

impl Signal {
    pub fn new_1d(data: Vec<f64>) -> Self {
        Signal {
            shape: Shape::OneD(data.len()),
            data,
        }
    }

    pub fn new_2d(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(
                "data",
                format!("{} samples cannot fill {rows}x{cols}", data.len()),
            ));
        }
        Ok(Signal {
            shape: Shape::TwoD { rows, cols },
            data,
        })
    }

    pub fn from_shape(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::invalid(
                "data",
                format!("{} samples for shape {shape:?}", data.len()),
            ));
        }
        Ok(Signal { shape, data })
    }

    pub fn zeros(shape: Shape) -> Self {
        Signal {
            shape,
            data: vec![0.0; shape.len()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance to another signal of the same shape.
    pub fn l2_distance(&self, other: &Signal) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                got: other.shape,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Smallest and largest sample, ignoring non-finite values.
    ///
    /// Returns `None` when no finite sample exists.
    pub fn finite_min_max(&self) -> Option<(f64, f64)> {
        let mut bounds: Option<(f64, f64)> = None;
        for &v in &self.data {
            if v.is_finite() {
                bounds = Some(match bounds {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
        bounds
    }
}
