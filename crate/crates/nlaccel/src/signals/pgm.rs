//! Reading and writing 8-bit PGM images (binary `P5` and ASCII `P2`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::Signal;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Cursor { bytes, pos: 0 }
    }

    fn fail<T>(&self, at: usize, reason: impl Into<String>) -> Result<T> {
        Err(Error::PgmParse {
            offset: at,
            reason: reason.into(),
        })
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn read_number(&mut self, what: &str) -> Result<(usize, u64)> {
        self.skip_separators();
        let start = self.pos;
        let mut value: u64 = 0;
        let mut any = false;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_digit() {
                any = true;
                value = value
                    .saturating_mul(10)
                    .saturating_add(u64::from(b - b'0'));
                self.pos += 1;
            } else {
                break;
            }
        }
        if !any {
            return self.fail(start, format!("expected {what}"));
        }
        Ok((start, value))
    }
}

/// Loads a PGM file. Both the binary and ASCII variants are accepted, with
/// comments anywhere in the header; only 8-bit files (`maxval <= 255`) are
/// supported. Malformed input is reported with the byte offset of the
/// problem.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<Signal> {
    let bytes = fs::read(path)?;
    let mut cur = Cursor::new(&bytes);
    cur.skip_separators();
    let binary = match bytes.get(cur.pos..cur.pos + 2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return cur.fail(cur.pos, "expected magic 'P5' or 'P2'"),
    };
    cur.pos += 2;
    let (_, width) = cur.read_number("width")?;
    let (_, height) = cur.read_number("height")?;
    let (max_at, maxval) = cur.read_number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return cur.fail(max_at, format!("maxval {maxval} outside 1..=255"));
    }
    let (width, height) = (width as usize, height as usize);
    if width == 0 || height == 0 {
        return cur.fail(max_at, "image dimensions must be positive");
    }
    let npix = width * height;
    let mut data = Vec::with_capacity(npix);
    if binary {
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return cur.fail(cur.pos, "expected single whitespace before raster"),
        }
        if bytes.len() < cur.pos + npix {
            return cur.fail(
                bytes.len(),
                format!(
                    "raster truncated: need {npix} bytes, found {}",
                    bytes.len() - cur.pos
                ),
            );
        }
        for (i, &b) in bytes[cur.pos..cur.pos + npix].iter().enumerate() {
            if u64::from(b) > maxval {
                return cur.fail(cur.pos + i, format!("sample {b} exceeds maxval {maxval}"));
            }
            data.push(f64::from(b));
        }
        cur.pos += npix;
        if cur.pos != bytes.len() {
            return cur.fail(cur.pos, "trailing bytes after raster");
        }
    } else {
        for _ in 0..npix {
            let (at, v) = cur.read_number("sample")?;
            if v > maxval {
                return cur.fail(at, format!("sample {v} exceeds maxval {maxval}"));
            }
            data.push(v as f64);
        }
        cur.skip_separators();
        if cur.pos != bytes.len() {
            return cur.fail(cur.pos, "trailing bytes after raster");
        }
    }
    Signal::new_2d(height, width, data)
}

/// Writes a 2-D signal as a binary (`P5`) PGM file. Samples are rounded and
/// clamped to `0..=255`.
pub fn save_pgm(path: impl AsRef<Path>, image: &Signal) -> Result<()> {
    let (rows, cols) = match image.shape() {
        crate::signal::Shape::TwoD { rows, cols } => (rows, cols),
        other => {
            return Err(Error::invalid(
                "image",
                format!("expected a 2-D signal, got {other:?}"),
            ))
        }
    };
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend(
        image
            .data()
            .iter()
            .map(|&v| v.round().clamp(0.0, 255.0) as u8),
    );
    fs::write(path, out)?;
    Ok(())
}
