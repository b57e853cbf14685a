//! Dense row-major grids plus the `SGR1` container and PGM rendering.
//!
//! Container layout (little-endian throughout):
//!
//! | bytes | field                         |
//! |-------|-------------------------------|
//! | 0..4  | magic `SGR1`                  |
//! | 4     | dtype (0 = float32, 1 = uint8)|
//! | 5     | reserved, must be 0           |
//! | 6..8  | version = 1 (u16)             |
//! | 8..12 | rows (u32)                    |
//! | 12..16| cols (u32)                    |
//! | 16..  | row-major payload             |

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SGR1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    U8,
}

impl Dtype {
    fn code(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::U8 => 1,
        }
    }

    fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::U8),
            other => Err(Error::Format {
                field: "dtype",
                message: format!("unknown dtype code {other}"),
            }),
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::U8 => 1,
        }
    }
}

/// Row-major grid of `f32`. Phantoms, sinograms and masks all use this type;
/// masks hold only 0.0 and 1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl Raster {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Argument(format!(
                "raster data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "raster value at index {i} is not finite"
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f32) {
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f32] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [f32] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(f32::NEG_INFINITY, f32::max)
    }

    pub fn min(&self) -> f32 {
        self.data.iter().copied().fold(f32::INFINITY, f32::min)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum()
    }

    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn is_binary(&self) -> bool {
        self.first_non_binary().is_none()
    }

    pub fn first_non_binary(&self) -> Option<usize> {
        self.data.iter().position(|&v| v != 0.0 && v != 1.0)
    }

    /// Errors unless every value is 0 or 1.
    pub fn ensure_binary(&self, what: &str) -> Result<()> {
        match self.first_non_binary() {
            None => Ok(()),
            Some(i) => Err(Error::Validation(format!(
                "{what} is not binary: value {} at index {i} (row {}, col {})",
                self.data[i],
                i / self.cols.max(1),
                i % self.cols.max(1)
            ))),
        }
    }

    pub fn ensure_same_dims(&self, other: &Raster, what: &str) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Argument(format!(
                "{what}: dimension mismatch {:?} vs {:?}",
                self.dims(),
                other.dims()
            )));
        }
        Ok(())
    }

    /// Pixelwise OR of two binary masks.
    pub fn or(&self, other: &Raster) -> Result<Raster> {
        self.ensure_same_dims(other, "or")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| if a != 0.0 || b != 0.0 { 1.0 } else { 0.0 })
            .collect();
        Ok(Raster {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self - other`, elementwise.
    pub fn sub(&self, other: &Raster) -> Result<Raster> {
        self.ensure_same_dims(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Raster {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

pub fn encode(r: &Raster, dtype: Dtype) -> Result<Vec<u8>> {
    let rows = u32::try_from(r.rows).map_err(|_| Error::Argument("too many rows".into()))?;
    let cols = u32::try_from(r.cols).map_err(|_| Error::Argument("too many cols".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + r.data.len() * dtype.width());
    out.extend_from_slice(MAGIC);
    out.push(dtype.code());
    out.push(0);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    match dtype {
        Dtype::F32 => {
            for v in &r.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Dtype::U8 => {
            for (i, &v) in r.data.iter().enumerate() {
                if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
                    return Err(Error::Argument(format!(
                        "value {v} at index {i} is not representable as uint8"
                    )));
                }
                out.push(v as u8);
            }
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<(Raster, Dtype)> {
    if bytes.len() < 4 || &bytes[0..4] != MAGIC {
        return Err(Error::Format {
            field: "magic",
            message: "bad magic".into(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format {
            field: "header",
            message: format!("truncated header: {} of {HEADER_LEN} bytes", bytes.len()),
        });
    }
    let dtype = Dtype::from_code(bytes[4])?;
    if bytes[5] != 0 {
        return Err(Error::Format {
            field: "reserved",
            message: format!("reserved byte must be 0, got {}", bytes[5]),
        });
    }
    let version = u16::from_le_bytes([bytes[6], bytes[7]]);
    if version != VERSION {
        return Err(Error::Format {
            field: "version",
            message: format!("unsupported version {version}"),
        });
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(dtype.width()))
        .ok_or(Error::Format {
            field: "rows",
            message: "dimensions overflow".into(),
        })?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::Format {
            field: "payload",
            message: format!(
                "expected {expected} payload bytes for {rows}x{cols}, found {}",
                payload.len()
            ),
        });
    }
    let data: Vec<f32> = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        Dtype::U8 => payload.iter().map(|&b| b as f32).collect(),
    };
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::Format {
            field: "payload",
            message: format!("non-finite value at index {i}"),
        });
    }
    Ok((Raster { rows, cols, data }, dtype))
}

pub fn write_raster(r: &Raster, dtype: Dtype, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(r, dtype)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Writes a binary mask as a uint8 container.
pub fn write_mask(mask: &Raster, path: impl AsRef<Path>) -> Result<()> {
    mask.ensure_binary("mask")?;
    write_raster(mask, Dtype::U8, path)
}

pub fn read_raster_typed(path: impl AsRef<Path>) -> Result<(Raster, Dtype)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    read_raster_typed(path).map(|(r, _)| r)
}

/// Encodes an 8-bit binary PGM (P5, maxval 255). Values are mapped affinely
/// from `[min, max]` onto `[0, 255]`, clamped, and rounded half up.
pub fn encode_pgm(r: &Raster, min: f32, max: f32) -> Result<Vec<u8>> {
    if !(min < max) {
        return Err(Error::Argument(format!(
            "pgm range requires min < max, got [{min}, {max}]"
        )));
    }
    let header = format!("P5\n{} {}\n255\n", r.cols, r.rows);
    let mut out = Vec::with_capacity(header.len() + r.data.len());
    out.extend_from_slice(header.as_bytes());
    let scale = 255.0 / (max as f64 - min as f64);
    for &v in &r.data {
        let g = ((v as f64 - min as f64) * scale).clamp(0.0, 255.0);
        out.push((g + 0.5).floor().min(255.0) as u8);
    }
    Ok(out)
}

pub fn write_pgm(r: &Raster, path: impl AsRef<Path>, min: f32, max: f32) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_pgm(r, min, max)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pgm_pixels(bytes: &[u8]) -> &[u8] {
        // header is three newline-terminated lines
        let mut newlines = 0;
        let start = bytes
            .iter()
            .position(|&b| {
                if b == b'\n' {
                    newlines += 1;
                }
                newlines == 3
            })
            .unwrap();
        &bytes[start + 1..]
    }

    #[test]
    fn small_round_trip() {
        let r = Raster::from_fn(2, 3, |row, col| (row * 3 + col) as f32);
        let dir = tempfile::tempdir().unwrap();
        for dtype in [Dtype::F32, Dtype::U8] {
            let p = dir.path().join("r.sgr");
            write_raster(&r, dtype, &p).unwrap();
            let (back, dt) = read_raster_typed(&p).unwrap();
            assert_eq!(back, r);
            assert_eq!(dt, dtype);
        }
    }

    #[test]
    fn bad_magic_is_named() {
        let mut bytes = encode(&Raster::zeros(1, 1), Dtype::F32).unwrap();
        bytes[0..4].copy_from_slice(b"XXXX");
        match decode(&bytes) {
            Err(Error::Format { field, message }) => {
                assert_eq!(field, "magic");
                assert_eq!(message, "bad magic");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn truncated_payload_and_dtype_errors() {
        let bytes = encode(&Raster::zeros(2, 2), Dtype::F32).unwrap();
        match decode(&bytes[..bytes.len() - 1]) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "payload"),
            other => panic!("unexpected {other:?}"),
        }
        let mut bad = bytes.clone();
        bad[4] = 7;
        match decode(&bad) {
            Err(Error::Format { field, .. }) => assert_eq!(field, "dtype"),
            other => panic!("unexpected {other:?}"),
        }
        // a uint8 header in front of a float payload is a size mismatch
        let mut mismatched = bytes;
        mismatched[4] = 1;
        assert!(matches!(
            decode(&mismatched),
            Err(Error::Format { field: "payload", .. })
        ));
    }

    #[test]
    fn full_size_float_file_length() {
        let r = Raster::zeros(512, 512);
        assert_eq!(encode(&r, Dtype::F32).unwrap().len(), 16 + 512 * 512 * 4);
    }

    #[test]
    fn uint8_rejects_fractional_values() {
        let r = Raster::from_vec(1, 2, vec![0.5, 1.0]).unwrap();
        assert!(encode(&r, Dtype::U8).is_err());
    }

    #[test]
    fn pgm_mapping() {
        let lo = Raster::from_vec(1, 4, vec![2.0; 4]).unwrap();
        let bytes = encode_pgm(&lo, 2.0, 6.0).unwrap();
        assert!(bytes.starts_with(b"P5\n4 1\n255\n"));
        assert_eq!(pgm_pixels(&bytes), &[0, 0, 0, 0]);

        let hi = Raster::from_vec(1, 2, vec![6.0, 9.0]).unwrap();
        assert_eq!(pgm_pixels(&encode_pgm(&hi, 2.0, 6.0).unwrap()), &[255, 255]);

        let mid = Raster::from_vec(1, 1, vec![4.0]).unwrap();
        assert_eq!(pgm_pixels(&encode_pgm(&mid, 2.0, 6.0).unwrap()), &[128]);

        assert!(encode_pgm(&mid, 1.0, 1.0).is_err());
    }

    #[test]
    fn binary_checks() {
        let r = Raster::from_vec(1, 3, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.first_non_binary(), Some(2));
        let msg = r.ensure_binary("mask").unwrap_err().to_string();
        assert!(msg.contains("index 2"), "{msg}");
    }

    proptest! {
        #[test]
        fn container_round_trip_is_byte_exact(
            rows in 1usize..8,
            cols in 1usize..8,
            seed in any::<u64>(),
            as_mask in any::<bool>(),
        ) {
            let mut state = seed;
            let r = Raster::from_fn(rows, cols, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if as_mask { (state >> 63) as f32 } else { (state >> 40) as f32 / 1024.0 - 4096.0 }
            });
            let dtype = if as_mask { Dtype::U8 } else { Dtype::F32 };
            let bytes = encode(&r, dtype).unwrap();
            let (back, dt) = decode(&bytes).unwrap();
            prop_assert_eq!(dt, dtype);
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(encode(&back, dt).unwrap(), bytes);
        }
    }
}
