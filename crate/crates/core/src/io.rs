//! Little-endian binary containers for images (`TIMG`) and sinograms (`TSIN`).
//!
//! `TIMG`: magic, version byte, `u32` rows, `u32` cols, then `rows * cols`
//! `f32` values row-major. Pixel size is not stored; readers supply the
//! field of view.
//!
//! `TSIN`: magic, version byte, `u32` views, `u32` detector bins, then the
//! geometry as `f64` (detector spacing, detector offset, one angle per view)
//! and `views * bins` `f32` values view-major.
//!
//! Masks are stored in the same containers with values 0 and 1.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{MetalMask, TraceMask};
use crate::tomo::{Image, ImageGrid, ScanGeometry, Sinogram};

pub const IMAGE_MAGIC: &[u8; 4] = b"TIMG";
pub const SINOGRAM_MAGIC: &[u8; 4] = b"TSIN";
pub const FORMAT_VERSION: u8 = 1;

fn format(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| format("file is truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| format("size overflow"))?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        if self.take(4)? != magic {
            return Err(format(format!(
                "missing {} magic",
                String::from_utf8_lossy(magic)
            )));
        }
        let v = self.take(1)?[0];
        if v != FORMAT_VERSION {
            return Err(format(format!("unsupported format version {v}")));
        }
        Ok(())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(format(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )));
        }
        Ok(())
    }
}

fn push_f32s<T: Real>(out: &mut Vec<u8>, values: &[T]) {
    for v in values {
        out.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
}

pub fn encode_image<T: Real>(img: &Image<T>) -> Vec<u8> {
    let n = img.n() as u32;
    let mut out = Vec::with_capacity(13 + 4 * img.values().len());
    out.extend_from_slice(IMAGE_MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    push_f32s(&mut out, img.values());
    out
}

/// Decodes a square `TIMG` spanning a field of view of width `fov`.
pub fn decode_image<T: Real>(bytes: &[u8], fov: f64) -> Result<Image<T>> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    c.header(IMAGE_MAGIC)?;
    let (rows, cols) = (c.u32()? as usize, c.u32()? as usize);
    if rows != cols {
        return Err(format(format!(
            "only square images are supported, got {rows}x{cols}"
        )));
    }
    let values = c.f32s(rows * cols)?;
    c.finish()?;
    let grid = ImageGrid::with_fov(rows, fov)?;
    Image::new(grid, values.into_iter().map(|v| T::of(v as f64)).collect())
}

pub fn encode_sinogram<T: Real>(sino: &Sinogram<T>) -> Vec<u8> {
    let g = sino.geometry();
    let mut out = Vec::with_capacity(29 + 8 * g.n_views() + 4 * sino.values().len());
    out.extend_from_slice(SINOGRAM_MAGIC);
    out.push(FORMAT_VERSION);
    out.extend_from_slice(&(g.n_views() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n_det() as u32).to_le_bytes());
    out.extend_from_slice(&g.det_spacing().to_le_bytes());
    out.extend_from_slice(&g.det_offset().to_le_bytes());
    for a in g.angles() {
        out.extend_from_slice(&a.to_le_bytes());
    }
    push_f32s(&mut out, sino.values());
    out
}

pub fn decode_sinogram<T: Real>(bytes: &[u8]) -> Result<Sinogram<T>> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    c.header(SINOGRAM_MAGIC)?;
    let (views, det) = (c.u32()? as usize, c.u32()? as usize);
    let (spacing, offset) = (c.f64()?, c.f64()?);
    let angles = (0..views).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let values = c.f32s(views * det)?;
    c.finish()?;
    let geo = ScanGeometry::new(angles, det, spacing, offset).map_err(|e| format(e.to_string()))?;
    Sinogram::new(geo, values.into_iter().map(|v| T::of(v as f64)).collect())
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    fs::File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::File::create(path)?.write_all(bytes)?;
    Ok(())
}

pub fn save_image<T: Real>(img: &Image<T>, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_image(img))
}

pub fn load_image<T: Real>(path: impl AsRef<Path>, fov: f64) -> Result<Image<T>> {
    decode_image(&read_all(path.as_ref())?, fov)
}

pub fn save_sinogram<T: Real>(sino: &Sinogram<T>, path: impl AsRef<Path>) -> Result<()> {
    write_all(path.as_ref(), &encode_sinogram(sino))
}

pub fn load_sinogram<T: Real>(path: impl AsRef<Path>) -> Result<Sinogram<T>> {
    decode_sinogram(&read_all(path.as_ref())?)
}

fn to_bools(values: &[f32]) -> Result<Vec<bool>> {
    values
        .iter()
        .map(|&v| match v {
            0.0 => Ok(false),
            1.0 => Ok(true),
            _ => Err(format(format!("mask value {v} is neither 0 nor 1"))),
        })
        .collect()
}

pub fn save_metal_mask(mask: &MetalMask, path: impl AsRef<Path>) -> Result<()> {
    save_image(&mask.to_image::<f32>(), path)
}

pub fn load_metal_mask(path: impl AsRef<Path>, fov: f64) -> Result<MetalMask> {
    let img = load_image::<f32>(path, fov)?;
    MetalMask::new(img.grid(), to_bools(img.values())?)
}

pub fn save_trace(trace: &TraceMask, geo: &ScanGeometry, path: impl AsRef<Path>) -> Result<()> {
    let values = trace
        .as_slice()
        .iter()
        .map(|&b| if b { 1.0f32 } else { 0.0 })
        .collect();
    save_sinogram(&Sinogram::new(geo.clone(), values)?, path)
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<TraceMask> {
    let s = load_sinogram::<f32>(path)?;
    TraceMask::new(s.n_views(), s.n_det(), to_bools(s.values())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::shepp_logan;

    #[test]
    fn image_round_trip() {
        let grid = ImageGrid::with_fov(16, 20.0).unwrap();
        let img = shepp_logan::<f32>(grid);
        let bytes = encode_image(&img);
        assert_eq!(&bytes[..5], b"TIMG\x01");
        assert_eq!(bytes.len(), 13 + 4 * 256);
        let back: Image<f32> = decode_image(&bytes, 20.0).unwrap();
        assert_eq!(back, img);
        assert!(decode_image::<f32>(&bytes[..bytes.len() - 1], 20.0).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_image::<f32>(&extra, 20.0).is_err());
        let mut bad = bytes;
        bad[4] = 9;
        assert!(decode_image::<f32>(&bad, 20.0).is_err());
    }

    #[test]
    fn sinogram_round_trip() {
        let geo = ScanGeometry::new(vec![0.0, 0.3, 1.7], 5, 0.25, 0.1).unwrap();
        let sino = Sinogram::new(geo, (0..15).map(|i| i as f32 * 0.5).collect()).unwrap();
        let back: Sinogram<f32> = decode_sinogram(&encode_sinogram(&sino)).unwrap();
        assert_eq!(back, sino);
        assert_eq!(back.geometry(), sino.geometry());
        assert!(decode_sinogram::<f32>(b"TIMG\x01").is_err());
    }
}
