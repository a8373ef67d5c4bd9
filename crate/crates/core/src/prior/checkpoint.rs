//! `FORCENET` checkpoint container.
//!
//! Layout, all little-endian: the 8-byte magic `FORCENET`, a `u32` version,
//! a `u32` layer count followed by that many `u32` widths, then every
//! parameter as an `f64` in declaration order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::prior::ToyNet;
use crate::scalar::Real;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"FORCENET";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<T: Real, W: Write>(net: &ToyNet<T>, mut w: W) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(net.dims().len() as u32).to_le_bytes())?;
    for &d in net.dims() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for p in net.params() {
        w.write_all(&p.as_f64().to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub fn read_checkpoint<T: Real, R: Read>(mut r: R) -> Result<ToyNet<T>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format("not a FORCENET checkpoint".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}"
        )));
    }
    let n_dims = read_u32(&mut r)? as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(Error::Format(format!("implausible layer count {n_dims}")));
    }
    let dims = (0..n_dims)
        .map(|_| read_u32(&mut r).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Format("truncated parameter block".into()));
    }
    let params = bytes
        .chunks_exact(8)
        .map(|c| T::of(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    ToyNet::from_parts(dims, params).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_checkpoint<T: Real>(net: &ToyNet<T>, path: impl AsRef<Path>) -> Result<()> {
    write_checkpoint(net, BufWriter::new(File::create(path)?))
}

pub fn load_checkpoint<T: Real>(path: impl AsRef<Path>) -> Result<ToyNet<T>> {
    read_checkpoint(BufReader::new(File::open(path)?))
}
