//! Embedding tensor files.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "IVLE"
//! 4       4     version = 1          (u32 LE)
//! 8       4     rows                 (u32 LE)
//! 12      4     cols                 (u32 LE)
//! 16      4     channels             (u32 LE)
//! 20      4     element type 1=f32, 2=f64 (u32 LE)
//! 24      ...   rows*cols*channels values, LE, row-major, channel fastest
//! ```
//! Per-frame pixel embeddings are `H × W × C`; label embeddings are `N × 1 × C`.

use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::raster::Tensor3;
use crate::scalar::{ElementType, Scalar};

pub const MAGIC: &[u8; 4] = b"IVLE";
pub const VERSION: u32 = 1;
const HEADER: usize = 24;

pub fn encode_tensor<T: Scalar>(t: &Tensor3<T>) -> Vec<u8> {
    let (r, c, ch) = t.dims();
    let width = match T::DTYPE {
        ElementType::F32 => 4,
        ElementType::F64 => 8,
    };
    let mut out = Vec::with_capacity(HEADER + t.as_slice().len() * width);
    out.extend_from_slice(MAGIC);
    for v in [VERSION, r as u32, c as u32, ch as u32, T::DTYPE.code()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in t.as_slice() {
        match T::DTYPE {
            ElementType::F32 => out.extend_from_slice(&(v.to_f64_lossy() as f32).to_le_bytes()),
            ElementType::F64 => out.extend_from_slice(&v.to_f64_lossy().to_le_bytes()),
        }
    }
    out
}

/// Decodes either element type into `T`; `what` names the source in errors.
pub fn decode_tensor<T: Scalar>(bytes: &[u8], what: &Path) -> Result<Tensor3<T>> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(Error::format(what, "not an embedding tensor (bad magic)"));
    }
    let u = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().expect("4 bytes"));
    let version = u(0);
    if version != VERSION {
        return Err(Error::format(what, format!("unsupported tensor version {version}")));
    }
    let (r, c, ch) = (u(1) as usize, u(2) as usize, u(3) as usize);
    let dtype = ElementType::from_code(u(4))
        .ok_or_else(|| Error::format(what, format!("unknown element type code {}", u(4))))?;
    let width = match dtype {
        ElementType::F32 => 4,
        ElementType::F64 => 8,
    };
    let n = r
        .checked_mul(c)
        .and_then(|x| x.checked_mul(ch))
        .ok_or_else(|| Error::format(what, "tensor shape overflows"))?;
    if bytes.len() != HEADER + n * width {
        return Err(Error::format(
            what,
            format!(
                "payload is {} bytes, header {r}x{c}x{ch} needs {}",
                bytes.len() - HEADER,
                n * width
            ),
        ));
    }
    let body = &bytes[HEADER..];
    let data: Vec<T> = match dtype {
        ElementType::F32 => body
            .chunks_exact(4)
            .map(|b| T::from_f64_lossy(f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64))
            .collect(),
        ElementType::F64 => body
            .chunks_exact(8)
            .map(|b| T::from_f64_lossy(f64::from_le_bytes(b.try_into().expect("8 bytes"))))
            .collect(),
    };
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::format(what, "tensor contains non-finite values"));
    }
    Ok(Tensor3::from_vec(r, c, ch, data).expect("length checked"))
}

pub fn write_tensor<T: Scalar>(path: &Path, t: &Tensor3<T>) -> Result<()> {
    write_bytes(path, &encode_tensor(t))
}

pub fn read_tensor<T: Scalar>(path: &Path) -> Result<Tensor3<T>> {
    decode_tensor(&read_bytes(path)?, path)
}
