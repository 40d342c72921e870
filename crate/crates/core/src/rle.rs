//! Uncompressed run-length encoding of binary masks, COCO/SAM layout.
//!
//! `size` is `[rows, cols]`. The mask is scanned column-major (down each column, then
//! to the next column) and `counts` alternates run lengths starting with a run of
//! `false` cells, which may be zero.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::raster::Mask;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rle {
    pub size: [usize; 2],
    pub counts: Vec<u32>,
}

pub fn encode(mask: &Mask) -> Rle {
    let (rows, cols) = mask.dims();
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for c in 0..cols {
        for r in 0..rows {
            let v = mask[(r, c)];
            if v != current {
                counts.push(run);
                run = 0;
                current = v;
            }
            run += 1;
        }
    }
    counts.push(run);
    Rle {
        size: [rows, cols],
        counts,
    }
}

pub fn decode(rle: &Rle) -> Result<Mask> {
    let [rows, cols] = rle.size;
    let total: u64 = rle.counts.iter().map(|&c| c as u64).sum();
    if total != (rows * cols) as u64 {
        return Err(Error::invalid(
            "run-length mask",
            format!("runs cover {total} cells but size is {rows}x{cols}"),
        ));
    }
    let mut mask = Mask::filled(rows, cols, false);
    let mut idx = 0usize;
    let mut value = false;
    for &run in &rle.counts {
        for _ in 0..run {
            let (c, r) = (idx / rows, idx % rows);
            mask[(r, c)] = value;
            idx += 1;
        }
        value = !value;
    }
    Ok(mask)
}

/// `#[serde(with = "crate::rle::as_rle")]` for mask fields.
pub mod as_rle {
    use super::*;

    pub fn serialize<S: Serializer>(mask: &Mask, s: S) -> std::result::Result<S::Ok, S::Error> {
        encode(mask).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mask, D::Error> {
        let rle = Rle::deserialize(d)?;
        decode(&rle).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Raster;
    use proptest::prelude::*;

    #[test]
    fn column_major_layout() {
        // 2x3 mask:
        // 0 1 1
        // 0 0 1
        let mut m = Mask::filled(2, 3, false);
        m[(0, 1)] = true;
        m[(0, 2)] = true;
        m[(1, 2)] = true;
        let rle = encode(&m);
        assert_eq!(rle.size, [2, 3]);
        // column-major: 0 0 | 1 0 | 1 1
        assert_eq!(rle.counts, vec![2, 1, 1, 2]);
        assert_eq!(decode(&rle).unwrap(), m);
    }

    #[test]
    fn leading_true_run_starts_with_zero() {
        let m = Mask::filled(2, 2, true);
        assert_eq!(encode(&m).counts, vec![0, 4]);
    }

    #[test]
    fn rejects_inconsistent_runs() {
        let rle = Rle {
            size: [2, 2],
            counts: vec![1, 1],
        };
        assert!(decode(&rle).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(rows in 1usize..12, cols in 1usize..12, bits in proptest::collection::vec(any::<bool>(), 144)) {
            let m = Raster::from_fn(rows, cols, |(r, c)| bits[r * 12 + c]);
            prop_assert_eq!(decode(&encode(&m)).unwrap(), m);
        }
    }
}
