//! Mask record files: a JSON array of records with run-length encoded segmentations.
//! Attribution fields may be absent; the engine fills them.

use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::instance::{MaskCandidate, MaskProvenance, MaskRecord, MaskSet};

pub fn write_records(path: &Path, records: &[MaskRecord]) -> Result<()> {
    let text = serde_json::to_vec_pretty(records).expect("records serialize");
    write_bytes(path, &text)
}

pub fn read_records(path: &Path) -> Result<Vec<MaskRecord>> {
    let bytes = read_bytes(path)?;
    serde_json::from_slice(&bytes).map_err(|e| Error::format(path, e.to_string()))
}

/// Externally segmented masks, validated against the grid.
pub fn mask_set_from_records(records: &[MaskRecord], dims: (usize, usize)) -> Result<MaskSet> {
    let masks = records
        .iter()
        .map(|r| MaskCandidate {
            segmentation: r.segmentation.clone(),
            predicted_iou: r.predicted_iou,
            stability_score: r.stability_score,
            point_coords: r.point_coords.clone(),
            crop_box: r.crop_box,
        })
        .collect();
    MaskSet::new(masks, MaskProvenance::ExternalFile, dims)
}
