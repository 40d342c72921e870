//! On-disk formats: embedding tensors, mask records, datasets and map archives.

pub mod archive;
pub mod dataset;
pub mod records;
pub mod tensor;

pub use archive::{load_map, save_map, MapArchive, Provenance};
pub use dataset::{write_scene_dataset, Dataset, DatasetManifest, FrameEntry};
pub use records::{mask_set_from_records, read_records, write_records};
pub use tensor::{read_tensor, write_tensor};

use std::path::Path;

use crate::error::{Error, Result};

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
