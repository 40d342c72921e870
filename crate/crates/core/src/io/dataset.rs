//! RGB-D datasets on disk.
//!
//! A JSON manifest lists, relative to its own directory: per-frame RGB (8-bit PNG), depth
//! (16-bit grayscale PNG, raw units scaled by `intrinsics.depth_scale`) and pixel embedding
//! tensors; a pose file with one row-major 3×4 world-from-camera matrix per line; and the
//! category/color label embedding tensors in vocabulary order.

use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, RgbImage};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::records::{mask_set_from_records, read_records, write_records};
use super::tensor::{read_tensor, write_tensor};
use super::{read_bytes, write_bytes};
use crate::config::{EngineConfig, GridConfig, VocabConfig};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Mat3, Pose};
use crate::instance::MaskSet;
use crate::mapping::FrameInput;
use crate::pipeline::FrameSource;
use crate::raster::{Raster, Tensor3};
use crate::scalar::Scalar;
use crate::scene::{SceneSpec, SyntheticScene};
use crate::vocab::LabelEmbeddings;

pub const MANIFEST_VERSION: u32 = 1;

/// Poses further than this from a rotation are rejected at load.
pub const POSE_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameEntry {
    pub rgb: PathBuf,
    pub depth: PathBuf,
    pub embedding: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub version: u32,
    pub width: usize,
    pub height: usize,
    pub intrinsics: CameraIntrinsics<f64>,
    pub poses: PathBuf,
    pub frames: Vec<FrameEntry>,
    pub vocabulary: VocabConfig,
    pub category_embeddings: PathBuf,
    pub color_embeddings: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Externally segmented mask records over the map grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masks: Option<PathBuf>,
    /// Generator spec, present for synthetic datasets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
}

impl DatasetManifest {
    fn referenced(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![&self.poses, &self.category_embeddings, &self.color_embeddings];
        for f in &self.frames {
            v.extend([f.rgb.as_path(), f.depth.as_path(), f.embedding.as_path()]);
        }
        v.extend(self.masks.as_deref());
        v.extend(self.scene.as_deref());
        v
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    manifest_path: PathBuf,
    root: PathBuf,
    manifest: DatasetManifest,
    poses: Vec<Pose<f64>>,
}

pub fn parse_poses(text: &str, path: &Path) -> Result<Vec<Pose<f64>>> {
    let mut poses = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        let m: [f64; 12] = vals.as_slice().try_into().map_err(|_| {
            Error::format(path, format!("line {}: expected 12 values, got {}", i + 1, vals.len()))
        })?;
        let pose = Pose::from_row_major_3x4(&m);
        pose.validate(POSE_TOLERANCE)
            .map_err(|e| Error::format(path, format!("line {}: {e}", i + 1)))?;
        poses.push(pose);
    }
    Ok(poses)
}

pub fn format_poses<T: Scalar>(poses: &[Pose<T>]) -> String {
    let mut s = String::new();
    for p in poses {
        let vals: Vec<String> = p
            .to_row_major_3x4()
            .iter()
            .map(|v| format!("{:?}", v.to_f64_lossy()))
            .collect();
        s.push_str(&vals.join(" "));
        s.push('\n');
    }
    s
}

/// Nearest rotation by Gram-Schmidt on the columns.
fn reorthonormalize(r: &Mat3<f64>) -> Mat3<f64> {
    let norm = |v: [f64; 3]| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let a = norm(r.column(0));
    let b0 = r.column(1);
    let d = dot(a, b0);
    let b = norm([b0[0] - d * a[0], b0[1] - d * a[1], b0[2] - d * a[2]]);
    let c = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    Mat3([[a[0], b[0], c[0]], [a[1], b[1], c[1]], [a[2], b[2], c[2]]])
}

fn cast_pose<T: Scalar>(p: &Pose<f64>) -> Pose<T> {
    let p = if p.orthonormality_error() > Pose::<f64>::ORTHONORMAL_TOLERANCE {
        Pose::new(reorthonormalize(&p.rotation), p.translation)
    } else {
        *p
    };
    Pose::from_row_major_3x4(&p.to_row_major_3x4().map(T::from_f64_lossy))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl Dataset {
    /// Parses the manifest, checks every referenced file exists and validates all poses.
    pub fn load(manifest_path: &Path) -> Result<Self> {
        let bytes = read_bytes(manifest_path)?;
        let manifest: DatasetManifest = serde_json::from_slice(&bytes)
            .map_err(|e| Error::format(manifest_path, e.to_string()))?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::format(
                manifest_path,
                format!("manifest version {} is not supported", manifest.version),
            ));
        }
        let root = manifest_path.parent().unwrap_or(Path::new("")).to_path_buf();
        for rel in manifest.referenced() {
            let p = root.join(rel);
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced file is missing"),
                ));
            }
        }
        let pose_path = root.join(&manifest.poses);
        let text = std::fs::read_to_string(&pose_path).map_err(|e| Error::io(&pose_path, e))?;
        let poses = parse_poses(&text, &pose_path)?;
        if poses.len() != manifest.frames.len() {
            return Err(Error::format(
                &pose_path,
                format!("{} poses for {} frames", poses.len(), manifest.frames.len()),
            ));
        }
        let intr = manifest.intrinsics;
        intr.validate().map_err(|e| Error::format(manifest_path, e.to_string()))?;
        Ok(Self {
            manifest_path: manifest_path.to_path_buf(),
            root,
            manifest,
            poses,
        })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn manifest_path(&self) -> &Path {
        &self.manifest_path
    }

    pub fn path(&self, rel: &Path) -> PathBuf {
        self.root.join(rel)
    }

    pub fn poses(&self) -> &[Pose<f64>] {
        &self.poses
    }

    /// `base` with the dataset's vocabulary and, when given, its grid.
    pub fn engine_config(&self, base: &EngineConfig) -> Result<EngineConfig> {
        let mut cfg = base.clone();
        cfg.vocabulary = self.manifest.vocabulary.clone();
        if let Some(g) = &self.manifest.grid {
            cfg.grid = g.clone();
        }
        cfg.validate()
            .map_err(|e| Error::format(&self.manifest_path, e.to_string()))?;
        Ok(cfg)
    }

    pub fn category_embeddings<T: Scalar>(&self) -> Result<LabelEmbeddings<T>> {
        let p = self.path(&self.manifest.category_embeddings);
        let vocab = self.manifest.vocabulary.category_vocab()?;
        LabelEmbeddings::from_tensor(&vocab, read_tensor(&p)?)
            .map_err(|e| Error::format(p, e.to_string()))
    }

    pub fn color_embeddings<T: Scalar>(&self) -> Result<LabelEmbeddings<T>> {
        let p = self.path(&self.manifest.color_embeddings);
        let vocab = self.manifest.vocabulary.color_vocab()?;
        LabelEmbeddings::from_tensor(&vocab, read_tensor(&p)?)
            .map_err(|e| Error::format(p, e.to_string()))
    }

    pub fn masks(&self, dims: (usize, usize)) -> Result<Option<MaskSet>> {
        let Some(rel) = &self.manifest.masks else {
            return Ok(None);
        };
        let p = self.path(rel);
        let records = read_records(&p)?;
        mask_set_from_records(&records, dims)
            .map(Some)
            .map_err(|e| Error::format(p, e.to_string()))
    }

    pub fn scene_spec(&self) -> Result<Option<SceneSpec>> {
        let Some(rel) = &self.manifest.scene else {
            return Ok(None);
        };
        let p = self.path(rel);
        let bytes = read_bytes(&p)?;
        serde_json::from_slice(&bytes)
            .map(Some)
            .map_err(|e| Error::format(p, e.to_string()))
    }

    /// SHA-256 over the manifest and every referenced file, in manifest order.
    pub fn content_hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(read_bytes(&self.manifest_path)?);
        for rel in self.manifest.referenced() {
            h.update(read_bytes(&self.path(rel))?);
        }
        Ok(hex(&h.finalize()))
    }

    fn read_frame<T: Scalar>(&self, index: usize) -> Result<FrameInput<T>> {
        let entry = self.manifest.frames.get(index).ok_or(Error::IndexOutOfRange {
            what: "frame".into(),
            index,
            available: self.manifest.frames.len(),
        })?;
        let (w, h) = (self.manifest.width, self.manifest.height);
        let check = |p: &Path, dims: (usize, usize)| -> Result<()> {
            if dims != (h, w) {
                return Err(Error::format(
                    p,
                    format!("image is {}x{}, manifest says {h}x{w}", dims.0, dims.1),
                ));
            }
            Ok(())
        };
        let rgb_path = self.path(&entry.rgb);
        let rgb_img = image::open(&rgb_path)
            .map_err(|e| Error::format(&rgb_path, e.to_string()))?
            .to_rgb8();
        check(&rgb_path, (rgb_img.height() as usize, rgb_img.width() as usize))?;
        let rgb = Raster::from_vec(h, w, rgb_img.pixels().map(|p| p.0).collect())
            .expect("size checked");

        let depth_path = self.path(&entry.depth);
        let depth_img = match image::open(&depth_path)
            .map_err(|e| Error::format(&depth_path, e.to_string()))?
        {
            DynamicImage::ImageLuma16(b) => b,
            _ => return Err(Error::format(&depth_path, "depth must be a 16-bit grayscale PNG")),
        };
        check(&depth_path, (depth_img.height() as usize, depth_img.width() as usize))?;
        let depth = Raster::from_vec(
            h,
            w,
            depth_img.pixels().map(|p| T::from_f64_lossy(p.0[0] as f64)).collect(),
        )
        .expect("size checked");

        let emb_path = self.path(&entry.embedding);
        let embeddings: Tensor3<T> = read_tensor(&emb_path)?;
        let (eh, ew, _) = embeddings.dims();
        check(&emb_path, (eh, ew))?;
        Ok(FrameInput {
            rgb,
            depth,
            pose: cast_pose(&self.poses[index]),
            embeddings,
        })
    }
}

impl<T: Scalar> FrameSource<T> for Dataset {
    fn frame_count(&self) -> usize {
        self.manifest.frames.len()
    }

    fn intrinsics(&self) -> CameraIntrinsics<T> {
        let i = self.manifest.intrinsics;
        CameraIntrinsics {
            fx: T::from_f64_lossy(i.fx),
            fy: T::from_f64_lossy(i.fy),
            cx: T::from_f64_lossy(i.cx),
            cy: T::from_f64_lossy(i.cy),
            depth_scale: T::from_f64_lossy(i.depth_scale),
        }
    }

    fn frame(&self, index: usize) -> Result<FrameInput<T>> {
        self.read_frame(index)
    }
}

fn save_png(path: &Path, img: &DynamicImage) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    img.save(path).map_err(|e| Error::format(path, e.to_string()))
}

/// Writes a synthetic scene as a dataset under `dir`, optionally with mask records, and
/// returns the manifest path. Embeddings are stored as f32.
pub fn write_scene_dataset(
    scene: &SyntheticScene,
    dir: &Path,
    masks: Option<&[crate::instance::MaskRecord]>,
) -> Result<PathBuf> {
    let spec = scene.spec();
    let (w, h) = (spec.camera.width, spec.camera.height);
    let mut frames = Vec::new();
    let mut poses = Vec::new();
    for i in 0..scene.frame_count() {
        let f: FrameInput<f32> = scene.frame(i)?;
        let entry = FrameEntry {
            rgb: PathBuf::from(format!("frames/rgb_{i:04}.png")),
            depth: PathBuf::from(format!("frames/depth_{i:04}.png")),
            embedding: PathBuf::from(format!("frames/emb_{i:04}.ivle")),
        };
        let rgb: Vec<u8> = f.rgb.as_slice().iter().flatten().copied().collect();
        let rgb = RgbImage::from_raw(w as u32, h as u32, rgb).expect("frame size");
        save_png(&dir.join(&entry.rgb), &DynamicImage::ImageRgb8(rgb))?;
        let depth: Vec<u16> = f.depth.as_slice().iter().map(|&d| d as u16).collect();
        let depth: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_raw(w as u32, h as u32, depth).expect("frame size");
        save_png(&dir.join(&entry.depth), &DynamicImage::ImageLuma16(depth))?;
        write_tensor(&dir.join(&entry.embedding), &f.embeddings)?;
        poses.push(f.pose);
        frames.push(entry);
    }
    write_bytes(&dir.join("poses.txt"), format_poses(&poses).as_bytes())?;
    write_tensor(
        &dir.join("labels/categories.ivle"),
        &scene.category_embeddings::<f32>().to_tensor(),
    )?;
    write_tensor(&dir.join("labels/colors.ivle"), &scene.color_embeddings::<f32>().to_tensor())?;
    write_bytes(
        &dir.join("scene.json"),
        &serde_json::to_vec_pretty(spec).expect("spec serializes"),
    )?;
    let masks_path = match masks {
        Some(m) => {
            write_records(&dir.join("masks.json"), m)?;
            Some(PathBuf::from("masks.json"))
        }
        None => None,
    };
    let vocabulary = VocabConfig {
        categories: scene.categories().labels().to_vec(),
        colors: scene.colors().labels().to_vec(),
        floor_labels: vec![crate::scene::FLOOR.to_string()],
    };
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        width: w,
        height: h,
        intrinsics: scene.intrinsics::<f64>(),
        poses: PathBuf::from("poses.txt"),
        frames,
        vocabulary,
        category_embeddings: PathBuf::from("labels/categories.ivle"),
        color_embeddings: PathBuf::from("labels/colors.ivle"),
        grid: Some(spec.grid.clone()),
        masks: masks_path,
        scene: Some(PathBuf::from("scene.json")),
    };
    let path = dir.join("manifest.json");
    write_bytes(&path, &serde_json::to_vec_pretty(&manifest).expect("manifest serializes"))?;
    Ok(path)
}
