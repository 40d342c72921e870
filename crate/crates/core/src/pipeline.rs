//! Frames in, queryable map out.

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::instance::{build_ivlmap, surrogate_segment, FusionParams, IvlMap, MaskSet};
use crate::mapping::{FrameInput, FrameStats, IntegrationParams, MapBundle};
use crate::scalar::Scalar;
use crate::scene::SyntheticScene;
use crate::vocab::{label_map, LabelEmbeddings};

/// Anything that yields posed RGB-D frames with pixel embeddings, in order.
pub trait FrameSource<T: Scalar> {
    fn frame_count(&self) -> usize;
    fn intrinsics(&self) -> CameraIntrinsics<T>;
    fn frame(&self, index: usize) -> Result<FrameInput<T>>;
}

impl<T: Scalar> FrameSource<T> for SyntheticScene {
    fn frame_count(&self) -> usize {
        SyntheticScene::frame_count(self)
    }

    fn intrinsics(&self) -> CameraIntrinsics<T> {
        SyntheticScene::intrinsics(self)
    }

    fn frame(&self, index: usize) -> Result<FrameInput<T>> {
        SyntheticScene::frame(self, index)
    }
}

/// Fuses every frame of `source` into a fresh bundle, in order.
pub fn integrate_all<T: Scalar>(
    source: &dyn FrameSource<T>,
    embed_dim: usize,
    cfg: &EngineConfig,
) -> Result<(MapBundle<T>, FrameStats)> {
    let mut bundle = MapBundle::new(cfg.grid.spec(), embed_dim)?;
    let params = IntegrationParams {
        intrinsics: source.intrinsics(),
        max_depth: T::from_f64_lossy(cfg.thresholds.max_depth_m),
    };
    let mut stats = FrameStats::default();
    for i in 0..source.frame_count() {
        let frame = source.frame(i)?;
        stats.accumulate(&bundle.integrate_frame(&frame, &params)?);
    }
    Ok((bundle, stats))
}

/// Builds the full map. Without external masks the surrogate segmenter runs over the
/// category label map with floor labels excluded.
pub fn build_map<T: Scalar>(
    source: &dyn FrameSource<T>,
    category_embeddings: &LabelEmbeddings<T>,
    color_embeddings: &LabelEmbeddings<T>,
    cfg: &EngineConfig,
    masks: Option<MaskSet>,
) -> Result<(IvlMap<T>, FrameStats)> {
    cfg.validate()?;
    let categories = cfg.vocabulary.category_vocab()?;
    let colors = cfg.vocabulary.color_vocab()?;
    if category_embeddings.rows() != categories.len() {
        return Err(Error::mismatch(
            "category embedding rows",
            categories.len(),
            category_embeddings.rows(),
        ));
    }
    if color_embeddings.rows() != colors.len() {
        return Err(Error::mismatch("color embedding rows", colors.len(), color_embeddings.rows()));
    }
    if color_embeddings.dim() != category_embeddings.dim() {
        return Err(Error::mismatch(
            "color embedding width",
            category_embeddings.dim(),
            color_embeddings.dim(),
        ));
    }
    let (bundle, stats) = integrate_all(source, category_embeddings.dim(), cfg)?;
    let cat_labels = label_map(bundle.embedding(), category_embeddings)?;
    let col_labels = label_map(bundle.embedding(), color_embeddings)?;
    let masks = match masks {
        Some(m) => m,
        None => surrogate_segment(
            &cat_labels,
            &cfg.floor_label_ids(),
            cfg.thresholds.min_mask_area,
        ),
    };
    let params = FusionParams {
        reject_score: cfg.thresholds.reject_score,
        category_background: None,
    };
    let map = build_ivlmap(bundle, &masks, cat_labels, col_labels, categories, colors, &params)?;
    Ok((map, stats))
}

/// Builds the map of a synthetic scene with its own label embeddings.
pub fn build_scene_map<T: Scalar>(scene: &SyntheticScene, cfg: &EngineConfig) -> Result<IvlMap<T>> {
    let (map, _) = build_map(
        scene,
        &scene.category_embeddings(),
        &scene.color_embeddings(),
        cfg,
        None,
    )?;
    Ok(map)
}
