//! Instance fusion: label and color attribution of segmentation masks by region
//! matching and count-ratio scoring, and assembly of the instance and color id maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapping::MapBundle;
use crate::raster::{Cell, Mask, Raster};
use crate::scalar::Scalar;
use crate::vocab::{PixelLabelMap, Vocabulary};

/// Label given to masks whose region cannot be attributed.
pub const UNKNOWN_LABEL: &str = "unknown";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskProvenance {
    ExternalFile,
    SurrogateSegmenter,
}

/// A segmentation mask plus the segmenter's own metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskCandidate {
    pub segmentation: Mask,
    pub predicted_iou: f64,
    pub stability_score: f64,
    pub point_coords: Vec<[f64; 2]>,
    pub crop_box: [u32; 4],
}

impl MaskCandidate {
    /// Wraps a bare mask with neutral confidences, its centroid as the prompt point and
    /// the full grid as the crop box.
    pub fn from_mask(segmentation: Mask) -> Self {
        let (r, c) = mask_centroid(&segmentation).unwrap_or((0.0, 0.0));
        let crop_box = [0, 0, segmentation.cols() as u32, segmentation.rows() as u32];
        Self {
            segmentation,
            predicted_iou: 1.0,
            stability_score: 1.0,
            point_coords: vec![[c, r]],
            crop_box,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskSet {
    masks: Vec<MaskCandidate>,
    provenance: MaskProvenance,
}

impl MaskSet {
    /// Every mask must be non-empty and sized `dims`.
    pub fn new(
        masks: Vec<MaskCandidate>,
        provenance: MaskProvenance,
        dims: (usize, usize),
    ) -> Result<Self> {
        for (i, m) in masks.iter().enumerate() {
            if m.segmentation.dims() != dims {
                return Err(Error::mismatch(
                    format!("mask {i}"),
                    format!("{dims:?}"),
                    format!("{:?}", m.segmentation.dims()),
                ));
            }
            if m.segmentation.count_true() == 0 {
                return Err(Error::invalid("mask set", format!("mask {i} is empty")));
            }
        }
        Ok(Self { masks, provenance })
    }

    pub fn masks(&self) -> &[MaskCandidate] {
        &self.masks
    }

    pub fn provenance(&self) -> MaskProvenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

/// Mean `(row, col)` of the true cells.
pub fn mask_centroid(mask: &Mask) -> Option<(f64, f64)> {
    let (mut sr, mut sc, mut n) = (0.0, 0.0, 0usize);
    for (r, c) in mask.true_cells() {
        sr += r as f64;
        sc += c as f64;
        n += 1;
    }
    (n > 0).then(|| (sr / n as f64, sc / n as f64))
}

/// 3×3 median filter over label ids. Windows are clipped at the border; even-sized
/// windows take the lower median.
pub fn median_smooth(labels: &Raster<u32>) -> Raster<u32> {
    let (h, w) = labels.dims();
    let mut window = Vec::with_capacity(9);
    Raster::from_fn(h, w, |(r, c)| {
        window.clear();
        for rr in r.saturating_sub(1)..=(r + 1).min(h - 1) {
            for cc in c.saturating_sub(1)..=(c + 1).min(w - 1) {
                window.push(labels[(rr, cc)]);
            }
        }
        window.sort_unstable();
        window[(window.len() - 1) / 2]
    })
}

/// 4-connected components of equal label, skipping `exclude`d labels and components
/// smaller than `min_area`. Components are returned in row-major order of their first cell.
pub fn label_components(labels: &Raster<u32>, exclude: &[u32], min_area: usize) -> Vec<Mask> {
    let (h, w) = labels.dims();
    let mut seen = Raster::filled(h, w, false);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for start in 0..h * w {
        let start = labels.cell_of(start);
        if seen[start] {
            continue;
        }
        let label = labels[start];
        seen[start] = true;
        let mut cells = vec![start];
        stack.push(start);
        while let Some((r, c)) = stack.pop() {
            let neighbors = [
                (r.wrapping_sub(1), c),
                (r + 1, c),
                (r, c.wrapping_sub(1)),
                (r, c + 1),
            ];
            for n in neighbors {
                if n.0 < h && n.1 < w && !seen[n] && labels[n] == label {
                    seen[n] = true;
                    cells.push(n);
                    stack.push(n);
                }
            }
        }
        if exclude.contains(&label) || cells.len() < min_area {
            continue;
        }
        let mut mask = Mask::filled(h, w, false);
        for cell in cells {
            mask[cell] = true;
        }
        out.push(mask);
    }
    out
}

/// Stand-in segmenter: components of the median-smoothed label map.
pub fn surrogate_segment(
    pixel_labels: &PixelLabelMap,
    exclude: &[u32],
    min_area: usize,
) -> MaskSet {
    let smoothed = median_smooth(pixel_labels.labels());
    let masks = label_components(&smoothed, exclude, min_area.max(1))
        .into_iter()
        .map(MaskCandidate::from_mask)
        .collect();
    MaskSet {
        masks,
        provenance: MaskProvenance::SurrogateSegmenter,
    }
}

/// Keeps the labels under the mask and zeroes everything else.
pub fn region_match(labels: &Raster<u32>, mask: &Mask) -> Result<Raster<u32>> {
    if labels.dims() != mask.dims() {
        return Err(Error::mismatch(
            "mask",
            format!("{:?}", labels.dims()),
            format!("{:?}", mask.dims()),
        ));
    }
    if mask.count_true() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(Raster::from_fn(labels.rows(), labels.cols(), |cell| {
        if mask[cell] {
            labels[cell]
        } else {
            0
        }
    }))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelCounts {
    /// Distinct labels in ascending id order.
    pub labels: Vec<u32>,
    pub counts: Vec<u64>,
    /// Cells under the mask carrying the background label.
    pub background: u64,
}

/// Distinct labels and their counts over the mask's cells, excluding `background`.
pub fn unique_counts(masked: &Raster<u32>, mask: &Mask, background: Option<u32>) -> LabelCounts {
    let mut tally: BTreeMap<u32, u64> = BTreeMap::new();
    let mut bg = 0;
    for cell in mask.true_cells() {
        let l = masked[cell];
        if Some(l) == background {
            bg += 1;
        } else {
            *tally.entry(l).or_default() += 1;
        }
    }
    LabelCounts {
        labels: tally.keys().copied().collect(),
        counts: tally.values().copied().collect(),
        background: bg,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredLabel {
    pub label: u32,
    pub score: f64,
}

/// Count-ratio scores `φᵢ / Σφ`, sorted descending with ties broken by label id.
pub fn score_labels(labels: &[u32], counts: &[u64]) -> Result<Vec<ScoredLabel>> {
    if labels.len() != counts.len() {
        return Err(Error::mismatch("label counts", labels.len(), counts.len()));
    }
    let total: u64 = counts.iter().sum();
    if labels.is_empty() || total == 0 {
        return Err(Error::NothingToScore);
    }
    let mut pairs: Vec<(u32, u64)> = labels.iter().copied().zip(counts.iter().copied()).collect();
    pairs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(pairs
        .into_iter()
        .map(|(label, n)| ScoredLabel {
            label,
            score: n as f64 / total as f64,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssignParams {
    /// Label excluded from counting; `None` counts every label under the mask.
    pub background: Option<u32>,
    /// Winning scores below this leave the mask unlabeled.
    pub reject_below: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelAssignment {
    /// Winning label id, `None` when unlabeled or rejected.
    pub label: Option<u32>,
    pub score: f64,
    pub ranking: Vec<ScoredLabel>,
}

/// Region match, unique counts, scoring and top-1 selection against one label map.
pub fn assign_label(
    mask: &Mask,
    pixel_labels: &PixelLabelMap,
    params: &AssignParams,
) -> Result<LabelAssignment> {
    let masked = region_match(pixel_labels.labels(), mask)?;
    let counts = unique_counts(&masked, mask, params.background);
    let ranking = match score_labels(&counts.labels, &counts.counts) {
        Ok(r) => r,
        Err(Error::NothingToScore) => {
            return Ok(LabelAssignment {
                label: None,
                score: 0.0,
                ranking: Vec::new(),
            })
        }
        Err(e) => return Err(e),
    };
    let top = ranking[0];
    Ok(LabelAssignment {
        label: (top.score >= params.reject_below).then_some(top.label),
        score: top.score,
        ranking,
    })
}

/// Same pipeline against the color label map; every color id is a real color.
pub fn assign_color(
    mask: &Mask,
    color_labels: &PixelLabelMap,
    reject_below: f64,
) -> Result<LabelAssignment> {
    assign_label(
        mask,
        color_labels,
        &AssignParams {
            background: None,
            reject_below,
        },
    )
}

/// One attributed instance. Field names follow the mask record interchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskRecord {
    #[serde(with = "crate::rle::as_rle")]
    pub segmentation: Mask,
    pub area: u64,
    /// `[x, y, w, h]` in cells with `x` the column (`py`) and `y` the row (`px`).
    pub bbox: [u32; 4],
    pub predicted_iou: f64,
    pub point_coords: Vec<[f64; 2]>,
    pub stability_score: f64,
    pub crop_box: [u32; 4],
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub label_id: u32,
    #[serde(default)]
    pub num_of_same_class: u32,
    #[serde(default)]
    pub color: String,
    /// Winning category score.
    #[serde(default)]
    pub score: f64,
    /// Mask centroid `[row, col]`.
    #[serde(default)]
    pub centroid: [f64; 2],
}

impl MaskRecord {
    pub fn is_labeled(&self) -> bool {
        self.label != UNKNOWN_LABEL && !self.label.is_empty()
    }

    /// Row range `[top, bottom]` and column range `[left, right]`, inclusive.
    pub fn bbox_rows_cols(&self) -> ((u32, u32), (u32, u32)) {
        let [x, y, w, h] = self.bbox;
        ((y, y + h - 1), (x, x + w - 1))
    }

    pub fn centroid_cell(&self) -> (f64, f64) {
        (self.centroid[0], self.centroid[1])
    }
}

pub fn bbox_of(mask: &Mask) -> [u32; 4] {
    match mask.bounds() {
        Some((r0, c0, r1, c1)) => [c0 as u32, r0 as u32, (c1 - c0 + 1) as u32, (r1 - r0 + 1) as u32],
        None => [0; 4],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    pub reject_score: f64,
    /// Category id excluded from mask label counting.
    pub category_background: Option<u32>,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            reject_score: 0.3,
            category_background: None,
        }
    }
}

/// The queryable map: embedding map plus instance ids, color ids and attributed records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IvlMap<T> {
    bundle: MapBundle<T>,
    instance_ids: Raster<u32>,
    color_ids: Raster<u32>,
    records: Vec<MaskRecord>,
    category_labels: PixelLabelMap,
    color_labels: PixelLabelMap,
    categories: Vocabulary,
    colors: Vocabulary,
}

impl<T: Scalar> IvlMap<T> {
    pub fn bundle(&self) -> &MapBundle<T> {
        &self.bundle
    }

    /// Instance id per cell, 0 where no instance.
    pub fn instance_ids(&self) -> &Raster<u32> {
        &self.instance_ids
    }

    /// Color index + 1 per cell, 0 where none.
    pub fn color_ids(&self) -> &Raster<u32> {
        &self.color_ids
    }

    pub fn records(&self) -> &[MaskRecord] {
        &self.records
    }

    pub fn record(&self, label_id: u32) -> Option<&MaskRecord> {
        self.records.iter().find(|r| r.label_id == label_id)
    }

    pub fn category_labels(&self) -> &PixelLabelMap {
        &self.category_labels
    }

    pub fn color_labels(&self) -> &PixelLabelMap {
        &self.color_labels
    }

    pub fn categories(&self) -> &Vocabulary {
        &self.categories
    }

    pub fn colors(&self) -> &Vocabulary {
        &self.colors
    }

    pub fn dims(&self) -> (usize, usize) {
        self.instance_ids.dims()
    }

    pub fn cell_size(&self) -> f64 {
        self.bundle.grid().cell_size.to_f64_decimal()
    }
}

/// Attributes every mask, numbers them with a running id, counts same-class records and
/// paints the instance/color id maps with smaller masks on top.
pub fn build_ivlmap<T: Scalar>(
    bundle: MapBundle<T>,
    masks: &MaskSet,
    category_labels: PixelLabelMap,
    color_labels: PixelLabelMap,
    categories: Vocabulary,
    colors: Vocabulary,
    params: &FusionParams,
) -> Result<IvlMap<T>> {
    let dims = (bundle.grid().h_bar, bundle.grid().w_bar);
    for (what, d) in [
        ("category label map", category_labels.labels().dims()),
        ("color label map", color_labels.labels().dims()),
    ] {
        if d != dims {
            return Err(Error::mismatch(what, format!("{dims:?}"), format!("{d:?}")));
        }
    }
    let assign = AssignParams {
        background: params.category_background,
        reject_below: params.reject_score,
    };
    let mut records = Vec::with_capacity(masks.len());
    for (i, cand) in masks.masks().iter().enumerate() {
        if cand.segmentation.dims() != dims {
            return Err(Error::mismatch(
                format!("mask {i}"),
                format!("{dims:?}"),
                format!("{:?}", cand.segmentation.dims()),
            ));
        }
        let cat = assign_label(&cand.segmentation, &category_labels, &assign)?;
        let col = assign_color(&cand.segmentation, &color_labels, params.reject_score)?;
        let label = cat
            .label
            .and_then(|l| categories.label(l))
            .unwrap_or(UNKNOWN_LABEL)
            .to_string();
        let color = col
            .label
            .and_then(|l| colors.label(l))
            .unwrap_or(UNKNOWN_LABEL)
            .to_string();
        let (cr, cc) = mask_centroid(&cand.segmentation).ok_or(Error::EmptyMask)?;
        records.push(MaskRecord {
            area: cand.segmentation.count_true() as u64,
            bbox: bbox_of(&cand.segmentation),
            segmentation: cand.segmentation.clone(),
            predicted_iou: cand.predicted_iou,
            point_coords: cand.point_coords.clone(),
            stability_score: cand.stability_score,
            crop_box: cand.crop_box,
            label,
            label_id: i as u32 + 1,
            num_of_same_class: 0,
            color,
            score: cat.score,
            centroid: [cr, cc],
        });
    }
    let mut per_label: BTreeMap<String, u32> = BTreeMap::new();
    for r in &records {
        *per_label.entry(r.label.clone()).or_default() += 1;
    }
    for r in &mut records {
        r.num_of_same_class = per_label[&r.label];
    }

    let mut instance_ids = Raster::filled(dims.0, dims.1, 0u32);
    let mut color_ids = Raster::filled(dims.0, dims.1, 0u32);
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|&a, &b| {
        records[b]
            .area
            .cmp(&records[a].area)
            .then(records[a].label_id.cmp(&records[b].label_id))
    });
    for idx in order {
        let r = &records[idx];
        let color_id = colors.index_of(&r.color).map_or(0, |c| c + 1);
        for cell in r.segmentation.true_cells() {
            instance_ids[cell] = r.label_id;
            color_ids[cell] = color_id;
        }
    }
    tracing::info!(
        records = records.len(),
        labeled = records.iter().filter(|r| r.is_labeled()).count(),
        provenance = ?masks.provenance(),
        "instance map assembled"
    );
    Ok(IvlMap {
        bundle,
        instance_ids,
        color_ids,
        records,
        category_labels,
        color_labels,
        categories,
        colors,
    })
}

/// Cells of the instance-id map owned by `label_id`.
pub fn instance_region(map: &Raster<u32>, label_id: u32) -> Vec<Cell> {
    map.iter_cells()
        .filter(|(_, &v)| v == label_id)
        .map(|(c, _)| c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GridSpec;
    use crate::vocab::VocabKind;

    fn rect_mask(h: usize, w: usize, r0: usize, r1: usize, c0: usize, c1: usize) -> Mask {
        Raster::from_fn(h, w, |(r, c)| r >= r0 && r < r1 && c >= c0 && c < c1)
    }

    #[test]
    fn median_removes_checkerboard_noise() {
        let noisy = Raster::from_fn(12, 12, |(r, c)| if (r + c) % 2 == 0 && r % 3 == 0 { 5 } else { 0 });
        let smooth = median_smooth(&noisy);
        assert!(smooth.as_slice().iter().all(|&l| l == 0));
        let masks = surrogate_segment(&PixelLabelMap::from_labels(noisy), &[0], 1);
        assert!(masks.is_empty());
    }

    #[test]
    fn two_rectangles_give_two_masks() {
        let mut labels = Raster::filled(20, 20, 0u32);
        for (r, c) in rect_mask(20, 20, 2, 7, 2, 8).true_cells() {
            labels[(r, c)] = 2;
        }
        for (r, c) in rect_mask(20, 20, 10, 16, 9, 15).true_cells() {
            labels[(r, c)] = 2;
        }
        let set = surrogate_segment(&PixelLabelMap::from_labels(labels.clone()), &[0], 4);
        assert_eq!(set.len(), 2);
        assert_eq!(set.provenance(), MaskProvenance::SurrogateSegmenter);
        // smoothing removes the 4 corners of each rectangle
        assert_eq!(set.masks()[0].segmentation.count_true(), 5 * 6 - 4);
        // small component is dropped
        labels[(18, 18)] = 3;
        labels[(18, 19)] = 3;
        labels[(19, 18)] = 3;
        labels[(19, 19)] = 3;
        let set = surrogate_segment(&PixelLabelMap::from_labels(labels), &[0], 4);
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn component_brute_force_agreement() {
        // Label raster with a diagonal touch: 4-connectivity keeps them apart.
        let mut labels = Raster::filled(5, 5, 0u32);
        labels[(1, 1)] = 1;
        labels[(2, 2)] = 1;
        labels[(2, 3)] = 1;
        let comps = label_components(&labels, &[0], 1);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].count_true(), 1);
        assert_eq!(comps[1].count_true(), 2);
    }

    #[test]
    fn region_match_cases() {
        let labels = Raster::from_fn(4, 4, |(r, c)| (r * 4 + c) as u32 % 3);
        let all = Mask::filled(4, 4, true);
        assert_eq!(region_match(&labels, &all).unwrap(), labels);
        assert!(matches!(
            region_match(&labels, &Mask::filled(4, 4, false)),
            Err(Error::EmptyMask)
        ));
        let half = Raster::from_fn(4, 4, |(_, c)| c < 2);
        let m = region_match(&labels, &half).unwrap();
        for (cell, &v) in m.iter_cells() {
            assert_eq!(v, if cell.1 < 2 { labels[cell] } else { 0 });
        }
    }

    #[test]
    fn unique_count_examples() {
        // 70 chair (id 2) + 30 floor-like id 5 in a 10x10 mask
        let labels = Raster::from_fn(10, 10, |(r, _)| if r < 7 { 2 } else { 5 });
        let mask = Mask::filled(10, 10, true);
        let masked = region_match(&labels, &mask).unwrap();
        let counts = unique_counts(&masked, &mask, Some(0));
        assert_eq!(counts.labels, vec![2, 5]);
        assert_eq!(counts.counts, vec![70, 30]);
        assert_eq!(counts.counts.iter().sum::<u64>() + counts.background, 100);
        let uniform = Raster::filled(3, 3, 4u32);
        let m = Mask::filled(3, 3, true);
        let c = unique_counts(&uniform, &m, Some(0));
        assert_eq!((c.labels, c.counts), (vec![4], vec![9]));
        let bg = Raster::filled(3, 3, 0u32);
        let c = unique_counts(&bg, &m, Some(0));
        assert!(c.labels.is_empty());
        assert_eq!(c.background, 9);
    }

    #[test]
    fn score_examples() {
        let s = score_labels(&[2, 5], &[70, 30]).unwrap();
        assert_eq!(s[0], ScoredLabel { label: 2, score: 0.7 });
        assert_eq!(s[1], ScoredLabel { label: 5, score: 0.3 });
        let s = score_labels(&[7, 3], &[50, 50]).unwrap();
        assert_eq!((s[0].label, s[0].score, s[1].label), (3, 0.5, 7));
        let s = score_labels(&[1], &[100]).unwrap();
        assert_eq!(s[0].score, 1.0);
        assert!(matches!(score_labels(&[], &[]), Err(Error::NothingToScore)));
    }

    #[test]
    fn assign_label_examples() {
        let params = AssignParams {
            background: Some(0),
            reject_below: 0.3,
        };
        let labels = Raster::from_fn(10, 10, |(r, _)| if r < 7 { 2 } else { 3 });
        let mask = Mask::filled(10, 10, true);
        let a = assign_label(&mask, &PixelLabelMap::from_labels(labels), &params).unwrap();
        assert_eq!((a.label, a.score), (Some(2), 0.7));
        let pure = PixelLabelMap::from_labels(Raster::filled(10, 10, 4));
        assert_eq!(assign_label(&mask, &pure, &params).unwrap().score, 1.0);
        // four labels at 25% each: below the reject threshold
        let ambiguous = Raster::from_fn(10, 10, |(r, c)| 1 + ((r / 5) * 2 + c / 5) as u32);
        let a = assign_label(&mask, &PixelLabelMap::from_labels(ambiguous), &params).unwrap();
        assert_eq!(a.label, None);
        assert_eq!(a.score, 0.25);
        let a = assign_label(&mask, &PixelLabelMap::from_labels(Raster::filled(10, 10, 0)), &params)
            .unwrap();
        assert_eq!(a.label, None);
    }

    #[test]
    fn assign_color_ties_pick_lower_index() {
        let colors = Raster::from_fn(4, 4, |(_, c)| if c < 2 { 4 } else { 0 });
        let a = assign_color(&Mask::filled(4, 4, true), &PixelLabelMap::from_labels(colors), 0.3)
            .unwrap();
        assert_eq!(a.label, Some(0));
    }

    fn fixture_vocab() -> (Vocabulary, Vocabulary) {
        (
            Vocabulary::new(
                ["floor", "wall", "chair", "table"].map(String::from).to_vec(),
                VocabKind::Category,
            )
            .unwrap(),
            Vocabulary::new(["gray", "yellow", "red"].map(String::from).to_vec(), VocabKind::Color)
                .unwrap(),
        )
    }

    fn bundle(h: usize, w: usize) -> MapBundle<f64> {
        MapBundle::new(
            GridSpec {
                h_bar: h,
                w_bar: w,
                cell_size: 0.05,
                robot_height: 1.5,
            },
            2,
        )
        .unwrap()
    }

    #[test]
    fn overlapping_masks_smaller_on_top() {
        let (cats, cols) = fixture_vocab();
        let big = rect_mask(20, 20, 0, 10, 0, 10);
        let small = rect_mask(20, 20, 6, 14, 6, 11);
        assert_eq!(big.count_true(), 100);
        assert_eq!(small.count_true(), 40);
        let cat = PixelLabelMap::from_labels(Raster::filled(20, 20, 3));
        let col = PixelLabelMap::from_labels(Raster::from_fn(20, 20, |(r, _)| if r >= 6 { 2 } else { 1 }));
        let masks = MaskSet::new(
            vec![MaskCandidate::from_mask(big.clone()), MaskCandidate::from_mask(small.clone())],
            MaskProvenance::ExternalFile,
            (20, 20),
        )
        .unwrap();
        let map = build_ivlmap(bundle(20, 20), &masks, cat, col, cats, cols, &FusionParams::default())
            .unwrap();
        let ids = map.instance_ids();
        for cell in small.true_cells() {
            assert_eq!(ids[cell], 2);
        }
        for cell in big.true_cells() {
            if !small[cell] {
                assert_eq!(ids[cell], 1);
            }
        }
        assert_eq!(ids[(19, 19)], 0);
        // color map agrees with the owning record on every painted cell
        for (cell, &id) in ids.iter_cells() {
            if id == 0 {
                assert_eq!(map.color_ids()[cell], 0);
                continue;
            }
            let rec = map.record(id).unwrap();
            assert_eq!(map.color_ids()[cell], map.colors().index_of(&rec.color).unwrap() + 1);
        }
        assert_eq!(map.records()[0].color, "yellow");
        assert_eq!(map.records()[1].color, "red");
        assert_eq!(map.records()[0].num_of_same_class, 2);
    }

    #[test]
    fn records_carry_interchange_fields() {
        let (cats, cols) = fixture_vocab();
        let mut masks = Vec::new();
        for i in 0..5 {
            masks.push(MaskCandidate::from_mask(rect_mask(30, 30, i * 6, i * 6 + 4, 0, 5)));
        }
        masks.push(MaskCandidate::from_mask(rect_mask(30, 30, 0, 4, 20, 30)));
        let set = MaskSet::new(masks, MaskProvenance::ExternalFile, (30, 30)).unwrap();
        let cat = PixelLabelMap::from_labels(Raster::from_fn(30, 30, |(_, c)| if c < 10 { 0 } else { 2 }));
        let col = PixelLabelMap::from_labels(Raster::filled(30, 30, 1));
        let map = build_ivlmap(bundle(30, 30), &set, cat, col, cats, cols, &FusionParams::default())
            .unwrap();
        let floor: Vec<_> = map.records().iter().filter(|r| r.label == "floor").collect();
        assert_eq!(floor.len(), 5);
        assert!(floor.iter().all(|r| r.num_of_same_class == 5 && r.color == "yellow"));
        let chair = map.records().iter().find(|r| r.label == "chair").unwrap();
        assert_eq!(chair.num_of_same_class, 1);
        assert_eq!(chair.bbox, [20, 0, 10, 4]);
        assert_eq!(chair.area, 40);
        let ids: Vec<u32> = map.records().iter().map(|r| r.label_id).collect();
        assert_eq!(ids, vec![1, 2, 3, 4, 5, 6]);
        let json = serde_json::to_value(chair).unwrap();
        for key in [
            "segmentation",
            "area",
            "bbox",
            "predicted_iou",
            "point_coords",
            "stability_score",
            "crop_box",
            "label",
            "label_id",
            "num_of_same_class",
            "color",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        let back: MaskRecord = serde_json::from_value(json).unwrap();
        assert_eq!(&back, chair);
    }

    #[test]
    fn mask_set_validation() {
        assert!(MaskSet::new(
            vec![MaskCandidate::from_mask(Mask::filled(3, 3, false))],
            MaskProvenance::ExternalFile,
            (3, 3)
        )
        .is_err());
        assert!(MaskSet::new(
            vec![MaskCandidate::from_mask(Mask::filled(3, 4, true))],
            MaskProvenance::ExternalFile,
            (3, 3)
        )
        .is_err());
    }
}
