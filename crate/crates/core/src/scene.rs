//! Deterministic synthetic scenes: a walled room of box-shaped objects on the map grid,
//! rendered as top-down RGB-D frames with one-hot-plus-noise pixel embeddings.
//!
//! Frames are top-down consistent: each pixel's semantics are looked up at the cell the
//! mapping engine itself assigns to the pixel's quantized depth, so a noiseless build
//! reproduces the ground-truth rasters on every observed cell.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::{GridConfig, VocabConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    backproject, project_to_grid, to_world, yaw_rotation, CameraIntrinsics, GridSpec, Mat3, Pose,
};
use crate::mapping::FrameInput;
use crate::raster::{Cell, Raster, Tensor3};
use crate::scalar::Scalar;
use crate::vocab::{LabelEmbeddings, Vocabulary};

/// Axis-aligned box object; `rows`/`cols` are half-open cell ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub category: String,
    pub color: String,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    pub height_m: f64,
}

impl ObjectSpec {
    fn expanded_overlaps(&self, other: &ObjectSpec, margin: usize) -> bool {
        let (r0, r1) = (self.rows.0.saturating_sub(margin), self.rows.1 + margin);
        let (c0, c1) = (self.cols.0.saturating_sub(margin), self.cols.1 + margin);
        r0 < other.rows.1 && other.rows.0 < r1 && c0 < other.cols.1 && other.cols.0 < c1
    }

    pub fn centroid(&self) -> (f64, f64) {
        (
            (self.rows.0 + self.rows.1 - 1) as f64 / 2.0,
            (self.cols.0 + self.cols.1 - 1) as f64 / 2.0,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub frames: usize,
    pub altitude_m: f64,
    pub width: usize,
    pub height: usize,
    pub focal_px: f64,
    /// Raw depth units per meter are `1 / depth_scale`.
    pub depth_scale: f64,
}

impl Default for CameraSpec {
    fn default() -> Self {
        Self {
            frames: 25,
            altitude_m: 4.0,
            width: 200,
            height: 200,
            focal_px: 90.0,
            depth_scale: 0.001,
        }
    }
}

impl CameraSpec {
    pub fn intrinsics<T: Scalar>(&self) -> CameraIntrinsics<T> {
        CameraIntrinsics {
            fx: T::from_f64_lossy(self.focal_px),
            fy: T::from_f64_lossy(self.focal_px),
            cx: T::from_f64_lossy((self.width as f64 - 1.0) / 2.0),
            cy: T::from_f64_lossy((self.height as f64 - 1.0) / 2.0),
            depth_scale: T::from_f64_lossy(self.depth_scale),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub seed: u64,
    pub grid: GridConfig,
    /// Room cell ranges (half-open) including the one-cell wall ring.
    pub room_rows: (usize, usize),
    pub room_cols: (usize, usize),
    pub wall_height_m: f64,
    pub objects: Vec<ObjectSpec>,
    pub noise_sigma: f64,
    pub camera: CameraSpec,
}

pub const FLOOR: &str = "floor";
pub const WALL: &str = "wall";
pub const FLOOR_COLOR: &str = "gray";
pub const WALL_COLOR: &str = "white";

/// Knobs for random furnished rooms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomRoom {
    pub room_m: (f64, f64),
    pub objects: usize,
    pub object_colors: Vec<String>,
    pub min_gap_m: f64,
    pub noise_sigma: f64,
    pub camera: CameraSpec,
    pub grid: GridConfig,
}

impl Default for RandomRoom {
    fn default() -> Self {
        Self {
            room_m: (10.0, 10.0),
            objects: 14,
            object_colors: ["black", "red", "yellow", "blue", "green", "brown"]
                .map(String::from)
                .to_vec(),
            min_gap_m: 0.5,
            noise_sigma: 0.0,
            camera: CameraSpec::default(),
            grid: GridConfig::default(),
        }
    }
}

/// Footprint range (meters, short × long side) and height for each furniture type.
const FURNITURE: [(&str, (f64, f64), (f64, f64), f64); 8] = [
    ("chair", (0.45, 0.6), (0.45, 0.6), 0.9),
    ("table", (0.8, 1.2), (1.0, 1.8), 0.75),
    ("sofa", (0.8, 1.0), (1.6, 2.2), 0.8),
    ("bed", (1.0, 1.2), (1.8, 2.1), 0.6),
    ("cabinet", (0.4, 0.6), (0.8, 1.2), 1.2),
    ("plant", (0.4, 0.5), (0.4, 0.5), 1.0),
    ("toilet", (0.4, 0.5), (0.6, 0.7), 0.8),
    ("tv", (0.3, 0.4), (0.9, 1.3), 1.1),
];

fn cells_of(m: f64, s: f64) -> usize {
    (m / s).round().max(1.0) as usize
}

impl SceneSpec {
    /// Random room centered on the grid, objects placed by seeded rejection sampling.
    pub fn random(seed: u64, p: &RandomRoom) -> Result<Self> {
        let s = p.grid.cell_size_m;
        let (rh, rw) = (cells_of(p.room_m.0, s) + 2, cells_of(p.room_m.1, s) + 2);
        if rh > p.grid.rows || rw > p.grid.cols {
            return Err(Error::invalid("scene", "room does not fit on the grid"));
        }
        let r0 = (p.grid.rows - rh) / 2;
        let c0 = (p.grid.cols - rw) / 2;
        let gap = cells_of(p.min_gap_m, s);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut objects: Vec<ObjectSpec> = Vec::new();
        let mut attempts = 0;
        while objects.len() < p.objects && attempts < 20_000 {
            attempts += 1;
            let (cat, short, long, height) = FURNITURE[rng.random_range(0..FURNITURE.len())];
            let a = cells_of(rng.random_range(short.0..=short.1), s);
            let b = cells_of(rng.random_range(long.0..=long.1), s);
            let (h, w) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
            // inner area is rows r0+1 .. r0+rh-1; keep `gap` from the wall ring
            let lo_r = r0 + 1 + gap;
            let lo_c = c0 + 1 + gap;
            let hi_r = (r0 + rh - 1).saturating_sub(gap + h);
            let hi_c = (c0 + rw - 1).saturating_sub(gap + w);
            if hi_r < lo_r || hi_c < lo_c {
                continue;
            }
            let pr = rng.random_range(lo_r..=hi_r);
            let pc = rng.random_range(lo_c..=hi_c);
            let color = p.object_colors[rng.random_range(0..p.object_colors.len())].clone();
            let cand = ObjectSpec {
                category: cat.to_string(),
                color,
                rows: (pr, pr + h),
                cols: (pc, pc + w),
                height_m: height,
            };
            if objects.iter().all(|o| !cand.expanded_overlaps(o, gap)) {
                objects.push(cand);
            }
        }
        Ok(Self {
            seed,
            grid: p.grid.clone(),
            room_rows: (r0, r0 + rh),
            room_cols: (c0, c0 + rw),
            wall_height_m: 1.0,
            objects,
            noise_sigma: p.noise_sigma,
            camera: p.camera.clone(),
        })
    }

    pub fn validate(&self, vocab: &VocabConfig) -> Result<()> {
        let cats = vocab.category_vocab()?;
        let colors = vocab.color_vocab()?;
        for name in [FLOOR, WALL] {
            if cats.index_of(name).is_none() {
                return Err(Error::invalid("scene", format!("vocabulary lacks {name:?}")));
            }
        }
        for name in [FLOOR_COLOR, WALL_COLOR] {
            if colors.index_of(name).is_none() {
                return Err(Error::invalid("scene", format!("color vocabulary lacks {name:?}")));
            }
        }
        let (rr, rc) = (self.room_rows, self.room_cols);
        if rr.1 > self.grid.rows || rc.1 > self.grid.cols || rr.1 < rr.0 + 3 || rc.1 < rc.0 + 3 {
            return Err(Error::invalid("scene", "room must fit on the grid with an interior"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::invalid("scene", "noise sigma must be finite and non-negative"));
        }
        if self.camera.frames == 0 {
            return Err(Error::invalid("scene", "camera path needs at least one frame"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if cats.index_of(&o.category).is_none() || colors.index_of(&o.color).is_none() {
                return Err(Error::invalid(
                    "scene",
                    format!("object {i} uses a category or color outside the vocabulary"),
                ));
            }
            let inside = o.rows.0 > rr.0 && o.rows.1 < rr.1 && o.cols.0 > rc.0 && o.cols.1 < rc.1;
            if !inside || o.rows.1 <= o.rows.0 || o.cols.1 <= o.cols.0 {
                return Err(Error::invalid("scene", format!("object {i} is not inside the room")));
            }
            if !(o.height_m > 0.0 && o.height_m < self.grid.robot_height_m) {
                return Err(Error::invalid(
                    "scene",
                    format!("object {i} must be lower than the robot height"),
                ));
            }
            for (j, p) in self.objects.iter().enumerate().skip(i + 1) {
                if o.expanded_overlaps(p, 0) {
                    return Err(Error::invalid("scene", format!("objects {i} and {j} overlap")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtObject {
    /// 1-based, in spec order.
    pub id: u32,
    pub category: String,
    pub color: String,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
    /// `(row, col)` of the box center.
    pub centroid: (f64, f64),
}

/// Ground-truth rasters on the map grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Top surface height; `None` outside the room.
    pub surface: Raster<Option<f64>>,
    pub category: Raster<u32>,
    pub color: Raster<u32>,
    /// Object id, 0 for floor, wall and outside.
    pub instance: Raster<u32>,
    pub objects: Vec<GtObject>,
}

impl GroundTruth {
    pub fn has_surface(&self, cell: Cell) -> bool {
        self.surface[cell].is_some()
    }
}

/// A generated scene: its spec, vocabularies and ground truth. Frames are rendered on
/// demand.
#[derive(Clone, Debug)]
pub struct SyntheticScene {
    spec: SceneSpec,
    categories: Vocabulary,
    colors: Vocabulary,
    gt: GroundTruth,
}

/// Display RGB for a color name.
pub fn color_rgb(name: &str) -> [u8; 3] {
    match name {
        "gray" => [128, 128, 128],
        "white" => [235, 235, 235],
        "black" => [25, 25, 25],
        "red" => [200, 35, 35],
        "yellow" => [230, 205, 40],
        "blue" => [40, 70, 200],
        "green" => [45, 160, 60],
        "brown" => [130, 80, 40],
        other => {
            let h = other.bytes().fold(7u32, |a, b| a.wrapping_mul(31).wrapping_add(b as u32));
            [(h >> 16) as u8, (h >> 8) as u8, h as u8]
        }
    }
}

/// Row-major camera poses along a serpentine over the room interior, looking straight
/// down, yawed by a quarter turn per frame.
pub fn camera_path<T: Scalar>(spec: &SceneSpec) -> Vec<Pose<T>> {
    let grid: GridSpec<f64> = spec.grid.spec();
    let n = spec.camera.frames;
    let m = (n as f64).sqrt().ceil() as usize;
    let (r0, r1) = (spec.room_rows.0 + 1, spec.room_rows.1 - 1);
    let (c0, c1) = (spec.room_cols.0 + 1, spec.room_cols.1 - 1);
    let down = Mat3([
        [T::zero(), T::one(), T::zero()],
        [T::zero(), T::zero(), -T::one()],
        [-T::one(), T::zero(), T::zero()],
    ]);
    (0..n)
        .map(|k| {
            let row = k / m;
            let mut col = k % m;
            if row % 2 == 1 {
                col = m - 1 - col;
            }
            let pr = r0 as f64 + (row as f64 + 0.5) / m as f64 * (r1 - r0) as f64;
            let pc = c0 as f64 + (col as f64 + 0.5) / m as f64 * (c1 - c0) as f64;
            let s = grid.cell_size;
            let x = (pr - grid.h_bar as f64 / 2.0) * s;
            let z = -(pc - grid.w_bar as f64 / 2.0) * s;
            let yaw = T::from_f64_lossy(((k % 4) as f64 * 90.0).to_radians());
            let rot = yaw_rotation(yaw).mul(&down);
            Pose::new(
                rot,
                [
                    T::from_f64_lossy(x),
                    T::from_f64_lossy(spec.camera.altitude_m),
                    T::from_f64_lossy(z),
                ],
            )
        })
        .collect()
}

impl SyntheticScene {
    pub fn new(spec: SceneSpec, vocab: &VocabConfig) -> Result<Self> {
        spec.validate(vocab)?;
        let categories = vocab.category_vocab()?;
        let colors = vocab.color_vocab()?;
        let (h, w) = (spec.grid.rows, spec.grid.cols);
        let mut surface = Raster::filled(h, w, None);
        let mut category = Raster::filled(h, w, 0u32);
        let mut color = Raster::filled(h, w, 0u32);
        let mut instance = Raster::filled(h, w, 0u32);
        let floor = categories.index_of(FLOOR).expect("validated");
        let wall = categories.index_of(WALL).expect("validated");
        let gray = colors.index_of(FLOOR_COLOR).expect("validated");
        let white = colors.index_of(WALL_COLOR).expect("validated");
        let (rr, rc) = (spec.room_rows, spec.room_cols);
        for r in rr.0..rr.1 {
            for c in rc.0..rc.1 {
                let ring = r == rr.0 || r == rr.1 - 1 || c == rc.0 || c == rc.1 - 1;
                if ring {
                    surface[(r, c)] = Some(spec.wall_height_m);
                    category[(r, c)] = wall;
                    color[(r, c)] = white;
                } else {
                    surface[(r, c)] = Some(0.0);
                    category[(r, c)] = floor;
                    color[(r, c)] = gray;
                }
            }
        }
        let mut objects = Vec::new();
        for (i, o) in spec.objects.iter().enumerate() {
            let id = i as u32 + 1;
            let cat = categories.index_of(&o.category).expect("validated");
            let col = colors.index_of(&o.color).expect("validated");
            for r in o.rows.0..o.rows.1 {
                for c in o.cols.0..o.cols.1 {
                    surface[(r, c)] = Some(o.height_m);
                    category[(r, c)] = cat;
                    color[(r, c)] = col;
                    instance[(r, c)] = id;
                }
            }
            objects.push(GtObject {
                id,
                category: o.category.clone(),
                color: o.color.clone(),
                rows: o.rows,
                cols: o.cols,
                centroid: o.centroid(),
            });
        }
        Ok(Self {
            spec,
            categories,
            colors,
            gt: GroundTruth {
                surface,
                category,
                color,
                instance,
                objects,
            },
        })
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.gt
    }

    pub fn categories(&self) -> &Vocabulary {
        &self.categories
    }

    pub fn colors(&self) -> &Vocabulary {
        &self.colors
    }

    pub fn embed_dim(&self) -> usize {
        self.categories.len() + self.colors.len()
    }

    pub fn frame_count(&self) -> usize {
        self.spec.camera.frames
    }

    pub fn intrinsics<T: Scalar>(&self) -> CameraIntrinsics<T> {
        self.spec.camera.intrinsics()
    }

    /// One-hot rows inside the category block of the embedding space.
    pub fn category_embeddings<T: Scalar>(&self) -> LabelEmbeddings<T> {
        self.block_embeddings(&self.categories, 0)
    }

    /// One-hot rows inside the color block of the embedding space.
    pub fn color_embeddings<T: Scalar>(&self) -> LabelEmbeddings<T> {
        self.block_embeddings(&self.colors, self.categories.len())
    }

    fn block_embeddings<T: Scalar>(&self, vocab: &Vocabulary, offset: usize) -> LabelEmbeddings<T> {
        let c = self.embed_dim();
        let mut data = vec![T::zero(); vocab.len() * c];
        for k in 0..vocab.len() {
            data[k * c + offset + k] = T::one();
        }
        LabelEmbeddings::load(vocab, vocab.len(), c, data).expect("one-hot rows are valid")
    }

    fn max_surface(&self) -> f64 {
        self.gt
            .surface
            .as_slice()
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b))
    }

    /// First intersection of a world ray with the heightfield, as the ray parameter.
    fn trace(&self, origin: [f64; 3], dir: [f64; 3], top: f64) -> Option<f64> {
        // nothing can be hit above the tallest surface
        let skip = if dir[1] < 0.0 { ((origin[1] - top) / -dir[1]).max(0.0) } else { 0.0 };
        let origin = [
            origin[0] + skip * dir[0],
            origin[1] + skip * dir[1],
            origin[2] + skip * dir[2],
        ];
        self.trace_from(origin, dir).map(|t| t + skip)
    }

    fn trace_from(&self, origin: [f64; 3], dir: [f64; 3]) -> Option<f64> {
        let grid: GridSpec<f64> = self.spec.grid.spec();
        let s = grid.cell_size;
        let (h, w) = (grid.h_bar as i64, grid.w_bar as i64);
        let fx0 = grid.h_bar as f64 / 2.0 + origin[0] / s + 0.5;
        let fy0 = grid.w_bar as f64 / 2.0 - origin[2] / s + 0.5;
        let (dfx, dfy) = (dir[0] / s, -dir[2] / s);
        let (a, dy) = (origin[1], dir[1]);
        if dy >= 0.0 {
            return None;
        }
        let (mut i, mut j) = (fx0.floor() as i64, fy0.floor() as i64);
        let axis = |f0: f64, d: f64, k: i64| -> (i64, f64, f64) {
            if d > 0.0 {
                (1, (k as f64 + 1.0 - f0) / d, 1.0 / d)
            } else if d < 0.0 {
                (-1, (f0 - k as f64) / -d, -1.0 / d)
            } else {
                (0, f64::INFINITY, f64::INFINITY)
            }
        };
        let (si, mut ti, di) = axis(fx0, dfx, i);
        let (sj, mut tj, dj) = axis(fy0, dfy, j);
        let mut t_in = 0.0;
        loop {
            let inside = i >= 0 && j >= 0 && i < h && j < w;
            if !inside && (t_in > 0.0) {
                return None;
            }
            let t_out = ti.min(tj);
            if inside {
                if let Some(top) = self.gt.surface[(i as usize, j as usize)] {
                    if a + t_in * dy <= top {
                        return (t_in > 0.0).then_some(t_in);
                    }
                    if a + t_out * dy <= top {
                        return Some((top - a) / dy);
                    }
                }
            }
            if a + t_out * dy < -1.0 {
                return None;
            }
            if ti < tj {
                i += si;
                t_in = ti;
                ti += di;
            } else {
                j += sj;
                t_in = tj;
                tj += dj;
            }
        }
    }

    /// Renders frame `index`. Deterministic in `(seed, index)`.
    pub fn frame<T: Scalar>(&self, index: usize) -> Result<FrameInput<T>> {
        if index >= self.frame_count() {
            return Err(Error::IndexOutOfRange {
                what: "frame".into(),
                index,
                available: self.frame_count(),
            });
        }
        let pose: Pose<T> = camera_path(&self.spec)[index];
        let intr: CameraIntrinsics<T> = self.intrinsics();
        let grid: GridSpec<T> = self.spec.grid.spec();
        let cam = &self.spec.camera;
        let (ih, iw) = (cam.height, cam.width);
        let c = self.embed_dim();
        let ncat = self.categories.len();
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.spec.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
        );
        let rot64 = Mat3(pose.rotation.0.map(|r| r.map(|v| v.to_f64_lossy())));
        let origin = pose.translation.map(|v| v.to_f64_lossy());
        let (cx, cy) = ((iw as f64 - 1.0) / 2.0, (ih as f64 - 1.0) / 2.0);
        let mut rgb = Raster::filled(ih, iw, [0u8; 3]);
        let mut depth = Raster::filled(ih, iw, T::zero());
        let mut emb = Tensor3::filled(ih, iw, c, T::zero());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![0.0f64; c];
        let top = self.max_surface() + 1e-9;
        for row in 0..ih {
            for col in 0..iw {
                let d_cam = [
                    (col as f64 - cx) / cam.focal_px,
                    (row as f64 - cy) / cam.focal_px,
                    1.0,
                ];
                let dir = rot64.mul_vec(&d_cam);
                let Some(t) = self.trace(origin, dir, top) else {
                    continue;
                };
                let raw = (t / cam.depth_scale).round();
                if !(raw >= 1.0 && raw <= u16::MAX as f64) {
                    continue;
                }
                let raw_t = T::from_f64_lossy(raw);
                // Where the engine will put this pixel.
                let Some(cell) = backproject(row, col, raw_t, &intr)
                    .map(|p| to_world(&p, &pose))
                    .and_then(|p| project_to_grid(&p, &grid))
                else {
                    continue;
                };
                if !self.gt.has_surface(cell) {
                    continue;
                }
                depth[(row, col)] = raw_t;
                let cat = self.gt.category[cell] as usize;
                let colr = self.gt.color[cell] as usize;
                rgb[(row, col)] = color_rgb(self.colors.labels()[colr].as_str());
                v.iter_mut().for_each(|x| *x = 0.0);
                v[cat] = inv_sqrt2;
                v[ncat + colr] = inv_sqrt2;
                if self.spec.noise_sigma > 0.0 {
                    for x in v.iter_mut() {
                        let n: f64 = rng.sample(StandardNormal);
                        *x += self.spec.noise_sigma * n;
                    }
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let dst = emb.pixel_mut((row, col));
                if norm > 0.0 {
                    for k in 0..c {
                        dst[k] = T::from_f64_lossy(v[k] / norm);
                    }
                }
            }
        }
        Ok(FrameInput {
            rgb,
            depth,
            pose,
            embeddings: emb,
        })
    }

    /// Pixel-wise accuracy of a category label raster against ground truth, over room
    /// cells the map observed.
    pub fn label_accuracy(&self, labels: &Raster<u32>, observed: impl Fn(Cell) -> bool) -> f64 {
        let (mut hit, mut n) = (0usize, 0usize);
        for (cell, gt) in self.gt.category.iter_cells() {
            if self.gt.has_surface(cell) && observed(cell) {
                n += 1;
                hit += (labels[cell] == *gt) as usize;
            }
        }
        if n == 0 {
            0.0
        } else {
            hit as f64 / n as f64
        }
    }
}

/// Four tables of one color in a row (left to right by column) plus a few extras.
pub fn tables_in_a_row(seed: u64, color: &str) -> SceneSpec {
    let mut spec = SceneSpec::random(
        seed,
        &RandomRoom {
            objects: 0,
            ..RandomRoom::default()
        },
    )
    .expect("default room fits");
    let (r0, c0) = (spec.room_rows.0, spec.room_cols.0);
    // staggered rows so the column order differs from the row order
    for (k, dr) in [40usize, 70, 30, 60].into_iter().enumerate() {
        let cc = c0 + 20 + k * 40;
        spec.objects.push(ObjectSpec {
            category: "table".into(),
            color: color.into(),
            rows: (r0 + dr, r0 + dr + 20),
            cols: (cc, cc + 24),
            height_m: 0.75,
        });
    }
    spec.objects.push(ObjectSpec {
        category: "sofa".into(),
        color: "red".into(),
        rows: (r0 + 130, r0 + 150),
        cols: (c0 + 40, c0 + 80),
        height_m: 0.8,
    });
    spec.objects.push(ObjectSpec {
        category: "chair".into(),
        color: "black".into(),
        rows: (r0 + 130, r0 + 141),
        cols: (c0 + 130, c0 + 141),
        height_m: 0.9,
    });
    spec
}

/// Shuffles `items` with a seeded generator.
pub fn seeded_shuffle<T>(items: &mut [T], seed: u64) {
    items.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
}
