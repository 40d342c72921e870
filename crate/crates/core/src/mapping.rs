//! Frame fusion into the bird's-eye color map, height map and embedding map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{backproject, project_to_grid, to_world, CameraIntrinsics, GridSpec, Pose};
use crate::raster::{Cell, Raster, Tensor3};
use crate::scalar::Scalar;
use crate::vocab::PixelLabelMap;

/// One RGB-D frame with its pose and per-pixel visual-language embeddings.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameInput<T> {
    pub rgb: Raster<[u8; 3]>,
    /// Raw depth units; multiplied by the intrinsics' depth scale.
    pub depth: Raster<T>,
    pub pose: Pose<T>,
    pub embeddings: Tensor3<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrationParams<T> {
    pub intrinsics: CameraIntrinsics<T>,
    /// Points farther than this (meters along the optical axis) are dropped.
    pub max_depth: T,
}

/// Per-frame pixel accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStats {
    pub pixels: usize,
    pub used: usize,
    pub invalid_depth: usize,
    pub beyond_max_depth: usize,
    pub above_robot_height: usize,
    pub out_of_bounds: usize,
    pub height_updates: usize,
}

impl FrameStats {
    pub fn skipped(&self) -> usize {
        self.invalid_depth + self.beyond_max_depth + self.above_robot_height + self.out_of_bounds
    }

    pub fn accumulate(&mut self, other: &FrameStats) {
        self.pixels += other.pixels;
        self.used += other.used;
        self.invalid_depth += other.invalid_depth;
        self.beyond_max_depth += other.beyond_max_depth;
        self.above_robot_height += other.above_robot_height;
        self.out_of_bounds += other.out_of_bounds;
        self.height_updates += other.height_updates;
    }
}

/// Reconstruction map, height map, embedding map and observation counts on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapBundle<T> {
    grid: GridSpec<T>,
    bev_color: Raster<[u8; 3]>,
    height: Raster<T>,
    embedding: Tensor3<T>,
    obs_count: Raster<u32>,
}

impl<T: Scalar> MapBundle<T> {
    pub fn new(grid: GridSpec<T>, embed_dim: usize) -> Result<Self> {
        grid.validate()?;
        if embed_dim == 0 {
            return Err(Error::invalid("embedding dimension", "must be at least 1"));
        }
        let (h, w) = (grid.h_bar, grid.w_bar);
        Ok(Self {
            grid,
            bev_color: Raster::filled(h, w, [0; 3]),
            height: Raster::filled(h, w, T::infinity()),
            embedding: Tensor3::filled(h, w, embed_dim, T::zero()),
            obs_count: Raster::filled(h, w, 0),
        })
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.channels()
    }

    pub fn bev_color(&self) -> &Raster<[u8; 3]> {
        &self.bev_color
    }

    /// Lowest observed height per cell; `+∞` where nothing was observed.
    pub fn height(&self) -> &Raster<T> {
        &self.height
    }

    pub fn embedding(&self) -> &Tensor3<T> {
        &self.embedding
    }

    pub fn obs_count(&self) -> &Raster<u32> {
        &self.obs_count
    }

    pub fn is_observed(&self, cell: Cell) -> bool {
        self.obs_count[cell] > 0
    }

    pub fn observed_cells(&self) -> usize {
        self.obs_count.as_slice().iter().filter(|&&n| n > 0).count()
    }

    pub fn total_observations(&self) -> u64 {
        self.obs_count.as_slice().iter().map(|&n| n as u64).sum()
    }

    fn check_frame(&self, frame: &FrameInput<T>) -> Result<()> {
        let dims = frame.rgb.dims();
        if frame.depth.dims() != dims {
            return Err(Error::mismatch(
                "depth image",
                format!("{dims:?}"),
                format!("{:?}", frame.depth.dims()),
            ));
        }
        let (er, ec, ech) = frame.embeddings.dims();
        if (er, ec) != dims {
            return Err(Error::mismatch(
                "pixel embeddings",
                format!("{dims:?}"),
                format!("{:?}", (er, ec)),
            ));
        }
        if ech != self.embed_dim() {
            return Err(Error::mismatch(
                "embedding channels",
                self.embed_dim(),
                ech,
            ));
        }
        if frame.embeddings.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("pixel embeddings".into()));
        }
        frame.pose.validate(Pose::<T>::ORTHONORMAL_TOLERANCE.max(T::epsilon().to_f64_lossy() * 64.0))
    }

    /// Fuses one frame. Heights only ever decrease; the color of the lowest point wins and
    /// every pixel below the robot height contributes to its cell's running-mean embedding.
    pub fn integrate_frame(
        &mut self,
        frame: &FrameInput<T>,
        params: &IntegrationParams<T>,
    ) -> Result<FrameStats> {
        self.check_frame(frame)?;
        params.intrinsics.validate()?;
        let mut stats = FrameStats {
            pixels: frame.rgb.len(),
            ..FrameStats::default()
        };
        let channels = self.embed_dim();
        for ((row, col), &raw) in frame.depth.iter_cells() {
            let Some(p_cam) = backproject(row, col, raw, &params.intrinsics) else {
                stats.invalid_depth += 1;
                continue;
            };
            if p_cam[2] > params.max_depth {
                stats.beyond_max_depth += 1;
                continue;
            }
            let p_world = to_world(&p_cam, &frame.pose);
            let y = p_world[1];
            if !(y < self.grid.robot_height) {
                stats.above_robot_height += 1;
                continue;
            }
            let Some(cell) = project_to_grid(&p_world, &self.grid) else {
                stats.out_of_bounds += 1;
                continue;
            };
            stats.used += 1;
            if y < self.height[cell] {
                self.height[cell] = y;
                self.bev_color[cell] = frame.rgb[(row, col)];
                stats.height_updates += 1;
            }
            let n = self.obs_count[cell] + 1;
            self.obs_count[cell] = n;
            let inv = T::one() / T::from_u32(n).unwrap_or_else(T::one);
            let src = frame.embeddings.pixel((row, col));
            let dst = self.embedding.pixel_mut(cell);
            for k in 0..channels {
                dst[k] = dst[k] + (src[k] - dst[k]) * inv;
            }
        }
        tracing::debug!(
            pixels = stats.pixels,
            used = stats.used,
            invalid_depth = stats.invalid_depth,
            beyond_max_depth = stats.beyond_max_depth,
            above_robot_height = stats.above_robot_height,
            out_of_bounds = stats.out_of_bounds,
            height_updates = stats.height_updates,
            "frame integrated"
        );
        Ok(stats)
    }
}

/// Traversability over the grid: obstacles (dilated) and unobserved cells are blocked.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    blocked: Raster<bool>,
    obstacle: Raster<bool>,
}

impl Occupancy {
    /// Builds an occupancy grid directly from a blocked mask (`true` = not traversable).
    pub fn from_blocked(blocked: Raster<bool>) -> Self {
        Self {
            obstacle: blocked.clone(),
            blocked,
        }
    }

    pub fn rows(&self) -> usize {
        self.blocked.rows()
    }

    pub fn cols(&self) -> usize {
        self.blocked.cols()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.blocked.dims()
    }

    pub fn is_traversable(&self, cell: Cell) -> bool {
        self.blocked.get(cell).is_some_and(|b| !b)
    }

    pub fn is_traversable_i(&self, r: i64, c: i64) -> bool {
        self.blocked.contains(r, c) && !self.blocked[(r as usize, c as usize)]
    }

    /// Dilated obstacle cells (observed, non-floor), not counting unobserved cells.
    pub fn obstacles(&self) -> &Raster<bool> {
        &self.obstacle
    }

    pub fn blocked(&self) -> &Raster<bool> {
        &self.blocked
    }

    pub fn traversable_count(&self) -> usize {
        self.blocked.as_slice().iter().filter(|b| !**b).count()
    }
}

/// Number of cells covered by an inflation radius, `⌈r / s⌉` with a small guard against
/// representation error in the division.
pub fn inflation_cells(radius_m: f64, cell_size_m: f64) -> usize {
    if radius_m <= 0.0 {
        return 0;
    }
    (radius_m / cell_size_m - 1e-9).ceil().max(0.0) as usize
}

/// Chebyshev (square-kernel) dilation.
pub fn dilate(mask: &Raster<bool>, radius: usize) -> Raster<bool> {
    if radius == 0 {
        return mask.clone();
    }
    let (h, w) = mask.dims();
    // Separable: rows then columns.
    let mut horiz = Raster::filled(h, w, false);
    for r in 0..h {
        let mut last: Option<usize> = None;
        // distance to the nearest true cell on the left/right via two sweeps
        let mut left = vec![usize::MAX; w];
        for c in 0..w {
            if mask[(r, c)] {
                last = Some(c);
            }
            if let Some(l) = last {
                left[c] = c - l;
            }
        }
        last = None;
        for c in (0..w).rev() {
            if mask[(r, c)] {
                last = Some(c);
            }
            let right = last.map_or(usize::MAX, |l| l - c);
            horiz[(r, c)] = left[c].min(right) <= radius;
        }
    }
    let mut out = Raster::filled(h, w, false);
    for c in 0..w {
        let mut last: Option<usize> = None;
        let mut up = vec![usize::MAX; h];
        for r in 0..h {
            if horiz[(r, c)] {
                last = Some(r);
            }
            if let Some(l) = last {
                up[r] = r - l;
            }
        }
        last = None;
        for r in (0..h).rev() {
            if horiz[(r, c)] {
                last = Some(r);
            }
            let down = last.map_or(usize::MAX, |l| l - r);
            out[(r, c)] = up[r].min(down) <= radius;
        }
    }
    out
}

/// Occupancy from the embedding map's label raster: a cell is an obstacle when it is
/// observed and its label is not a floor label; obstacles are dilated by
/// `⌈inflation / s⌉` cells and unobserved cells are never traversable.
pub fn obstacle_grid<T: Scalar>(
    bundle: &MapBundle<T>,
    floor_labels: &[u32],
    pixel_labels: &PixelLabelMap,
    inflation_radius_m: f64,
) -> Result<Occupancy> {
    let (h, w) = (bundle.grid().h_bar, bundle.grid().w_bar);
    if pixel_labels.labels().dims() != (h, w) {
        return Err(Error::mismatch(
            "pixel label map",
            format!("{:?}", (h, w)),
            format!("{:?}", pixel_labels.labels().dims()),
        ));
    }
    let raw = Raster::from_fn(h, w, |cell| {
        bundle.is_observed(cell) && !floor_labels.contains(&pixel_labels.labels()[cell])
    });
    let radius = inflation_cells(inflation_radius_m, bundle.grid().cell_size.to_f64_decimal());
    let obstacle = dilate(&raw, radius);
    let blocked = Raster::from_fn(h, w, |cell| obstacle[cell] || !bundle.is_observed(cell));
    Ok(Occupancy { blocked, obstacle })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Mat3;

    fn small_grid() -> GridSpec<f64> {
        GridSpec {
            h_bar: 20,
            w_bar: 20,
            cell_size: 0.1,
            robot_height: 1.5,
        }
    }

    /// Camera looking straight down from `altitude`: camera z maps to world -y.
    fn down_pose(altitude: f64) -> Pose<f64> {
        Pose::new(
            Mat3([[0.0, 1.0, 0.0], [0.0, 0.0, -1.0], [-1.0, 0.0, 0.0]]),
            [0.0, altitude, 0.0],
        )
    }

    fn params() -> IntegrationParams<f64> {
        IntegrationParams {
            intrinsics: CameraIntrinsics {
                fx: 10.0,
                fy: 10.0,
                cx: 0.0,
                cy: 0.0,
                depth_scale: 1.0,
            },
            max_depth: 10.0,
        }
    }

    fn one_pixel_frame(depth: f64, emb: Vec<f64>, pose: Pose<f64>, rgb: [u8; 3]) -> FrameInput<f64> {
        let c = emb.len();
        FrameInput {
            rgb: Raster::filled(1, 1, rgb),
            depth: Raster::filled(1, 1, depth),
            pose,
            embeddings: Tensor3::from_vec(1, 1, c, emb).unwrap(),
        }
    }

    #[test]
    fn init_is_empty() {
        let b = MapBundle::new(small_grid(), 4).unwrap();
        assert_eq!(b.observed_cells(), 0);
        assert_eq!(b.total_observations(), 0);
        assert!(b.height().as_slice().iter().all(|h| *h == f64::INFINITY));
        assert!(b.embedding().as_slice().iter().all(|v| *v == 0.0));
        assert!(MapBundle::new(small_grid(), 0).is_err());
        let mut bad = small_grid();
        bad.h_bar = 0;
        assert!(MapBundle::new(bad, 4).is_err());
    }

    #[test]
    fn large_grid_init() {
        let g = GridSpec {
            h_bar: 1000,
            w_bar: 1000,
            cell_size: 0.05f32,
            robot_height: 1.5,
        };
        let b = MapBundle::new(g, 4).unwrap();
        assert_eq!(b.obs_count().len(), 1_000_000);
        assert_eq!(b.total_observations(), 0);
    }

    #[test]
    fn descending_height_update() {
        let mut b = MapBundle::new(small_grid(), 2).unwrap();
        // altitude 3.0, depth 2.2 -> y = 0.8; then depth 2.7 -> y = 0.3
        let f1 = one_pixel_frame(2.2, vec![1.0, 0.0], down_pose(3.0), [10, 10, 10]);
        let f2 = one_pixel_frame(2.7, vec![0.0, 1.0], down_pose(3.0), [20, 20, 20]);
        b.integrate_frame(&f1, &params()).unwrap();
        b.integrate_frame(&f2, &params()).unwrap();
        let cell = (10, 10);
        assert!((b.height()[cell] - 0.3).abs() < 1e-12);
        assert_eq!(b.bev_color()[cell], [20, 20, 20]);
        // higher point later does not raise the height or repaint
        let f3 = one_pixel_frame(2.0, vec![0.0, 1.0], down_pose(3.0), [30, 30, 30]);
        b.integrate_frame(&f3, &params()).unwrap();
        assert!((b.height()[cell] - 0.3).abs() < 1e-12);
        assert_eq!(b.bev_color()[cell], [20, 20, 20]);
        assert_eq!(b.obs_count()[cell], 3);
    }

    #[test]
    fn height_filter_skips_tall_points() {
        let mut b = MapBundle::new(small_grid(), 1).unwrap();
        let f = one_pixel_frame(1.0, vec![1.0], down_pose(3.0), [1, 2, 3]);
        let stats = b.integrate_frame(&f, &params()).unwrap();
        assert_eq!(stats.above_robot_height, 1);
        assert_eq!(b.total_observations(), 0);
    }

    #[test]
    fn running_mean_of_embeddings() {
        let mut b = MapBundle::new(small_grid(), 3).unwrap();
        let e1 = vec![1.0, 0.0, 0.5];
        let e2 = vec![0.0, 1.0, -0.25];
        b.integrate_frame(&one_pixel_frame(2.0, e1.clone(), down_pose(3.0), [0; 3]), &params())
            .unwrap();
        b.integrate_frame(&one_pixel_frame(2.0, e2.clone(), down_pose(3.0), [0; 3]), &params())
            .unwrap();
        let got = b.embedding().pixel((10, 10));
        for k in 0..3 {
            assert!((got[k] - (e1[k] + e2[k]) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn skip_causes_are_counted() {
        let mut b = MapBundle::new(small_grid(), 1).unwrap();
        let pose = down_pose(3.0);
        let mut p = params();
        p.max_depth = 2.5;
        let stats = b
            .integrate_frame(&one_pixel_frame(0.0, vec![1.0], pose, [0; 3]), &p)
            .unwrap();
        assert_eq!(stats.invalid_depth, 1);
        let stats = b
            .integrate_frame(&one_pixel_frame(2.9, vec![1.0], pose, [0; 3]), &p)
            .unwrap();
        assert_eq!(stats.beyond_max_depth, 1);
        let far = Pose::new(pose.rotation, [50.0, 3.0, 0.0]);
        let stats = b
            .integrate_frame(&one_pixel_frame(2.0, vec![1.0], far, [0; 3]), &p)
            .unwrap();
        assert_eq!(stats.out_of_bounds, 1);
        assert_eq!(stats.skipped() + stats.used, stats.pixels);
    }

    #[test]
    fn rejects_mismatched_embeddings() {
        let mut b = MapBundle::new(small_grid(), 3).unwrap();
        let f = one_pixel_frame(2.0, vec![1.0, 0.0], down_pose(3.0), [0; 3]);
        assert!(matches!(
            b.integrate_frame(&f, &params()),
            Err(Error::DimensionMismatch { .. })
        ));
        let f = one_pixel_frame(2.0, vec![1.0, f64::NAN, 0.0], down_pose(3.0), [0; 3]);
        assert!(b.integrate_frame(&f, &params()).is_err());
    }

    #[test]
    fn inflation_cell_counts() {
        assert_eq!(inflation_cells(0.15, 0.05), 3);
        assert_eq!(inflation_cells(0.1, 0.05), 2);
        assert_eq!(inflation_cells(0.0, 0.05), 0);
        assert_eq!(inflation_cells(0.11, 0.05), 3);
    }

    #[test]
    fn dilation_matches_brute_force() {
        let mut m = Raster::filled(9, 11, false);
        m[(4, 5)] = true;
        m[(0, 10)] = true;
        let d = dilate(&m, 2);
        let brute = Raster::from_fn(9, 11, |(r, c)| {
            m.true_cells().any(|(a, b)| {
                (a as i64 - r as i64).abs() <= 2 && (b as i64 - c as i64).abs() <= 2
            })
        });
        assert_eq!(d, brute);
        let block = dilate(&{
            let mut x = Raster::filled(9, 9, false);
            x[(4, 4)] = true;
            x
        }, 2);
        assert_eq!(block.count_true(), 25);
    }

    #[test]
    fn obstacle_grid_semantics() {
        let g = GridSpec {
            h_bar: 9,
            w_bar: 9,
            cell_size: 0.05,
            robot_height: 1.5,
        };
        let mut b = MapBundle::new(g, 1).unwrap();
        // Unobserved map: nothing traversable.
        let labels = PixelLabelMap::from_labels(Raster::filled(9, 9, 0));
        let occ = obstacle_grid(&b, &[0], &labels, 0.1).unwrap();
        assert_eq!(occ.traversable_count(), 0);
        // Observe everything as floor.
        b.obs_count = Raster::filled(9, 9, 1);
        let occ = obstacle_grid(&b, &[0], &labels, 0.0).unwrap();
        assert_eq!(occ.obstacles().count_true(), 0);
        assert_eq!(occ.traversable_count(), 81);
        let mut lab = Raster::filled(9, 9, 0);
        lab[(4, 4)] = 2;
        let occ = obstacle_grid(&b, &[0], &PixelLabelMap::from_labels(lab), 0.1).unwrap();
        assert_eq!(occ.obstacles().count_true(), 25);
        assert!(!occ.is_traversable((2, 2)));
        assert!(occ.is_traversable((1, 1)));
    }
}
