//! PNG figures: the top-down color map, label maps, instance maps and trajectory overlays.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::instance::IvlMap;
use crate::navigation::Trajectory;
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Distinct color for a small integer id; 0 is black.
pub fn palette(id: u32) -> [u8; 3] {
    if id == 0 {
        return [0, 0, 0];
    }
    // golden-angle hue walk
    let h = (id as f64 * 137.507_764) % 360.0;
    let (s, v) = (0.65, 0.95);
    let c = v * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r, g, b].map(|u| ((u + m) * 255.0).round() as u8)
}

pub fn raster_image<T>(r: &Raster<T>, mut f: impl FnMut(&T) -> [u8; 3]) -> RgbImage {
    let (h, w) = r.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| Rgb(f(&r[(y as usize, x as usize)])))
}

/// Reconstruction colors; unobserved cells black.
pub fn bev_image<T: Scalar>(map: &IvlMap<T>) -> RgbImage {
    let b = map.bundle();
    let (h, w) = map.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let cell = (y as usize, x as usize);
        Rgb(if b.is_observed(cell) {
            b.bev_color()[cell]
        } else {
            [0, 0, 0]
        })
    })
}

/// Category labels over observed cells.
pub fn semantic_image<T: Scalar>(map: &IvlMap<T>) -> RgbImage {
    let b = map.bundle();
    let labels = map.category_labels().labels();
    let (h, w) = map.dims();
    RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let cell = (y as usize, x as usize);
        Rgb(if b.is_observed(cell) {
            palette(labels[cell] + 1)
        } else {
            [0, 0, 0]
        })
    })
}

pub fn instance_image<T: Scalar>(map: &IvlMap<T>) -> RgbImage {
    raster_image(map.instance_ids(), |&id| palette(id))
}

/// Path over the reconstruction: white path, green start, red end.
pub fn trajectory_image<T: Scalar>(map: &IvlMap<T>, traj: &Trajectory) -> RgbImage {
    let mut img = bev_image(map);
    let mut put = |cell: (usize, usize), c: [u8; 3], radius: i64| {
        for dr in -radius..=radius {
            for dc in -radius..=radius {
                let (y, x) = (cell.0 as i64 + dr, cell.1 as i64 + dc);
                if y >= 0 && x >= 0 && (y as u32) < img.height() && (x as u32) < img.width() {
                    img.put_pixel(x as u32, y as u32, Rgb(c));
                }
            }
        }
    };
    for cell in traj.cells() {
        put(cell, [255, 255, 255], 0);
    }
    if let (Some(first), Some(last)) = (traj.steps.first(), traj.steps.last()) {
        put(first.cell, [0, 200, 0], 2);
        put(last.cell, [220, 0, 0], 2);
    }
    img
}

pub fn save_png(path: &Path, img: &RgbImage) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    img.save(path).map_err(|e| Error::format(path, e.to_string()))
}
