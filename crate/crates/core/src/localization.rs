//! Two-step instance localization: pick a record from the instance/color maps, then
//! refine to a goal cell inside its mask and a reachable approach cell next to it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{IvlMap, MaskRecord};
use crate::mapping::Occupancy;
use crate::raster::{Cell, Raster};
use crate::scalar::Scalar;

/// Landmark attributes. `instance_idx` 0 means unspecified (nearest); otherwise 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjAttr {
    pub name: String,
    pub instance_idx: u32,
    pub color: Option<String>,
}

impl ObjAttr {
    pub fn new(name: impl Into<String>, instance_idx: u32, color: Option<&str>) -> Self {
        Self {
            name: name.into(),
            instance_idx,
            color: color.map(str::to_string),
        }
    }
}

impl std::fmt::Display for ObjAttr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.name,
            self.instance_idx,
            self.color.as_deref().unwrap_or("None")
        )
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    #[default]
    Nearest,
    LeftToRight,
}

impl std::str::FromStr for Ordering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Ordering::Nearest),
            "left_to_right" | "left-to-right" => Ok(Ordering::LeftToRight),
            other => Err(Error::invalid("ordering", format!("unknown ordering {other:?}"))),
        }
    }
}

/// A resolved instance: the chosen record plus where to go for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRef {
    pub label_id: u32,
    pub label: String,
    pub color: String,
    /// Mask centroid `(row, col)`.
    pub centroid: (f64, f64),
    /// `[x, y, w, h]` in cells, as in the record.
    pub bbox: [u32; 4],
    pub goal_cell: Cell,
    pub approach_cell: Cell,
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Labeled records matching the name and, when given, the color.
pub fn candidates<'m, T: Scalar>(attr: &ObjAttr, map: &'m IvlMap<T>) -> Vec<&'m MaskRecord> {
    map.records()
        .iter()
        .filter(|r| r.is_labeled() && r.label == attr.name)
        .filter(|r| attr.color.as_ref().is_none_or(|c| &r.color == c))
        .collect()
}

/// Sorts candidates in place by the given ordering; ties by label id.
pub fn order_candidates(records: &mut [&MaskRecord], agent: Cell, ordering: Ordering) {
    let agent = (agent.0 as f64, agent.1 as f64);
    match ordering {
        Ordering::Nearest => records.sort_by(|a, b| {
            dist2(a.centroid_cell(), agent)
                .total_cmp(&dist2(b.centroid_cell(), agent))
                .then(a.label_id.cmp(&b.label_id))
        }),
        Ordering::LeftToRight => records.sort_by(|a, b| {
            a.centroid[1]
                .total_cmp(&b.centroid[1])
                .then(a.label_id.cmp(&b.label_id))
        }),
    }
}

/// Coarse step: the record selected by name, color and ordinal.
pub fn select_record<'m, T: Scalar>(
    attr: &ObjAttr,
    map: &'m IvlMap<T>,
    agent: Cell,
    ordering: Ordering,
) -> Result<&'m MaskRecord> {
    let mut found = candidates(attr, map);
    if found.is_empty() {
        return Err(Error::NotFound(attr.to_string()));
    }
    let (ordering, k) = match attr.instance_idx {
        0 => (Ordering::Nearest, 0),
        k => (ordering, k as usize - 1),
    };
    if k >= found.len() {
        return Err(Error::IndexOutOfRange {
            what: attr.to_string(),
            index: attr.instance_idx as usize,
            available: found.len(),
        });
    }
    order_candidates(&mut found, agent, ordering);
    Ok(found[k])
}

/// Nearest true cell of `mask` to a fractional point; ties by `(px, py)`.
pub fn snap_to_mask(mask: &Raster<bool>, point: (f64, f64)) -> Option<Cell> {
    let mut best: Option<(f64, Cell)> = None;
    for cell in mask.true_cells() {
        let d = dist2((cell.0 as f64, cell.1 as f64), point);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, cell));
        }
    }
    best.map(|(_, c)| c)
}

/// Fine step: centroid of the mask cells whose category label agrees with the record,
/// falling back to the whole mask, snapped into the mask.
pub fn fine_position<T: Scalar>(record: &MaskRecord, map: &IvlMap<T>) -> Cell {
    let labels = map.category_labels().labels();
    let wanted = map.categories().index_of(&record.label);
    let (mut sr, mut sc, mut n) = (0.0, 0.0, 0usize);
    for cell in record.segmentation.true_cells() {
        if Some(labels[cell]) == wanted {
            sr += cell.0 as f64;
            sc += cell.1 as f64;
            n += 1;
        }
    }
    let centroid = if n > 0 {
        (sr / n as f64, sc / n as f64)
    } else {
        record.centroid_cell()
    };
    snap_to_mask(&record.segmentation, centroid).expect("records have non-empty masks")
}

/// Connected traversable regions under the planner's move rule (8-connected, no corner
/// cutting). Component 0 marks blocked cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    ids: Raster<u32>,
}

impl Components {
    pub fn new(occupancy: &Occupancy) -> Self {
        let (h, w) = occupancy.dims();
        let mut ids = Raster::filled(h, w, 0u32);
        let mut next = 0;
        let mut queue = VecDeque::new();
        for r in 0..h {
            for c in 0..w {
                if ids[(r, c)] != 0 || !occupancy.is_traversable((r, c)) {
                    continue;
                }
                next += 1;
                ids[(r, c)] = next;
                queue.push_back((r, c));
                while let Some(cell) = queue.pop_front() {
                    for (n, _) in crate::navigation::planner::neighbors(occupancy, cell) {
                        if ids[n] == 0 {
                            ids[n] = next;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        Self { ids }
    }

    pub fn id(&self, cell: Cell) -> u32 {
        self.ids[cell]
    }

    pub fn connected(&self, a: Cell, b: Cell) -> bool {
        let ia = self.ids[a];
        ia != 0 && ia == self.ids[b]
    }
}

/// Nearest traversable cell to `goal` by Euclidean distance within `radius_cells`, ties by
/// `(px, py)`. With `within`, only cells in that component qualify.
pub fn approach_cell(
    goal: Cell,
    occupancy: &Occupancy,
    radius_cells: usize,
    within: Option<(&Components, u32)>,
) -> Result<Cell> {
    let (h, w) = occupancy.dims();
    let r = radius_cells as i64;
    let mut best: Option<(i64, Cell)> = None;
    for dr in -r..=r {
        for dc in -r..=r {
            let d = dr * dr + dc * dc;
            if d > r * r {
                continue;
            }
            let (pr, pc) = (goal.0 as i64 + dr, goal.1 as i64 + dc);
            if pr < 0 || pc < 0 || pr >= h as i64 || pc >= w as i64 {
                continue;
            }
            let cell = (pr as usize, pc as usize);
            if !occupancy.is_traversable(cell) {
                continue;
            }
            if let Some((comps, id)) = within {
                if comps.id(cell) != id {
                    continue;
                }
            }
            if best.is_none_or(|(bd, bc)| (d, cell) < (bd, bc)) {
                best = Some((d, cell));
            }
        }
    }
    best.map(|(_, c)| c)
        .ok_or_else(|| Error::Unreachable(format!("no traversable cell near {goal:?}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalizeParams {
    pub approach_radius_m: f64,
    /// Restrict approach cells to the agent's connected region.
    pub same_component: bool,
}

impl Default for LocalizeParams {
    fn default() -> Self {
        Self {
            approach_radius_m: 2.0,
            same_component: true,
        }
    }
}

pub fn radius_cells(radius_m: f64, cell_size_m: f64) -> usize {
    (radius_m / cell_size_m + 1e-9).floor().max(0.0) as usize
}

/// Coarse selection, fine goal cell and approach cell in one call.
pub fn resolve<T: Scalar>(
    attr: &ObjAttr,
    map: &IvlMap<T>,
    occupancy: &Occupancy,
    components: Option<&Components>,
    agent: Cell,
    ordering: Ordering,
    params: &LocalizeParams,
) -> Result<InstanceRef> {
    let record = select_record(attr, map, agent, ordering)?;
    instance_ref(record, map, occupancy, components, agent, params)
}

pub fn instance_ref<T: Scalar>(
    record: &MaskRecord,
    map: &IvlMap<T>,
    occupancy: &Occupancy,
    components: Option<&Components>,
    agent: Cell,
    params: &LocalizeParams,
) -> Result<InstanceRef> {
    let goal_cell = fine_position(record, map);
    let within = match components {
        Some(c) if params.same_component && c.id(agent) != 0 => Some((c, c.id(agent))),
        _ => None,
    };
    let approach = approach_cell(
        goal_cell,
        occupancy,
        radius_cells(params.approach_radius_m, map.cell_size()),
        within,
    )
    .map_err(|_| {
        Error::Unreachable(format!(
            "no reachable cell within {} m of {} #{}",
            params.approach_radius_m, record.label, record.label_id
        ))
    })?;
    Ok(InstanceRef {
        label_id: record.label_id,
        label: record.label.clone(),
        color: record.color.clone(),
        centroid: record.centroid_cell(),
        bbox: record.bbox,
        goal_cell,
        approach_cell: approach,
    })
}
