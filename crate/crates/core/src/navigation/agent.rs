use serde::{Deserialize, Serialize};

use super::planner::{self, plan_path};
use super::{AgentState, Event, Heading, Trajectory};
use crate::config::Thresholds;
use crate::error::{Error, Result};
use crate::instance::{IvlMap, MaskRecord};
use crate::localization::{self, Components, InstanceRef, LocalizeParams, ObjAttr, Ordering};
use crate::mapping::{obstacle_grid, Occupancy};
use crate::raster::Cell;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavParams {
    pub success_m: f64,
    pub clearance_m: f64,
    pub approach_radius_m: f64,
    pub side_tolerance_deg: f64,
}

impl Default for NavParams {
    fn default() -> Self {
        Self::from(&Thresholds::default())
    }
}

impl From<&Thresholds> for NavParams {
    fn from(t: &Thresholds) -> Self {
        Self {
            success_m: t.success_m,
            clearance_m: t.clearance_m,
            approach_radius_m: t.approach_radius_m,
            side_tolerance_deg: t.side_tolerance_deg,
        }
    }
}

/// Everything the agent navigates against: the map, its occupancy and connectivity.
pub struct NavWorld<'m, T> {
    map: &'m IvlMap<T>,
    occupancy: Occupancy,
    components: Components,
    params: NavParams,
}

impl<'m, T: Scalar> NavWorld<'m, T> {
    /// Occupancy from the map's own category labels; floor label names resolve against
    /// the vocabulary stored in the map.
    pub fn new(
        map: &'m IvlMap<T>,
        floor_labels: &[String],
        inflation_m: f64,
        params: NavParams,
    ) -> Result<Self> {
        let floor: Vec<u32> = floor_labels
            .iter()
            .filter_map(|f| map.categories().index_of(f))
            .collect();
        let occupancy = obstacle_grid(map.bundle(), &floor, map.category_labels(), inflation_m)?;
        Ok(Self::from_parts(map, occupancy, params))
    }

    pub fn from_parts(map: &'m IvlMap<T>, occupancy: Occupancy, params: NavParams) -> Self {
        let components = Components::new(&occupancy);
        Self {
            map,
            occupancy,
            components,
            params,
        }
    }

    pub fn map(&self) -> &'m IvlMap<T> {
        self.map
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    pub fn components(&self) -> &Components {
        &self.components
    }

    pub fn params(&self) -> &NavParams {
        &self.params
    }

    pub fn cell_size(&self) -> f64 {
        self.map.cell_size()
    }

    fn cells(&self, meters: f64) -> i64 {
        (meters / self.cell_size()).round() as i64
    }

    fn localize_params(&self) -> LocalizeParams {
        LocalizeParams {
            approach_radius_m: self.params.approach_radius_m,
            same_component: true,
        }
    }
}

/// Outcome of a forward move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForwardOutcome {
    pub requested_cells: usize,
    pub moved_cells: usize,
    pub blocked: bool,
}

/// The agent executing high-level functions on a world, recording every step.
pub struct Navigator<'w, 'm, T> {
    world: &'w NavWorld<'m, T>,
    agent: AgentState,
    trajectory: Trajectory,
}

impl<'w, 'm, T: Scalar> Navigator<'w, 'm, T> {
    pub fn new(world: &'w NavWorld<'m, T>, start: AgentState) -> Result<Self> {
        if !world.occupancy.is_traversable(start.cell) {
            return Err(Error::invalid(
                "agent start",
                format!("{:?} is not traversable", start.cell),
            ));
        }
        let mut trajectory = Trajectory::default();
        trajectory.push(&start, Event::Start);
        Ok(Self {
            world,
            agent: start,
            trajectory,
        })
    }

    pub fn world(&self) -> &'w NavWorld<'m, T> {
        self.world
    }

    pub fn agent(&self) -> AgentState {
        self.agent
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.trajectory
    }

    pub fn mark_call(&mut self, name: &str) {
        self.trajectory.push(
            &self.agent,
            Event::Call {
                name: name.to_string(),
            },
        );
    }

    // ---- motion ----

    /// Follows a planned path to `goal`; heading ends along the last step.
    pub fn move_to(&mut self, goal: Cell) -> Result<()> {
        let path = plan_path(self.agent.cell, goal, &self.world.occupancy)?;
        for w in path.windows(2) {
            let (a, b) = (w[0], w[1]);
            self.agent.heading =
                Heading::of_delta(b.0 as f64 - a.0 as f64, b.1 as f64 - a.1 as f64);
            self.agent.cell = b;
            self.trajectory.push(&self.agent, Event::Move);
        }
        Ok(())
    }

    pub fn move_to_object(&mut self, obj: &InstanceRef) -> Result<()> {
        self.move_to(obj.approach_cell)
    }

    /// Moves `⌊|dist|/s + ½⌋` cells along the heading (backwards for negative `dist`),
    /// stopping before the first illegal step.
    pub fn move_forward(&mut self, dist_m: f64) -> Result<ForwardOutcome> {
        if !dist_m.is_finite() {
            return Err(Error::NonFinite("move_forward distance".into()));
        }
        let n = (dist_m.abs() / self.world.cell_size() + 0.5).floor() as usize;
        let (mut dr, mut dc) = self.agent.heading.direction();
        if dist_m < 0.0 {
            (dr, dc) = (-dr, -dc);
        }
        let origin = (self.agent.cell.0 as f64, self.agent.cell.1 as f64);
        let mut moved = 0;
        for i in 1..=n {
            let r = (origin.0 + dr * i as f64).round();
            let c = (origin.1 + dc * i as f64).round();
            let occ = &self.world.occupancy;
            if !occ.is_traversable_i(r as i64, c as i64) {
                break;
            }
            let next = (r as usize, c as usize);
            if !planner::is_legal_step(occ, self.agent.cell, next) {
                break;
            }
            if next != self.agent.cell {
                self.agent.cell = next;
                self.trajectory.push(&self.agent, Event::Move);
            }
            moved = i;
        }
        let blocked = moved < n;
        if blocked {
            self.trajectory.push(&self.agent, Event::Blocked);
        }
        Ok(ForwardOutcome {
            requested_cells: n,
            moved_cells: moved,
            blocked,
        })
    }

    pub fn stop(&mut self) {
        self.trajectory.push(&self.agent, Event::Stop);
    }

    // ---- turning ----

    /// Positive angles turn right (clockwise).
    pub fn turn(&mut self, angle_deg: f64) {
        self.agent.heading = self.agent.heading.turned(angle_deg);
        self.trajectory.push(&self.agent, Event::Turn);
    }

    pub fn turn_absolute(&mut self, angle_deg: f64) {
        self.agent.heading = Heading::from_degrees(angle_deg);
        self.trajectory.push(&self.agent, Event::Turn);
    }

    pub fn bearing_to(&self, point: (f64, f64)) -> Heading {
        let (r, c) = self.agent.cell;
        Heading::of_delta(point.0 - r as f64, point.1 - c as f64)
    }

    pub fn face(&mut self, obj: &InstanceRef) {
        if obj.centroid != (self.agent.cell.0 as f64, self.agent.cell.1 as f64) {
            self.agent.heading = self.bearing_to(obj.centroid);
        }
        self.trajectory.push(&self.agent, Event::Turn);
    }

    /// Rotates only if the object is not already within tolerance of `side_deg` (−90 left,
    /// +90 right) relative to the heading.
    fn with_object_on(&mut self, obj: &InstanceRef, side_deg: f64) {
        let bearing = self.bearing_to(obj.centroid);
        let desired = bearing.turned(-side_deg);
        let off = desired.relative_to(self.agent.heading).degrees().abs();
        if off > self.world.params.side_tolerance_deg {
            self.agent.heading = desired;
        }
        self.trajectory.push(&self.agent, Event::Turn);
    }

    pub fn with_object_on_left(&mut self, obj: &InstanceRef) {
        self.with_object_on(obj, -90.0);
    }

    pub fn with_object_on_right(&mut self, obj: &InstanceRef) {
        self.with_object_on(obj, 90.0);
    }

    // ---- side moves ----

    fn clamp(&self, r: f64, c: f64) -> Cell {
        let (h, w) = self.world.occupancy.dims();
        (
            r.round().clamp(0.0, (h - 1) as f64) as usize,
            c.round().clamp(0.0, (w - 1) as f64) as usize,
        )
    }

    fn go_near(&mut self, target: Cell) -> Result<()> {
        let comps = &self.world.components;
        let id = comps.id(self.agent.cell);
        let cell = localization::approach_cell(
            target,
            &self.world.occupancy,
            localization::radius_cells(self.world.params.approach_radius_m, self.world.cell_size()),
            (id != 0).then_some((comps, id)),
        )?;
        self.move_to(cell)
    }

    /// Cell `clearance` beyond the object's box along map direction `heading`, from the
    /// box center.
    pub fn side_target(&self, obj: &InstanceRef, heading: Heading) -> Cell {
        let [x, y, w, h] = obj.bbox;
        let k = self.world.cells(self.world.params.clearance_m) as f64;
        let center = (y as f64 + (h as f64 - 1.0) / 2.0, x as f64 + (w as f64 - 1.0) / 2.0);
        let half = (h as f64 / 2.0 + k, w as f64 / 2.0 + k);
        let (dr, dc) = heading.direction();
        let tr = if dr.abs() > 1e-12 { half.0 / dr.abs() } else { f64::INFINITY };
        let tc = if dc.abs() > 1e-12 { half.1 / dc.abs() } else { f64::INFINITY };
        let t = tr.min(tc);
        self.clamp(center.0 + t * dr, center.1 + t * dc)
    }

    pub fn move_to_left(&mut self, obj: &InstanceRef) -> Result<()> {
        let dir = self.bearing_to(obj.centroid).turned(-90.0);
        self.go_near(self.side_target(obj, dir))
    }

    pub fn move_to_right(&mut self, obj: &InstanceRef) -> Result<()> {
        let dir = self.bearing_to(obj.centroid).turned(90.0);
        self.go_near(self.side_target(obj, dir))
    }

    pub fn move_cardinal(&mut self, obj: &InstanceRef, side: Heading) -> Result<()> {
        self.go_near(self.side_target(obj, side))
    }

    pub fn move_in_between(&mut self, a: &InstanceRef, b: &InstanceRef) -> Result<()> {
        let mid = (
            (a.centroid.0 + b.centroid.0) / 2.0,
            (a.centroid.1 + b.centroid.1) / 2.0,
        );
        self.go_near(self.clamp(mid.0, mid.1))
    }

    // ---- queries ----

    pub fn resolve(&self, attr: &ObjAttr, ordering: Ordering) -> Result<InstanceRef> {
        localization::resolve(
            attr,
            self.world.map,
            &self.world.occupancy,
            Some(&self.world.components),
            self.agent.cell,
            ordering,
            &self.world.localize_params(),
        )
    }

    /// Nearest labeled record named `name` whose bearing is within ±90° of the heading.
    pub fn nearest_front(&self, name: &str) -> Result<&'m MaskRecord> {
        let agent = (self.agent.cell.0 as f64, self.agent.cell.1 as f64);
        let mut best: Option<(f64, &'m MaskRecord)> = None;
        for r in self.world.map.records() {
            if !r.is_labeled() || r.label != name {
                continue;
            }
            let c = r.centroid_cell();
            if c != agent {
                let rel = self.bearing_to(c).relative_to(self.agent.heading).degrees();
                if rel.abs() > 90.0 {
                    continue;
                }
            }
            let d = (c.0 - agent.0).hypot(c.1 - agent.1);
            if best.is_none_or(|(bd, br)| d < bd || (d == bd && r.label_id < br.label_id)) {
                best = Some((d, r));
            }
        }
        best.map(|(_, r)| r)
            .ok_or_else(|| Error::NotFound(format!("no {name} in front of the agent")))
    }

    pub fn instance(&self, record: &MaskRecord) -> Result<InstanceRef> {
        localization::instance_ref(
            record,
            self.world.map,
            &self.world.occupancy,
            Some(&self.world.components),
            self.agent.cell,
            &self.world.localize_params(),
        )
    }

    pub fn get_nearest_obj_pos(&self, name: &str) -> Result<Cell> {
        let rec = self.nearest_front(name)?;
        Ok(self.instance(rec)?.approach_cell)
    }

    pub fn get_specified_obj_pos(&self, obj: &InstanceRef) -> Cell {
        obj.approach_cell
    }

    /// Side lengths (meters) of the clearance-inflated box, starting with the side that
    /// faces the agent and going clockwise.
    pub fn contour(&self, obj: &InstanceRef) -> [f64; 4] {
        let s = self.world.cell_size();
        let k = self.world.cells(self.world.params.clearance_m) as f64;
        let [x, y, w, h] = obj.bbox;
        let ew = (w as f64 + 2.0 * k) * s;
        let eh = (h as f64 + 2.0 * k) * s;
        let (ar, ac) = (self.agent.cell.0 as f64, self.agent.cell.1 as f64);
        let out_r = (y as f64 - ar).max(ar - (y + h - 1) as f64).max(0.0);
        let out_c = (x as f64 - ac).max(ac - (x + w - 1) as f64).max(0.0);
        // Facing a north/south face means walking along the box width first.
        if out_r >= out_c {
            [ew, eh, ew, eh]
        } else {
            [eh, ew, eh, ew]
        }
    }

    pub fn get_nearest_obj_contour(&self, name: &str) -> Result<[f64; 4]> {
        let rec = self.nearest_front(name)?;
        Ok(self.contour(&self.instance(rec)?))
    }
}
