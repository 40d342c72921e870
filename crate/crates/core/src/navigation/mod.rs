//! Agent state, trajectories, the grid planner and the high-level navigation functions.

pub mod agent;
pub mod planner;

use serde::{Deserialize, Serialize};

use crate::raster::Cell;

pub use agent::{NavParams, NavWorld, Navigator};
pub use planner::{plan_path, PathCost};

const MICRO: i64 = 1_000_000;
const FULL_TURN: i64 = 360 * MICRO;
const HALF_TURN: i64 = 180 * MICRO;

/// Heading in integer microdegrees, normalized to `(−180°, 180°]`. 0 is north (decreasing
/// `px`), 90 is east (increasing `py`); positive turns are clockwise.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Heading(i64);

impl Heading {
    pub const NORTH: Heading = Heading(0);
    pub const EAST: Heading = Heading(90 * MICRO);
    pub const SOUTH: Heading = Heading(HALF_TURN);
    pub const WEST: Heading = Heading(-90 * MICRO);

    pub fn from_micro(micro: i64) -> Self {
        let mut m = micro.rem_euclid(FULL_TURN);
        if m > HALF_TURN {
            m -= FULL_TURN;
        }
        Heading(m)
    }

    /// Rounds to the nearest microdegree. Non-finite input maps to north.
    pub fn from_degrees(deg: f64) -> Self {
        if !deg.is_finite() {
            return Heading::NORTH;
        }
        Self::from_micro(micro_of(deg))
    }

    pub fn micro(self) -> i64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0 as f64 / MICRO as f64
    }

    pub fn turned(self, delta_deg: f64) -> Self {
        if !delta_deg.is_finite() {
            return self;
        }
        Self::from_micro(self.0 + micro_of(delta_deg))
    }

    /// Signed difference `self − other`, normalized.
    pub fn relative_to(self, other: Heading) -> Heading {
        Self::from_micro(self.0 - other.0)
    }

    /// Unit step `(d_px, d_py)`; exact on the four axes.
    pub fn direction(self) -> (f64, f64) {
        match self.0 {
            0 => (-1.0, 0.0),
            m if m == 90 * MICRO => (0.0, 1.0),
            m if m == HALF_TURN => (1.0, 0.0),
            m if m == -90 * MICRO => (0.0, -1.0),
            _ => {
                let (s, c) = self.degrees().to_radians().sin_cos();
                (-c, s)
            }
        }
    }

    /// Bearing of the vector `(d_px, d_py)`.
    pub fn of_delta(d_px: f64, d_py: f64) -> Self {
        if d_px == 0.0 && d_py == 0.0 {
            return Heading::NORTH;
        }
        Self::from_degrees(d_py.atan2(-d_px).to_degrees())
    }
}

fn micro_of(deg: f64) -> i64 {
    let m = (deg * MICRO as f64).round();
    // Reduce huge angles before the cast so they cannot saturate.
    (m % (FULL_TURN as f64)) as i64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub cell: Cell,
    pub heading: Heading,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Event {
    Start,
    /// A library call begins; following steps belong to it.
    Call { name: String },
    Move,
    Turn,
    /// A forward move ended early at an obstacle.
    Blocked,
    Stop,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub cell: Cell,
    pub heading_deg: f64,
    pub event: Event,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn push(&mut self, agent: &AgentState, event: Event) {
        self.steps.push(Step {
            cell: agent.cell,
            heading_deg: agent.heading.degrees(),
            event,
        });
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.steps.iter().map(|s| s.cell)
    }

    /// Cell of the last stop event at or after step index `from`.
    pub fn stop_cell_since(&self, from: usize) -> Option<Cell> {
        self.steps
            .get(from..)?
            .iter()
            .rev()
            .find(|s| s.event == Event::Stop)
            .map(|s| s.cell)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// A subgoal succeeds when it was stopped at a cell within `threshold_m` of the target.
pub fn check_success(stop: Option<Cell>, target: (f64, f64), cell_size_m: f64, threshold_m: f64) -> bool {
    stop.is_some_and(|(r, c)| {
        let d = (r as f64 - target.0).hypot(c as f64 - target.1) * cell_size_m;
        d <= threshold_m
    })
}
