#![allow(dead_code)]

pub mod snippets;

use std::sync::OnceLock;

use ivlmap::navigation::{AgentState, Heading, NavParams, NavWorld};
use ivlmap::pipeline::build_scene_map;
use ivlmap::scene::{tables_in_a_row, SyntheticScene};
use ivlmap::{EngineConfig, IvlMap, Raster};

pub struct Fixture {
    pub cfg: EngineConfig,
    pub scene: SyntheticScene,
    pub map: IvlMap,
}

/// Four yellow tables left to right, a red sofa and a black chair in a 10 m room.
pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let cfg = EngineConfig::default();
        let scene = SyntheticScene::new(tables_in_a_row(7, "yellow"), &cfg.vocabulary).unwrap();
        let map = build_scene_map(&scene, &cfg).unwrap();
        Fixture { cfg, scene, map }
    })
}

pub fn world(f: &Fixture) -> NavWorld<'_, f32> {
    NavWorld::new(
        &f.map,
        &f.cfg.vocabulary.floor_labels,
        f.cfg.thresholds.inflation_m,
        NavParams::from(&f.cfg.thresholds),
    )
    .unwrap()
}

/// Room-relative cell.
pub fn room(f: &Fixture, dr: usize, dc: usize) -> (usize, usize) {
    let s = f.scene.spec();
    (s.room_rows.0 + dr, s.room_cols.0 + dc)
}

pub fn agent(cell: (usize, usize), heading_deg: f64) -> AgentState {
    AgentState {
        cell,
        heading: Heading::from_degrees(heading_deg),
    }
}

/// Open grid with the given blocked cells, everything observed.
pub fn open_grid(h: usize, w: usize, blocked: &[(usize, usize)]) -> ivlmap::mapping::Occupancy {
    let mut b = Raster::filled(h, w, false);
    for &c in blocked {
        b[c] = true;
    }
    ivlmap::mapping::Occupancy::from_blocked(b)
}
