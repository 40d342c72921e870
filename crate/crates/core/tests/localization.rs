mod common;

use common::{fixture, room, world};
use ivlmap::localization::{
    approach_cell, candidates, fine_position, resolve, select_record, Components, LocalizeParams,
    ObjAttr, Ordering,
};
use ivlmap::Error;

fn tables_by_column() -> Vec<u32> {
    // ground truth: objects 1..=4 are the tables, placed left to right
    let f = fixture();
    let mut gt: Vec<_> = f.scene.ground_truth().objects[..4].iter().collect();
    gt.sort_by(|a, b| a.centroid.1.total_cmp(&b.centroid.1));
    gt.iter().map(|o| o.id).collect()
}

#[test]
fn kth_left_to_right_follows_placement() {
    let f = fixture();
    let agent = room(f, 180, 100);
    assert_eq!(tables_by_column(), vec![1, 2, 3, 4]);
    let mut cols = Vec::new();
    for k in 1..=4 {
        let rec = select_record(
            &ObjAttr::new("table", k, Some("yellow")),
            &f.map,
            agent,
            Ordering::LeftToRight,
        )
        .unwrap();
        let o = &f.scene.ground_truth().objects[k as usize - 1];
        let (r, c) = rec.centroid_cell();
        assert!(r >= o.rows.0 as f64 && r < o.rows.1 as f64);
        assert!(c >= o.cols.0 as f64 && c < o.cols.1 as f64);
        cols.push(c);
    }
    assert!(cols.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn nearest_ordering_uses_agent_distance() {
    let f = fixture();
    // next to the rightmost table
    let agent = room(f, 100, 150);
    let rec = select_record(&ObjAttr::new("table", 0, None), &f.map, agent, Ordering::LeftToRight)
        .unwrap();
    let near = select_record(&ObjAttr::new("table", 4, Some("yellow")), &f.map, agent, Ordering::LeftToRight)
        .unwrap();
    assert_eq!(rec.label_id, near.label_id);
    let first_near = select_record(&ObjAttr::new("table", 1, None), &f.map, agent, Ordering::Nearest)
        .unwrap();
    assert_eq!(first_near.label_id, rec.label_id);
}

#[test]
fn filters_and_errors() {
    let f = fixture();
    let agent = room(f, 180, 100);
    assert_eq!(candidates(&ObjAttr::new("table", 0, Some("yellow")), &f.map).len(), 4);
    assert_eq!(candidates(&ObjAttr::new("table", 0, Some("red")), &f.map).len(), 0);
    assert_eq!(candidates(&ObjAttr::new("sofa", 0, None), &f.map).len(), 1);
    let err = select_record(&ObjAttr::new("table", 5, Some("yellow")), &f.map, agent, Ordering::LeftToRight)
        .unwrap_err();
    assert!(matches!(err, Error::IndexOutOfRange { available: 4, .. }));
    let err = select_record(&ObjAttr::new("piano", 0, None), &f.map, agent, Ordering::LeftToRight)
        .unwrap_err();
    assert!(matches!(err, Error::NotFound(_)));
}

#[test]
fn fine_goal_inside_mask_and_approach_is_free() {
    let f = fixture();
    let w = world(f);
    let agent = room(f, 180, 100);
    for k in 1..=4 {
        let attr = ObjAttr::new("table", k, Some("yellow"));
        let rec = select_record(&attr, &f.map, agent, Ordering::LeftToRight).unwrap();
        let goal = fine_position(rec, &f.map);
        assert!(rec.segmentation[goal]);
        let inst = resolve(
            &attr,
            &f.map,
            w.occupancy(),
            Some(w.components()),
            agent,
            Ordering::LeftToRight,
            &LocalizeParams::default(),
        )
        .unwrap();
        assert_eq!(inst.goal_cell, goal);
        assert!(w.occupancy().is_traversable(inst.approach_cell));
        assert!(w.components().connected(agent, inst.approach_cell));
        let d = (inst.approach_cell.0 as f64 - goal.0 as f64)
            .hypot(inst.approach_cell.1 as f64 - goal.1 as f64);
        assert!(d * 0.05 <= 2.0);
    }
}

#[test]
fn approach_cell_respects_component() {
    // two free pockets separated by a wall; the goal sits in the wall
    let mut blocked: Vec<_> = (0..9).map(|r| (r, 4)).collect();
    blocked.push((4, 3));
    let occ = common::open_grid(9, 9, &blocked);
    let comps = Components::new(&occ);
    let left = comps.id((4, 0));
    assert_ne!(left, comps.id((4, 8)));
    assert_eq!(approach_cell((4, 4), &occ, 3, None).unwrap(), (4, 5));
    assert_eq!(approach_cell((4, 4), &occ, 3, Some((&comps, left))).unwrap(), (3, 3));
    assert!(approach_cell((4, 4), &occ, 0, None).is_err());
}
