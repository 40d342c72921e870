use proptest::prelude::*;

use ivlmap::eval::{evaluate, SUBGOALS_PER_TASK};
use ivlmap::geometry::{grid_index, GridSpec};
use ivlmap::instance::{label_components, score_labels};
use ivlmap::io::tensor::{decode_tensor, encode_tensor};
use ivlmap::localization::ObjAttr;
use ivlmap::mapping::{dilate, Occupancy};
use ivlmap::navigation::planner::{path_cost, plan_path, PathCost};
use ivlmap::navlang::{parse_program, pretty_print, Call, Expr, Function, Program, SourceSpan, Stmt};
use ivlmap::{Raster, Tensor3};

fn grid64() -> GridSpec<f64> {
    GridSpec {
        h_bar: 500,
        w_bar: 500,
        cell_size: 0.05,
        robot_height: 1.5,
    }
}

fn raster<T: Clone>(h: usize, w: usize, v: Vec<T>) -> Raster<T> {
    Raster::from_vec(h, w, v[..h * w].to_vec()).unwrap()
}

fn call(function: Function, args: Vec<Expr>) -> Stmt {
    Stmt::Call {
        bind: None,
        call: Call {
            function,
            args,
            span: SourceSpan::default(),
        },
    }
}

fn word() -> impl Strategy<Value = String> {
    "[a-z][a-z_]{0,7}"
}

fn attr() -> impl Strategy<Value = ObjAttr> {
    (word(), 0u32..6, proptest::option::of(word())).prop_map(|(n, k, c)| ObjAttr {
        name: n,
        instance_idx: k,
        color: c,
    })
}

fn simple_stmt() -> impl Strategy<Value = Stmt> {
    prop_oneof![
        (-720.0f64..720.0).prop_map(|a| call(Function::Turn, vec![Expr::Num(a)])),
        (0.0f64..20.0).prop_map(|d| call(Function::MoveForward, vec![Expr::Num(d)])),
        attr().prop_map(|a| call(Function::MoveToObject, vec![Expr::Attr(a)])),
        (attr(), attr()).prop_map(|(a, b)| call(Function::MoveInBetween, vec![Expr::Attr(a), Expr::Attr(b)])),
        attr().prop_map(|a| call(Function::Face, vec![Expr::Attr(a)])),
        (0i64..500, 0i64..500).prop_map(|(r, c)| call(Function::MoveTo, vec![Expr::Pos(r, c)])),
        Just(call(Function::Stop, vec![])),
    ]
}

fn program() -> impl Strategy<Value = Program> {
    let stmt = prop_oneof![
        3 => simple_stmt(),
        1 => (1u32..9, proptest::collection::vec(simple_stmt(), 1..4))
            .prop_map(|(count, body)| Stmt::Repeat { count, body, span: SourceSpan::default() }),
    ];
    proptest::collection::vec(stmt, 0..8).prop_map(|statements| Program { statements })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn projection_is_monotone(a in -12.0f64..12.0, b in -12.0f64..12.0, z in -12.0f64..12.0) {
        let g = grid64();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p = grid_index(&[lo, 0.0, z], &g).unwrap();
        let q = grid_index(&[hi, 0.0, z], &g).unwrap();
        prop_assert!(p.0 <= q.0);
        prop_assert_eq!(p.1, q.1);
        // z runs against the column index
        let r = grid_index(&[lo, 0.0, z + 0.5], &g).unwrap();
        prop_assert!(r.1 < p.1);
    }

    #[test]
    fn cell_centers_project_home(r in 0usize..500, c in 0usize..500) {
        let g = grid64();
        let (x, z) = g.cell_center_world((r, c));
        prop_assert_eq!(grid_index(&[x, 0.3, z], &g), Some((r as i64, c as i64)));
    }

    #[test]
    fn scores_normalize(counts in proptest::collection::vec(1u64..1000, 1..12)) {
        let labels: Vec<u32> = (0..counts.len() as u32).rev().collect();
        let s = score_labels(&labels, &counts).unwrap();
        let sum: f64 = s.iter().map(|x| x.score).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(s.windows(2).all(|w| w[0].score >= w[1].score));
        // input order does not matter
        let mut pairs: Vec<_> = labels.iter().copied().zip(counts.iter().copied()).collect();
        pairs.reverse();
        let (l2, c2): (Vec<u32>, Vec<u64>) = pairs.into_iter().unzip();
        prop_assert_eq!(score_labels(&l2, &c2).unwrap(), s);
    }

    #[test]
    fn components_partition_labels(
        h in 1usize..16, w in 1usize..16,
        v in proptest::collection::vec(0u32..3, 256),
        min_area in 1usize..6,
    ) {
        let labels = raster(h, w, v);
        let comps = label_components(&labels, &[0], min_area);
        let mut seen = Raster::filled(h, w, false);
        for m in &comps {
            prop_assert!(m.count_true() >= min_area);
            let cells: Vec<_> = m.true_cells().collect();
            let l = labels[cells[0]];
            prop_assert!(l != 0);
            for cell in cells {
                prop_assert_eq!(labels[cell], l);
                prop_assert!(!seen[cell]);
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn dilation_grows(h in 1usize..14, w in 1usize..14, v in proptest::collection::vec(proptest::bool::weighted(0.1), 196), r in 0usize..4) {
        let m = raster(h, w, v);
        let d = dilate(&m, r);
        let d1 = dilate(&m, r + 1);
        for (cell, &on) in m.iter_cells() {
            prop_assert!(!on || d[cell]);
            prop_assert!(!d[cell] || d1[cell]);
        }
        // every dilated cell is within r of a set cell
        for (cell, &on) in d.iter_cells() {
            if on {
                let near = m.true_cells().any(|c| c.0.abs_diff(cell.0) <= r && c.1.abs_diff(cell.1) <= r);
                prop_assert!(near);
            }
        }
    }

    #[test]
    fn planner_costs_are_symmetric_and_bounded(
        v in proptest::collection::vec(proptest::bool::weighted(0.2), 400),
        a in (0usize..20, 0usize..20), b in (0usize..20, 0usize..20),
    ) {
        let mut blocked = raster(20, 20, v);
        blocked[a] = false;
        blocked[b] = false;
        let occ = Occupancy::from_blocked(blocked);
        match (plan_path(a, b, &occ), plan_path(b, a, &occ)) {
            (Ok(p), Ok(q)) => {
                prop_assert_eq!(path_cost(&p), path_cost(&q));
                prop_assert!(path_cost(&p) >= PathCost::octile(a, b));
            }
            (Err(_), Err(_)) => {}
            (p, q) => prop_assert!(false, "asymmetric: {:?} vs {:?}", p.is_ok(), q.is_ok()),
        }
    }

    #[test]
    fn metrics_are_consistent(flags in proptest::collection::vec(proptest::collection::vec(any::<bool>(), SUBGOALS_PER_TASK), 0..20)) {
        let m = evaluate(&flags).unwrap();
        prop_assert_eq!(m.subgoals, flags.len() * SUBGOALS_PER_TASK);
        prop_assert_eq!(m.sn, flags.iter().flatten().filter(|&&f| f).count());
        prop_assert!(m.t.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!((0.0..=1.0).contains(&m.sr));
    }

    #[test]
    fn tensors_round_trip(r in 1usize..5, c in 1usize..5, ch in 1usize..5, v in proptest::collection::vec(-1e6f32..1e6, 64)) {
        let t = Tensor3::from_vec(r, c, ch, v[..r * c * ch].to_vec()).unwrap();
        let back: Tensor3<f32> = decode_tensor(&encode_tensor(&t), std::path::Path::new("t")).unwrap();
        prop_assert_eq!(&back, &t);
        let wide: Tensor3<f64> = decode_tensor(&encode_tensor(&t), std::path::Path::new("t")).unwrap();
        prop_assert!(wide.as_slice().iter().zip(t.as_slice()).all(|(a, b)| *a == *b as f64));
    }

    #[test]
    fn printed_programs_parse_back(p in program()) {
        let text = pretty_print(&p);
        let q = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(pretty_print(&q), text);
    }
}
