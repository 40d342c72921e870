mod common;

use std::io::{Read, Write};
use std::net::TcpListener;

use common::snippets::{
    expected_asts, extraction_cases, AROUND_RED_SOFA, RIGHT_OF_RED_SOFA, THIRD_YELLOW_TABLE,
};
use common::{agent, fixture, room, world};
use ivlmap::navigation::Navigator;
use ivlmap::navlang::translator::TranslationSource;
use ivlmap::navlang::{
    external_translate, extract_attributes, interpret, parse_program, parser, pretty_print,
    Function, ParseErrorKind, TranslatorConfig,
};
use ivlmap::Error;

#[test]
fn snippets_parse_to_documented_asts() {
    let want = expected_asts();
    for (text, ast) in [THIRD_YELLOW_TABLE, RIGHT_OF_RED_SOFA, AROUND_RED_SOFA].iter().zip(&want) {
        let p = parse_program(text).unwrap();
        assert_eq!(&p, ast);
        assert_eq!(parse_program(&pretty_print(&p)).unwrap(), p);
    }
}

#[test]
fn snippets_execute_on_fixture() {
    let f = fixture();
    let w = world(f);
    for text in [THIRD_YELLOW_TABLE, RIGHT_OF_RED_SOFA, AROUND_RED_SOFA] {
        let mut nav = Navigator::new(&w, agent(room(f, 180, 60), 0.0)).unwrap();
        let log = interpret(&parse_program(text).unwrap(), &mut nav).unwrap();
        assert!(!log.is_empty());
        for step in &nav.trajectory().steps {
            assert!(w.occupancy().is_traversable(step.cell));
        }
    }
}

#[test]
fn third_yellow_table_is_faced() {
    let f = fixture();
    let w = world(f);
    let mut nav = Navigator::new(&w, agent(room(f, 180, 100), 0.0)).unwrap();
    interpret(&parse_program(THIRD_YELLOW_TABLE).unwrap(), &mut nav).unwrap();
    let third = &f.scene.ground_truth().objects[2];
    let want = nav.bearing_to(third.centroid);
    let got = nav.agent().heading;
    assert!(want.relative_to(got).degrees().abs() < 2.0);
}

#[test]
fn circumnavigation_stays_within_one_perimeter() {
    let f = fixture();
    let w = world(f);
    let mut nav = Navigator::new(&w, agent(room(f, 180, 60), 0.0)).unwrap();
    let log = interpret(&parse_program(AROUND_RED_SOFA).unwrap(), &mut nav).unwrap();
    let contour = match &log[2].result {
        ivlmap::navlang::Value::Contour(c) => *c,
        other => panic!("expected a contour, got {other:?}"),
    };
    let perimeter_cells = contour.iter().sum::<f64>() / 0.05;
    let orbit_start = log[0].trajectory_len - 1;
    let start = nav.trajectory().steps[orbit_start].cell;
    let end = nav.agent().cell;
    let d = (start.0 as f64 - end.0 as f64).hypot(start.1 as f64 - end.1 as f64);
    assert!(d <= perimeter_cells, "ended {d} cells from the orbit start");
    let turns = log.iter().filter(|e| e.function == Function::Turn).count();
    assert_eq!(turns, 9);
}

#[test]
fn extraction_examples() {
    let f = fixture();
    let (cats, colors) = (f.map.categories(), f.map.colors());
    let cases = extraction_cases();
    for (cmd, want) in cases {
        let e = extract_attributes(cmd, cats, colors);
        assert_eq!(e.attrs(), want, "{cmd}");
        assert!(e.warnings.is_empty(), "{cmd}: {:?}", e.warnings);
    }
}

#[test]
fn parse_errors_carry_positions() {
    let e = parse_program("stop()\nfly_to('x')").unwrap_err();
    assert_eq!((e.span.line, e.span.column), (2, 1));
    assert!(matches!(e.kind, ParseErrorKind::UnknownFunction(_)));
    let e = parse_program("turn(1, 2)").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Arity { .. }));
    let e = parse_program("face(obj)").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::UnknownVariable(_)));
    let e = parse_program("c = get_nearest_obj_contour('sofa')\nmove_forward(c[i])").unwrap_err();
    assert_eq!(e.span.line, 2);
    let e = parse_program("move_to_object(('sofa', 1.5, 'red'))").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::MalformedLiteral(_)));
    assert!(parser::parse_program("# only a comment\n\n").unwrap().statements.is_empty());
}

#[test]
fn runtime_errors_name_the_call() {
    let f = fixture();
    let w = world(f);
    let mut nav = Navigator::new(&w, agent(room(f, 180, 100), 0.0)).unwrap();
    let p = parse_program("stop()\nmove_to_object(('table', 9, 'yellow'))").unwrap();
    match interpret(&p, &mut nav) {
        Err(Error::Runtime { span, message }) => {
            assert_eq!(span.line, 2);
            assert!(message.contains("table"), "{message}");
        }
        other => panic!("expected a runtime error, got {other:?}"),
    }
    // the partial trajectory survives
    assert_eq!(nav.trajectory().stop_cell_since(0), Some(room(f, 180, 100)));
}

fn serve_once(reply: &'static str) -> (String, std::thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    let handle = std::thread::spawn(move || {
        let (mut sock, _) = listener.accept().unwrap();
        let mut req = String::new();
        sock.read_to_string(&mut req).unwrap();
        sock.write_all(reply.as_bytes()).unwrap();
        req
    });
    (addr, handle)
}

#[test]
fn translator_round_trip() {
    let f = fixture();
    let (addr, handle) = serve_once("move_to_object(('sofa', 0, 'red'))\nstop()\n\ntrailing chatter");
    let t = external_translate(
        "go to the red sofa",
        &TranslatorConfig::new(addr),
        f.map.categories(),
        f.map.colors(),
    );
    let req = handle.join().unwrap();
    assert!(req.starts_with("go to the red sofa\n\n"));
    assert!(req.contains("move_to_object"));
    assert_eq!(t.source, TranslationSource::Translator);
    assert_eq!(t.program.statements.len(), 2);
    assert!(t.warnings.is_empty());
}

#[test]
fn translator_garbage_falls_back() {
    let f = fixture();
    let (addr, handle) = serve_once("Sure! Here is some code: go()");
    let t = external_translate(
        "go to the red sofa then the second yellow table",
        &TranslatorConfig::new(addr),
        f.map.categories(),
        f.map.colors(),
    );
    handle.join().unwrap();
    assert_eq!(t.source, TranslationSource::Fallback);
    assert!(t.warnings[0].starts_with("translation rejected"));
    assert_eq!(
        pretty_print(&t.program),
        "move_to_object((\"sofa\", 0, \"red\"))\nstop()\nmove_to_object((\"table\", 2, \"yellow\"))\nstop()\n"
    );
}

#[test]
fn translator_unreachable_falls_back() {
    let f = fixture();
    let addr = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().to_string()
    };
    let mut cfg = TranslatorConfig::new(addr);
    cfg.timeout_s = 2.0;
    let t = external_translate("go to the sofa", &cfg, f.map.categories(), f.map.colors());
    assert_eq!(t.source, TranslationSource::Fallback);
    assert!(t.warnings[0].starts_with("translator unavailable"));
    assert_eq!(t.program.statements.len(), 2);
}
