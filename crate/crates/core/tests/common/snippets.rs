//! Example navigation programs and command phrasings shared by the test suites.

use ivlmap::localization::ObjAttr;
use ivlmap::navlang::{Call, Expr, Function, IndexExpr, Program, SourceSpan, Stmt};

pub const THIRD_YELLOW_TABLE: &str = "\
obj_attr = agent.get_obj_attributes('table',3,'yellow')
agent.face(obj_attr)
";

pub const RIGHT_OF_RED_SOFA: &str = "\
obj_attr = agent.get_obj_attributes('sofa',0,'red')
agent.move_to_right(obj_attr)
";

pub const AROUND_RED_SOFA: &str = "\
agent.move_forward(1)
obj_attr = agent.get_obj_attributes( 'sofa', 0, 'red' )
obj_contour = agent.get_nearest_obj_contour(obj_attr)
agent.face(obj_attr), agent.turn(-90)
repeat 8 {
    agent.move_forward(obj_contour[i % 4])
    agent.turn(90)
}
";

fn call(function: Function, args: Vec<Expr>) -> Call {
    Call {
        function,
        args,
        span: SourceSpan::default(),
    }
}

fn stmt(function: Function, args: Vec<Expr>) -> Stmt {
    Stmt::Call {
        bind: None,
        call: call(function, args),
    }
}

fn bind(var: &str, function: Function, args: Vec<Expr>) -> Stmt {
    Stmt::Call {
        bind: Some(var.into()),
        call: call(function, args),
    }
}

fn s(v: &str) -> Expr {
    Expr::Str(v.into())
}

fn var(v: &str) -> Expr {
    Expr::Var(v.into())
}

fn get_attrs(name: &str, k: f64, color: &str) -> Vec<Expr> {
    vec![s(name), Expr::Num(k), s(color)]
}

pub fn expected_asts() -> [Program; 3] {
    [
        Program {
            statements: vec![
                bind("obj_attr", Function::GetObjAttributes, get_attrs("table", 3.0, "yellow")),
                stmt(Function::Face, vec![var("obj_attr")]),
            ],
        },
        Program {
            statements: vec![
                bind("obj_attr", Function::GetObjAttributes, get_attrs("sofa", 0.0, "red")),
                stmt(Function::MoveToRight, vec![var("obj_attr")]),
            ],
        },
        Program {
            statements: vec![
                stmt(Function::MoveForward, vec![Expr::Num(1.0)]),
                bind("obj_attr", Function::GetObjAttributes, get_attrs("sofa", 0.0, "red")),
                bind("obj_contour", Function::GetNearestObjContour, vec![var("obj_attr")]),
                stmt(Function::Face, vec![var("obj_attr")]),
                stmt(Function::Turn, vec![Expr::Num(-90.0)]),
                Stmt::Repeat {
                    count: 8,
                    body: vec![
                        stmt(
                            Function::MoveForward,
                            vec![Expr::Index {
                                var: "obj_contour".into(),
                                index: IndexExpr::Counter { modulus: Some(4) },
                            }],
                        ),
                        stmt(Function::Turn, vec![Expr::Num(90.0)]),
                    ],
                    span: SourceSpan::default(),
                },
            ],
        },
    ]
}

/// Commands with the attribute tuples they must yield.
pub fn extraction_cases() -> Vec<(&'static str, Vec<ObjAttr>)> {
    vec![
        ("navigate to the third yellow table.", vec![ObjAttr::new("table", 3, Some("yellow"))]),
        (
            "go to the nearest yellow chair and then go to the black sofa.",
            vec![ObjAttr::new("chair", 0, Some("yellow")), ObjAttr::new("sofa", 0, Some("black"))],
        ),
        (
            "go to the kitchen and then go to the toilet.",
            vec![ObjAttr::new("kitchen", 0, None), ObjAttr::new("toilet", 0, None)],
        ),
        (
            "Move to the west of the black chair, with the first red sofa on your right, move to \
             the 2nd table, then turn right 90 degree, then find a table.",
            vec![
                ObjAttr::new("chair", 0, Some("black")),
                ObjAttr::new("sofa", 1, Some("red")),
                ObjAttr::new("table", 2, None),
                ObjAttr::new("table", 0, None),
            ],
        ),
    ]
}
