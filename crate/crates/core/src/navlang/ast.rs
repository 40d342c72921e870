use serde::{Deserialize, Serialize};

use super::SourceSpan;
use crate::localization::ObjAttr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Function {
    GetNearestObjPos,
    GetObjAttributes,
    GetSpecifiedObjPos,
    GetNearestObjContour,
    MoveTo,
    MoveToLeft,
    MoveToRight,
    WithObjectOnLeft,
    WithObjectOnRight,
    MoveInBetween,
    Turn,
    Face,
    TurnAbsolute,
    MoveNorth,
    MoveSouth,
    MoveEast,
    MoveWest,
    MoveToObject,
    MoveForward,
    Stop,
}

impl Function {
    pub const ALL: [Function; 20] = [
        Function::GetNearestObjPos,
        Function::GetObjAttributes,
        Function::GetSpecifiedObjPos,
        Function::GetNearestObjContour,
        Function::MoveTo,
        Function::MoveToLeft,
        Function::MoveToRight,
        Function::WithObjectOnLeft,
        Function::WithObjectOnRight,
        Function::MoveInBetween,
        Function::Turn,
        Function::Face,
        Function::TurnAbsolute,
        Function::MoveNorth,
        Function::MoveSouth,
        Function::MoveEast,
        Function::MoveWest,
        Function::MoveToObject,
        Function::MoveForward,
        Function::Stop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Function::GetNearestObjPos => "get_nearest_obj_pos",
            Function::GetObjAttributes => "get_obj_attributes",
            Function::GetSpecifiedObjPos => "get_specified_obj_pos",
            Function::GetNearestObjContour => "get_nearest_obj_contour",
            Function::MoveTo => "move_to",
            Function::MoveToLeft => "move_to_left",
            Function::MoveToRight => "move_to_right",
            Function::WithObjectOnLeft => "with_object_on_left",
            Function::WithObjectOnRight => "with_object_on_right",
            Function::MoveInBetween => "move_in_between",
            Function::Turn => "turn",
            Function::Face => "face",
            Function::TurnAbsolute => "turn_absolute",
            Function::MoveNorth => "move_north",
            Function::MoveSouth => "move_south",
            Function::MoveEast => "move_east",
            Function::MoveWest => "move_west",
            Function::MoveToObject => "move_to_object",
            Function::MoveForward => "move_forward",
            Function::Stop => "stop",
        }
    }

    /// Canonical names plus the accepted spellings `attrs` and `get_specifed_obj_pos`.
    pub fn from_name(name: &str) -> Option<Function> {
        match name {
            "attrs" => Some(Function::GetObjAttributes),
            "get_specifed_obj_pos" => Some(Function::GetSpecifiedObjPos),
            _ => Self::ALL.into_iter().find(|f| f.name() == name),
        }
    }

    /// Inclusive argument count range.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Function::Stop => (0, 0),
            Function::GetObjAttributes => (3, 4),
            Function::MoveInBetween => (2, 2),
            _ => (1, 1),
        }
    }

    pub fn signature(self) -> &'static str {
        match self {
            Function::GetNearestObjPos => "get_nearest_obj_pos(object_name)",
            Function::GetObjAttributes => {
                "get_obj_attributes(object_name, instance_idx, object_color[, ordering])"
            }
            Function::GetSpecifiedObjPos => "get_specified_obj_pos(object)",
            Function::GetNearestObjContour => "get_nearest_obj_contour(object_name | object)",
            Function::MoveTo => "move_to(position)",
            Function::MoveToLeft => "move_to_left(object)",
            Function::MoveToRight => "move_to_right(object)",
            Function::WithObjectOnLeft => "with_object_on_left(object)",
            Function::WithObjectOnRight => "with_object_on_right(object)",
            Function::MoveInBetween => "move_in_between(object_a, object_b)",
            Function::Turn => "turn(angle)",
            Function::Face => "face(object)",
            Function::TurnAbsolute => "turn_absolute(angle)",
            Function::MoveNorth => "move_north(object)",
            Function::MoveSouth => "move_south(object)",
            Function::MoveEast => "move_east(object)",
            Function::MoveWest => "move_west(object)",
            Function::MoveToObject => "move_to_object(object)",
            Function::MoveForward => "move_forward(dist)",
            Function::Stop => "stop()",
        }
    }
}

/// Index into a bound sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum IndexExpr {
    /// `i` or `i % m`: the innermost repeat counter, 0-based.
    Counter { modulus: Option<u32> },
    Literal(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Str(String),
    Num(f64),
    None,
    /// `("table", 3, "yellow")`
    Attr(ObjAttr),
    /// `(px, py)`
    Pos(i64, i64),
    Var(String),
    Index { var: String, index: IndexExpr },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Call {
    pub function: Function,
    pub args: Vec<Expr>,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Stmt {
    Call { bind: Option<String>, call: Call },
    Repeat {
        count: u32,
        body: Vec<Stmt>,
        span: SourceSpan,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub statements: Vec<Stmt>,
}

impl Program {
    /// Calls in execution order, with repeats unrolled.
    pub fn flattened_calls(&self) -> Vec<&Call> {
        fn walk<'a>(stmts: &'a [Stmt], out: &mut Vec<&'a Call>) {
            for s in stmts {
                match s {
                    Stmt::Call { call, .. } => out.push(call),
                    Stmt::Repeat { count, body, .. } => {
                        for _ in 0..*count {
                            walk(body, out);
                        }
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.statements, &mut out);
        out
    }
}
