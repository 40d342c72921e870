use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ast::{Call, Expr, Function, IndexExpr, Program, Stmt};
use super::SourceSpan;
use crate::error::{Error, Result};
use crate::localization::{InstanceRef, Ordering};
use crate::navigation::{Heading, Navigator};
use crate::raster::Cell;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Value {
    None,
    Num(f64),
    Str(String),
    Pos(Cell),
    Object(InstanceRef),
    Contour([f64; 4]),
}

impl Value {
    fn kind(&self) -> &'static str {
        match self {
            Value::None => "None",
            Value::Num(_) => "number",
            Value::Str(_) => "string",
            Value::Pos(_) => "position",
            Value::Object(_) => "object",
            Value::Contour(_) => "contour",
        }
    }
}

/// One executed call and what it returned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub function: Function,
    pub line: u32,
    pub result: Value,
    /// Trajectory length after the call.
    pub trajectory_len: usize,
}

struct Interp<'a, 'w, 'm, T> {
    nav: &'a mut Navigator<'w, 'm, T>,
    vars: HashMap<String, Value>,
    counters: Vec<usize>,
    log: Vec<LogEntry>,
}

fn runtime(span: SourceSpan, message: impl Into<String>) -> Error {
    Error::Runtime {
        span,
        message: message.into(),
    }
}

/// Library errors keep their kind in the message and gain the call's position.
fn at(span: SourceSpan, e: Error) -> Error {
    match e {
        Error::Runtime { .. } => e,
        other => runtime(span, other.to_string()),
    }
}

impl<T: Scalar> Interp<'_, '_, '_, T> {
    fn eval(&self, e: &Expr, span: SourceSpan) -> Result<Value> {
        Ok(match e {
            Expr::Str(s) => Value::Str(s.clone()),
            Expr::Num(n) => Value::Num(*n),
            Expr::None => Value::None,
            Expr::Pos(r, c) => Value::Pos((*r as usize, *c as usize)),
            Expr::Attr(a) => Value::Object(
                self.nav
                    .resolve(a, Ordering::LeftToRight)
                    .map_err(|e| at(span, e))?,
            ),
            Expr::Var(v) => self
                .vars
                .get(v)
                .cloned()
                .ok_or_else(|| runtime(span, format!("variable {v:?} is not bound")))?,
            Expr::Index { var, index } => {
                let base = self
                    .vars
                    .get(var)
                    .ok_or_else(|| runtime(span, format!("variable {var:?} is not bound")))?;
                let raw = match index {
                    IndexExpr::Literal(k) => *k as usize,
                    IndexExpr::Counter { modulus } => {
                        let i = *self.counters.last().unwrap_or(&0);
                        modulus.map_or(i, |m| i % m as usize)
                    }
                };
                match base {
                    Value::Contour(sides) => Value::Num(sides[raw % 4]),
                    Value::Pos((r, c)) => Value::Num(if raw % 2 == 0 { *r } else { *c } as f64),
                    other => {
                        return Err(runtime(span, format!("cannot index a {}", other.kind())))
                    }
                }
            }
        })
    }

    fn num(&self, c: &Call, k: usize) -> Result<f64> {
        match self.eval(&c.args[k], c.span)? {
            Value::Num(n) => Ok(n),
            v => Err(runtime(
                c.span,
                format!("{}: argument {} must be a number, got {}", c.function.name(), k + 1, v.kind()),
            )),
        }
    }

    fn string(&self, c: &Call, k: usize) -> Result<String> {
        match self.eval(&c.args[k], c.span)? {
            Value::Str(s) => Ok(s),
            v => Err(runtime(
                c.span,
                format!("{}: argument {} must be a string, got {}", c.function.name(), k + 1, v.kind()),
            )),
        }
    }

    fn object(&self, c: &Call, k: usize) -> Result<InstanceRef> {
        match self.eval(&c.args[k], c.span)? {
            Value::Object(o) => Ok(o),
            v => Err(runtime(
                c.span,
                format!("{}: argument {} must be an object, got {}", c.function.name(), k + 1, v.kind()),
            )),
        }
    }

    fn call(&mut self, c: &Call) -> Result<Value> {
        self.nav.mark_call(c.function.name());
        let sp = c.span;
        let v = match c.function {
            Function::GetObjAttributes => {
                let name = self.string(c, 0)?;
                let idx = self.num(c, 1)?;
                if idx.fract() != 0.0 || idx < 0.0 {
                    return Err(runtime(sp, "instance index must be a non-negative integer"));
                }
                let color = match self.eval(&c.args[2], sp)? {
                    Value::Str(s) => Some(s),
                    Value::None => None,
                    v => return Err(runtime(sp, format!("color must be a string or None, got {}", v.kind()))),
                };
                let ordering = if c.args.len() == 4 {
                    self.string(c, 3)?.parse::<Ordering>().map_err(|e| at(sp, e))?
                } else {
                    Ordering::LeftToRight
                };
                let attr = crate::localization::ObjAttr {
                    name,
                    instance_idx: idx as u32,
                    color,
                };
                Value::Object(self.nav.resolve(&attr, ordering).map_err(|e| at(sp, e))?)
            }
            Function::GetNearestObjPos => {
                let name = self.string(c, 0)?;
                Value::Pos(self.nav.get_nearest_obj_pos(&name).map_err(|e| at(sp, e))?)
            }
            Function::GetSpecifiedObjPos => {
                let o = self.object(c, 0)?;
                Value::Pos(self.nav.get_specified_obj_pos(&o))
            }
            Function::GetNearestObjContour => match self.eval(&c.args[0], sp)? {
                Value::Str(name) => Value::Contour(
                    self.nav.get_nearest_obj_contour(&name).map_err(|e| at(sp, e))?,
                ),
                Value::Object(o) => Value::Contour(self.nav.contour(&o)),
                v => return Err(runtime(sp, format!("contour needs a name or object, got {}", v.kind()))),
            },
            Function::MoveTo => {
                let target = match self.eval(&c.args[0], sp)? {
                    Value::Pos(p) => p,
                    Value::Object(o) => o.approach_cell,
                    v => return Err(runtime(sp, format!("move_to needs a position, got {}", v.kind()))),
                };
                self.nav.move_to(target).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::MoveToObject => {
                let o = self.object(c, 0)?;
                self.nav.move_to_object(&o).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::MoveToLeft => {
                let o = self.object(c, 0)?;
                self.nav.move_to_left(&o).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::MoveToRight => {
                let o = self.object(c, 0)?;
                self.nav.move_to_right(&o).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::MoveNorth | Function::MoveSouth | Function::MoveEast | Function::MoveWest => {
                let o = self.object(c, 0)?;
                let side = match c.function {
                    Function::MoveNorth => Heading::NORTH,
                    Function::MoveSouth => Heading::SOUTH,
                    Function::MoveEast => Heading::EAST,
                    _ => Heading::WEST,
                };
                self.nav.move_cardinal(&o, side).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::WithObjectOnLeft => {
                let o = self.object(c, 0)?;
                self.nav.with_object_on_left(&o);
                Value::None
            }
            Function::WithObjectOnRight => {
                let o = self.object(c, 0)?;
                self.nav.with_object_on_right(&o);
                Value::None
            }
            Function::MoveInBetween => {
                let a = self.object(c, 0)?;
                let b = self.object(c, 1)?;
                self.nav.move_in_between(&a, &b).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::Turn => {
                let a = self.num(c, 0)?;
                self.nav.turn(a);
                Value::None
            }
            Function::TurnAbsolute => {
                let a = self.num(c, 0)?;
                self.nav.turn_absolute(a);
                Value::None
            }
            Function::Face => {
                let o = self.object(c, 0)?;
                self.nav.face(&o);
                Value::None
            }
            Function::MoveForward => {
                let d = self.num(c, 0)?;
                self.nav.move_forward(d).map_err(|e| at(sp, e))?;
                Value::None
            }
            Function::Stop => {
                self.nav.stop();
                Value::None
            }
        };
        self.log.push(LogEntry {
            function: c.function,
            line: sp.line,
            result: v.clone(),
            trajectory_len: self.nav.trajectory().len(),
        });
        Ok(v)
    }

    fn run(&mut self, stmts: &[Stmt]) -> Result<()> {
        for s in stmts {
            match s {
                Stmt::Call { bind, call } => {
                    let v = self.call(call)?;
                    if let Some(name) = bind {
                        self.vars.insert(name.clone(), v);
                    }
                }
                Stmt::Repeat { count, body, .. } => {
                    self.counters.push(0);
                    for i in 0..*count as usize {
                        *self.counters.last_mut().expect("pushed above") = i;
                        self.run(body)?;
                    }
                    self.counters.pop();
                }
            }
        }
        Ok(())
    }
}

/// Executes `program` on the navigator. On error the navigator keeps the partial
/// trajectory and the error carries the failing call's position.
pub fn interpret<T: Scalar>(program: &Program, nav: &mut Navigator<'_, '_, T>) -> Result<Vec<LogEntry>> {
    let mut it = Interp {
        nav,
        vars: HashMap::new(),
        counters: Vec::new(),
        log: Vec::new(),
    };
    it.run(&program.statements)?;
    Ok(it.log)
}
