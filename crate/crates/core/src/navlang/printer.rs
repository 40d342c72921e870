use std::fmt::Write;

use super::ast::{Call, Expr, IndexExpr, Program, Stmt};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Str(s) => quote(s),
        Expr::Num(n) => format!("{n}"),
        Expr::None => "None".into(),
        Expr::Attr(a) => format!(
            "({}, {}, {})",
            quote(&a.name),
            a.instance_idx,
            a.color.as_deref().map_or("None".to_string(), quote)
        ),
        Expr::Pos(r, c) => format!("({r}, {c})"),
        Expr::Var(v) => v.clone(),
        Expr::Index { var, index } => match index {
            IndexExpr::Counter { modulus: None } => format!("{var}[i]"),
            IndexExpr::Counter { modulus: Some(m) } => format!("{var}[i % {m}]"),
            IndexExpr::Literal(k) => format!("{var}[{k}]"),
        },
    }
}

fn call(c: &Call) -> String {
    let args: Vec<String> = c.args.iter().map(expr).collect();
    format!("{}({})", c.function.name(), args.join(", "))
}

fn stmts(out: &mut String, body: &[Stmt], depth: usize) {
    let pad = "    ".repeat(depth);
    for s in body {
        match s {
            Stmt::Call { bind: Some(v), call: c } => {
                let _ = writeln!(out, "{pad}{v} = {}", call(c));
            }
            Stmt::Call { bind: None, call: c } => {
                let _ = writeln!(out, "{pad}{}", call(c));
            }
            Stmt::Repeat { count, body, .. } => {
                let _ = writeln!(out, "{pad}repeat {count} {{");
                stmts(out, body, depth + 1);
                let _ = writeln!(out, "{pad}}}");
            }
        }
    }
}

/// Canonical source text: one statement per line, canonical function names, double quotes.
pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    stmts(&mut out, &program.statements, 0);
    out
}
