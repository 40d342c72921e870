//! Lexer and recursive-descent parser.
//!
//! ```text
//! program := sep* (stmt (sep+ stmt)*)? sep*        sep := newline | ';' | ','
//! stmt    := [ident '='] call | 'repeat' int '{' program '}'
//! call    := ['agent' '.'] ident '(' [expr (',' expr)*] ')'
//! expr    := string | number | 'None' | ident | ident '[' index ']' | tuple
//! index   := int | 'i' ['%' int]
//! tuple   := '(' string ',' int ',' (string | 'None') ')' | '(' int ',' int ')'
//! ```

use std::collections::HashSet;

use super::ast::{Call, Expr, Function, IndexExpr, Program, Stmt};
use super::{ParseError, ParseErrorKind, SourceSpan};
use crate::localization::ObjAttr;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Newline,
    Eq,
    Dot,
    Percent,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(n) => format!("number {n}"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::LBrace => "'{'".into(),
            Tok::RBrace => "'}'".into(),
            Tok::LBracket => "'['".into(),
            Tok::RBracket => "']'".into(),
            Tok::Comma => "','".into(),
            Tok::Semi => "';'".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eq => "'='".into(),
            Tok::Dot => "'.'".into(),
            Tok::Percent => "'%'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn err(span: SourceSpan, kind: ParseErrorKind) -> ParseError {
    ParseError { span, kind }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let (mut line, mut line_start) = (1u32, 0usize);
    let mut i = 0;
    let span_at = |start: usize, end: usize, line: u32, line_start: usize| SourceSpan {
        line,
        column: src[line_start..start].chars().count() as u32 + 1,
        start,
        end,
    };
    while i < chars.len() {
        let (pos, ch) = chars[i];
        let end_of = |j: usize| chars.get(j).map_or(src.len(), |c| c.0);
        match ch {
            '\n' => {
                out.push((Tok::Newline, span_at(pos, pos + 1, line, line_start)));
                line += 1;
                line_start = pos + 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '#' => {
                while i < chars.len() && chars[i].1 != '\n' {
                    i += 1;
                }
            }
            '(' | ')' | '{' | '}' | '[' | ']' | ',' | ';' | '=' | '.' | '%' => {
                let tok = match ch {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    '=' => Tok::Eq,
                    '.' if chars.get(i + 1).is_some_and(|c| c.1.is_ascii_digit()) => {
                        let (tok, next) = lex_number(src, &chars, i, line, line_start)?;
                        out.push((tok, span_at(pos, end_of(next), line, line_start)));
                        i = next;
                        continue;
                    }
                    '.' => Tok::Dot,
                    _ => Tok::Percent,
                };
                out.push((tok, span_at(pos, pos + 1, line, line_start)));
                i += 1;
            }
            '\'' | '"' => {
                let quote = ch;
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some((_, '\n')) => {
                            return Err(err(
                                span_at(pos, end_of(j), line, line_start),
                                ParseErrorKind::MalformedLiteral("unterminated string".into()),
                            ))
                        }
                        Some((_, '\\')) => {
                            match chars.get(j + 1) {
                                Some((_, c @ ('\\' | '\'' | '"'))) => s.push(*c),
                                Some((_, 'n')) => s.push('\n'),
                                _ => {
                                    return Err(err(
                                        span_at(chars[j].0, end_of(j + 2), line, line_start),
                                        ParseErrorKind::MalformedLiteral(
                                            "unknown escape in string".into(),
                                        ),
                                    ))
                                }
                            }
                            j += 2;
                        }
                        Some((_, c)) if *c == quote => break,
                        Some((_, c)) => {
                            s.push(*c);
                            j += 1;
                        }
                    }
                }
                out.push((Tok::Str(s), span_at(pos, end_of(j + 1), line, line_start)));
                i = j + 1;
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let (tok, next) = lex_number(src, &chars, i, line, line_start)?;
                out.push((tok, span_at(pos, end_of(next), line, line_start)));
                i = next;
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].1.is_alphanumeric() || chars[j].1 == '_') {
                    j += 1;
                }
                let text = &src[pos..end_of(j)];
                out.push((Tok::Ident(text.to_string()), span_at(pos, end_of(j), line, line_start)));
                i = j;
            }
            other => {
                return Err(err(
                    span_at(pos, pos + other.len_utf8(), line, line_start),
                    ParseErrorKind::Unexpected {
                        expected: "a statement".into(),
                        found: format!("character {other:?}"),
                    },
                ))
            }
        }
    }
    let end = src.len();
    out.push((
        Tok::Eof,
        SourceSpan {
            line,
            column: src[line_start..].chars().count() as u32 + 1,
            start: end,
            end,
        },
    ));
    Ok(out)
}

fn lex_number(
    src: &str,
    chars: &[(usize, char)],
    start: usize,
    line: u32,
    line_start: usize,
) -> Result<(Tok, usize), ParseError> {
    let mut j = start;
    if matches!(chars[j].1, '-' | '+') {
        j += 1;
    }
    while j < chars.len()
        && (chars[j].1.is_ascii_alphanumeric() || chars[j].1 == '.' || chars[j].1 == '_')
    {
        // exponent sign
        if matches!(chars[j].1, 'e' | 'E') && chars.get(j + 1).is_some_and(|c| matches!(c.1, '-' | '+')) {
            j += 2;
            continue;
        }
        j += 1;
    }
    let end = chars.get(j).map_or(src.len(), |c| c.0);
    let text = &src[chars[start].0..end];
    let span = SourceSpan {
        line,
        column: src[line_start..chars[start].0].chars().count() as u32 + 1,
        start: chars[start].0,
        end,
    };
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() && !text.contains(['i', 'I', 'n', 'N']) => Ok((Tok::Num(v), j)),
        _ => Err(err(
            span,
            ParseErrorKind::MalformedLiteral(format!("bad number {text:?}")),
        )),
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    vars: HashSet<String>,
    loop_depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(err(
            self.span(),
            ParseErrorKind::Unexpected {
                expected: expected.into(),
                found: self.peek().describe(),
            },
        ))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<SourceSpan, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            self.unexpected(expected)
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn is_sep(t: &Tok) -> bool {
        matches!(t, Tok::Newline | Tok::Semi | Tok::Comma)
    }

    fn block(&mut self, closing: Tok) -> Result<Vec<Stmt>, ParseError> {
        let mut stmts = Vec::new();
        loop {
            while Self::is_sep(self.peek()) {
                self.bump();
            }
            if *self.peek() == closing {
                return Ok(stmts);
            }
            stmts.push(self.stmt()?);
            if !(Self::is_sep(self.peek()) || *self.peek() == closing) {
                return self.unexpected("a statement separator");
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let Tok::Ident(first) = self.peek().clone() else {
            return self.unexpected("a statement");
        };
        if first == "repeat" && matches!(self.peek_at(1), Tok::Num(_)) {
            self.bump();
            let (Tok::Num(n), nspan) = self.bump() else { unreachable!() };
            if n.fract() != 0.0 || n < 1.0 || n > u32::MAX as f64 {
                return Err(err(
                    nspan,
                    ParseErrorKind::MalformedLiteral(format!("repeat count must be a positive integer, got {n}")),
                ));
            }
            self.skip_newlines();
            self.expect(Tok::LBrace, "'{'")?;
            self.loop_depth += 1;
            let body = self.block(Tok::RBrace)?;
            self.loop_depth -= 1;
            self.expect(Tok::RBrace, "'}'")?;
            if body.is_empty() {
                return Err(err(
                    span,
                    ParseErrorKind::Unexpected {
                        expected: "at least one statement in repeat body".into(),
                        found: "'}'".into(),
                    },
                ));
            }
            return Ok(Stmt::Repeat {
                count: n as u32,
                body,
                span,
            });
        }
        let bind = if *self.peek_at(1) == Tok::Eq {
            if Function::from_name(&first).is_some() || first == "agent" || first == "i" {
                return Err(err(
                    span,
                    ParseErrorKind::Unexpected {
                        expected: "a variable name".into(),
                        found: format!("reserved name {first:?}"),
                    },
                ));
            }
            self.bump();
            self.bump();
            Some(first)
        } else {
            None
        };
        let call = self.call()?;
        if let Some(v) = &bind {
            self.vars.insert(v.clone());
        }
        Ok(Stmt::Call { bind, call })
    }

    fn call(&mut self) -> Result<Call, ParseError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "agent") && *self.peek_at(1) == Tok::Dot {
            self.bump();
            self.bump();
        }
        let (tok, span) = self.bump();
        let Tok::Ident(name) = tok else {
            self.pos -= 1;
            return self.unexpected("a function name");
        };
        let function = Function::from_name(&name)
            .ok_or_else(|| err(span, ParseErrorKind::UnknownFunction(name.clone())))?;
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        self.skip_newlines();
        if *self.peek() != Tok::RParen {
            loop {
                self.skip_newlines();
                args.push(self.expr()?);
                self.skip_newlines();
                if *self.peek() == Tok::Comma {
                    self.bump();
                    continue;
                }
                break;
            }
        }
        self.expect(Tok::RParen, "')' or ','")?;
        let (lo, hi) = function.arity();
        if args.len() < lo || args.len() > hi {
            return Err(err(
                span,
                ParseErrorKind::Arity {
                    function: function.name().into(),
                    expected: if lo == hi {
                        lo.to_string()
                    } else {
                        format!("{lo} to {hi}")
                    },
                    found: args.len(),
                },
            ));
        }
        Ok(Call {
            function,
            args,
            span,
        })
    }

    fn integer(&mut self, what: &str) -> Result<i64, ParseError> {
        match self.bump() {
            (Tok::Num(n), _) if n.fract() == 0.0 && n.abs() < 1e15 => Ok(n as i64),
            (Tok::Num(n), span) => Err(err(
                span,
                ParseErrorKind::MalformedLiteral(format!("{what} must be an integer, got {n}")),
            )),
            _ => {
                self.pos -= 1;
                self.unexpected(what)
            }
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let (tok, span) = self.bump();
        match tok {
            Tok::Str(s) => Ok(Expr::Str(s)),
            Tok::Num(n) => Ok(Expr::Num(n)),
            Tok::Ident(s) if s == "None" || s == "none" => Ok(Expr::None),
            Tok::Ident(s) => {
                if !self.vars.contains(&s) {
                    return Err(err(span, ParseErrorKind::UnknownVariable(s)));
                }
                if *self.peek() != Tok::LBracket {
                    return Ok(Expr::Var(s));
                }
                self.bump();
                let index = match self.peek().clone() {
                    Tok::Ident(i) if i == "i" => {
                        if self.loop_depth == 0 {
                            return Err(err(
                                self.span(),
                                ParseErrorKind::UnknownVariable("i (outside repeat)".into()),
                            ));
                        }
                        self.bump();
                        let modulus = if *self.peek() == Tok::Percent {
                            self.bump();
                            let m = self.integer("modulus")?;
                            if m < 1 || m > u32::MAX as i64 {
                                return Err(err(
                                    span,
                                    ParseErrorKind::MalformedLiteral("modulus must be ≥ 1".into()),
                                ));
                            }
                            Some(m as u32)
                        } else {
                            None
                        };
                        IndexExpr::Counter { modulus }
                    }
                    Tok::Num(_) => {
                        let k = self.integer("index")?;
                        if k < 0 || k > u32::MAX as i64 {
                            return Err(err(
                                span,
                                ParseErrorKind::MalformedLiteral("index must be ≥ 0".into()),
                            ));
                        }
                        IndexExpr::Literal(k as u32)
                    }
                    _ => return self.unexpected("an index"),
                };
                self.expect(Tok::RBracket, "']'")?;
                Ok(Expr::Index { var: s, index })
            }
            Tok::LParen => self.tuple(span),
            other => {
                self.pos -= 1;
                let _ = other;
                self.unexpected("an argument")
            }
        }
    }

    fn tuple(&mut self, span: SourceSpan) -> Result<Expr, ParseError> {
        let mut items = Vec::new();
        loop {
            self.skip_newlines();
            let (tok, s) = self.bump();
            match tok {
                Tok::Str(_) | Tok::Num(_) => items.push((tok, s)),
                Tok::Ident(ref n) if n == "None" || n == "none" => items.push((tok, s)),
                _ => {
                    self.pos -= 1;
                    return self.unexpected("a tuple element");
                }
            }
            self.skip_newlines();
            match self.bump().0 {
                Tok::Comma => continue,
                Tok::RParen => break,
                _ => {
                    self.pos -= 1;
                    return self.unexpected("',' or ')'");
                }
            }
        }
        let malformed = |msg: &str| Err(err(span, ParseErrorKind::MalformedLiteral(msg.into())));
        match items.as_slice() {
            [(Tok::Str(name), _), (Tok::Num(k), _), (color, _)] => {
                if k.fract() != 0.0 || *k < 0.0 || *k > u32::MAX as f64 {
                    return malformed("instance index must be a non-negative integer");
                }
                let color = match color {
                    Tok::Str(c) => Some(c.clone()),
                    Tok::Ident(_) => None,
                    _ => return malformed("color must be a string or None"),
                };
                Ok(Expr::Attr(ObjAttr {
                    name: name.clone(),
                    instance_idx: *k as u32,
                    color,
                }))
            }
            [(Tok::Num(r), _), (Tok::Num(c), _)] => {
                if r.fract() != 0.0 || c.fract() != 0.0 || *r < 0.0 || *c < 0.0 {
                    return malformed("position must be two non-negative integers");
                }
                Ok(Expr::Pos(*r as i64, *c as i64))
            }
            _ => malformed("expected (name, index, color) or (px, py)"),
        }
    }
}

/// Parses program text into an AST, or the first error with its position.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars: HashSet::new(),
        loop_depth: 0,
    };
    let statements = p.block(Tok::Eof)?;
    Ok(Program { statements })
}
