//! Optional out-of-process instruction translator over a plain TCP text exchange.
//!
//! Request: the command on one line, a blank line, then the prompt block; the client then
//! shuts down its write half. Response: program text, ended by a blank line or EOF.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ast::{Call, Expr, Function, Program, Stmt};
use super::attrs::extract_attributes;
use super::parser::parse_program;
use super::SourceSpan;
use crate::vocab::Vocabulary;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslatorConfig {
    /// `host:port`
    pub address: String,
    pub timeout_s: f64,
}

impl TranslatorConfig {
    pub fn new(address: impl Into<String>) -> Self {
        Self {
            address: address.into(),
            timeout_s: 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranslationSource {
    Translator,
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub program: Program,
    pub source: TranslationSource,
    pub warnings: Vec<String>,
}

/// Instructions sent after the command.
pub fn prompt_block(categories: &Vocabulary, colors: &Vocabulary) -> String {
    let mut s = String::new();
    s.push_str("Reply with a navigation program and nothing else.\n");
    s.push_str("One call per line; `name = call(...)` binds a result; `repeat N { ... }` loops, and `x[i % 4]` indexes a bound contour with the loop counter.\n");
    s.push_str("Objects are written (\"category\", index, \"color\") with index 0 for the nearest and k for the k-th from left to right; use None for an unknown color.\n");
    s.push_str("End every visit with stop().\n");
    s.push_str("Functions:\n");
    for f in Function::ALL {
        s.push_str("  ");
        s.push_str(f.signature());
        s.push('\n');
    }
    s.push_str("Categories: ");
    s.push_str(&categories.labels().join(", "));
    s.push_str("\nColors: ");
    s.push_str(&colors.labels().join(", "));
    s.push('\n');
    s
}

fn request(command: &str, cfg: &TranslatorConfig, prompt: &str) -> std::io::Result<String> {
    let timeout = Duration::from_secs_f64(cfg.timeout_s.max(0.001));
    let addr = cfg
        .address
        .to_socket_addrs()?
        .next()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::NotFound, "no address"))?;
    let mut stream = TcpStream::connect_timeout(&addr, timeout)?;
    stream.set_read_timeout(Some(timeout))?;
    stream.set_write_timeout(Some(timeout))?;
    let line = command.replace(['\r', '\n'], " ");
    write!(stream, "{line}\n\n{prompt}")?;
    stream.flush()?;
    stream.shutdown(std::net::Shutdown::Write)?;
    let mut reader = BufReader::new(stream);
    let mut text = String::new();
    loop {
        let mut buf = String::new();
        if reader.read_line(&mut buf)? == 0 || buf.trim().is_empty() && !text.is_empty() {
            break;
        }
        if !buf.trim().is_empty() {
            text.push_str(&buf);
        }
    }
    Ok(text)
}

/// Visits every extracted landmark in order: `move_to_object(tuple)` then `stop()`.
pub fn fallback_program(
    command: &str,
    categories: &Vocabulary,
    colors: &Vocabulary,
) -> (Program, Vec<String>) {
    let ex = extract_attributes(command, categories, colors);
    let mut statements = Vec::new();
    for t in ex.tuples {
        statements.push(Stmt::Call {
            bind: None,
            call: Call {
                function: Function::MoveToObject,
                args: vec![Expr::Attr(t.attr)],
                span: SourceSpan::default(),
            },
        });
        statements.push(Stmt::Call {
            bind: None,
            call: Call {
                function: Function::Stop,
                args: vec![],
                span: SourceSpan::default(),
            },
        });
    }
    (Program { statements }, ex.warnings)
}

/// Asks the translator for a program; any transport or parse failure falls back to the
/// extracted-landmark visit program with a warning.
pub fn external_translate(
    command: &str,
    cfg: &TranslatorConfig,
    categories: &Vocabulary,
    colors: &Vocabulary,
) -> Translation {
    let prompt = prompt_block(categories, colors);
    let reason = match request(command, cfg, &prompt) {
        Ok(text) if text.trim().is_empty() => "translator returned an empty program".to_string(),
        Ok(text) => match parse_program(&text) {
            Ok(program) => {
                return Translation {
                    program,
                    source: TranslationSource::Translator,
                    warnings: Vec::new(),
                }
            }
            Err(e) => format!("translation rejected: {e}"),
        },
        Err(e) => format!("translator unavailable at {}: {e}", cfg.address),
    };
    tracing::warn!(%reason, "using fallback program");
    let (program, mut warnings) = fallback_program(command, categories, colors);
    warnings.insert(0, reason);
    Translation {
        program,
        source: TranslationSource::Fallback,
        warnings,
    }
}
