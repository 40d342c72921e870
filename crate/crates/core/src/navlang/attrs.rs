//! Template extraction of landmark attributes from an instruction.
//!
//! Each landmark phrase is an optional ordinal, optional color and a category noun
//! (possibly multi-word, possibly plural). Ordinals are 1-based; "nearest"/"closest" or no
//! ordinal give 0.

use serde::{Deserialize, Serialize};

use crate::localization::ObjAttr;
use crate::vocab::Vocabulary;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttrTuple {
    pub attr: ObjAttr,
    /// Byte range of the phrase in the original command.
    pub span: (usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extraction {
    pub tuples: Vec<AttrTuple>,
    pub warnings: Vec<String>,
}

impl Extraction {
    pub fn attrs(&self) -> Vec<ObjAttr> {
        self.tuples.iter().map(|t| t.attr.clone()).collect()
    }
}

const ORDINALS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

const ARTICLES: [&str; 3] = ["the", "a", "an"];

/// Words after an article that are directions or relations rather than landmarks.
const SPATIAL: [&str; 14] = [
    "west", "east", "north", "south", "left", "right", "side", "front", "back", "middle",
    "end", "way", "room", "center",
];

fn ordinal(word: &str) -> Option<u32> {
    if let Some(i) = ORDINALS.iter().position(|o| *o == word) {
        return Some(i as u32 + 1);
    }
    if matches!(word, "nearest" | "closest") {
        return Some(0);
    }
    let digits: String = word.chars().take_while(char::is_ascii_digit).collect();
    let suffix = &word[digits.len()..];
    if !digits.is_empty() && matches!(suffix, "st" | "nd" | "rd" | "th") {
        return digits.parse().ok();
    }
    None
}

fn singular(word: &str) -> Vec<String> {
    let mut forms = vec![word.to_string()];
    if let Some(s) = word.strip_suffix("es") {
        forms.push(s.to_string());
    }
    if let Some(s) = word.strip_suffix('s') {
        forms.push(s.to_string());
    }
    forms
}

struct Token {
    text: String,
    start: usize,
    end: usize,
}

fn tokenize(command: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, String)> = None;
    for (i, ch) in command.char_indices() {
        if ch.is_alphanumeric() {
            match &mut cur {
                Some((_, s)) => s.extend(ch.to_lowercase()),
                None => cur = Some((i, ch.to_lowercase().collect())),
            }
        } else if ch == '\'' && cur.is_some() {
            // drop possessive/apostrophe without splitting the word
        } else if let Some((start, text)) = cur.take() {
            out.push(Token { text, start, end: i });
        }
    }
    if let Some((start, text)) = cur {
        out.push(Token {
            text,
            start,
            end: command.len(),
        });
    }
    out
}

/// Longest category (by word count) starting at token `i`, as `(label, tokens used)`.
fn match_category(tokens: &[Token], i: usize, categories: &Vocabulary) -> Option<(String, usize)> {
    let mut best: Option<(String, usize)> = None;
    for label in categories.labels() {
        let words: Vec<&str> = label.split(|c: char| c == ' ' || c == '_').collect();
        if i + words.len() > tokens.len() {
            continue;
        }
        let ok = words.iter().enumerate().all(|(k, w)| {
            let t = &tokens[i + k].text;
            if k + 1 == words.len() {
                singular(t).iter().any(|f| f == w)
            } else {
                t == w
            }
        });
        if ok && best.as_ref().is_none_or(|(_, n)| words.len() > *n) {
            best = Some((label.clone(), words.len()));
        }
    }
    best
}

/// One tuple per landmark phrase, in order of appearance.
pub fn extract_attributes(command: &str, categories: &Vocabulary, colors: &Vocabulary) -> Extraction {
    let tokens = tokenize(command);
    let mut out = Extraction::default();
    let mut ordinal_mod: Option<(u32, usize)> = None;
    let mut color_mod: Option<(String, usize)> = None;
    let mut after_article = false;
    let mut i = 0;
    while i < tokens.len() {
        let word = tokens[i].text.as_str();
        if let Some((label, used)) = match_category(&tokens, i, categories) {
            let start = [ordinal_mod.as_ref().map(|m| m.1), color_mod.as_ref().map(|m| m.1)]
                .into_iter()
                .flatten()
                .min()
                .unwrap_or(tokens[i].start);
            out.tuples.push(AttrTuple {
                attr: ObjAttr {
                    name: label,
                    instance_idx: ordinal_mod.take().map_or(0, |m| m.0),
                    color: color_mod.take().map(|m| m.0),
                },
                span: (start, tokens[i + used - 1].end),
            });
            after_article = false;
            i += used;
            continue;
        }
        if let Some(k) = ordinal(word) {
            if let Some((prev, _)) = ordinal_mod.replace((k, tokens[i].start)) {
                out.warnings
                    .push(format!("ordinal {prev} at byte {} has no landmark", tokens[i].start));
            }
        } else if colors.index_of(word).is_some() {
            if let Some((prev, _)) = color_mod.replace((word.to_string(), tokens[i].start)) {
                out.warnings
                    .push(format!("color {prev:?} before byte {} has no landmark", tokens[i].start));
            }
        } else if ARTICLES.contains(&word) {
            after_article = true;
            i += 1;
            continue;
        } else if after_article && !SPATIAL.contains(&word) && !word.chars().all(|c| c.is_ascii_digit()) {
            out.warnings.push(format!(
                "unrecognized landmark {word:?} at byte {}",
                tokens[i].start
            ));
            ordinal_mod = None;
            color_mod = None;
        } else if ordinal_mod.is_some() || color_mod.is_some() {
            // a modifier followed by something that is not a landmark
            out.warnings.push(format!(
                "modifier before {word:?} at byte {} has no landmark",
                tokens[i].start
            ));
            ordinal_mod = None;
            color_mod = None;
        }
        after_article = false;
        i += 1;
    }
    if ordinal_mod.is_some() || color_mod.is_some() {
        out.warnings.push("trailing modifier has no landmark".into());
    }
    out
}
