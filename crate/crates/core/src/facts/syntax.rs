//! Canonical fact file format.
//!
//! ```text
//! file    := (line '\n')*
//! line    := subject ' ' predicate ' ' object ' .'
//! object  := ident | '"' escaped-text '"' | integer | integer '/' positive-integer
//! ```
//!
//! Canonical output sorts lines bytewise and ends every line with `\n`. The
//! parser also accepts arbitrary whitespace between tokens, blank lines and
//! `#` comment lines, in any order.

use std::fmt;

use num_rational::Ratio;

use super::{Fact, FactSet, Ident, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct FactParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub fn serialize_facts(fs: &FactSet) -> String {
    let mut lines: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
    lines.sort();
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

pub fn parse_facts(text: &str) -> Result<FactSet, FactParseError> {
    let mut fs = FactSet::new();
    for (idx, line) in text.lines().enumerate() {
        if let Some(fact) = parse_line(line, idx + 1)? {
            fs.insert(fact);
        }
    }
    Ok(fs)
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<Fact>, FactParseError> {
    let chars: Vec<char> = line.chars().collect();
    let err = |pos: usize, message: String| FactParseError { line: line_no, column: pos + 1, message };
    let mut pos = skip_ws(&chars, 0);
    if pos == chars.len() || chars[pos] == '#' {
        return Ok(None);
    }

    let (subject, next) = bare_token(&chars, pos);
    let subject = Ident::new(subject).map_err(|e| err(pos, format!("subject: {e}")))?;
    pos = skip_ws(&chars, next);

    if pos == chars.len() {
        return Err(err(pos, "expected predicate".into()));
    }
    let (predicate, next) = bare_token(&chars, pos);
    let predicate = Ident::new(predicate).map_err(|e| err(pos, format!("predicate: {e}")))?;
    pos = skip_ws(&chars, next);

    if pos == chars.len() {
        return Err(err(pos, "expected object".into()));
    }
    let object = if chars[pos] == '"' {
        let (text, next) = scan_text_literal(&chars, pos).map_err(|(p, m)| err(p, m))?;
        pos = next;
        Value::Text(text)
    } else {
        let (tok, next) = bare_token(&chars, pos);
        let value = parse_atom(&tok).map_err(|m| err(pos, m))?;
        pos = next;
        value
    };

    pos = skip_ws(&chars, pos);
    if pos == chars.len() || chars[pos] != '.' {
        return Err(err(pos, "expected terminal `.`".into()));
    }
    pos = skip_ws(&chars, pos + 1);
    if pos != chars.len() {
        return Err(err(pos, "unexpected content after `.`".into()));
    }
    Ok(Some(Fact { subject, predicate, object }))
}

fn skip_ws(chars: &[char], mut pos: usize) -> usize {
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    pos
}

fn bare_token(chars: &[char], start: usize) -> (String, usize) {
    let mut end = start;
    while end < chars.len() && !chars[end].is_whitespace() {
        end += 1;
    }
    (chars[start..end].iter().collect(), end)
}

/// Classifies a bare (unquoted) token as a number or an identifier.
pub(crate) fn parse_atom(tok: &str) -> Result<Value, String> {
    if let Some(n) = parse_number(tok) {
        return n;
    }
    Ident::new(tok).map(Value::Ident).map_err(|e| e.to_string())
}

/// `Some` when `tok` has number shape (`-?[0-9]+` or `-?[0-9]+/[0-9]+`);
/// the inner result fails on overflow or a zero denominator.
pub(crate) fn parse_number(tok: &str) -> Option<Result<Value, String>> {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let unsigned = tok.strip_prefix('-').unwrap_or(tok);
    match unsigned.split_once('/') {
        None if digits(unsigned) => Some(
            tok.parse::<i64>()
                .map(Value::Int)
                .map_err(|_| format!("integer out of range: {tok}")),
        ),
        Some((n, d)) if digits(n) && digits(d) => {
            let (Ok(numer), Ok(denom)) = (tok.split_once('/').unwrap().0.parse::<i64>(), d.parse::<i64>()) else {
                return Some(Err(format!("rational out of range: {tok}")));
            };
            if denom == 0 {
                return Some(Err(format!("zero denominator: {tok}")));
            }
            Some(Ok(Value::Rational(Ratio::new(numer, denom))))
        }
        _ => None,
    }
}

/// Scans a double-quoted literal starting at `start` (which must be `"`).
/// Returns the unescaped text and the index just past the closing quote.
pub(crate) fn scan_text_literal(chars: &[char], start: usize) -> Result<(String, usize), (usize, String)> {
    debug_assert_eq!(chars.get(start), Some(&'"'));
    let mut out = String::new();
    let mut pos = start + 1;
    while pos < chars.len() {
        match chars[pos] {
            '"' => return Ok((out, pos + 1)),
            '\n' => break,
            '\\' => {
                let esc = chars.get(pos + 1).copied();
                match esc {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('t') => out.push('\t'),
                    Some(c) => return Err((pos, format!("unknown escape `\\{c}`"))),
                    None => break,
                }
                pos += 2;
            }
            c => {
                out.push(c);
                pos += 1;
            }
        }
    }
    Err((start, "unterminated text literal".into()))
}

pub(crate) fn write_text_literal(f: &mut impl fmt::Write, text: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in text.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\r' => f.write_str("\\r")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}
