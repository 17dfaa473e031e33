//! Spec strings for speed functions.
//!
//! ```text
//! ek_root:K
//! quotient:K,L
//! power_mean:R
//! combo:W1*SPEC+W2*SPEC+...
//! geomean:W1*SPEC,W2*SPEC,...
//! dual:SPEC
//! ```
//!
//! A part of a combination may be wrapped in parentheses; this is required
//! only when a `combo` is nested directly inside another `combo` (or a
//! `geomean` inside a `geomean`).

use super::SpeedFunction;
use crate::error::{Error, Result};

impl SpeedFunction {
    /// Parses a spec string for curvature vectors of dimension `n`.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        parse_spec(spec.trim(), spec, n)
    }
}

fn fail(spec: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_spec(s: &str, whole: &str, n: usize) -> Result<SpeedFunction> {
    let s = strip_parens(s);
    let (head, body) = s
        .split_once(':')
        .ok_or_else(|| fail(whole, format!("missing ':' in {s:?}")))?;
    let construct = |r: Result<SpeedFunction>| r.map_err(|e| fail(whole, e.to_string()));
    match head.trim() {
        "ek_root" => {
            let k = parse_usize(body, whole)?;
            construct(SpeedFunction::elem_mean_root(n, k))
        }
        "quotient" => {
            let (k, l) = body
                .split_once(',')
                .ok_or_else(|| fail(whole, "quotient expects k,l"))?;
            construct(SpeedFunction::quotient(n, parse_usize(k, whole)?, parse_usize(l, whole)?))
        }
        "power_mean" => {
            let r = parse_f64(body, whole)?;
            construct(SpeedFunction::power_mean(n, r))
        }
        "combo" => {
            let parts = parse_parts(body, '+', whole, n)?;
            construct(SpeedFunction::combo(parts))
        }
        "geomean" => {
            let parts = parse_parts(body, ',', whole, n)?;
            construct(SpeedFunction::geomean(parts))
        }
        "dual" => Ok(SpeedFunction::dual(parse_spec(body.trim(), whole, n)?)),
        other => Err(fail(whole, format!("unknown function family {other:?}"))),
    }
}

fn strip_parens(mut s: &str) -> &str {
    loop {
        let t = s.trim();
        if t.starts_with('(') && t.ends_with(')') && closing_paren(t) == Some(t.len() - 1) {
            s = &t[1..t.len() - 1];
        } else {
            return t;
        }
    }
}

fn closing_paren(s: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Does `s` start with `<number>*`?
fn starts_with_weight(s: &str) -> bool {
    match s.split_once('*') {
        Some((w, _)) => w.trim().parse::<f64>().is_ok(),
        None => false,
    }
}

fn has_top_level_star(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => return true,
            _ => {}
        }
    }
    false
}

/// Splits `W1*SPEC<sep>W2*SPEC...` at top-level separators that begin a new
/// weighted part.
fn split_parts(body: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut depth = 0i32;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == sep && depth == 0 => {
                let left = &body[start..i];
                let right = &body[i + 1..];
                if has_top_level_star(left) && starts_with_weight(right) {
                    parts.push(left);
                    start = i + 1;
                }
            }
            _ => {}
        }
    }
    parts.push(&body[start..]);
    parts
}

fn parse_parts(body: &str, sep: char, whole: &str, n: usize) -> Result<Vec<(f64, SpeedFunction)>> {
    split_parts(body, sep)
        .into_iter()
        .map(|part| {
            let (w, spec) = part
                .split_once('*')
                .ok_or_else(|| fail(whole, format!("part {part:?} is not of the form W*SPEC")))?;
            Ok((parse_f64(w, whole)?, parse_spec(spec.trim(), whole, n)?))
        })
        .collect()
}

fn parse_usize(s: &str, whole: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| fail(whole, format!("expected an integer, got {:?}", s.trim())))
}

fn parse_f64(s: &str, whole: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| fail(whole, format!("expected a number, got {:?}", s.trim())))
}
