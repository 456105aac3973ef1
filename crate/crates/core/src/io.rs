//! The line-based `.ptg` arena format.
//!
//! ```text
//! # comment
//! clock x
//! location l1 owner=1 rate=1 inv=[0,1]
//! target l6
//! edge l1 a l2 guard=(0,inf) reset=true price=0
//! ```
//!
//! `rate` defaults to 0 and `inv` to `[0,inf)`; a missing `clock` line
//! means the clock is `x`. A lower bound `-inf` is read as `[0`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::arena::{Bound, Element, Interval, Location, Player, PtgArena, Transition, Violation};
use crate::scalar::Scalar;
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A parsed arena with the line each element was declared on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArenaDocument {
    pub text: String,
    pub arena: PtgArena,
    pub positions: BTreeMap<Element, usize>,
}

impl ArenaDocument {
    pub fn line_of(&self, element: &Element) -> Option<usize> {
        self.positions.get(element).copied()
    }

    /// A violation prefixed with the line of the element it names.
    pub fn describe(&self, v: &Violation) -> String {
        let line = match &v.element {
            Element::Arena => Some(1),
            e => self.line_of(e),
        };
        match line {
            Some(l) => format!("line {l}: {v}"),
            None => v.to_string(),
        }
    }
}

struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut depth = 0usize;
    for (i, c) in line.char_indices() {
        match c {
            '[' | '(' => {
                depth += 1;
                start.get_or_insert(i);
            }
            ']' | ')' => {
                depth = depth.saturating_sub(1);
                start.get_or_insert(i);
            }
            c if c.is_whitespace() && depth == 0 => {
                if let Some(s) = start.take() {
                    out.push(Token {
                        column: line[..s].chars().count() + 1,
                        text: &line[s..i],
                    });
                }
            }
            _ => {
                start.get_or_insert(i);
            }
        }
    }
    if let Some(s) = start {
        out.push(Token {
            column: line[..s].chars().count() + 1,
            text: &line[s..],
        });
    }
    out
}

/// Parses `[a,b]`, `(a,b)`, `[a,inf)` and so on; `-inf` as a lower bound
/// becomes a closed 0.
pub fn parse_interval(s: &str) -> Result<Interval, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("malformed interval {s:?}; expected e.g. [0,2] or (1,inf)");
    let mut chars = compact.chars();
    let open = chars.next().ok_or_else(bad)?;
    let close = chars.next_back().ok_or_else(bad)?;
    let inner = chars.as_str();
    let (lo, hi) = inner.split_once(',').ok_or_else(bad)?;
    let lo_closed = match open {
        '[' => true,
        '(' => false,
        _ => return Err(bad()),
    };
    let hi_closed = match close {
        ']' => true,
        ')' => false,
        _ => return Err(bad()),
    };
    let low = match lo {
        "-inf" => Bound::closed(0),
        n => Bound::Finite {
            value: n.parse().map_err(|_| format!("bad lower bound {n:?} in {s:?}"))?,
            closed: lo_closed,
        },
    };
    let high = match hi {
        "inf" | "+inf" if hi_closed => return Err(format!("infinite upper bound must be open in {s:?}")),
        "inf" | "+inf" => Bound::Infinity,
        n => Bound::Finite {
            value: n.parse().map_err(|_| format!("bad upper bound {n:?} in {s:?}"))?,
            closed: hi_closed,
        },
    };
    Ok(Interval::new(low, high))
}

/// Parses an integer or `p/q`; decimals are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, String> {
    let bad = || format!("{s:?} is not an integer or a fraction p/q");
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: i64 = n.parse().map_err(|_| bad())?;
    let d: i64 = d.parse().map_err(|_| bad())?;
    if d == 0 {
        return Err(format!("{s:?} has a zero denominator"));
    }
    Ok(Rational::from_ratio(n, d))
}

struct LineParser<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> LineParser<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn end_column(&self) -> usize {
        self.tokens.last().map_or(1, |t| t.column + t.text.chars().count())
    }

    /// Positional identifiers followed by `key=value` pairs.
    fn split(&self, positional: usize, allowed: &[&str]) -> Result<(Vec<&'a str>, HashMap<&'a str, (&'a str, usize)>), ParseError> {
        let keyword = &self.tokens[0];
        let mut ids = Vec::new();
        let mut keys = HashMap::new();
        for tok in &self.tokens[1..] {
            match tok.text.split_once('=') {
                None if keys.is_empty() && ids.len() < positional => ids.push(tok.text),
                None => return Err(self.err(tok.column, format!("unexpected token {:?}", tok.text))),
                Some((k, v)) => {
                    if !allowed.contains(&k) {
                        return Err(self.err(
                            tok.column,
                            format!("unknown key {k:?} for {}; expected one of {}", keyword.text, allowed.join(", ")),
                        ));
                    }
                    if keys.insert(k, (v, tok.column)).is_some() {
                        return Err(self.err(tok.column, format!("key {k:?} given twice")));
                    }
                }
            }
        }
        if ids.len() < positional {
            return Err(self.err(
                self.end_column(),
                format!("{} needs {positional} identifiers, found {}", keyword.text, ids.len()),
            ));
        }
        Ok((ids, keys))
    }

    fn required(&self, keys: &HashMap<&'a str, (&'a str, usize)>, key: &str) -> Result<(&'a str, usize), ParseError> {
        keys.get(key)
            .copied()
            .ok_or_else(|| self.err(self.end_column(), format!("missing {key}=")))
    }

    fn int(&self, (v, col): (&str, usize)) -> Result<i64, ParseError> {
        v.parse().map_err(|_| self.err(col, format!("expected an integer, found {v:?}")))
    }

    fn interval(&self, (v, col): (&str, usize)) -> Result<Interval, ParseError> {
        parse_interval(v).map_err(|m| self.err(col, m))
    }
}

/// Parses the text of a `.ptg` file. Semantic checks are left to
/// [`crate::arena::validate_arena`], except for duplicate `(source, label)`
/// pairs.
pub fn parse_arena(text: &str) -> Result<ArenaDocument, ParseError> {
    let mut arena = PtgArena::default();
    let mut positions = BTreeMap::new();
    let mut clock_line: Option<usize> = None;
    let mut edge_lines: HashMap<(String, String), usize> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let p = LineParser {
            line: i + 1,
            tokens: tokenize(raw),
        };
        let Some(first) = p.tokens.first() else { continue };
        match first.text {
            "clock" => {
                if let Some(prev) = clock_line {
                    return Err(p.err(first.column, format!("clock already declared on line {prev}; arenas have one clock")));
                }
                let (ids, _) = p.split(1, &[])?;
                if p.tokens.len() > 2 {
                    return Err(p.err(p.tokens[2].column, "clock takes a single name"));
                }
                arena.clock = ids[0].to_string();
                clock_line = Some(p.line);
                positions.insert(Element::Clock, p.line);
            }
            "location" => {
                let (ids, keys) = p.split(1, &["owner", "rate", "inv"])?;
                let (owner_text, owner_col) = p.required(&keys, "owner")?;
                let owner = match owner_text {
                    "1" => Player::One,
                    "2" => Player::Two,
                    o => return Err(p.err(owner_col, format!("owner must be 1 or 2, found {o:?}"))),
                };
                let rate = keys.get("rate").map(|v| p.int(*v)).transpose()?.unwrap_or(0);
                let invariant = keys.get("inv").map(|v| p.interval(*v)).transpose()?.unwrap_or(Interval::any());
                positions.entry(Element::Location(ids[0].to_string())).or_insert(p.line);
                arena.locations.push(Location {
                    id: ids[0].to_string(),
                    owner,
                    rate,
                    invariant,
                });
            }
            "target" => {
                if p.tokens.len() < 2 {
                    return Err(p.err(p.end_column(), "target needs at least one location"));
                }
                for tok in &p.tokens[1..] {
                    if tok.text.contains('=') {
                        return Err(p.err(tok.column, format!("unexpected token {:?}", tok.text)));
                    }
                    arena.targets.insert(tok.text.to_string());
                    positions.entry(Element::Target(tok.text.to_string())).or_insert(p.line);
                }
            }
            "edge" => {
                let (ids, keys) = p.split(3, &["guard", "reset", "price"])?;
                let guard = p.interval(p.required(&keys, "guard")?)?;
                let (reset_text, reset_col) = p.required(&keys, "reset")?;
                let reset = match reset_text {
                    "true" => true,
                    "false" => false,
                    r => return Err(p.err(reset_col, format!("reset must be true or false, found {r:?}"))),
                };
                let price = p.int(p.required(&keys, "price")?)?;
                let key = (ids[0].to_string(), ids[1].to_string());
                if let Some(prev) = edge_lines.get(&key) {
                    return Err(p.err(
                        p.tokens[2].column,
                        format!(
                            "duplicate edge from {} labelled {} (first declared on line {prev})",
                            key.0, key.1
                        ),
                    ));
                }
                edge_lines.insert(key.clone(), p.line);
                positions.insert(
                    Element::Transition {
                        source: key.0.clone(),
                        label: key.1.clone(),
                    },
                    p.line,
                );
                arena.transitions.push(Transition {
                    source: key.0,
                    label: key.1,
                    guard,
                    reset,
                    price,
                    target: ids[2].to_string(),
                });
            }
            other => {
                return Err(p.err(
                    first.column,
                    format!("unknown directive {other:?}; expected clock, location, target or edge"),
                ))
            }
        }
    }
    Ok(ArenaDocument {
        text: text.to_string(),
        arena,
        positions,
    })
}

/// Canonical text of an arena; parsing it yields the same arena.
pub fn write_arena(arena: &PtgArena) -> String {
    let mut out = String::new();
    writeln!(out, "clock {}", arena.clock).unwrap();
    for l in &arena.locations {
        writeln!(out, "location {} owner={} rate={} inv={}", l.id, l.owner, l.rate, l.invariant).unwrap();
    }
    if !arena.targets.is_empty() {
        let ids: Vec<&str> = arena.targets.iter().map(String::as_str).collect();
        writeln!(out, "target {}", ids.join(" ")).unwrap();
    }
    for t in &arena.transitions {
        writeln!(
            out,
            "edge {} {} {} guard={} reset={} price={}",
            t.source, t.label, t.target, t.guard, t.reset, t.price
        )
        .unwrap();
    }
    out
}

/// `p/q` text for a rational, plain for integers.
pub fn format_rational<T: Scalar>(q: &T) -> String {
    q.to_string()
}

impl fmt::Display for ArenaDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&write_arena(&self.arena))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arena::fixtures::fig1;
    use crate::arena::validate_arena;

    #[test]
    fn intervals() {
        assert_eq!(parse_interval("[0,2]"), Ok(Interval::at_most(2)));
        assert_eq!(parse_interval("(1,inf)"), Ok(Interval::greater_than(1)));
        assert_eq!(parse_interval("(-inf, 3)"), Ok(Interval::less_than(3)));
        assert!(parse_interval("[0,inf]").is_err());
        assert!(parse_interval("0,1").is_err());
        assert!(parse_interval("[a,1]").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("1/100"), Ok(Rational::from_ratio(1, 100)));
        assert_eq!(parse_rational("3"), Ok(Rational::from_int(3)));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn fig1_round_trip() {
        let text = write_arena(&fig1());
        let doc = parse_arena(&text).unwrap();
        assert_eq!(doc.arena, fig1());
        assert_eq!(doc.arena.locations.len(), 6);
        assert_eq!(doc.arena.transitions.len(), 8);
        assert_eq!(write_arena(&doc.arena), text);
    }

    #[test]
    fn defaults_and_comments() {
        let doc = parse_arena("# nothing\nlocation a owner=2   # trailing\ntarget a\n").unwrap();
        assert_eq!(doc.arena.clock, "x");
        assert_eq!(doc.arena.locations[0].rate, 0);
        assert_eq!(doc.arena.locations[0].invariant, Interval::any());
        assert_eq!(doc.line_of(&Element::Location("a".into())), Some(2));
        assert_eq!(doc.line_of(&Element::Target("a".into())), Some(3));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_arena("location a owner=1\nedge a a a\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("missing guard"), "{e}");
        let e = parse_arena("location a owner=1 colour=red\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 20));
        let e = parse_arena("location a owner=3\n").unwrap_err();
        assert_eq!(e.column, 12);
        let e = parse_arena("clock x\nclock y\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_arena("frobnicate\n").unwrap_err();
        assert!(e.to_string().starts_with("line 1, column 1"));
    }

    #[test]
    fn duplicate_edges_name_both_lines() {
        let text = "location a owner=1\nedge a go a guard=[0,1] reset=false price=0\nedge a go a guard=[0,1] reset=true price=1\n";
        let e = parse_arena(text).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("line 2"), "{e}");
    }

    #[test]
    fn empty_file_is_a_semantic_error() {
        let doc = parse_arena("").unwrap();
        let v = validate_arena(&doc.arena);
        assert_eq!(doc.describe(&v[0]), "line 1: arena: arena has no locations");
    }

    #[test]
    fn intervals_may_contain_spaces() {
        let doc = parse_arena("location a owner=1 inv=[0, 2]\n").unwrap();
        assert_eq!(doc.arena.locations[0].invariant, Interval::at_most(2));
    }
}
