//! The star-table file format and stored databases.
//!
//! ```text
//! # comment
//! relation F/2
//! Alice, Chris
//! Bob, *
//! relation H/2
//! Bob, * | 2!=Basketball
//! ?1, Chris
//! ```
//!
//! `*` is the universal null, `?k` an existential null, anything else a
//! constant (double quotes allow spaces, commas and reserved characters).
//! After `|` come `;`-separated literals `i=j`, `i!=j` and `i!=a`; a numeric
//! right-hand side names a column, so numeric constants must be quoted.

use std::fmt::Write as _;
use std::path::Path;

use crate::cylinder::StarCylinder;
use crate::error::{Error, Result};
use crate::logic::Schema;
use crate::tuple::{normalize, Literal, StarTuple};
use crate::value::{Const, Value};

/// A schema with one stored star-cylinder per relation symbol.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoredDatabase {
    pub schema: Schema,
    pub relations: Vec<StarCylinder>,
}

impl StoredDatabase {
    pub fn new(schema: Schema, relations: Vec<StarCylinder>) -> Result<Self> {
        if schema.len() != relations.len() {
            return Err(Error::Semantic("one star-cylinder per relation is required".into()));
        }
        for (p, r) in relations.iter().enumerate() {
            if r.dim() != schema.arity_of(p) {
                return Err(Error::DimensionMismatch {
                    left: schema.arity_of(p),
                    right: r.dim(),
                });
            }
        }
        Ok(StoredDatabase { schema, relations })
    }

    pub fn relation(&self, name: &str) -> Option<&StarCylinder> {
        self.schema.index(name).map(|p| &self.relations[p])
    }

    /// Pads every relation with star columns up to `n`.
    pub fn expand(&self, n: usize) -> Result<Vec<StarCylinder>> {
        self.relations.iter().map(|r| r.expanded(n)).collect()
    }

    pub fn has_nulls(&self) -> bool {
        self.relations.iter().any(|r| !r.nulls().is_empty())
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Treat unsatisfiable rows as errors instead of skipping them.
    pub strict: bool,
}

#[derive(Clone, Debug)]
pub struct Loaded {
    pub db: StoredDatabase,
    /// One message per skipped row.
    pub warnings: Vec<String>,
}

fn load_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Load { line, msg: msg.into() }
}

/// Splits on `sep` outside double quotes, keeping the quotes.
fn split_unquoted(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut quoted = false;
    let mut escaped = false;
    for (i, ch) in s.char_indices() {
        if escaped {
            escaped = false;
        } else if quoted && ch == '\\' {
            escaped = true;
        } else if ch == '"' {
            quoted = !quoted;
        } else if ch == sep && !quoted {
            out.push(&s[start..i]);
            start = i + ch.len_utf8();
        }
    }
    out.push(&s[start..]);
    out
}

fn unquote(tok: &str, line: usize) -> Result<String> {
    let inner = tok
        .strip_prefix('"')
        .and_then(|t| t.strip_suffix('"'))
        .filter(|_| tok.len() >= 2)
        .ok_or_else(|| load_err(line, format!("unterminated quoted value {tok}")))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(ch) = chars.next() {
        match ch {
            '\\' => out.push(
                chars
                    .next()
                    .ok_or_else(|| load_err(line, format!("dangling escape in {tok}")))?,
            ),
            '"' => return Err(load_err(line, format!("stray quote in {tok}"))),
            c => out.push(c),
        }
    }
    Ok(out)
}

fn parse_constant(tok: &str, line: usize) -> Result<Const> {
    if tok.starts_with('"') {
        return Ok(Const::new(&unquote(tok, line)?));
    }
    if tok.is_empty() {
        return Err(load_err(line, "empty value"));
    }
    if tok.starts_with('#') || tok.starts_with('?') || tok.contains(['"', '|', ',', ';']) {
        return Err(load_err(line, format!("invalid constant {tok}; quote it")));
    }
    Ok(Const::new(tok))
}

fn parse_value(tok: &str, line: usize) -> Result<Value> {
    let tok = tok.trim();
    if tok == "*" {
        return Ok(Value::Star);
    }
    if let Some(id) = tok.strip_prefix('?') {
        return id
            .parse::<u32>()
            .map(Value::Null)
            .map_err(|_| load_err(line, format!("bad existential null {tok}")));
    }
    parse_constant(tok, line).map(Value::Const)
}

fn parse_column(tok: &str, line: usize) -> Result<usize> {
    tok.trim()
        .parse::<usize>()
        .map_err(|_| load_err(line, format!("bad column index {tok}")))
}

fn parse_literal(text: &str, line: usize) -> Result<Literal> {
    let text = text.trim();
    if let Some((l, r)) = text.split_once("!=") {
        let i = parse_column(l, line)?;
        let r = r.trim();
        if !r.is_empty() && r.chars().all(|c| c.is_ascii_digit()) {
            return Ok(Literal::NeqCol(i, parse_column(r, line)?));
        }
        return Ok(Literal::NeqConst(i, parse_constant(r, line)?));
    }
    if let Some((l, r)) = text.split_once('=') {
        return Ok(Literal::Eq(parse_column(l, line)?, parse_column(r, line)?));
    }
    Err(load_err(line, format!("bad literal {text}")))
}

fn parse_header(rest: &str, line: usize) -> Result<(String, usize)> {
    let (name, arity) = rest
        .trim()
        .split_once('/')
        .ok_or_else(|| load_err(line, "expected `relation NAME/ARITY`"))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(load_err(line, format!("bad relation name {name:?}")));
    }
    let arity = arity
        .trim()
        .parse::<usize>()
        .map_err(|_| load_err(line, format!("bad arity {arity:?}")))?;
    Ok((name.to_string(), arity))
}

/// Parses a database from text.
pub fn parse_database(text: &str, opts: LoadOptions) -> Result<Loaded> {
    let mut schema = Schema::default();
    let mut rows: Vec<Vec<StarTuple>> = Vec::new();
    let mut header_lines: Vec<usize> = Vec::new();
    let mut warnings = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("relation ") {
            let (name, arity) = parse_header(rest, line)?;
            schema.add(name, arity).map_err(|e| load_err(line, e.to_string()))?;
            rows.push(Vec::new());
            header_lines.push(line);
            continue;
        }
        let p = rows
            .len()
            .checked_sub(1)
            .ok_or_else(|| load_err(line, "row before any `relation` header"))?;
        let arity = schema.arity_of(p);
        let parts = split_unquoted(trimmed, '|');
        if parts.len() > 2 {
            return Err(load_err(line, "more than one `|`"));
        }
        let values = split_unquoted(parts[0], ',')
            .into_iter()
            .map(|t| parse_value(t, line))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != arity {
            return Err(load_err(
                line,
                format!("{} values for relation {} of arity {arity}", values.len(), schema.name(p)),
            ));
        }
        let literals = match parts.get(1) {
            Some(cond) if !cond.trim().is_empty() => split_unquoted(cond, ';')
                .into_iter()
                .map(|l| parse_literal(l, line))
                .collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };
        match normalize(values, literals).map_err(|e| load_err(line, e.to_string()))? {
            Some(t) => {
                crate::cylinder::Flavor::of_tuple(&t).map_err(|e| load_err(line, e.to_string()))?;
                rows[p].push(t)
            }
            None if opts.strict => return Err(load_err(line, "unsatisfiable row")),
            None => warnings.push(format!("line {line}: unsatisfiable row skipped")),
        }
    }
    let relations = rows
        .into_iter()
        .enumerate()
        .map(|(p, ts)| {
            StarCylinder::from_tuples(schema.arity_of(p), ts)
                .map_err(|e| load_err(header_lines[p], format!("relation {}: {e}", schema.name(p))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Loaded {
        db: StoredDatabase::new(schema, relations)?,
        warnings,
    })
}

/// Reads a database file.
pub fn load(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Loaded> {
    let text = std::fs::read_to_string(path)?;
    parse_database(&text, opts)
}

fn format_constant(a: &Const, in_literal: bool) -> String {
    let s = a.as_str();
    let plain = !s.is_empty()
        && s != "*"
        && !s.starts_with(['#', '?', '"'])
        && !s.contains(['"', '|', ',', ';', '\\', '=', '!'])
        && s.trim() == s
        && !(in_literal && s.chars().all(|c| c.is_ascii_digit()))
        && !s.starts_with("relation");
    if plain {
        return s.to_string();
    }
    let mut out = String::from('"');
    for ch in s.chars() {
        if ch == '"' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('"');
    out
}

fn format_value(v: &Value) -> String {
    match v {
        Value::Const(a) => format_constant(a, false),
        Value::Null(k) => format!("?{k}"),
        Value::Star => "*".into(),
    }
}

fn format_literal(l: &Literal) -> String {
    match l {
        Literal::NeqConst(i, a) => format!("{i}!={}", format_constant(a, true)),
        other => other.to_string(),
    }
}

/// A single row in file syntax.
pub fn format_row(t: &StarTuple) -> String {
    let mut s = t.entries().iter().map(format_value).collect::<Vec<_>>().join(", ");
    if !t.conditions().is_empty() {
        s.push_str(" | ");
        s.push_str(
            &t.conditions()
                .iter()
                .map(format_literal)
                .collect::<Vec<_>>()
                .join("; "),
        );
    }
    s
}

/// Writes a database in canonical form.
pub fn save(db: &StoredDatabase) -> String {
    let mut out = String::new();
    for (p, r) in db.relations.iter().enumerate() {
        let _ = writeln!(out, "relation {}/{}", db.schema.name(p), db.schema.arity_of(p));
        for t in r {
            let _ = writeln!(out, "{}", format_row(t));
        }
    }
    out
}

pub fn save_to(path: impl AsRef<Path>, db: &StoredDatabase) -> Result<()> {
    std::fs::write(path, save(db))?;
    Ok(())
}
