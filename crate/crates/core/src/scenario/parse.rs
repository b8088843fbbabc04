//! Scenario text to [`Scenario`], with located diagnostics.

use std::fmt;

use super::{CheckOp, CheckSpec, Decl, DeclKind, Entry, Loc, Scenario};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub loc: Loc,
    pub message: String,
}

impl ParseError {
    pub fn new(loc: Loc, message: impl Into<String>) -> Self {
        Self {
            loc,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.loc.line, self.loc.col, self.message)
    }
}

impl std::error::Error for ParseError {}

enum Section {
    Top,
    Decl(Decl),
    Check(CheckSpec),
}

/// Parses and resolves a scenario. Syntax errors are collected line by
/// line; resolution stops at the first error since later declarations
/// usually depend on earlier ones.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut name = None;
    let mut top: Vec<Entry> = Vec::new();
    let mut decls = Vec::new();
    let mut checks = Vec::new();
    let mut section = Section::Top;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let loc = Loc {
            line: line_no,
            col: indent + 1,
        };
        if let Some(rest) = trimmed.strip_prefix("scenario ") {
            if name.is_some() || !matches!(section, Section::Top) {
                errors.push(ParseError::new(
                    loc,
                    "`scenario` must be the first line and appear once",
                ));
            }
            name = Some(rest.trim().to_string());
            continue;
        }
        if trimmed.starts_with('[') {
            close(&mut section, &mut decls, &mut checks);
            match header(trimmed, loc) {
                Ok(s) => section = s,
                Err(e) => {
                    errors.push(e);
                    section = Section::Top;
                }
            }
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            errors.push(ParseError::new(
                loc,
                format!("expected `key = value`, found `{trimmed}`"),
            ));
            continue;
        };
        let key = trimmed[..eq].trim().to_string();
        let after = &trimmed[eq + 1..];
        let value = after.trim().to_string();
        let value_col = indent + eq + 1 + (after.len() - after.trim_start().len()) + 1;
        if key.is_empty() {
            errors.push(ParseError::new(loc, "missing key before `=`"));
            continue;
        }
        let entry = Entry {
            key,
            value,
            loc: Loc {
                line: line_no,
                col: value_col,
            },
        };
        let target = match &mut section {
            Section::Top => &mut top,
            Section::Decl(d) => &mut d.entries,
            Section::Check(c) => &mut c.entries,
        };
        if target.iter().any(|e| e.key == entry.key) {
            errors.push(ParseError::new(
                loc,
                format!("duplicate key `{}`", entry.key),
            ));
            continue;
        }
        target.push(entry);
    }
    close(&mut section, &mut decls, &mut checks);

    let name = name.unwrap_or_else(|| {
        errors.push(ParseError::new(
            Loc { line: 1, col: 1 },
            "missing `scenario NAME` line",
        ));
        String::new()
    });
    let mut number = |key: &str, default: Option<u64>| -> u64 {
        match top.iter().find(|e| e.key == key) {
            Some(e) => e.value.parse().unwrap_or_else(|_| {
                errors.push(ParseError::new(
                    e.loc,
                    format!("`{key}` must be a non-negative integer"),
                ));
                0
            }),
            None => default.unwrap_or_else(|| {
                errors.push(ParseError::new(
                    Loc { line: 1, col: 1 },
                    format!("missing top-level `{key}`"),
                ));
                0
            }),
        }
    };
    let n = number("n", None) as usize;
    let k = number("k", None) as usize;
    let seed = number("seed", Some(0));
    for e in &top {
        if !["n", "k", "seed"].contains(&e.key.as_str()) {
            errors.push(ParseError::new(
                e.loc,
                format!("unknown top-level key `{}`", e.key),
            ));
        }
    }
    if errors.is_empty() && !(1..=4).contains(&n) {
        errors.push(ParseError::new(
            Loc { line: 1, col: 1 },
            format!("n = {n} outside the supported range 1..=4"),
        ));
    }
    if errors.is_empty() && !(n + 1..=2 * n).contains(&k) {
        errors.push(ParseError::new(
            Loc { line: 1, col: 1 },
            format!("k = {k} outside [n+1, 2n] = [{}, {}]", n + 1, 2 * n),
        ));
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let scenario = Scenario {
        name,
        n,
        k,
        seed,
        decls,
        checks,
    };
    super::resolve::prepare(&scenario).map_err(|e| vec![e])?;
    Ok(scenario)
}

fn close(section: &mut Section, decls: &mut Vec<Decl>, checks: &mut Vec<CheckSpec>) {
    match std::mem::replace(section, Section::Top) {
        Section::Top => {}
        Section::Decl(d) => decls.push(d),
        Section::Check(c) => checks.push(c),
    }
}

fn header(line: &str, loc: Loc) -> Result<Section, ParseError> {
    let inner = line
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ParseError::new(loc, "section header must look like `[kind name]`"))?;
    let mut words = inner.split_whitespace();
    let kind = words.next().unwrap_or("");
    let arg = words.next();
    if words.next().is_some() {
        return Err(ParseError::new(
            loc,
            "section header takes exactly two words",
        ));
    }
    let Some(arg) = arg else {
        return Err(ParseError::new(
            loc,
            format!("section `[{kind}]` needs a name"),
        ));
    };
    if kind == "check" {
        let op = CheckOp::from_name(arg).ok_or_else(|| {
            let known: Vec<&str> = CheckOp::ALL.iter().map(|o| o.name()).collect();
            ParseError::new(
                loc,
                format!("unknown check `{arg}` (known: {})", known.join(", ")),
            )
        })?;
        return Ok(Section::Check(CheckSpec {
            op,
            entries: Vec::new(),
            loc,
        }));
    }
    let kind = DeclKind::from_keyword(kind)
        .ok_or_else(|| ParseError::new(loc, format!("unknown section kind `{kind}`")))?;
    if !arg
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    {
        return Err(ParseError::new(loc, format!("invalid name `{arg}`")));
    }
    Ok(Section::Decl(Decl {
        kind,
        name: arg.to_string(),
        entries: Vec::new(),
        loc,
    }))
}
