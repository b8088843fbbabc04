//! Declarative scenario files and the reports produced by running them.
//!
//! ```text
//! scenario claim-identities-n2
//! n = 2
//! k = 3
//! seed = 0
//!
//! [graph Y]
//! z = (x2^2 + y2^2)/2
//!
//! [check verify_claim]
//! graph = Y
//! grid = random(-0.5..0.5, 200)
//! tol = 1e-10
//! ```
//!
//! Declaration sections are `[chart NAME]`, `[field NAME]`, `[form NAME]`,
//! `[graph NAME]`, `[bundle NAME]` and `[germ NAME]`; `[check OP]` sections
//! run in file order. Every value is a plain string until resolution, so a
//! parsed scenario prints back to an equivalent file.

mod ops;
mod parse;
mod report;
mod resolve;
mod run;

use std::fmt;

pub use ops::CheckOp;
pub use parse::{parse_scenario, ParseError};
pub use report::{Outcome, Record, Report, SCHEMA_VERSION};
pub use run::{run_scenario, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeclKind {
    Chart,
    Field,
    Form,
    Graph,
    Bundle,
    Germ,
}

impl DeclKind {
    pub fn keyword(self) -> &'static str {
        match self {
            DeclKind::Chart => "chart",
            DeclKind::Field => "field",
            DeclKind::Form => "form",
            DeclKind::Graph => "graph",
            DeclKind::Bundle => "bundle",
            DeclKind::Germ => "germ",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        [
            DeclKind::Chart,
            DeclKind::Field,
            DeclKind::Form,
            DeclKind::Graph,
            DeclKind::Bundle,
            DeclKind::Germ,
        ]
        .into_iter()
        .find(|k| k.keyword() == s)
    }
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Loc {
    pub line: usize,
    pub col: usize,
}

/// `key = value`; the location is where the value starts and is ignored by
/// equality.
#[derive(Debug, Clone)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub loc: Loc,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key && self.value == other.value
    }
}

#[derive(Debug, Clone)]
pub struct Decl {
    pub kind: DeclKind,
    pub name: String,
    pub entries: Vec<Entry>,
    pub loc: Loc,
}

impl PartialEq for Decl {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.name == other.name && self.entries == other.entries
    }
}

#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub op: CheckOp,
    pub entries: Vec<Entry>,
    pub loc: Loc,
}

impl PartialEq for CheckSpec {
    fn eq(&self, other: &Self) -> bool {
        self.op == other.op && self.entries == other.entries
    }
}

impl CheckSpec {
    pub fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.key == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub decls: Vec<Decl>,
    pub checks: Vec<CheckSpec>,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario {}", self.name)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "k = {}", self.k)?;
        writeln!(f, "seed = {}", self.seed)?;
        for d in &self.decls {
            writeln!(f, "\n[{} {}]", d.kind.keyword(), d.name)?;
            for e in &d.entries {
                writeln!(f, "{} = {}", e.key, e.value)?;
            }
        }
        for c in &self.checks {
            writeln!(f, "\n[check {}]", c.op.name())?;
            for e in &c.entries {
                writeln!(f, "{} = {}", e.key, e.value)?;
            }
        }
        Ok(())
    }
}

const BUNDLED: &[(&str, &str)] = &[
    (
        "exterior-calculus",
        include_str!("../../scenarios/exterior-calculus.scn"),
    ),
    (
        "claim-identities-n2",
        include_str!("../../scenarios/claim-identities-n2.scn"),
    ),
    (
        "claim-identities-n3",
        include_str!("../../scenarios/claim-identities-n3.scn"),
    ),
    (
        "counterexample",
        include_str!("../../scenarios/counterexample.scn"),
    ),
    (
        "singular-locus",
        include_str!("../../scenarios/singular-locus.scn"),
    ),
    (
        "characteristic-foliation",
        include_str!("../../scenarios/characteristic-foliation.scn"),
    ),
    (
        "flat-bundles",
        include_str!("../../scenarios/flat-bundles.scn"),
    ),
    ("ccl-suite", include_str!("../../scenarios/ccl-suite.scn")),
    (
        "ccl-negative-suite",
        include_str!("../../scenarios/ccl-negative-suite.scn"),
    ),
    (
        "germ-nonsingular",
        include_str!("../../scenarios/germ-nonsingular.scn"),
    ),
    (
        "germ-singular",
        include_str!("../../scenarios/germ-singular.scn"),
    ),
];

/// `(name, source)` of every scenario shipped with the crate.
pub fn bundled() -> &'static [(&'static str, &'static str)] {
    BUNDLED
}

pub fn bundled_source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "scenario tiny\nn = 2\nk = 3\n\n[graph Y]\nz = (x2^2 + y2^2)/2\n\n[check verify_claim]\ngraph = Y\ngrid = random(-0.5..0.5, 20)\n";

    #[test]
    fn minimal_scenario_runs() {
        let s = parse_scenario(MINIMAL).unwrap();
        let r = run_scenario(&s, &RunOptions::default());
        assert!(r.passed, "{}", r.summary_table());
        assert_eq!(r.records.len(), 1);
        assert_eq!(r.records[0].samples, 20);
    }

    #[test]
    fn syntax_error_has_position() {
        let src = "scenario bad\nn = 1\nk = 2\n\n[chart C]\ncoords = x1 y1\n\n[form w]\nchart = C\nexpr = y1*dx1 +\n";
        let errs = parse_scenario(src).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].loc.line, 10);
        assert!(errs[0].loc.col > 8, "{}", errs[0]);
    }

    #[test]
    fn undeclared_name_is_reported() {
        let src = "scenario bad\nn = 1\nk = 2\n\n[check dd_zero]\nform = nowhere\ngrid = random(-1..1, 5)\n";
        let errs = parse_scenario(src).unwrap_err();
        assert!(
            errs[0].message.contains("unknown identifier `nowhere`"),
            "{}",
            errs[0]
        );
        assert_eq!(errs[0].loc.line, 6);
    }

    #[test]
    fn display_round_trips() {
        for (name, src) in bundled() {
            let s = parse_scenario(src).unwrap_or_else(|e| panic!("{name}: {e:?}"));
            let again = parse_scenario(&s.to_string()).unwrap();
            assert_eq!(s, again, "{name}");
        }
    }

    #[test]
    fn empty_check_list_passes() {
        let s = parse_scenario("scenario empty\nn = 1\nk = 2\n").unwrap();
        let r = run_scenario(&s, &RunOptions::default());
        assert!(r.passed);
        assert!(r.records.is_empty());
    }

    #[test]
    fn runs_are_deterministic() {
        let src = "scenario det\nn = 2\nk = 3\nseed = 9\n\n[graph Y]\nz = (x2^2 + y2^2)/2\n\n[check coisotropy_residuals]\ngraph = Y\ngrid = random(-1..1, 30)\n";
        let s = parse_scenario(src).unwrap();
        let a = run_scenario(&s, &RunOptions::default()).to_json_untimed();
        let b = run_scenario(&s, &RunOptions::default()).to_json_untimed();
        assert_eq!(a, b);
        let c = run_scenario(
            &s,
            &RunOptions {
                seed: Some(10),
                ..Default::default()
            },
        )
        .to_json_untimed();
        assert_ne!(a, c);
    }

    #[test]
    fn expected_failures_count_as_passes() {
        let src = "scenario xf\nn = 2\nk = 3\n\n[graph C]\ny1 = x1*x2\n\n[check coisotropy_residuals]\ngraph = C\ngrid = random(-1..1, 10)\nexpect = fail\n";
        let r = run_scenario(&parse_scenario(src).unwrap(), &RunOptions::default());
        assert_eq!(r.records[0].outcome, Outcome::Fail);
        assert!(r.passed);
    }
}
