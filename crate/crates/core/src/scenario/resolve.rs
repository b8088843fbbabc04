//! Declarations to objects, and check sections to typed jobs.

use std::collections::HashMap;

use super::{CheckOp, CheckSpec, Decl, DeclKind, Entry, Loc, ParseError, Scenario};
use crate::bundle::{Condition, FlatDiskBundle};
use crate::coiso::{standard_free_names, Bump, ClusterFlag, Equation, GraphSubmanifold};
use crate::error::Error;
use crate::fields::{Chart, Expr, VectorField};
use crate::forms::{parse_form, DiffForm};
use crate::germ::{
    build_nonsingular_germ, build_singular_germ, invariant_extension, FoliatedInput, GermForm,
};
use crate::grid::Grid;

type PResult<T> = Result<T, ParseError>;

/// `lattice(RANGES, DIVISIONS)` or `random(RANGES, COUNT)`, where `RANGES`
/// is `a..b` (every axis) or `a..b x c..d x ...`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GridSpec {
    pub random: bool,
    pub ranges: Vec<(f64, f64)>,
    pub count: usize,
    pub dim: usize,
}

impl GridSpec {
    pub fn build(&self, seed: u64, samples: Option<usize>) -> crate::Result<Grid> {
        let ranges = if self.ranges.len() == 1 {
            vec![self.ranges[0]; self.dim]
        } else {
            self.ranges.clone()
        };
        let (lo, hi): (Vec<f64>, Vec<f64>) = ranges.into_iter().unzip();
        if self.random {
            Grid::random(lo, hi, samples.unwrap_or(self.count), seed)
        } else {
            let d = self.dim;
            Grid::lattice(lo, hi, vec![self.count; d])
        }
    }
}

pub(crate) struct GermEntry {
    pub germ: GermForm,
    /// What the germ should restrict to on its zero section.
    pub expected: DiffForm,
}

#[derive(Default)]
pub(crate) struct Env {
    charts: HashMap<String, Chart>,
    fields: HashMap<String, VectorField>,
    forms: HashMap<String, DiffForm>,
    graphs: HashMap<String, GraphSubmanifold>,
    bundles: HashMap<String, FlatDiskBundle>,
    germs: HashMap<String, GermEntry>,
    names: HashMap<String, DeclKind>,
}

pub(crate) enum Job {
    DdZero {
        form: DiffForm,
        grid: GridSpec,
    },
    Frobenius {
        form: DiffForm,
        grid: GridSpec,
    },
    CoisotropyResiduals {
        graph: GraphSubmanifold,
        grid: GridSpec,
    },
    VerifyClaim {
        graph: GraphSubmanifold,
        grid: GridSpec,
    },
    ResidualAt {
        graph: GraphSubmanifold,
        point: Vec<f64>,
        equation: Equation,
        indices: Vec<usize>,
        expected: f64,
    },
    OracleAgreement {
        graphs: Vec<(String, GraphSubmanifold, GridSpec)>,
    },
    SingularScan {
        graph: GraphSubmanifold,
        grid: GridSpec,
        dims: Vec<usize>,
        flag: Option<ClusterFlag>,
    },
    Perturb {
        graph: GraphSubmanifold,
        bump: Bump,
        grid: GridSpec,
    },
    CharFoliation {
        graph: GraphSubmanifold,
        grid: GridSpec,
    },
    Flatness {
        bundle: FlatDiskBundle,
        grid: GridSpec,
    },
    Transport {
        bundle: FlatDiskBundle,
        path: Vec<Vec<f64>>,
        start: [f64; 2],
        end: [f64; 2],
    },
    Holonomy {
        bundle: FlatDiskBundle,
        generator: usize,
        radius: f64,
        divisions: usize,
        angle: f64,
    },
    Ccl {
        bundle: FlatDiskBundle,
        form: DiffForm,
        fails: Vec<Condition>,
    },
    FlatStructure {
        graph: GraphSubmanifold,
        grid: GridSpec,
    },
    Contactness {
        germ: GermForm,
        base: GridSpec,
        radius: f64,
        fiber_divisions: usize,
    },
    VolumeIdentity {
        germ: GermForm,
        base: GridSpec,
        radius: f64,
        fiber_divisions: usize,
    },
    ZeroSection {
        germ: GermForm,
        expected: DiffForm,
        grid: GridSpec,
    },
    Interpolation {
        g0: GermForm,
        g1: GermForm,
        grid: GridSpec,
        t_samples: usize,
    },
}

pub(crate) struct Prepared {
    pub op: CheckOp,
    pub job: Job,
    pub tol: f64,
    pub expect_fail: bool,
    pub informational: bool,
}

/// Resolves every declaration and check, reporting the first problem.
pub(crate) fn prepare(s: &Scenario) -> PResult<Vec<Prepared>> {
    let mut env = Env::default();
    for d in &s.decls {
        env.declare(s, d)?;
    }
    s.checks.iter().map(|c| env.check(c)).collect()
}

/// Maps a library error on `entry`'s value to a located diagnostic.
fn located(entry: &Entry, offset: usize, e: Error) -> ParseError {
    match e {
        Error::Syntax(se) => ParseError::new(
            Loc {
                line: entry.loc.line,
                col: entry.loc.col + offset + se.span.start,
            },
            se.message,
        ),
        other => ParseError::new(entry.loc, other.to_string()),
    }
}

/// Splits on `sep`, returning each trimmed piece with its offset in `s`.
fn split_list(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = 0;
    for piece in s.split(sep) {
        let lead = piece.len() - piece.trim_start().len();
        out.push((start + lead, piece.trim()));
        start += piece.len() + sep.len_utf8();
    }
    out
}

fn parse_num(entry: &Entry, s: &str) -> PResult<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| {
            ParseError::new(
                entry.loc,
                format!("`{}`: expected a number, found `{s}`", entry.key),
            )
        })
}

fn parse_numbers(entry: &Entry, s: &str) -> PResult<Vec<f64>> {
    split_list(s, ',')
        .into_iter()
        .map(|(_, p)| parse_num(entry, p))
        .collect()
}

fn parse_range(entry: &Entry, s: &str) -> PResult<(f64, f64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| {
        ParseError::new(entry.loc, format!("expected a range `lo..hi`, found `{s}`"))
    })?;
    let (a, b) = (parse_num(entry, a)?, parse_num(entry, b)?);
    if a > b {
        return Err(ParseError::new(entry.loc, format!("empty range `{s}`")));
    }
    Ok((a, b))
}

fn parse_grid(entry: &Entry, dim: usize) -> PResult<GridSpec> {
    let v = entry.value.trim();
    let (random, inner) = if let Some(r) = v.strip_prefix("random(") {
        (true, r)
    } else if let Some(r) = v.strip_prefix("lattice(") {
        (false, r)
    } else {
        return Err(ParseError::new(
            entry.loc,
            "grid must be `lattice(RANGES, N)` or `random(RANGES, N)`",
        ));
    };
    let inner = inner
        .strip_suffix(')')
        .ok_or_else(|| ParseError::new(entry.loc, "grid is missing its closing `)`"))?;
    let (ranges, count) = inner
        .rsplit_once(',')
        .ok_or_else(|| ParseError::new(entry.loc, "grid needs `RANGES, N`"))?;
    let ranges = ranges
        .split(" x ")
        .map(|r| parse_range(entry, r.trim()))
        .collect::<PResult<Vec<_>>>()?;
    if ranges.len() != 1 && ranges.len() != dim {
        return Err(ParseError::new(
            entry.loc,
            format!(
                "grid has {} ranges, object has dimension {dim}",
                ranges.len()
            ),
        ));
    }
    let count = count
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&c| c > 0)
        .ok_or_else(|| ParseError::new(entry.loc, format!("bad grid count `{}`", count.trim())))?;
    Ok(GridSpec {
        random,
        ranges,
        count,
        dim,
    })
}

fn lookup<'a, T>(
    map: &'a HashMap<String, T>,
    entry: &Entry,
    what: &str,
    names: &HashMap<String, DeclKind>,
) -> PResult<&'a T> {
    let name = entry.value.trim();
    map.get(name).ok_or_else(|| match names.get(name) {
        Some(kind) => ParseError::new(
            entry.loc,
            format!("`{name}` is a {}, expected a {what}", kind.keyword()),
        ),
        None => ParseError::new(
            entry.loc,
            format!("unknown identifier `{name}` (no {what} declared with that name)"),
        ),
    })
}

struct Keys<'a> {
    entries: &'a [Entry],
    loc: Loc,
    what: String,
}

impl<'a> Keys<'a> {
    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.entries.iter().find(|e| e.key == key)
    }

    fn req(&self, key: &str) -> PResult<&'a Entry> {
        self.get(key)
            .ok_or_else(|| ParseError::new(self.loc, format!("{} is missing `{key}`", self.what)))
    }

    fn only(&self, allowed: &[&str], prefixes: &[&str]) -> PResult<()> {
        for e in self.entries {
            if !allowed.contains(&e.key.as_str()) && !prefixes.iter().any(|p| e.key.starts_with(p))
            {
                return Err(ParseError::new(
                    e.loc,
                    format!("{} has no key `{}`", self.what, e.key),
                ));
            }
        }
        Ok(())
    }

    fn num_or(&self, key: &str, default: f64) -> PResult<f64> {
        self.get(key)
            .map_or(Ok(default), |e| parse_num(e, &e.value))
    }

    fn usize_or(&self, key: &str, default: usize) -> PResult<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|_| {
                ParseError::new(e.loc, format!("`{key}` must be a non-negative integer"))
            }),
        }
    }
}

impl Env {
    fn chart_of(&self, entry: &Entry) -> PResult<Chart> {
        lookup(&self.charts, entry, "chart", &self.names).cloned()
    }

    fn declare(&mut self, s: &Scenario, d: &Decl) -> PResult<()> {
        if self.names.contains_key(&d.name) {
            return Err(ParseError::new(
                d.loc,
                format!("`{}` is already declared", d.name),
            ));
        }
        let keys = Keys {
            entries: &d.entries,
            loc: d.loc,
            what: format!("[{} {}]", d.kind.keyword(), d.name),
        };
        match d.kind {
            DeclKind::Chart => {
                keys.only(&["coords"], &[])?;
                let e = keys.req("coords")?;
                let chart =
                    Chart::new(e.value.split_whitespace()).map_err(|err| located(e, 0, err))?;
                self.charts.insert(d.name.clone(), chart);
            }
            DeclKind::Field => {
                keys.only(&["chart", "comps"], &[])?;
                let chart = self.chart_of(keys.req("chart")?)?;
                let e = keys.req("comps")?;
                let comps = split_list(&e.value, ',')
                    .into_iter()
                    .map(|(off, p)| {
                        chart
                            .parse_expr(p)
                            .map(|f| f.expr)
                            .map_err(|err| located(e, off, err))
                    })
                    .collect::<PResult<Vec<_>>>()?;
                let field = VectorField::new(chart, comps).map_err(|err| located(e, 0, err))?;
                self.fields.insert(d.name.clone(), field);
            }
            DeclKind::Form => {
                keys.only(&["chart", "expr"], &[])?;
                let chart = self.chart_of(keys.req("chart")?)?;
                let e = keys.req("expr")?;
                let form = parse_form(&chart, &e.value).map_err(|err| located(e, 0, err))?;
                self.forms.insert(d.name.clone(), form);
            }
            DeclKind::Graph => self.declare_graph(s, d, &keys)?,
            DeclKind::Bundle => self.declare_bundle(d, &keys)?,
            DeclKind::Germ => self.declare_germ(s, d, &keys)?,
        }
        self.names.insert(d.name.clone(), d.kind);
        Ok(())
    }

    fn declare_graph(&mut self, s: &Scenario, d: &Decl, keys: &Keys) -> PResult<()> {
        let n = keys.usize_or("n", s.n)?;
        let k = keys.usize_or("k", if n == s.n { s.k } else { n + 1 })?;
        if n == 0 || k < n + 1 || k > 2 * n {
            return Err(ParseError::new(
                d.loc,
                format!("graph needs n >= 1 and n+1 <= k <= 2n, got n = {n}, k = {k}"),
            ));
        }
        let free: Vec<String> = match keys.get("free") {
            Some(e) => e.value.split_whitespace().map(str::to_string).collect(),
            None => standard_free_names(n, k),
        };
        if let (Some(e), Some(_)) = (keys.get("k"), keys.get("free")) {
            if e.value.trim().parse::<usize>().ok() != Some(free.len()) {
                return Err(ParseError::new(
                    e.loc,
                    "`k` disagrees with the number of free coordinates",
                ));
            }
        }
        let chart =
            Chart::new(free.clone()).map_err(|err| ParseError::new(d.loc, err.to_string()))?;
        let ambient = Chart::darboux(n);
        let mut deps = Vec::new();
        for e in keys.entries {
            if ["n", "k", "free"].contains(&e.key.as_str()) {
                continue;
            }
            if ambient.position(&e.key).is_none() {
                return Err(ParseError::new(
                    e.loc,
                    format!("`{}` is not a coordinate of R^{}", e.key, 2 * n + 1),
                ));
            }
            let expr = chart
                .parse_expr(&e.value)
                .map_err(|err| located(e, 0, err))?;
            deps.push((e.key.clone(), expr.expr));
        }
        let graph = GraphSubmanifold::with_free_coordinates(n, &free, deps)
            .map_err(|err| ParseError::new(d.loc, err.to_string()))?;
        self.charts.insert(d.name.clone(), graph.source().clone());
        self.graphs.insert(d.name.clone(), graph);
        Ok(())
    }

    fn declare_bundle(&mut self, d: &Decl, keys: &Keys) -> PResult<()> {
        keys.only(&["base", "fiber", "radius", "orientation"], &["lift."])?;
        let be = keys.req("base")?;
        let base = be
            .value
            .split_whitespace()
            .map(|item| {
                let (name, period) = item.split_once(':').ok_or_else(|| {
                    ParseError::new(be.loc, format!("base entry `{item}` must be `name:period`"))
                })?;
                Ok((name.to_string(), parse_num(be, period)?))
            })
            .collect::<PResult<Vec<_>>>()?;
        let fiber: Vec<&str> = keys
            .get("fiber")
            .map_or(vec!["u", "v"], |e| e.value.split_whitespace().collect());
        let fiber: [&str; 2] = fiber.try_into().map_err(|_| {
            ParseError::new(
                keys.get("fiber").map_or(d.loc, |e| e.loc),
                "fiber needs two names",
            )
        })?;
        let radius = keys.num_or("radius", 1.0)?;
        let orientation = keys.num_or("orientation", 1.0)?;
        let orientation = if orientation == 1.0 || orientation == -1.0 {
            orientation as i8
        } else {
            return Err(ParseError::new(
                keys.req("orientation")?.loc,
                "orientation must be 1 or -1",
            ));
        };
        let err = |e: Error| ParseError::new(d.loc, e.to_string());
        let trivial = vec![[Expr::zero(), Expr::zero()]; base.len()];
        let probe = FlatDiskBundle::new(&base, fiber, radius, trivial, orientation).map_err(err)?;
        let mut lifts = vec![[Expr::zero(), Expr::zero()]; base.len()];
        for e in keys.entries.iter().filter(|e| e.key.starts_with("lift.")) {
            let coord = &e.key["lift.".len()..];
            let j = base.iter().position(|(n, _)| n == coord).ok_or_else(|| {
                ParseError::new(e.loc, format!("`{coord}` is not a base coordinate"))
            })?;
            let parts = split_list(&e.value, ',');
            if parts.len() != 2 {
                return Err(ParseError::new(
                    e.loc,
                    "a lift is `a, b` for a d/du + b d/dv",
                ));
            }
            for (slot, (off, p)) in parts.into_iter().enumerate() {
                lifts[j][slot] = probe
                    .chart()
                    .parse_expr(p)
                    .map_err(|x| located(e, off, x))?
                    .expr;
            }
        }
        let bundle = FlatDiskBundle::new(&base, fiber, radius, lifts, orientation).map_err(err)?;
        self.charts.insert(d.name.clone(), bundle.chart().clone());
        self.bundles.insert(d.name.clone(), bundle);
        Ok(())
    }

    fn declare_germ(&mut self, s: &Scenario, d: &Decl, keys: &Keys) -> PResult<()> {
        let ke = keys.req("kind")?;
        let entry = match ke.value.as_str() {
            "standard" => {
                keys.only(&["kind", "n"], &[])?;
                let germ = GermForm::standard(keys.usize_or("n", s.n)?);
                let expected = DiffForm::zero(&germ.zero_section.source, 1);
                GermEntry { germ, expected }
            }
            "nonsingular" => {
                keys.only(&["kind", "beta", "line", "region"], &[])?;
                let beta = lookup(&self.forms, keys.req("beta")?, "form", &self.names)?.clone();
                let line = lookup(&self.fields, keys.req("line")?, "field", &self.names)?.clone();
                let region = parse_grid(keys.req("region")?, beta.chart().dim())?
                    .build(s.seed, None)
                    .map_err(|e| ParseError::new(d.loc, e.to_string()))?;
                let input = FoliatedInput::new(beta.clone(), line, region)
                    .map_err(|e| ParseError::new(d.loc, e.to_string()))?;
                let germ = build_nonsingular_germ(&input)
                    .map_err(|e| ParseError::new(d.loc, e.to_string()))?;
                GermEntry {
                    germ,
                    expected: beta,
                }
            }
            "singular" => {
                keys.only(&["kind", "bundle", "beta"], &[])?;
                let bundle = lookup(&self.bundles, keys.req("bundle")?, "bundle", &self.names)?;
                let beta = lookup(&self.forms, keys.req("beta")?, "form", &self.names)?;
                let err = |e: Error| ParseError::new(d.loc, e.to_string());
                let germ = build_singular_germ(bundle, beta, Default::default()).map_err(err)?;
                GermEntry {
                    germ,
                    expected: invariant_extension(bundle, beta).map_err(err)?,
                }
            }
            other => {
                return Err(ParseError::new(
                    ke.loc,
                    format!("germ kind `{other}` (expected standard, nonsingular or singular)"),
                ))
            }
        };
        self.charts
            .insert(d.name.clone(), entry.germ.chart().clone());
        self.germs.insert(d.name.clone(), entry);
        Ok(())
    }

    fn check(&self, c: &CheckSpec) -> PResult<Prepared> {
        let keys = Keys {
            entries: &c.entries,
            loc: c.loc,
            what: format!("[check {}]", c.op.name()),
        };
        let graph = || lookup(&self.graphs, keys.req("graph")?, "graph", &self.names).cloned();
        let bundle = || lookup(&self.bundles, keys.req("bundle")?, "bundle", &self.names).cloned();
        let form = || lookup(&self.forms, keys.req("form")?, "form", &self.names).cloned();
        let germ = |key: &str| lookup(&self.germs, keys.req(key)?, "germ", &self.names);
        let grid = |dim: usize| parse_grid(keys.req("grid")?, dim);
        let common = ["tol", "expect", "informational"];
        let allow = |extra: &[&str]| {
            let mut all: Vec<&str> = common.to_vec();
            all.extend_from_slice(extra);
            keys.only(&all, &[])
        };

        let job = match c.op {
            CheckOp::DdZero | CheckOp::Frobenius => {
                allow(&["form", "grid"])?;
                let form = form()?;
                let grid = grid(form.chart().dim())?;
                if c.op == CheckOp::DdZero {
                    Job::DdZero { form, grid }
                } else {
                    if form.degree() != 1 {
                        return Err(ParseError::new(
                            keys.req("form")?.loc,
                            "frobenius needs a 1-form",
                        ));
                    }
                    Job::Frobenius { form, grid }
                }
            }
            CheckOp::CoisotropyResiduals
            | CheckOp::VerifyClaim
            | CheckOp::CharFoliation
            | CheckOp::FlatStructure => {
                allow(&["graph", "grid"])?;
                let graph = graph()?;
                let grid = grid(graph.k())?;
                match c.op {
                    CheckOp::CoisotropyResiduals => Job::CoisotropyResiduals { graph, grid },
                    CheckOp::VerifyClaim => Job::VerifyClaim { graph, grid },
                    CheckOp::CharFoliation => Job::CharFoliation { graph, grid },
                    _ => Job::FlatStructure { graph, grid },
                }
            }
            CheckOp::ResidualAt => {
                allow(&["graph", "point", "equation", "indices", "expected"])?;
                let graph = graph()?;
                let pe = keys.req("point")?;
                let point = parse_numbers(pe, &pe.value)?;
                if point.len() != graph.k() {
                    return Err(ParseError::new(
                        pe.loc,
                        format!("point needs {} coordinates", graph.k()),
                    ));
                }
                let ee = keys.req("equation")?;
                let equation = match ee.value.as_str() {
                    "xxx" => Equation::Xxx,
                    "xxn" => Equation::Xxn,
                    "xxy" => Equation::Xxy,
                    "xny" => Equation::Xny,
                    "lambda" => Equation::Lambda,
                    other => {
                        return Err(ParseError::new(
                            ee.loc,
                            format!("unknown equation `{other}`"),
                        ))
                    }
                };
                let ie = keys.req("indices")?;
                let indices = ie
                    .value
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<usize>().ok().filter(|&i| i >= 1).ok_or_else(|| {
                            ParseError::new(ie.loc, format!("bad index `{t}` (indices start at 1)"))
                        })
                    })
                    .collect::<PResult<Vec<usize>>>()?;
                let xe = keys.req("expected")?;
                Job::ResidualAt {
                    graph,
                    point,
                    equation,
                    indices,
                    expected: parse_num(xe, &xe.value)?,
                }
            }
            CheckOp::OracleAgreement => {
                allow(&["graphs", "grid"])?;
                let ge = keys.req("graphs")?;
                let graphs = ge
                    .value
                    .split_whitespace()
                    .map(|name| {
                        let e = Entry {
                            value: name.to_string(),
                            ..ge.clone()
                        };
                        let g = lookup(&self.graphs, &e, "graph", &self.names)?.clone();
                        let spec = grid(g.k())?;
                        Ok((name.to_string(), g, spec))
                    })
                    .collect::<PResult<Vec<_>>>()?;
                Job::OracleAgreement { graphs }
            }
            CheckOp::SingularScan => {
                allow(&["graph", "grid", "dims", "flag"])?;
                let graph = graph()?;
                let grid = grid(graph.k())?;
                let de = keys.req("dims")?;
                let dims = de
                    .value
                    .split_whitespace()
                    .map(|t| {
                        t.parse()
                            .map_err(|_| ParseError::new(de.loc, format!("bad dimension `{t}`")))
                    })
                    .collect::<PResult<Vec<usize>>>()?;
                let flag = match keys.get("flag").map(|e| (e, e.value.as_str())) {
                    None => None,
                    Some((_, "generic")) => Some(ClusterFlag::Generic),
                    Some((_, "perturbable-legendrian")) => Some(ClusterFlag::PerturbableLegendrian),
                    Some((_, "other")) => Some(ClusterFlag::Other),
                    Some((e, v)) => {
                        return Err(ParseError::new(
                            e.loc,
                            format!("unknown cluster flag `{v}`"),
                        ))
                    }
                };
                Job::SingularScan {
                    graph,
                    grid,
                    dims,
                    flag,
                }
            }
            CheckOp::Perturb => {
                allow(&["graph", "grid", "bump", "delta", "window"])?;
                let graph = graph()?;
                let grid = grid(graph.k())?;
                let be = keys.req("bump")?;
                let expr = graph
                    .source()
                    .parse_expr(&be.value)
                    .map_err(|e| located(be, 0, e))?
                    .expr;
                let we = keys.req("window")?;
                Job::Perturb {
                    bump: Bump {
                        expr,
                        delta: keys.num_or("delta", f64::NAN).and_then(|v| {
                            if v.is_nan() {
                                Err(ParseError::new(c.loc, "perturb is missing `delta`"))
                            } else {
                                Ok(v)
                            }
                        })?,
                        window: parse_range(we, &we.value)?,
                    },
                    graph,
                    grid,
                }
            }
            CheckOp::Flatness => {
                allow(&["bundle", "grid"])?;
                let bundle = bundle()?;
                let grid = grid(bundle.chart().dim())?;
                Job::Flatness { bundle, grid }
            }
            CheckOp::Transport => {
                allow(&["bundle", "path", "start", "end"])?;
                let bundle = bundle()?;
                let pe = keys.req("path")?;
                let path = split_list(&pe.value, ';')
                    .into_iter()
                    .map(|(_, v)| parse_numbers(pe, v))
                    .collect::<PResult<Vec<_>>>()?;
                let pair = |key: &str| -> PResult<[f64; 2]> {
                    let e = keys.req(key)?;
                    parse_numbers(e, &e.value)?.try_into().map_err(|_| {
                        ParseError::new(e.loc, format!("`{key}` is a fiber point `u, v`"))
                    })
                };
                Job::Transport {
                    bundle,
                    path,
                    start: pair("start")?,
                    end: pair("end")?,
                }
            }
            CheckOp::Holonomy => {
                allow(&["bundle", "generator", "radius", "divisions", "angle"])?;
                let bundle = bundle()?;
                Job::Holonomy {
                    generator: keys.usize_or("generator", 0)?,
                    radius: keys.num_or("radius", 0.8 * bundle.radius())?,
                    divisions: keys.usize_or("divisions", 8)?,
                    angle: keys.num_or("angle", 0.0)?,
                    bundle,
                }
            }
            CheckOp::Ccl => {
                allow(&["bundle", "form", "fails"])?;
                let fails = match keys.get("fails") {
                    None => Vec::new(),
                    Some(e) => e
                        .value
                        .split([',', ' '])
                        .filter(|t| !t.is_empty())
                        .map(|t| match t {
                            "invariance" => Ok(Condition::Invariance),
                            "vanishing" => Ok(Condition::Vanishing),
                            "positivity" => Ok(Condition::Positivity),
                            other => Err(ParseError::new(
                                e.loc,
                                format!("unknown CCL condition `{other}`"),
                            )),
                        })
                        .collect::<PResult<Vec<_>>>()?,
                };
                Job::Ccl {
                    bundle: bundle()?,
                    form: form()?,
                    fails,
                }
            }
            CheckOp::Contactness | CheckOp::VolumeIdentity => {
                allow(&["germ", "grid", "radius", "fiber_divisions"])?;
                let g = germ("germ")?;
                let base = grid(g.germ.zero_section.source.dim())?;
                let radius = keys.num_or("radius", 0.5)?;
                let fiber_divisions = keys.usize_or("fiber_divisions", 2)?;
                let germ = g.germ.clone();
                if c.op == CheckOp::Contactness {
                    Job::Contactness {
                        germ,
                        base,
                        radius,
                        fiber_divisions,
                    }
                } else {
                    if germ.expected_volume.is_none() {
                        return Err(ParseError::new(c.loc, "germ has no closed-form volume"));
                    }
                    Job::VolumeIdentity {
                        germ,
                        base,
                        radius,
                        fiber_divisions,
                    }
                }
            }
            CheckOp::ZeroSection => {
                allow(&["germ", "grid", "against"])?;
                let g = germ("germ")?;
                let expected = match keys.get("against") {
                    Some(e) => lookup(&self.forms, e, "form", &self.names)?.clone(),
                    None => g.expected.clone(),
                };
                Job::ZeroSection {
                    germ: g.germ.clone(),
                    expected,
                    grid: grid(g.germ.zero_section.source.dim())?,
                }
            }
            CheckOp::Interpolation => {
                allow(&["germ0", "germ1", "grid", "t_samples"])?;
                let g0 = germ("germ0")?.germ.clone();
                let g1 = germ("germ1")?.germ.clone();
                Job::Interpolation {
                    grid: grid(g0.zero_section.source.dim())?,
                    t_samples: keys.usize_or("t_samples", 11)?.max(2),
                    g0,
                    g1,
                }
            }
        };

        let tol = keys.num_or("tol", c.op.default_tol())?;
        let expect_fail = match keys.get("expect") {
            None => false,
            Some(e) => match e.value.as_str() {
                "pass" => false,
                "fail" => true,
                other => {
                    return Err(ParseError::new(
                        e.loc,
                        format!("`expect` is pass or fail, not `{other}`"),
                    ))
                }
            },
        };
        let informational = match keys.get("informational") {
            None => false,
            Some(e) => e
                .value
                .parse()
                .map_err(|_| ParseError::new(e.loc, "`informational` is true or false"))?,
        };
        Ok(Prepared {
            op: c.op,
            job,
            tol,
            expect_fail,
            informational,
        })
    }
}
