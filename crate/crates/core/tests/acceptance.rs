//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::time::{Duration, Instant};

use common::*;
use legfol::bundle::{
    ccl_check, disk_samples, holonomy, loop_holonomy, parallel_transport, CclOptions, Condition,
    FlatDiskBundle, OdeOptions,
};
use legfol::coiso::{
    coisotropy_residuals, families, perturb_legendrian, pointwise_coisotropy, singular_scan,
    standard_free_names, verify_claim, Bump, CharFoliation, ClusterFlag, Equation,
    GraphSubmanifold, SCAN_TOL,
};
use legfol::fields::fd_partial;
use legfol::forms::parse_form;
use legfol::germ::{
    build_nonsingular_germ, build_singular_germ, contactness_scan, interpolation_contactness,
    invariant_extension, zero_section_foliation_check, FoliatedInput, InterpolationOptions,
};
use legfol::grid::Grid;
use legfol::scenario::{bundled, parse_scenario, run_scenario, RunOptions};
use legfol::Error;
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    Outcome {
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            summary
        } else {
            failures.join("; ")
        },
    }
}

fn within(budget: Duration, start: Instant, failures: &mut Vec<String>) -> f64 {
    let secs = start.elapsed().as_secs_f64();
    if start.elapsed() > budget {
        failures.push(format!("took {secs:.1} s, budget {} s", budget.as_secs()));
    }
    secs
}

fn exterior_calculus() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = [0.0_f64; 4];
    let c4 = chart(4);
    let c5 = chart(5);
    let (src, tgt) = (chart(3), chart(4));
    for case in 0..200u64 {
        let mut r = rng(case);
        let (p_deg, q_deg) = (r.random_range(0..=2), r.random_range(0..=2));
        let w = random_form(&mut r, &c4, p_deg);
        let p4 = point(&mut r, 4, 1.0);
        worst[0] = worst[0].max(
            w.exterior_d()
                .unwrap()
                .exterior_d()
                .unwrap()
                .at(&p4)
                .max_abs(),
        );

        let a = random_form(&mut r, &c4, p_deg);
        let b = random_form(&mut r, &c4, q_deg);
        let sign = if (p_deg * q_deg) % 2 == 0 { 1.0 } else { -1.0 };
        let gc = a
            .wedge(&b)
            .unwrap()
            .sub(&b.wedge(&a).unwrap().scale_by(sign))
            .unwrap();
        worst[1] = worst[1].max(gc.at(&p4).max_abs());

        let a = random_form(&mut r, &c5, p_deg);
        let b = random_form(&mut r, &c5, q_deg);
        let p5 = point(&mut r, 5, 1.0);
        let s = if p_deg % 2 == 0 { 1.0 } else { -1.0 };
        let lhs = a.wedge(&b).unwrap().exterior_d().unwrap();
        let rhs = a
            .exterior_d()
            .unwrap()
            .wedge(&b)
            .unwrap()
            .add(&a.wedge(&b.exterior_d().unwrap()).unwrap().scale_by(s))
            .unwrap();
        worst[2] = worst[2].max(lhs.sub(&rhs).unwrap().at(&p5).max_abs());

        let phi = random_map(&mut r, &src, &tgt);
        let w = random_form(&mut r, &tgt, p_deg);
        let p3 = point(&mut r, 3, 1.0);
        let nat = w
            .exterior_d()
            .unwrap()
            .pullback(&phi)
            .unwrap()
            .sub(&w.pullback(&phi).unwrap().exterior_d().unwrap())
            .unwrap();
        worst[3] = worst[3].max(nat.at(&p3).max_abs());
    }
    for (name, v) in [
        "d^2",
        "graded commutativity",
        "Leibniz",
        "pullback naturality",
    ]
    .iter()
    .zip(worst)
    {
        if !(v <= 1e-9) {
            failures.push(format!("{name} residual {v:.2e}"));
        }
    }
    let mut fd_worst: f64 = 0.0;
    for field in 0..20u64 {
        let mut r = rng(10_000 + field);
        let f = c4.parse_expr(&expr_src(&mut r, 4, 3)).unwrap();
        for _ in 0..50 {
            let p = point(&mut r, 4, 1.0);
            for name in c4.names() {
                let sym = f.differentiate(name).unwrap().eval(&p);
                let fd = fd_partial(&f, &p, name, 1e-5).unwrap();
                fd_worst = fd_worst.max((sym - fd).abs() / (1.0 + sym.abs()));
            }
        }
    }
    if !(fd_worst <= 1e-5) {
        failures.push(format!("symbolic vs finite-difference {fd_worst:.2e}"));
    }
    let secs = within(Duration::from_secs(30), start, &mut failures);
    outcome(
        failures,
        format!(
            "200 cases/property, max residual {:.1e}; FD agreement {fd_worst:.1e} over 20x50 points; {secs:.1} s",
            worst.iter().copied().fold(0.0, f64::max)
        ),
    )
}

fn claim_identities() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let y = families::quadratic(n).unwrap();
        let pts = Grid::random(vec![-0.8; n + 1], vec![0.8; n + 1], 200, n as u64)
            .unwrap()
            .points()
            .unwrap();
        match verify_claim(&y, &pts, 1e-10) {
            Ok(rep) => {
                let m = rep.max.max();
                worst = worst.max(m);
                if !(m <= 1e-10) {
                    failures.push(format!("n = {n}: claim residual {m:.2e} ({:?})", rep.max));
                }
            }
            Err(e) => failures.push(format!("n = {n}: {e}")),
        }
    }
    let c = families::counterexample(2).unwrap();
    let res = coisotropy_residuals(&c, &[1.0, 1.0, 0.0]).unwrap();
    let xny = res
        .entries
        .iter()
        .find(|e| e.equation == Equation::Xny)
        .map(|e| e.value);
    if !xny.is_some_and(|v| (v + 1.0).abs() <= 1e-10) {
        failures.push(format!("counterexample residual {xny:?}, expected -1"));
    }
    let secs = within(Duration::from_secs(60), start, &mut failures);
    outcome(
        failures,
        format!(
            "n = 2, 3 at 200 points: max {worst:.1e}; counterexample residual {}; {secs:.1} s",
            xny.unwrap_or(f64::NAN)
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    let (mut pos, mut neg) = (0, 0);
    let mut r = rng(3);
    for n in 1..=3 {
        let mut graphs = vec![
            families::quadratic(n).unwrap(),
            families::zero(n, n + 1).unwrap(),
        ];
        if n >= 2 {
            graphs.push(
                families::product(n, "x1^2 + sin(x1)", &format!("x{n}*y{n} + y{n}^3")).unwrap(),
            );
            graphs.push(families::legendrian_union(n, "x1^2", "sin(x1)", "1 + x1").unwrap());
            graphs.push(families::counterexample(n).unwrap());
            let names = standard_free_names(n, n + 1);
            for _ in 0..3 {
                let comps: Vec<String> = (0..n).map(|_| expr_in(&mut r, &names, 2)).collect();
                let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
                graphs.push(GraphSubmanifold::standard_from_strs(n, n + 1, &refs).unwrap());
            }
        }
        for y in &graphs {
            for _ in 0..30 {
                let p = point(&mut r, n + 1, 1.0);
                let by_equations = coisotropy_residuals(y, &p).unwrap().max_foliation() <= 1e-8;
                let pointwise = pointwise_coisotropy(y, &p).unwrap().coisotropic();
                pairs += 1;
                if pointwise {
                    pos += 1;
                } else {
                    neg += 1;
                }
                if by_equations != pointwise {
                    failures.push(format!("disagreement at n = {n}, {p:?}"));
                }
            }
        }
    }
    if pairs < 500 || pos == 0 || neg == 0 {
        failures.push(format!(
            "coverage: {pairs} pairs, {pos} coisotropic, {neg} not"
        ));
    }
    outcome(
        failures,
        format!("{pairs} pairs ({pos} coisotropic, {neg} not), 100% agreement"),
    )
}

fn singular_locus() -> Outcome {
    let mut failures = Vec::new();
    for n in [2, 3] {
        let divisions = if n == 2 { 20 } else { 10 };
        let grid =
            Grid::lattice(vec![-0.5; n + 1], vec![0.5; n + 1], vec![divisions; n + 1]).unwrap();
        let q = singular_scan(&families::quadratic(n).unwrap(), &grid, SCAN_TOL).unwrap();
        if q.dimensions() != vec![n - 1] {
            failures.push(format!(
                "quadratic n = {n}: dimensions {:?}",
                q.dimensions()
            ));
        }
        let z = singular_scan(&families::zero(n, n + 1).unwrap(), &grid, SCAN_TOL).unwrap();
        if z.dimensions() != vec![n] || z.clusters[0].flag != ClusterFlag::PerturbableLegendrian {
            failures.push(format!("f = 0, n = {n}: dimensions {:?}", z.dimensions()));
        }
    }
    let y = GraphSubmanifold::legendrian_model(2).unwrap();
    let bump = Bump {
        expr: y
            .source()
            .parse_expr("0.01*y1*exp(-y1^2/0.04)")
            .unwrap()
            .expr,
        delta: 0.01,
        window: (-0.5, 0.5),
    };
    let grid = Grid::lattice(vec![-0.5; 3], vec![0.5; 3], vec![20; 3]).unwrap();
    let before = singular_scan(&y, &grid, SCAN_TOL).unwrap().hits.len();
    let moved = perturb_legendrian(&y, &bump).unwrap();
    let after = singular_scan(&moved, &grid, SCAN_TOL).unwrap();
    let in_window = after.hits.iter().filter(|p| p[2].abs() <= 0.5).count();
    let fol = grid
        .points()
        .unwrap()
        .iter()
        .map(|p| legfol::coiso::foliation_residual(&moved, p).unwrap())
        .fold(0.0, f64::max);
    if in_window != 0 || !(fol <= 1e-10) {
        failures.push(format!(
            "after perturbation: {in_window} hits, foliation residual {fol:.2e}"
        ));
    }
    outcome(
        failures,
        format!("dims n-1 and n with perturbable flag; perturbation {before} -> {in_window} hits, residual {fol:.1e}"),
    )
}

fn characteristic_foliations() -> Outcome {
    let mut failures = Vec::new();
    let mut r = rng(5);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        for k in n + 1..=2 * n {
            let y = families::higher(n, k).unwrap();
            let cf = CharFoliation::new(&y, SCAN_TOL).unwrap();
            for _ in 0..50 {
                let at = cf.at(&point(&mut r, k, 0.8)).unwrap();
                if at.singular {
                    continue;
                }
                checked += 1;
                worst = worst.max(at.restricted_power).max(at.integrability);
                if at.kernel_dim != 2 * n - k + 1 {
                    failures.push(format!(
                        "n = {n}, k = {k}: kernel dimension {}",
                        at.kernel_dim
                    ));
                }
            }
        }
    }
    if !(worst <= 1e-8) {
        failures.push(format!("integrability residual {worst:.2e}"));
    }
    outcome(
        failures,
        format!("{checked} nonsingular samples over 5 (n, k) pairs, residual {worst:.1e}"),
    )
}

fn flat_bundles() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let opts = OdeOptions::default();
    let torus = FlatDiskBundle::from_strs(
        &[("s1", 1.0), ("s2", 1.0)],
        ["u", "v"],
        1.0,
        &[("-v", "u"), ("-(1 + u^2 + v^2)*v", "(1 + u^2 + v^2)*u")],
        1,
    )
    .unwrap();
    let go =
        |path: &[Vec<f64>], x: [f64; 2]| parallel_transport(&torus, path, x, opts).unwrap().end;
    let mut functor: f64 = 0.0;
    let mut r = rng(6);
    for _ in 0..20 {
        let (a, b, c) = (
            point(&mut r, 2, 0.5),
            point(&mut r, 2, 0.5),
            point(&mut r, 2, 0.5),
        );
        let x = [r.random_range(-0.5..0.5), r.random_range(-0.5..0.5)];
        let direct = go(&[a.clone(), b.clone(), c.clone()], x);
        let composed = go(&[b.clone(), c], go(&[a.clone(), b.clone()], x));
        let back = go(&[b.clone(), a.clone()], go(&[a, b], x));
        functor = functor
            .max((direct[0] - composed[0]).hypot(direct[1] - composed[1]))
            .max((back[0] - x[0]).hypot(back[1] - x[1]));
    }
    if !(functor <= 2.0 * opts.tol) {
        failures.push(format!("functoriality {functor:.2e}"));
    }
    let rot = FlatDiskBundle::rotation(1.0, 1.0);
    let h = holonomy(&rot, 0, &[0.0], &disk_samples(0.8, 8), opts).unwrap();
    let rot_err = h.max_displacement_from(|[u, v]| {
        [
            u * 1f64.cos() - v * 1f64.sin(),
            u * 1f64.sin() + v * 1f64.cos(),
        ]
    });
    if !(rot_err <= 1e-6) {
        failures.push(format!("rotation holonomy {rot_err:.2e}"));
    }
    let rect = vec![
        vec![0.1, 0.1],
        vec![0.6, 0.1],
        vec![0.6, 0.4],
        vec![0.1, 0.4],
        vec![0.1, 0.1],
    ];
    let loop_err = loop_holonomy(&torus, &rect, &disk_samples(0.7, 6), opts)
        .unwrap()
        .max_displacement_from(|x| x);
    if !(loop_err <= 1e-7) {
        failures.push(format!("contractible loop {loop_err:.2e}"));
    }
    let trivial = FlatDiskBundle::trivial(1, 1.0);
    let ccl = |b: &FlatDiskBundle, src: &str| {
        ccl_check(
            b,
            &parse_form(b.chart(), src).unwrap(),
            CclOptions::default(),
        )
        .unwrap()
        .failed
    };
    if !ccl(&rot, "u*dv - v*du").is_empty() || !ccl(&trivial, "u*dv - v*du").is_empty() {
        failures.push("CCL rejects u dv - v du".into());
    }
    let bent = FlatDiskBundle::rotation(1.0, 0.9);
    let negatives = [
        (
            ccl(&trivial, "du"),
            vec![Condition::Vanishing, Condition::Positivity],
        ),
        (ccl(&trivial, "u*dv + v*du"), vec![Condition::Positivity]),
        (
            ccl(&trivial, "(u + 0.3)*dv - v*du"),
            vec![Condition::Vanishing],
        ),
        (
            ccl(&bent, "(u + u^2)*dv - v*du"),
            vec![Condition::Invariance],
        ),
    ];
    for (got, want) in &negatives {
        if got != want {
            failures.push(format!("negative suite: failed {got:?}, designed {want:?}"));
        }
    }
    let secs = within(Duration::from_secs(60), start, &mut failures);
    outcome(
        failures,
        format!("functoriality {functor:.1e}, rotation {rot_err:.1e}, loop {loop_err:.1e}, CCL suite 1+4; {secs:.1} s"),
    )
}

fn germ_constructions() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for n in 1..=3usize {
        let vars: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=n).map(|i| format!("x{i}")))
            .collect();
        let refs: Vec<&str> = vars.iter().map(String::as_str).collect();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        for case in 0..10u64 {
            let mut r = rng(1000 * n as u64 + case);
            let f_src = format!("(1 + ({})^2/2)", expr_in(&mut r, &vars, 2));
            let mut line = vec!["1".to_string()];
            line.extend((0..n).map(|_| expr_in(&mut r, &vars, 2)));
            let lrefs: Vec<&str> = line.iter().map(String::as_str).collect();
            let region = Grid::cube(n + 1, 0.5, 3);
            let input =
                FoliatedInput::from_strs(&refs, &format!("{f_src}*dt"), &lrefs, region.clone())
                    .unwrap();
            let g = match build_nonsingular_germ(&input) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("n = {n}, case {case}: {e}"));
                    continue;
                }
            };
            let f = g.chart().parse_expr(&f_src).unwrap();
            let top = g.top_form().unwrap();
            let dim = 2 * n + 1;
            let unit = |i: usize| (0..dim).map(|k| f64::from(k == i)).collect::<Vec<f64>>();
            let mut frame: Vec<Vec<f64>> = (0..n)
                .flat_map(|i| [unit(1 + i), unit(1 + n + i)])
                .collect();
            frame.push(unit(0));
            for _ in 0..200 {
                let p = point(&mut r, dim, 0.5);
                worst = worst.max((top.evaluate(&p, &frame).unwrap() - fact * f.eval(&p)).abs());
            }
            if case == 0 {
                let hood = g.neighborhood(&region, 0.5, 2).unwrap();
                if !contactness_scan(&g, &hood).unwrap().passed {
                    failures.push(format!("nonsingular n = {n}: contactness"));
                }
                if !zero_section_foliation_check(&g, input.beta(), &region)
                    .unwrap()
                    .passed
                {
                    failures.push(format!("nonsingular n = {n}: zero section"));
                }
            }
        }
    }
    if !(worst <= 1e-10) {
        failures.push(format!("volume identity {worst:.2e}"));
    }
    let rot = FlatDiskBundle::rotation(1.0, 1.0);
    let beta = parse_form(rot.chart(), "u*dv - v*du").unwrap();
    let sg = build_singular_germ(&rot, &beta, CclOptions::default()).unwrap();
    if !contactness_scan(
        &sg,
        &sg.neighborhood(&Grid::cube(3, 0.5, 4), 0.5, 2).unwrap(),
    )
    .unwrap()
    .passed
    {
        failures.push("singular: contactness".into());
    }
    let expected = invariant_extension(&rot, &beta).unwrap();
    if !zero_section_foliation_check(&sg, &expected, &Grid::cube(3, 0.5, 8))
        .unwrap()
        .passed
    {
        failures.push("singular: zero section".into());
    }
    let vars = ["t", "x1", "x2"];
    let region = Grid::cube(3, 0.5, 3);
    let line = ["1", "x2", "-x1"];
    let build = |beta: &str, line: &[&str]| {
        build_nonsingular_germ(
            &FoliatedInput::from_strs(&vars, beta, line, region.clone()).unwrap(),
        )
        .unwrap()
    };
    let ga = build("(1 + t^2)*dt", &line);
    let gb = build("(3 + sin(x1))*dt", &line);
    let gc = build("-(1 + t^2)*dt", &["-1", "-x2", "x1"]);
    let opts = InterpolationOptions::default();
    if !interpolation_contactness(&ga, &gb, &region, &opts).is_ok_and(|r| r.passed) {
        failures.push("interpolation of a matched pair".into());
    }
    if !matches!(
        interpolation_contactness(&ga, &gc, &region, &opts),
        Err(Error::CoOrientationMismatch(_))
    ) {
        failures.push("orientation-flipped pair accepted".into());
    }
    let secs = within(Duration::from_secs(120), start, &mut failures);
    outcome(
        failures,
        format!("volume identity {worst:.1e} (30 inputs x 200 points); both constructors contact; interpolation gate ok; {secs:.1} s"),
    )
}

fn bundled_suite() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (name, src) in bundled() {
        let s = match parse_scenario(src) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{name}: {e:?}"));
                continue;
            }
        };
        let a = run_scenario(&s, &RunOptions::default());
        let b = run_scenario(&s, &RunOptions::default());
        if !a.passed {
            failures.push(format!("{name} failed"));
        }
        if a.to_json_untimed() != b.to_json_untimed() {
            failures.push(format!("{name} not deterministic"));
        }
    }
    let secs = within(Duration::from_secs(300), start, &mut failures);
    outcome(
        failures,
        format!(
            "{} scenarios parsed, passed, deterministic (two runs each); {secs:.1} s",
            bundled().len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("exterior calculus", exterior_calculus),
        ("claim identities", claim_identities),
        ("oracle equivalence", oracle_equivalence),
        ("singular locus", singular_locus),
        ("characteristic foliations", characteristic_foliations),
        ("flat bundles", flat_bundles),
        ("germ constructions", germ_constructions),
        ("bundled scenarios", bundled_suite),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.passed;
        println!(
            "{} [{}] {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    if !all {
        std::process::exit(1);
    }
}
