//! Independent oracles and random generators shared by the integration tests.
//!
//! Everything here works pointwise from definitions (permutation sums,
//! central differences) and never calls the symbolic operations it checks.
#![allow(dead_code)]

use legfol::fields::{Chart, SmoothMap, VectorField};
use legfol::forms::{parse_form, DiffForm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn chart(dim: usize) -> Chart {
    Chart::new((1..=dim).map(|i| format!("x{i}"))).unwrap()
}

pub fn point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-r..r)).collect()
}

/// A smooth scalar expression in `x1..x_dim`, bounded on the unit cube.
pub fn expr_src(rng: &mut ChaCha8Rng, dim: usize, depth: usize) -> String {
    let names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    expr_in(rng, &names, depth)
}

/// Like [`expr_src`] over arbitrary variable names.
pub fn expr_in(rng: &mut ChaCha8Rng, names: &[String], depth: usize) -> String {
    if depth == 0 {
        return if rng.random_bool(0.6) {
            names[rng.random_range(0..names.len())].clone()
        } else {
            format!("{:.3}", rng.random_range(-2.0..2.0))
        };
    }
    let sub = |rng: &mut ChaCha8Rng| expr_in(rng, names, depth - 1);
    match rng.random_range(0..7) {
        0 => format!("({} + {})", sub(rng), sub(rng)),
        1 => format!("({} - {})", sub(rng), sub(rng)),
        2 | 3 => format!("{}*{}", sub(rng), sub(rng)),
        4 => format!("sin({})", sub(rng)),
        5 => format!("cos({})", sub(rng)),
        _ => format!("({})^{}", sub(rng), rng.random_range(2..=3)),
    }
}

/// A random `degree`-form on `R^dim` as source text.
pub fn form_src(rng: &mut ChaCha8Rng, dim: usize, degree: usize) -> String {
    if degree == 0 {
        return expr_src(rng, dim, 2);
    }
    let mut terms = Vec::new();
    let count = rng.random_range(1..=3);
    for _ in 0..count {
        let mut idx: Vec<usize> = (1..=dim).collect();
        for i in 0..degree {
            let j = rng.random_range(i..dim);
            idx.swap(i, j);
        }
        let basis: Vec<String> = idx[..degree].iter().map(|i| format!("dx{i}")).collect();
        terms.push(format!("({})*{}", expr_src(rng, dim, 2), basis.join("^")));
    }
    terms.join(" + ")
}

pub fn random_form(rng: &mut ChaCha8Rng, c: &Chart, degree: usize) -> DiffForm {
    parse_form(c, &form_src(rng, c.dim(), degree)).unwrap()
}

pub fn random_field(rng: &mut ChaCha8Rng, c: &Chart) -> VectorField {
    let comps = (0..c.dim())
        .map(|_| c.parse_expr(&expr_src(rng, c.dim(), 2)).unwrap().expr)
        .collect();
    VectorField::new(c.clone(), comps).unwrap()
}

pub fn random_map(rng: &mut ChaCha8Rng, source: &Chart, target: &Chart) -> SmoothMap {
    let comps = (0..target.dim())
        .map(|_| {
            source
                .parse_expr(&expr_src(rng, source.dim(), 2))
                .unwrap()
                .expr
        })
        .collect();
    SmoothMap::new(source.clone(), target.clone(), comps).unwrap()
}

pub fn vectors(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| point(rng, dim, 1.0)).collect()
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    if n == 0 {
        return vec![(Vec::new(), 1.0)];
    }
    let mut out = Vec::new();
    for (perm, sign) in permutations(n - 1) {
        for pos in 0..=perm.len() {
            let mut p = perm.clone();
            p.insert(pos, n - 1);
            let flips = perm.len() - pos;
            out.push((p, if flips % 2 == 0 { sign } else { -sign }));
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

/// `(a ^ b)(v) = 1/(p! q!) sum_sigma sgn(sigma) a(v_sigma[..p]) b(v_sigma[p..])`.
pub fn wedge_oracle(a: &DiffForm, b: &DiffForm, p: &[f64], v: &[Vec<f64>]) -> f64 {
    let (da, db) = (a.degree(), b.degree());
    let mut sum = 0.0;
    for (perm, sign) in permutations(da + db) {
        let va: Vec<Vec<f64>> = perm[..da].iter().map(|&i| v[i].clone()).collect();
        let vb: Vec<Vec<f64>> = perm[da..].iter().map(|&i| v[i].clone()).collect();
        sum += sign * a.evaluate(p, &va).unwrap() * b.evaluate(p, &vb).unwrap();
    }
    sum / (factorial(da) * factorial(db))
}

const H: f64 = 1e-5;

/// Central difference of `f` along `dir` at `p`.
pub fn directional(f: impl Fn(&[f64]) -> f64, p: &[f64], dir: &[f64]) -> f64 {
    let shift = |s: f64| -> Vec<f64> { p.iter().zip(dir).map(|(x, d)| x + s * d).collect() };
    (f(&shift(H)) - f(&shift(-H))) / (2.0 * H)
}

/// `d w(v_0..v_k) = sum_i (-1)^i v_i(w(v_0..^v_i..v_k))` for constant `v_i`.
pub fn d_oracle(w: &DiffForm, p: &[f64], v: &[Vec<f64>]) -> f64 {
    (0..v.len())
        .map(|i| {
            let rest: Vec<Vec<f64>> = v
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, x)| x.clone())
                .collect();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sign * directional(|q| w.evaluate(q, &rest).unwrap(), p, &v[i])
        })
        .sum()
}

/// `d/dt (phi_t^* w)_p(v)` at `t = 0`, with the flow replaced by its
/// first-order part `p + t X(p)`, `v + t (DX) v`; the second-order error is
/// even in `t` and drops out of the central difference.
pub fn lie_oracle(x: &VectorField, w: &DiffForm, p: &[f64], v: &[Vec<f64>]) -> f64 {
    let xp = x.eval(p);
    let dx: Vec<Vec<f64>> = v
        .iter()
        .map(|vi| {
            (0..p.len())
                .map(|c| directional(|q| x.eval(q)[c], p, vi))
                .collect()
        })
        .collect();
    let g = |t: f64| {
        let q: Vec<f64> = p.iter().zip(&xp).map(|(a, b)| a + t * b).collect();
        let moved: Vec<Vec<f64>> = v
            .iter()
            .zip(&dx)
            .map(|(vi, di)| vi.iter().zip(di).map(|(a, b)| a + t * b).collect())
            .collect();
        w.evaluate(&q, &moved).unwrap()
    };
    (g(H) - g(-H)) / (2.0 * H)
}

/// `(phi^* w)_p(v) = w_{phi(p)}(D phi v)` with a finite-difference Jacobian.
pub fn pullback_oracle(phi: &SmoothMap, w: &DiffForm, p: &[f64], v: &[Vec<f64>]) -> f64 {
    let pushed: Vec<Vec<f64>> = v
        .iter()
        .map(|vi| {
            (0..phi.target.dim())
                .map(|c| directional(|q| phi.eval(q)[c], p, vi))
                .collect()
        })
        .collect();
    w.evaluate(&phi.eval(p), &pushed).unwrap()
}

/// `|a - b| / max(1, |b|)`.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}
