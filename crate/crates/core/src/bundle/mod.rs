//! Flat disk bundles over periodic boxes.
//!
//! The total space has coordinates `(s_1..s_b, u, v)`: periodic base
//! coordinates followed by a fiber disk of radius `R`. The connection is given
//! by horizontal lifts `X~_j = d/ds_j + a_j d/du + b_j d/dv` of the coordinate
//! fields, and it is flat when these commute.

mod ccl;
mod extract;
pub mod ode;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::fields::{lie_bracket, Chart, Expr, ExprField, VectorField};
use crate::forms::DiffForm;
use crate::par;
pub use ccl::{ccl_check, CclOptions, CclReport, Condition};
pub use extract::{extract_flat_structure, FlatStructure};
pub use ode::{OdeOptions, OdeOutcome};

#[derive(Debug, Clone)]
pub struct FlatDiskBundle {
    chart: Chart,
    base_dim: usize,
    radius: f64,
    orientation: f64,
    /// `(a_j, b_j)` per base coordinate.
    coeffs: Vec<[Expr; 2]>,
    /// `d(a_j, b_j)/d(u, v)` as `[[da/du, da/dv], [db/du, db/dv]]`.
    partials: Vec<[[Expr; 2]; 2]>,
    lifts: Vec<VectorField>,
}

impl FlatDiskBundle {
    /// `base` lists `(name, period)`; `lifts[j]` is `(a_j, b_j)` on the total chart.
    pub fn new(
        base: &[(String, f64)],
        fiber: [&str; 2],
        radius: f64,
        lifts: Vec<[Expr; 2]>,
        orientation: i8,
    ) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::InvalidInput(
                "bundle base needs at least one coordinate".into(),
            ));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "fiber radius must be positive, got {radius}"
            )));
        }
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidInput(
                "fiber orientation must be +1 or -1".into(),
            ));
        }
        if lifts.len() != base.len() {
            return Err(Error::Arity {
                expected: base.len(),
                got: lifts.len(),
            });
        }
        let mut names: Vec<String> = base.iter().map(|(n, _)| n.clone()).collect();
        names.extend(fiber.iter().map(|s| s.to_string()));
        let mut periods: Vec<Option<f64>> = base.iter().map(|(_, p)| Some(*p)).collect();
        periods.extend([None, None]);
        let chart = Chart::with_periods(names, periods)?;
        let b = base.len();
        let (u, v) = (b, b + 1);
        let mut fields = Vec::with_capacity(b);
        let mut partials = Vec::with_capacity(b);
        for (j, [a, bb]) in lifts.iter().enumerate() {
            let mut comps = vec![Expr::zero(); b + 2];
            comps[j] = Expr::one();
            comps[u] = a.clone();
            comps[v] = bb.clone();
            fields.push(VectorField::new(chart.clone(), comps)?);
            partials.push([[a.diff(u), a.diff(v)], [bb.diff(u), bb.diff(v)]]);
        }
        Ok(Self {
            chart,
            base_dim: b,
            radius,
            orientation: orientation as f64,
            coeffs: lifts,
            partials,
            lifts: fields,
        })
    }

    /// Same as [`FlatDiskBundle::new`] with lift coefficients parsed on the total chart.
    pub fn from_strs(
        base: &[(&str, f64)],
        fiber: [&str; 2],
        radius: f64,
        lifts: &[(&str, &str)],
        orientation: i8,
    ) -> Result<Self> {
        let base: Vec<(String, f64)> = base.iter().map(|(n, p)| (n.to_string(), *p)).collect();
        let trivial = vec![[Expr::zero(), Expr::zero()]; base.len()];
        let probe = Self::new(&base, fiber, radius, trivial, orientation)?;
        let coeffs = lifts
            .iter()
            .map(|(a, b)| {
                Ok([
                    probe.chart.parse_expr(a)?.expr,
                    probe.chart.parse_expr(b)?.expr,
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&base, fiber, radius, coeffs, orientation)
    }

    /// Circle base `s` of period 1 with the rotation lift `d/ds + c (-v d/du + u d/dv)`.
    pub fn rotation(c: f64, radius: f64) -> Self {
        let rot = [
            Expr::constant(-c).mul(&Expr::var(2)),
            Expr::constant(c).mul(&Expr::var(1)),
        ];
        Self::new(&[("s".into(), 1.0)], ["u", "v"], radius, vec![rot], 1)
            .expect("valid rotation bundle")
    }

    pub fn trivial(base_dim: usize, radius: f64) -> Self {
        let base: Vec<(String, f64)> = (1..=base_dim).map(|j| (format!("s{j}"), 1.0)).collect();
        Self::new(
            &base,
            ["u", "v"],
            radius,
            vec![[Expr::zero(), Expr::zero()]; base_dim],
            1,
        )
        .expect("valid trivial bundle")
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn orientation(&self) -> f64 {
        self.orientation
    }

    pub fn period(&self, j: usize) -> f64 {
        self.chart.periods()[j].expect("base coordinates are periodic")
    }

    pub fn lifts(&self) -> &[VectorField] {
        &self.lifts
    }

    pub fn lift_coeffs(&self) -> &[[Expr; 2]] {
        &self.coeffs
    }

    /// Horizontal lift of a base field with coefficients `x` on the total chart.
    pub fn horizontal_lift(&self, x: &[Expr]) -> Result<VectorField> {
        if x.len() != self.base_dim {
            return Err(Error::Arity {
                expected: self.base_dim,
                got: x.len(),
            });
        }
        let fiber = [self.base_dim, self.base_dim + 1];
        if x.iter().any(|e| fiber.iter().any(|&i| e.depends_on(i))) {
            return Err(Error::InvalidInput(
                "base vector field depends on fiber coordinates".into(),
            ));
        }
        let mut out = VectorField::zero(&self.chart);
        for (xj, lift) in x.iter().zip(&self.lifts) {
            out = out.add(&lift.scale(xj))?;
        }
        Ok(out)
    }

    fn total_point(&self, s: &[f64], uv: &[f64]) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.base_dim + 2);
        p.extend_from_slice(s);
        p.extend_from_slice(&uv[..2]);
        self.chart.reduce(&p)
    }
}

/// Largest fiber component of `[X~_i, X~_j]` over the samples.
pub fn flatness_check(bundle: &FlatDiskBundle, points: &[Vec<f64>]) -> Result<f64> {
    let b = bundle.base_dim;
    let mut brackets = Vec::new();
    for i in 0..b {
        for j in i + 1..b {
            let br = lie_bracket(&bundle.lifts[i], &bundle.lifts[j])?;
            brackets.push([br.comps[b].clone(), br.comps[b + 1].clone()]);
        }
    }
    if brackets.is_empty() {
        return Ok(0.0);
    }
    for p in points {
        bundle.chart.check_point(p)?;
    }
    let worst = par::map(points, |p| {
        let q = bundle.chart.reduce(p);
        brackets
            .iter()
            .flatten()
            .fold(0.0_f64, |m, e| m.max(e.eval(&q).abs()))
    });
    Ok(worst.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TransportResult {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub path: Vec<Vec<f64>>,
    pub steps: usize,
    pub max_error: f64,
    /// The lift left the fiber disk; `end` is the first point found outside.
    pub escaped: bool,
    /// `d(end)/d(start)`, from the variational equations.
    #[serde(skip)]
    pub jacobian: Option<Matrix2<f64>>,
}

/// Transports `x0` along the polyline `path` in base coordinates.
pub fn parallel_transport(
    bundle: &FlatDiskBundle,
    path: &[Vec<f64>],
    x0: [f64; 2],
    opts: OdeOptions,
) -> Result<TransportResult> {
    transport_impl(bundle, path, x0, opts, false)
}

/// [`parallel_transport`] that also integrates the derivative of the flow.
pub fn parallel_transport_with_jacobian(
    bundle: &FlatDiskBundle,
    path: &[Vec<f64>],
    x0: [f64; 2],
    opts: OdeOptions,
) -> Result<TransportResult> {
    transport_impl(bundle, path, x0, opts, true)
}

fn transport_impl(
    bundle: &FlatDiskBundle,
    path: &[Vec<f64>],
    x0: [f64; 2],
    opts: OdeOptions,
    with_jacobian: bool,
) -> Result<TransportResult> {
    if path.len() < 2 {
        return Err(Error::InvalidInput(
            "a path needs at least two vertices".into(),
        ));
    }
    if let Some(v) = path.iter().find(|v| v.len() != bundle.base_dim) {
        return Err(Error::Dimension(format!(
            "path vertex has {} coordinates, base has {}",
            v.len(),
            bundle.base_dim
        )));
    }
    let r2 = bundle.radius * bundle.radius;
    if x0[0] * x0[0] + x0[1] * x0[1] > r2 {
        return Err(Error::InvalidInput(format!(
            "start point {x0:?} is outside the fiber disk"
        )));
    }
    let mut state = vec![x0[0], x0[1]];
    if with_jacobian {
        state.extend([1.0, 0.0, 0.0, 1.0]);
    }
    let mut steps = 0;
    let mut max_error: f64 = 0.0;
    let mut escaped = false;
    for seg in path.windows(2) {
        let (p, q) = (&seg[0], &seg[1]);
        let d: Vec<f64> = p.iter().zip(q).map(|(a, b)| b - a).collect();
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let s: Vec<f64> = p.iter().zip(&d).map(|(a, di)| a + t * di).collect();
            let pt = bundle.total_point(&s, y);
            let (mut du, mut dv) = (0.0, 0.0);
            let mut m = [[0.0; 2]; 2];
            for (j, dj) in d.iter().enumerate() {
                if *dj == 0.0 {
                    continue;
                }
                du += dj * bundle.coeffs[j][0].eval(&pt);
                dv += dj * bundle.coeffs[j][1].eval(&pt);
                if with_jacobian {
                    for (r, row) in bundle.partials[j].iter().enumerate() {
                        for (c, e) in row.iter().enumerate() {
                            m[r][c] += dj * e.eval(&pt);
                        }
                    }
                }
            }
            dy[0] = du;
            dy[1] = dv;
            if with_jacobian {
                // J' = M J, J stored row-major in y[2..6].
                for r in 0..2 {
                    for c in 0..2 {
                        dy[2 + 2 * r + c] = m[r][0] * y[2 + c] + m[r][1] * y[4 + c];
                    }
                }
            }
        };
        let out = ode::integrate(rhs, 0.0, 1.0, &state, opts, |y| {
            y[0] * y[0] + y[1] * y[1] > r2
        })?;
        steps += out.steps;
        max_error = max_error.max(out.max_error);
        state = out.y;
        if out.escaped {
            escaped = true;
            break;
        }
    }
    Ok(TransportResult {
        start: x0,
        end: [state[0], state[1]],
        path: path.to_vec(),
        steps,
        max_error,
        escaped,
        jacobian: with_jacobian.then(|| Matrix2::new(state[2], state[3], state[4], state[5])),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomySample {
    pub point: [f64; 2],
    /// `None` when the lift escaped the fiber.
    pub image: Option<[f64; 2]>,
    pub jacobian: Option<Matrix2<f64>>,
}

impl HolonomySample {
    pub fn jacobian_det(&self) -> Option<f64> {
        self.jacobian.map(|j| j.determinant())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyMap {
    pub path: Vec<Vec<f64>>,
    pub samples: Vec<HolonomySample>,
    pub origin_image: Option<[f64; 2]>,
}

impl HolonomyMap {
    pub fn origin_displacement(&self) -> f64 {
        self.origin_image
            .map_or(f64::INFINITY, |[u, v]| (u * u + v * v).sqrt())
    }

    /// Every non-escaped sample has a positive Jacobian determinant.
    pub fn orientation_preserving(&self) -> bool {
        self.samples
            .iter()
            .filter_map(HolonomySample::jacobian_det)
            .all(|d| d > 0.0)
    }

    pub fn escaped(&self) -> usize {
        self.samples.iter().filter(|s| s.image.is_none()).count()
    }

    /// Largest `|H(x) - x|` over the samples that stayed in the fiber.
    pub fn max_displacement_from(&self, expected: impl Fn([f64; 2]) -> [f64; 2]) -> f64 {
        self.samples
            .iter()
            .filter_map(|s| {
                s.image.map(|[u, v]| {
                    let [eu, ev] = expected(s.point);
                    ((u - eu).powi(2) + (v - ev).powi(2)).sqrt()
                })
            })
            .fold(0.0, f64::max)
    }
}

/// Samples the transport map around a closed polyline.
pub fn loop_holonomy(
    bundle: &FlatDiskBundle,
    path: &[Vec<f64>],
    samples: &[[f64; 2]],
    opts: OdeOptions,
) -> Result<HolonomyMap> {
    let results = par::map(samples, |x| {
        parallel_transport_with_jacobian(bundle, path, *x, opts)
    });
    let mut out = Vec::with_capacity(samples.len());
    for (x, r) in samples.iter().zip(results) {
        let r = r?;
        out.push(HolonomySample {
            point: *x,
            image: (!r.escaped).then_some(r.end),
            jacobian: if r.escaped { None } else { r.jacobian },
        });
    }
    let origin = parallel_transport(bundle, path, [0.0, 0.0], opts)?;
    Ok(HolonomyMap {
        path: path.to_vec(),
        samples: out,
        origin_image: (!origin.escaped).then_some(origin.end),
    })
}

/// Holonomy around the `generator`-th base circle, starting at `base_point`.
pub fn holonomy(
    bundle: &FlatDiskBundle,
    generator: usize,
    base_point: &[f64],
    samples: &[[f64; 2]],
    opts: OdeOptions,
) -> Result<HolonomyMap> {
    if generator >= bundle.base_dim {
        return Err(Error::InvalidInput(format!(
            "generator {generator} out of range for a {}-dimensional base",
            bundle.base_dim
        )));
    }
    let mut end = base_point.to_vec();
    end[generator] += bundle.period(generator);
    loop_holonomy(bundle, &[base_point.to_vec(), end], samples, opts)
}

/// `nabla_X beta = L_{X~} beta`, with `x` the base field's coefficients.
pub fn covariant_derivative(
    bundle: &FlatDiskBundle,
    x: &[Expr],
    beta: &DiffForm,
) -> Result<DiffForm> {
    beta.lie_derivative(&bundle.horizontal_lift(x)?)
}

/// Parses a base vector field given as one expression per base coordinate.
pub fn base_field(bundle: &FlatDiskBundle, comps: &[&str]) -> Result<Vec<Expr>> {
    comps
        .iter()
        .map(|s| bundle.chart.parse_expr(s).map(|f: ExprField| f.expr))
        .collect()
}

/// Points of a square lattice clipped to the disk of radius `r`.
pub fn disk_samples(r: f64, divisions: usize) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    for i in 0..=divisions {
        for j in 0..=divisions {
            let u = -r + 2.0 * r * i as f64 / divisions.max(1) as f64;
            let v = -r + 2.0 * r * j as f64 / divisions.max(1) as f64;
            if u * u + v * v <= r * r * (1.0 + 1e-12) {
                out.push([u, v]);
            }
        }
    }
    out
}
