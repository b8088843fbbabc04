//! Validation of candidate CCL 1-forms on a flat disk bundle: invariance under
//! the holonomy, vanishing exactly at the origin, and positivity of `d beta`.

use nalgebra::Vector2;

use super::{disk_samples, holonomy, FlatDiskBundle, OdeOptions};
use crate::error::{Error, Result};
use crate::fields::Expr;
use crate::forms::DiffForm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Invariance,
    Vanishing,
    Positivity,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Invariance => "invariance",
            Condition::Vanishing => "vanishing",
            Condition::Positivity => "positivity",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CclOptions {
    /// Samples lie in the disk of radius `sample_fraction * R`.
    pub sample_fraction: f64,
    pub divisions: usize,
    pub holonomy_divisions: usize,
    pub invariance_tol: f64,
    pub zero_tol: f64,
    pub ode: OdeOptions,
}

impl Default for CclOptions {
    fn default() -> Self {
        Self {
            sample_fraction: 0.9,
            divisions: 36,
            holonomy_divisions: 8,
            invariance_tol: 1e-6,
            zero_tol: 1e-9,
            ode: OdeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CclReport {
    /// `max |H_g^* beta - beta|` per generator.
    pub invariance: Vec<f64>,
    pub escaped_samples: usize,
    pub beta_at_origin: f64,
    /// Smallest `|beta|` over the nonzero lattice samples.
    pub min_away: f64,
    /// A zero of `beta` away from the origin, if one was located.
    pub spurious_zero: Option<[f64; 2]>,
    /// Smallest oriented value of `d beta(d/du, d/dv)`.
    pub min_dbeta: f64,
    pub failed: Vec<Condition>,
}

impl CclReport {
    pub fn passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::NotCcl(
                self.failed.iter().map(|c| c.name().to_string()).collect(),
            ))
        }
    }
}

struct FiberForm {
    p: Expr,
    q: Expr,
    dp: [Expr; 2],
    dq: [Expr; 2],
    base_dim: usize,
}

impl FiberForm {
    fn new(bundle: &FlatDiskBundle, beta: &DiffForm) -> Result<Self> {
        crate::fields::same_chart(beta.chart(), bundle.chart())?;
        if beta.degree() != 1 {
            return Err(Error::InvalidInput("a CCL form has degree 1".into()));
        }
        let b = bundle.base_dim();
        let coeffs: Vec<Expr> = (0..b + 2)
            .map(|i| beta.coeff_of(&[i]))
            .collect::<Result<_>>()?;
        if coeffs[..b].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidInput(
                "a CCL form has no base components".into(),
            ));
        }
        if coeffs.iter().any(|c| (0..b).any(|j| c.depends_on(j))) {
            return Err(Error::InvalidInput(
                "CCL coefficients must depend on the fiber only".into(),
            ));
        }
        let (p, q) = (coeffs[b].clone(), coeffs[b + 1].clone());
        Ok(Self {
            dp: [p.diff(b), p.diff(b + 1)],
            dq: [q.diff(b), q.diff(b + 1)],
            p,
            q,
            base_dim: b,
        })
    }

    fn point(&self, uv: [f64; 2]) -> Vec<f64> {
        let mut x = vec![0.0; self.base_dim];
        x.extend(uv);
        x
    }

    fn at(&self, uv: [f64; 2]) -> Vector2<f64> {
        let x = self.point(uv);
        Vector2::new(self.p.eval(&x), self.q.eval(&x))
    }

    /// `d beta(d/du, d/dv) = dQ/du - dP/dv`.
    fn curl(&self, uv: [f64; 2]) -> f64 {
        let x = self.point(uv);
        self.dq[0].eval(&x) - self.dp[1].eval(&x)
    }

    fn newton(&self, mut uv: [f64; 2]) -> Option<[f64; 2]> {
        for _ in 0..30 {
            let f = self.at(uv);
            if f.amax() < 1e-13 {
                return Some(uv);
            }
            let x = self.point(uv);
            let j = nalgebra::Matrix2::new(
                self.dp[0].eval(&x),
                self.dp[1].eval(&x),
                self.dq[0].eval(&x),
                self.dq[1].eval(&x),
            );
            let step = j.try_inverse()? * f;
            uv = [uv[0] - step[0], uv[1] - step[1]];
        }
        (self.at(uv).amax() < 1e-10).then_some(uv)
    }
}

pub fn ccl_check(bundle: &FlatDiskBundle, beta: &DiffForm, opts: CclOptions) -> Result<CclReport> {
    let form = FiberForm::new(bundle, beta)?;
    let r = opts.sample_fraction * bundle.radius();
    let samples = disk_samples(r, opts.divisions);
    let mut failed = Vec::new();

    let hol_samples = disk_samples(r, opts.holonomy_divisions);
    let mut invariance = Vec::with_capacity(bundle.base_dim());
    let mut escaped_samples = 0;
    for g in 0..bundle.base_dim() {
        let h = holonomy(
            bundle,
            g,
            &vec![0.0; bundle.base_dim()],
            &hol_samples,
            opts.ode,
        )?;
        escaped_samples += h.escaped();
        let worst = h
            .samples
            .iter()
            .filter_map(|s| Some((s.point, s.image?, s.jacobian?)))
            .map(|(x, hx, j)| (j.transpose() * form.at(hx) - form.at(x)).amax())
            .fold(0.0, f64::max);
        invariance.push(worst);
    }
    if invariance.iter().any(|&r| !(r <= opts.invariance_tol)) {
        failed.push(Condition::Invariance);
    }

    let beta_at_origin = form.at([0.0, 0.0]).amax();
    let min_away = samples
        .iter()
        .filter(|x| x[0].hypot(x[1]) > 1e-9 * r)
        .map(|&x| form.at(x).amax())
        .fold(f64::INFINITY, f64::min);
    let spurious_zero = locate_spurious_zero(&form, r, opts.divisions);
    if !(beta_at_origin <= opts.zero_tol) || !(min_away > opts.zero_tol) || spurious_zero.is_some()
    {
        failed.push(Condition::Vanishing);
    }

    let min_dbeta = samples
        .iter()
        .map(|&x| bundle.orientation() * form.curl(x))
        .fold(f64::INFINITY, f64::min);
    if !(min_dbeta > 0.0) {
        failed.push(Condition::Positivity);
    }

    Ok(CclReport {
        invariance,
        escaped_samples,
        beta_at_origin,
        min_away,
        spurious_zero,
        min_dbeta,
        failed,
    })
}

/// Newton from the centre of every lattice cell where both components of
/// `beta` change sign, keeping roots inside the disk and away from 0.
fn locate_spurious_zero(form: &FiberForm, r: f64, divisions: usize) -> Option<[f64; 2]> {
    let h = 2.0 * r / divisions.max(1) as f64;
    let coord = |i: usize| -r + h * i as f64;
    let changes = |vals: [f64; 4]| {
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lo <= 0.0 && hi >= 0.0
    };
    for i in 0..divisions {
        for j in 0..divisions {
            let corners = [
                [coord(i), coord(j)],
                [coord(i + 1), coord(j)],
                [coord(i), coord(j + 1)],
                [coord(i + 1), coord(j + 1)],
            ];
            let vals: Vec<Vector2<f64>> = corners.iter().map(|&c| form.at(c)).collect();
            if !changes([vals[0][0], vals[1][0], vals[2][0], vals[3][0]])
                || !changes([vals[0][1], vals[1][1], vals[2][1], vals[3][1]])
            {
                continue;
            }
            let centre = [coord(i) + h / 2.0, coord(j) + h / 2.0];
            if let Some(z) = form.newton(centre) {
                let norm = (z[0] * z[0] + z[1] * z[1]).sqrt();
                if norm <= r && norm > 1e-6 {
                    return Some(z);
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::parse_form;

    fn check(bundle: &FlatDiskBundle, src: &str) -> CclReport {
        let beta = parse_form(bundle.chart(), src).unwrap();
        ccl_check(bundle, &beta, CclOptions::default()).unwrap()
    }

    #[test]
    fn rotation_form_is_ccl() {
        let t = FlatDiskBundle::trivial(1, 1.0);
        assert!(check(&t, "u*dv - v*du").passed());
        let rot = FlatDiskBundle::rotation(std::f64::consts::FRAC_PI_2, 1.0);
        let rep = check(&rot, "u*dv - v*du");
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.invariance[0] <= 1e-6);
    }

    #[test]
    fn negative_suite_fails_the_designed_conditions() {
        let t = FlatDiskBundle::trivial(1, 1.0);
        assert_eq!(
            check(&t, "du").failed,
            vec![Condition::Vanishing, Condition::Positivity]
        );
        assert_eq!(check(&t, "u*dv + v*du").failed, vec![Condition::Positivity]);
        let shifted = check(&t, "(u + 0.3)*dv - v*du");
        assert_eq!(shifted.failed, vec![Condition::Vanishing]);
        let z = shifted.spurious_zero.unwrap();
        assert!((z[0] + 0.3).abs() < 1e-9 && z[1].abs() < 1e-9);
        let rot = FlatDiskBundle::rotation(std::f64::consts::FRAC_PI_2, 0.9);
        assert_eq!(
            check(&rot, "(u + u^2)*dv - v*du").failed,
            vec![Condition::Invariance]
        );
    }

    #[test]
    fn orientation_flips_positivity() {
        let mut t = FlatDiskBundle::trivial(1, 1.0);
        t.orientation = -1.0;
        assert_eq!(check(&t, "u*dv - v*du").failed, vec![Condition::Positivity]);
        assert!(check(&t, "v*du - u*dv").passed());
    }

    #[test]
    fn rejects_non_fiber_forms() {
        let t = FlatDiskBundle::trivial(1, 1.0);
        for src in ["ds1", "s1*du", "du^dv"] {
            let beta = parse_form(t.chart(), src).unwrap();
            assert!(
                ccl_check(&t, &beta, CclOptions::default()).is_err(),
                "{src}"
            );
        }
    }
}
