//! The two germ constructors.

use super::{factorial, FoliatedInput, GermForm, GermKind};
use crate::bundle::{
    ccl_check, covariant_derivative, disk_samples, flatness_check, CclOptions, FlatDiskBundle,
};
use crate::error::{Error, Result};
use crate::fields::{Chart, Expr, SmoothMap};
use crate::forms::DiffForm;

const FLAT_TOL: f64 = 1e-8;
const CONSTANCY_TOL: f64 = 1e-10;

/// `alpha = (f + sum R_i y_i) dt - sum y_i dx_i` on `(t, x1..xn, y1..yn)`,
/// where `beta = f dt` and `L ~ d/dt + sum R_i d/dx_i`.
pub fn build_nonsingular_germ(input: &FoliatedInput) -> Result<GermForm> {
    input.validate()?;
    let n = input.n();
    let beta = input.beta();
    for i in 1..=n {
        if !beta.coeff_of(&[i])?.is_zero() {
            return Err(Error::InvalidInput(format!(
                "chart is not foliated: beta has a d{} component",
                input.chart().name(i)
            )));
        }
    }
    let f = beta.coeff_of(&[0])?;
    let l = &input.line_field().comps;
    let r: Vec<Expr> = (1..=n).map(|i| l[i].div(&l[0])).collect();

    let mut names = input.chart().names().to_vec();
    names.extend((1..=n).map(|i| format!("y{i}")));
    let mut periods = input.chart().periods().to_vec();
    periods.extend(std::iter::repeat_n(None, n));
    let chart = Chart::with_periods(names, periods)?;
    let y = |i: usize| Expr::var(n + i);

    let mut comps = vec![Expr::zero(); 2 * n + 1];
    comps[0] = (1..=n).fold(f.clone(), |acc, i| acc.add(&r[i - 1].mul(&y(i))));
    for (i, c) in comps.iter_mut().enumerate().take(n + 1).skip(1) {
        *c = y(i).neg();
    }
    let alpha = DiffForm::one_form(&chart, comps)?;

    let mut section: Vec<Expr> = (0..=n).map(Expr::var).collect();
    section.extend(std::iter::repeat_n(Expr::zero(), n));
    let zero_section = SmoothMap::new(input.chart().clone(), chart, section)?;
    let mut frame: Vec<usize> = (1..=n).flat_map(|i| [i, n + i]).collect();
    frame.push(0);
    Ok(GermForm {
        kind: GermKind::Nonsingular,
        alpha,
        frame,
        zero_section,
        expected_volume: Some(Expr::constant(factorial(n)).mul(&f)),
    })
}

/// `beta` composed with the vertical projection of the flat connection:
/// `beta - sum_j beta(a_j, b_j) ds_j`. Equals the parallel-transported
/// extension when `beta` is covariant constant.
pub fn invariant_extension(bundle: &FlatDiskBundle, beta: &DiffForm) -> Result<DiffForm> {
    crate::fields::same_chart(beta.chart(), bundle.chart())?;
    let b = bundle.base_dim();
    let p = beta.coeff_of(&[b])?;
    let q = beta.coeff_of(&[b + 1])?;
    let mut comps: Vec<Expr> = (0..b + 2)
        .map(|i| beta.coeff_of(&[i]))
        .collect::<Result<_>>()?;
    for (j, [a, bb]) in bundle.lift_coeffs().iter().enumerate() {
        comps[j] = comps[j].sub(&p.mul(a).add(&q.mul(bb)));
    }
    DiffForm::one_form(bundle.chart(), comps)
}

/// `alpha = dz + beta^ - sum y_i ds_i` on `(s.., u, v, y.., z)`.
pub fn build_singular_germ(
    bundle: &FlatDiskBundle,
    beta: &DiffForm,
    opts: CclOptions,
) -> Result<GermForm> {
    ccl_check(bundle, beta, opts)?.into_result()?;
    let b = bundle.base_dim();
    let r = opts.sample_fraction * bundle.radius();
    let samples: Vec<Vec<f64>> = base_samples(bundle, 4)
        .into_iter()
        .flat_map(|s| {
            disk_samples(r, 8).into_iter().map(move |uv| {
                let mut p = s.clone();
                p.extend(uv);
                p
            })
        })
        .collect();
    let flat = flatness_check(bundle, &samples)?;
    if !(flat <= FLAT_TOL) {
        return Err(Error::InvalidInput(format!(
            "bundle is not flat: bracket residual {flat:e}"
        )));
    }
    for j in 0..b {
        let mut e = vec![Expr::zero(); b];
        e[j] = Expr::one();
        let nabla = covariant_derivative(bundle, &e, beta)?;
        let worst = samples
            .iter()
            .map(|p| nabla.at(p).max_abs())
            .fold(0.0, f64::max);
        if !(worst <= CONSTANCY_TOL) {
            return Err(Error::Unsupported(format!(
                "beta is not covariant constant along {} (residual {worst:e}); only closed-form invariant extensions are built",
                bundle.chart().name(j)
            )));
        }
    }
    let sigma = invariant_extension(bundle, beta)?;

    let base = bundle.chart();
    let mut names = base.names().to_vec();
    names.extend((1..=b).map(|i| format!("y{i}")));
    names.push("z".into());
    let mut periods = base.periods().to_vec();
    periods.extend(std::iter::repeat_n(None, b + 1));
    let chart = Chart::with_periods(names, periods)?;
    let dim = 2 * b + 3;
    let mut comps = vec![Expr::zero(); dim];
    for (idx, c) in sigma.terms() {
        comps[idx.indices()[0]] = c.clone();
    }
    for (i, c) in comps.iter_mut().take(b).enumerate() {
        *c = c.sub(&Expr::var(b + 2 + i));
    }
    comps[dim - 1] = Expr::one();
    let alpha = DiffForm::one_form(&chart, comps)?;

    let mut section: Vec<Expr> = (0..b + 2).map(Expr::var).collect();
    section.extend(std::iter::repeat_n(Expr::zero(), b + 1));
    let zero_section = SmoothMap::new(base.clone(), chart, section)?;
    let mut frame: Vec<usize> = (0..b).flat_map(|i| [i, b + 2 + i]).collect();
    frame.extend([b, b + 1, dim - 1]);
    let curl = sigma
        .coeff_of(&[b + 1])?
        .diff(b)
        .sub(&sigma.coeff_of(&[b])?.diff(b + 1));
    Ok(GermForm {
        kind: GermKind::Singular,
        alpha,
        frame,
        zero_section,
        expected_volume: Some(Expr::constant(factorial(b + 1)).mul(&curl)),
    })
}

/// Lattice points of the base box with `divisions` per period.
fn base_samples(bundle: &FlatDiskBundle, divisions: usize) -> Vec<Vec<f64>> {
    let b = bundle.base_dim();
    let mut out = vec![Vec::new()];
    for j in 0..b {
        let period = bundle.period(j);
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..divisions).map(move |i| {
                    let mut q = p.clone();
                    q.push(period * i as f64 / divisions as f64);
                    q
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{contactness_scan, volume_identity_residual};
    use super::*;
    use crate::forms::parse_form;
    use crate::grid::Grid;

    fn foliated(f: &str, line: &[&str]) -> FoliatedInput {
        let names: Vec<String> = std::iter::once("t".to_string())
            .chain((1..line.len()).map(|i| format!("x{i}")))
            .collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        FoliatedInput::from_strs(
            &refs,
            &format!("({f})*dt"),
            line,
            Grid::cube(line.len(), 1.0, 4),
        )
        .unwrap()
    }

    #[test]
    fn constant_case_is_standard() {
        let g = build_nonsingular_germ(&foliated("1", &["1", "0", "0"])).unwrap();
        assert_eq!(g.describe(), "dt - y1*dx1 - y2*dx2");
        let grid = g.neighborhood(&Grid::cube(3, 1.0, 2), 0.5, 2).unwrap();
        let rep = contactness_scan(&g, &grid).unwrap();
        assert_eq!((rep.min_abs, rep.max_abs, rep.sign), (2.0, 2.0, 1));
    }

    #[test]
    fn volume_is_n_factorial_f() {
        let g = build_nonsingular_germ(&foliated("1 + t^2", &["1", "x1", "0"])).unwrap();
        let grid = g.neighborhood(&Grid::cube(3, 1.0, 4), 0.5, 2).unwrap();
        let pts = grid.points().unwrap();
        assert!(volume_identity_residual(&g, &pts).unwrap() < 1e-12);
        let top = g.top_form().unwrap();
        let v = super::super::frame_value(&top, &g.frame, &[0.5, 0.1, -0.2, 0.3, 0.4]);
        assert!((v - 2.0 * 1.25).abs() < 1e-12);
        let rep = contactness_scan(&g, &grid).unwrap();
        assert_eq!((rep.min_abs, rep.sign), (2.0, 1));
    }

    #[test]
    fn trivial_bundle_germ() {
        let bundle = FlatDiskBundle::trivial(1, 1.0);
        let beta = parse_form(bundle.chart(), "u*dv - v*du").unwrap();
        let g = build_singular_germ(&bundle, &beta, CclOptions::default()).unwrap();
        assert_eq!(g.describe(), "-y1*ds1 - v*du + u*dv + dz");
        let base =
            Grid::lattice(vec![0.0, -0.5, -0.5], vec![1.0, 0.5, 0.5], vec![4, 4, 4]).unwrap();
        let rep = contactness_scan(&g, &g.neighborhood(&base, 0.5, 2).unwrap()).unwrap();
        assert_eq!((rep.min_abs, rep.max_abs, rep.sign), (4.0, 4.0, 1));
    }

    #[test]
    fn rotation_bundle_germ() {
        let bundle = FlatDiskBundle::rotation(std::f64::consts::FRAC_PI_2, 1.0);
        let beta = parse_form(bundle.chart(), "u*dv - v*du").unwrap();
        let g = build_singular_germ(&bundle, &beta, CclOptions::default()).unwrap();
        let base =
            Grid::lattice(vec![0.0, -0.5, -0.5], vec![1.0, 0.5, 0.5], vec![4, 4, 4]).unwrap();
        let grid = g.neighborhood(&base, 0.5, 2).unwrap();
        assert!(contactness_scan(&g, &grid).unwrap().passed);
        assert!(volume_identity_residual(&g, &grid.points().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn non_ccl_form_is_refused() {
        let bundle = FlatDiskBundle::trivial(1, 1.0);
        let du = parse_form(bundle.chart(), "du").unwrap();
        assert!(matches!(
            build_singular_germ(&bundle, &du, CclOptions::default()),
            Err(Error::NotCcl(_))
        ));
    }

    #[test]
    fn unfoliated_chart_is_refused() {
        let input = FoliatedInput::from_strs(
            &["t", "x1"],
            "dt + 0.1*dx1",
            &["1", "0"],
            Grid::cube(2, 1.0, 2),
        )
        .unwrap();
        assert!(matches!(
            build_nonsingular_germ(&input),
            Err(Error::InvalidInput(_))
        ));
    }
}
