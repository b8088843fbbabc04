//! Zero-section and interpolation checks on constructed germs.

use nalgebra::{DMatrix, DVector};

use super::{frame_value, summarize, ContactnessReport, GermForm, CONTACT_THRESHOLD};
use crate::coiso::{cluster, pca_dimension};
use crate::error::{Error, Result};
use crate::fields::Expr;
use crate::forms::DiffForm;
use crate::grid::Grid;
use crate::linalg;
use crate::par;
use crate::symplin::LinSubspace;

const RESTRICTION_TOL: f64 = 1e-10;
const SINGULAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ZeroSectionReport {
    pub samples: usize,
    /// Largest coefficient of `alpha|_0 - expected`.
    pub restriction_residual: f64,
    pub worst_point: Option<Vec<f64>>,
    /// Nonsingular samples where the two kernels differ.
    pub kernel_mismatches: usize,
    pub singular_hits: usize,
    pub expected_singular_hits: usize,
    /// Samples singular for exactly one of the two forms.
    pub singular_mismatches: usize,
    /// Estimated dimension of each cluster of singular samples.
    pub singular_dims: Vec<usize>,
    pub passed: bool,
}

struct Singularity {
    coeffs: Vec<Expr>,
    grads: Vec<Vec<Expr>>,
}

impl Singularity {
    fn new(w: &DiffForm) -> Result<Self> {
        let dim = w.chart().dim();
        let coeffs: Vec<Expr> = (0..dim).map(|i| w.coeff_of(&[i])).collect::<Result<_>>()?;
        let grads = coeffs
            .iter()
            .map(|c| (0..dim).map(|j| c.diff(j)).collect())
            .collect();
        Ok(Self { coeffs, grads })
    }

    /// `max |w_i| <= tol (1 + |grad w|_F)`, the rule the singular scan uses.
    fn is_singular(&self, p: &[f64]) -> bool {
        let norm = self
            .coeffs
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.eval(p).abs()));
        let grad: f64 = self
            .grads
            .iter()
            .flatten()
            .map(|g| g.eval(p).powi(2))
            .sum::<f64>()
            .sqrt();
        norm <= SINGULAR_TOL * (1.0 + grad)
    }
}

fn kernel(w: &[f64]) -> LinSubspace {
    let row = DMatrix::from_row_slice(1, w.len(), w);
    LinSubspace::span_of(&linalg::null_space(&row, 1e-9))
}

/// Compares `alpha` restricted to the zero section with `expected` on a
/// grid of zero-section points.
pub fn zero_section_foliation_check(
    g: &GermForm,
    expected: &DiffForm,
    grid: &Grid,
) -> Result<ZeroSectionReport> {
    let restricted = g.restricted()?;
    crate::fields::same_chart(restricted.chart(), expected.chart())?;
    if expected.degree() != 1 {
        return Err(Error::InvalidInput(
            "expected zero-section form must be a 1-form".into(),
        ));
    }
    let diff = restricted.sub(expected)?;
    let got_sing = Singularity::new(&restricted)?;
    let want_sing = Singularity::new(expected)?;
    let points = grid.points()?;
    let per_point = par::map(&points, |p| {
        let residual = diff.at(p).max_abs();
        let (a, b) = (got_sing.is_singular(p), want_sing.is_singular(p));
        let kernel_ok = a
            || b
            || kernel(&restricted.at(p).as_covector())
                .same_as(&kernel(&expected.at(p).as_covector()));
        (residual, a, b, kernel_ok)
    });
    let mut worst = (0.0, None);
    let mut hits = Vec::new();
    let (mut kernel_mismatches, mut expected_hits, mut singular_mismatches) = (0, 0, 0);
    for (p, (residual, a, b, kernel_ok)) in points.iter().zip(per_point) {
        if residual > worst.0 || residual.is_nan() {
            worst = (residual, Some(p.clone()));
        }
        kernel_mismatches += usize::from(!kernel_ok);
        expected_hits += usize::from(b);
        singular_mismatches += usize::from(a != b);
        if a {
            hits.push(p.clone());
        }
    }
    let step = grid.step();
    let singular_dims = cluster(&hits, 3.0 * step)
        .into_iter()
        .map(|members| pca_dimension(&hits, &members, 2.0 * step).1)
        .collect();
    let restriction_residual = worst.0;
    Ok(ZeroSectionReport {
        samples: points.len(),
        restriction_residual,
        worst_point: worst.1,
        kernel_mismatches,
        singular_hits: hits.len(),
        expected_singular_hits: expected_hits,
        singular_mismatches,
        singular_dims,
        passed: restriction_residual <= RESTRICTION_TOL
            && kernel_mismatches == 0
            && singular_mismatches == 0,
    })
}

#[derive(Debug, Clone)]
pub struct InterpolationOptions {
    pub t_samples: Vec<f64>,
    pub threshold: f64,
}

impl Default for InterpolationOptions {
    fn default() -> Self {
        Self {
            t_samples: (0..=10).map(|i| i as f64 / 10.0).collect(),
            threshold: CONTACT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct InterpolationReport {
    pub t_samples: Vec<f64>,
    /// One contactness summary per `t`, over the zero-section grid.
    pub per_t: Vec<ContactnessReport>,
    pub matched_pairs: usize,
    pub singular_pairs: usize,
    pub passed: bool,
}

/// Checks `(1 - t) alpha0 + t alpha1` along the zero section after gating on
/// a shared, equally co-oriented zero-section foliation.
pub fn interpolation_contactness(
    g0: &GermForm,
    g1: &GermForm,
    grid: &Grid,
    opts: &InterpolationOptions,
) -> Result<InterpolationReport> {
    crate::fields::same_chart(g0.chart(), g1.chart())?;
    if g0.frame != g1.frame || g0.zero_section.comps != g1.zero_section.comps {
        return Err(Error::InvalidInput(
            "germs differ in frame or zero section".into(),
        ));
    }
    let r0 = g0.restricted()?;
    let r1 = g1.restricted()?;
    let (s0, s1) = (Singularity::new(&r0)?, Singularity::new(&r1)?);
    let (dr0, dr1) = (r0.exterior_d()?, r1.exterior_d()?);
    let points = grid.points()?;
    let (mut matched_pairs, mut singular_pairs) = (0, 0);
    for p in &points {
        match (s0.is_singular(p), s1.is_singular(p)) {
            (false, false) => {
                let a = DVector::from_vec(r0.at(p).as_covector());
                let b = DVector::from_vec(r1.at(p).as_covector());
                let cross = (&a * b.transpose() - &b * a.transpose()).amax();
                if cross > 1e-9 * a.norm() * b.norm() {
                    return Err(Error::InvalidInput(format!(
                        "zero-section foliations differ at {p:?}"
                    )));
                }
                if a.dot(&b) <= 0.0 {
                    return Err(Error::CoOrientationMismatch(format!(
                        "restricted forms point in opposite directions at {p:?}"
                    )));
                }
                matched_pairs += 1;
            }
            (true, true) => {
                let (a, b) = (dr0.at(p), dr1.at(p));
                let dot: f64 = a.coeffs().iter().map(|(i, c)| c * b.coeff(*i)).sum();
                if dot <= 0.0 {
                    return Err(Error::CoOrientationMismatch(format!(
                        "singular locus co-orientations disagree at {p:?}"
                    )));
                }
                singular_pairs += 1;
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "zero-section singular sets differ at {p:?}"
                )))
            }
        }
    }

    let total: Vec<Vec<f64>> = points.iter().map(|p| g0.zero_section.eval(p)).collect();
    let mut per_t = Vec::with_capacity(opts.t_samples.len());
    for &t in &opts.t_samples {
        let alpha = g0.alpha.scale_by(1.0 - t).add(&g1.alpha.scale_by(t))?;
        let top = super::top_form(&alpha)?;
        let values = par::map(&total, |p| frame_value(&top, &g0.frame, p));
        per_t.push(summarize(&values, opts.threshold));
    }
    let sign = per_t.first().map_or(0, |r| r.sign);
    let passed = per_t.iter().all(|r| r.passed && r.sign == sign);
    Ok(InterpolationReport {
        t_samples: opts.t_samples.clone(),
        per_t,
        matched_pairs,
        singular_pairs,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::{CclOptions, FlatDiskBundle};
    use crate::forms::parse_form;
    use crate::germ::{
        build_nonsingular_germ, build_singular_germ, invariant_extension, FoliatedInput,
    };

    fn nonsingular(f: &str) -> (GermForm, FoliatedInput) {
        let input = FoliatedInput::from_strs(
            &["t", "x1", "x2"],
            &format!("({f})*dt"),
            &["1", "x2", "0"],
            Grid::cube(3, 1.0, 4),
        )
        .unwrap();
        (build_nonsingular_germ(&input).unwrap(), input)
    }

    fn singular(beta: &str, orientation: i8) -> (GermForm, DiffForm, FlatDiskBundle) {
        let bundle =
            FlatDiskBundle::from_strs(&[("s1", 1.0)], ["u", "v"], 1.0, &[("0", "0")], orientation)
                .unwrap();
        let beta = parse_form(bundle.chart(), beta).unwrap();
        let g = build_singular_germ(&bundle, &beta, CclOptions::default()).unwrap();
        (g, beta, bundle)
    }

    fn base() -> Grid {
        Grid::lattice(vec![0.0, -0.5, -0.5], vec![1.0, 0.5, 0.5], vec![4, 4, 4]).unwrap()
    }

    #[test]
    fn nonsingular_zero_section_is_beta() {
        let (g, input) = nonsingular("1 + t^2");
        let rep = zero_section_foliation_check(&g, input.beta(), input.region()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.restriction_residual, 0.0);
        assert_eq!(rep.singular_hits, 0);
    }

    #[test]
    fn singular_zero_section_is_base() {
        let (g, beta, bundle) = singular("u*dv - v*du", 1);
        let expected = invariant_extension(&bundle, &beta).unwrap();
        let fine =
            Grid::lattice(vec![0.0, -0.5, -0.5], vec![1.0, 0.5, 0.5], vec![8, 8, 8]).unwrap();
        let rep = zero_section_foliation_check(&g, &expected, &fine).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.singular_hits, 9);
        assert_eq!(rep.singular_dims, vec![1]);
    }

    #[test]
    fn corrupted_alpha_is_located() {
        let (g, input) = nonsingular("1");
        let bad = g
            .alpha
            .add(&parse_form(g.chart(), "0.01*x1*dt").unwrap())
            .unwrap();
        let rep =
            zero_section_foliation_check(&g.with_alpha(bad).unwrap(), input.beta(), input.region())
                .unwrap();
        assert!(!rep.passed);
        assert!((rep.restriction_residual - 0.01).abs() < 1e-15);
        assert_eq!(rep.worst_point.unwrap()[1].abs(), 1.0);
    }

    #[test]
    fn interpolating_scaled_foliation() {
        let (g0, input) = nonsingular("1");
        let (g1, _) = nonsingular("2");
        let rep =
            interpolation_contactness(&g0, &g1, input.region(), &InterpolationOptions::default())
                .unwrap();
        assert!(rep.passed);
        assert_eq!(rep.per_t.len(), 11);
        assert_eq!(rep.per_t[5].min_abs, 2.0 * 1.5);
        let same =
            interpolation_contactness(&g0, &g0, input.region(), &InterpolationOptions::default())
                .unwrap();
        assert!(same.passed);
    }

    #[test]
    fn flipped_orientation_is_refused() {
        let (g0, _, _) = singular("u*dv - v*du", 1);
        let (g1, _, _) = singular("v*du - u*dv", -1);
        let err = interpolation_contactness(&g0, &g1, &base(), &InterpolationOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::CoOrientationMismatch(_)));
        let (g2, _, _) = singular("2*(u*dv - v*du)", 1);
        assert!(
            interpolation_contactness(&g0, &g2, &base(), &InterpolationOptions::default())
                .unwrap()
                .passed
        );
    }
}
