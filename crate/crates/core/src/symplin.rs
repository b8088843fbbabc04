//! Pointwise symplectic and contact linear algebra.
//!
//! Subspaces are handled through bases stored as matrix columns. Containment
//! and equality are rank tests on unit-normalized columns with relative
//! tolerance [`RANK_TOL`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forms::DiffForm;
use crate::linalg::{self, hstack, normalize_columns};

pub const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LinSubspace {
    ambient_dim: usize,
    basis: DMatrix<f64>,
}

impl LinSubspace {
    /// Span of linearly independent `vectors`; dependent input is rejected.
    pub fn new(ambient_dim: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(Error::Dimension(format!(
                "vector of length {} in a {ambient_dim}-dimensional space",
                v.len()
            )));
        }
        let basis = linalg::from_columns(ambient_dim, vectors);
        if linalg::rank(&normalize_columns(&basis), RANK_TOL) != vectors.len() {
            return Err(Error::InvalidInput(
                "basis vectors are linearly dependent".into(),
            ));
        }
        Ok(Self { ambient_dim, basis })
    }

    /// Orthonormal basis of the span of the columns of `m`, dependent or not.
    pub fn span_of(m: &DMatrix<f64>) -> Self {
        Self {
            ambient_dim: m.nrows(),
            basis: linalg::column_space(&normalize_columns(m), RANK_TOL),
        }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::zeros(ambient_dim, 0),
        }
    }

    pub fn whole(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// `span{e_i : i in indices}`.
    pub fn coordinate(ambient_dim: usize, indices: &[usize]) -> Self {
        let basis = DMatrix::from_fn(ambient_dim, indices.len(), |r, c| {
            if r == indices[c] {
                1.0
            } else {
                0.0
            }
        });
        Self { ambient_dim, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<DVector<f64>> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    pub fn contains_vector(&self, v: &DVector<f64>) -> bool {
        self.contains(&Self::span_of(&DMatrix::from_column_slice(
            v.len(),
            1,
            v.as_slice(),
        )))
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &LinSubspace) -> bool {
        assert_eq!(self.ambient_dim, other.ambient_dim);
        if other.dim() == 0 {
            return true;
        }
        let own = normalize_columns(&self.basis);
        let stacked = hstack(&own, &normalize_columns(&other.basis));
        linalg::rank(&stacked, RANK_TOL) == linalg::rank(&own, RANK_TOL)
    }

    pub fn same_as(&self, other: &LinSubspace) -> bool {
        self.dim() == other.dim() && self.contains(other) && other.contains(self)
    }

    pub fn intersection(&self, other: &LinSubspace) -> LinSubspace {
        let a = normalize_columns(&self.basis);
        let b = normalize_columns(&other.basis);
        let stacked = hstack(&a, &(-&b));
        let null = linalg::null_space(&stacked, RANK_TOL);
        let coeffs = null.rows(0, a.ncols()).into_owned();
        Self::span_of(&(a * coeffs))
    }
}

/// An antisymmetric bilinear form on `R^{2n}` given by its Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SympForm {
    matrix: DMatrix<f64>,
}

impl SympForm {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r % 2 != 0 || r == 0 {
            return Err(Error::Dimension(format!(
                "symplectic matrix must be 2n x 2n, got {r}x{c}"
            )));
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix + matrix.transpose()).amax() > 1e-9 * scale {
            return Err(Error::InvalidInput("matrix is not antisymmetric".into()));
        }
        if !nondegenerate(&matrix) {
            return Err(Error::NotContact);
        }
        Ok(Self { matrix })
    }

    /// `sum dx_i ^ dy_i` in the order `x1..xn, y1..yn`.
    pub fn standard(n: usize) -> Self {
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            m[(i, n + i)] = 1.0;
            m[(n + i, i)] = -1.0;
        }
        Self { matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn pair(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (u.transpose() * &self.matrix * v)[(0, 0)]
    }
}

fn nondegenerate(m: &DMatrix<f64>) -> bool {
    let (values, _) = linalg::svd_right(m);
    let top = values.first().copied().unwrap_or(0.0);
    let bottom = values.last().copied().unwrap_or(0.0);
    bottom > RANK_TOL * top.max(1.0)
}

/// `ker(alpha_p)` together with `d alpha_p` written in its basis.
///
/// The basis pivots on the largest component `alpha_m`: it is
/// `e_j - (alpha_j / alpha_m) e_m` for `j != m`, so the coordinates of a
/// vector of `xi` are just its non-pivot components.
#[derive(Debug, Clone)]
pub struct ContactHyperplane {
    pub xi: LinSubspace,
    pub omega: SympForm,
    pub pivot: usize,
}

impl ContactHyperplane {
    pub fn coords(&self, v: &DVector<f64>) -> DVector<f64> {
        let entries: Vec<f64> = (0..v.len())
            .filter(|&j| j != self.pivot)
            .map(|j| v[j])
            .collect();
        DVector::from_vec(entries)
    }

    pub fn coords_of(&self, w: &LinSubspace) -> LinSubspace {
        let cols: Vec<DVector<f64>> = w.vectors().iter().map(|v| self.coords(v)).collect();
        LinSubspace::span_of(&linalg::from_columns(self.omega.dim(), &cols))
    }

    pub fn ambient(&self, coords: &DVector<f64>) -> DVector<f64> {
        self.xi.basis() * coords
    }
}

pub fn contact_hyperplane(alpha: &DiffForm, point: &[f64]) -> Result<ContactHyperplane> {
    if alpha.degree() != 1 {
        return Err(Error::InvalidInput(format!(
            "contact form must have degree 1, got {}",
            alpha.degree()
        )));
    }
    let dim = alpha.chart().dim();
    if dim.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "contact chart must be odd-dimensional, got {dim}"
        )));
    }
    alpha.chart().check_point(point)?;
    let a = alpha.at(point).as_covector();
    let pivot = (0..dim).fold(0, |m, j| if a[j].abs() > a[m].abs() { j } else { m });
    if a[pivot] == 0.0 {
        return Err(Error::FormVanishes);
    }
    let cols: Vec<DVector<f64>> = (0..dim)
        .filter(|&j| j != pivot)
        .map(|j| {
            let mut v = DVector::zeros(dim);
            v[j] = 1.0;
            v[pivot] = -a[j] / a[pivot];
            v
        })
        .collect();
    let basis = linalg::from_columns(dim, &cols);
    let dalpha = alpha.exterior_d()?.at(point).bilinear_matrix();
    let omega = basis.transpose() * dalpha * &basis;
    if !nondegenerate(&omega) {
        return Err(Error::NotContact);
    }
    Ok(ContactHyperplane {
        xi: LinSubspace {
            ambient_dim: dim,
            basis,
        },
        omega: SympForm { matrix: omega },
        pivot,
    })
}

/// `{v : omega(v, w) = 0 for all w in W}`.
pub fn symp_complement(w: &LinSubspace, omega: &SympForm) -> LinSubspace {
    assert_eq!(w.ambient_dim, omega.dim());
    if w.dim() == 0 {
        return LinSubspace::whole(omega.dim());
    }
    let rows = normalize_columns(&w.basis).transpose() * &omega.matrix;
    LinSubspace {
        ambient_dim: omega.dim(),
        basis: linalg::null_space(&rows, RANK_TOL),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubspaceKind {
    Lagrangian,
    Coisotropic,
    Isotropic,
    Symplectic,
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub kind: SubspaceKind,
    pub isotropic: bool,
    pub coisotropic: bool,
    pub lagrangian: bool,
    pub symplectic: bool,
}

/// Reports every property that holds; `kind` picks the first of
/// Lagrangian, coisotropic, isotropic, symplectic.
pub fn classify_subspace(w: &LinSubspace, omega: &SympForm) -> Classification {
    let perp = symp_complement(w, omega);
    let isotropic = perp.contains(w);
    let coisotropic = w.contains(&perp);
    let lagrangian = isotropic && coisotropic;
    let symplectic = w.intersection(&perp).dim() == 0;
    let kind = if lagrangian {
        SubspaceKind::Lagrangian
    } else if coisotropic {
        SubspaceKind::Coisotropic
    } else if isotropic {
        SubspaceKind::Isotropic
    } else if symplectic {
        SubspaceKind::Symplectic
    } else {
        SubspaceKind::Generic
    };
    Classification {
        kind,
        isotropic,
        coisotropic,
        lagrangian,
        symplectic,
    }
}

/// The basis `f` of `complement` with `omega(e_i, f_j) = delta_ij`.
pub fn dual_completion(
    e: &[DVector<f64>],
    complement: &LinSubspace,
    omega: &SympForm,
) -> Result<Vec<DVector<f64>>> {
    let dim = omega.dim();
    let n = dim / 2;
    if e.len() != n {
        return Err(Error::Dimension(format!(
            "need {n} vectors, got {}",
            e.len()
        )));
    }
    let span_e = LinSubspace::new(dim, e)?;
    let cls = classify_subspace(&span_e, omega);
    if !cls.lagrangian {
        return Err(Error::InvalidInput(
            "e-basis does not span a Lagrangian subspace".into(),
        ));
    }
    if complement.dim() != n {
        return Err(Error::NotTransverse(format!(
            "complement has dimension {}, expected {n}",
            complement.dim()
        )));
    }
    if span_e.intersection(complement).dim() != 0 {
        return Err(Error::NotTransverse("complement meets span(e)".into()));
    }
    let em = linalg::from_columns(dim, e);
    let c = &complement.basis;
    let pairing = em.transpose() * &omega.matrix * c;
    if !nondegenerate_square(&pairing) {
        return Err(Error::DegeneratePairing);
    }
    let inv = pairing.try_inverse().ok_or(Error::DegeneratePairing)?;
    let f = c * inv;
    Ok(f.column_iter().map(|col| col.into_owned()).collect())
}

fn nondegenerate_square(m: &DMatrix<f64>) -> bool {
    let (values, _) = linalg::svd_right(m);
    let top = values.first().copied().unwrap_or(0.0);
    values.last().is_some_and(|&b| b > RANK_TOL * top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Chart;
    use crate::forms::{parse_form, standard_contact_form};

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn standard_hyperplane_at_origin() {
        let h = contact_hyperplane(&standard_contact_form(2), &[0.0; 5]).unwrap();
        assert_eq!(h.pivot, 4);
        assert!(h.xi.same_as(&LinSubspace::coordinate(5, &[0, 1, 2, 3])));
        assert_eq!(h.omega, SympForm::standard(2));
    }

    #[test]
    fn dz_is_not_contact() {
        let c = Chart::darboux(1);
        let dz = parse_form(&c, "dz").unwrap();
        assert!(matches!(
            contact_hyperplane(&dz, &[0.0; 3]),
            Err(Error::NotContact)
        ));
        let zero = parse_form(&c, "y1*dz").unwrap();
        assert!(matches!(
            contact_hyperplane(&zero, &[0.0; 3]),
            Err(Error::FormVanishes)
        ));
    }

    #[test]
    fn lagrangian_is_self_complementary() {
        let om = SympForm::standard(2);
        let w = LinSubspace::coordinate(4, &[0, 1]);
        assert!(symp_complement(&w, &om).same_as(&w));
        assert_eq!(classify_subspace(&w, &om).kind, SubspaceKind::Lagrangian);
        assert_eq!(symp_complement(&LinSubspace::whole(4), &om).dim(), 0);
    }

    #[test]
    fn classification_examples() {
        let om = SympForm::standard(2);
        let sym = LinSubspace::coordinate(4, &[0, 2]);
        assert_eq!(classify_subspace(&sym, &om).kind, SubspaceKind::Symplectic);
        let co = LinSubspace::coordinate(4, &[0, 1, 3]);
        let cls = classify_subspace(&co, &om);
        assert_eq!(cls.kind, SubspaceKind::Coisotropic);
        assert!(!cls.isotropic && !cls.symplectic);
        let line = LinSubspace::coordinate(4, &[0]);
        assert_eq!(classify_subspace(&line, &om).kind, SubspaceKind::Isotropic);
    }

    #[test]
    fn dual_completion_rescales_inversely() {
        let om = SympForm::standard(1);
        let f = dual_completion(&[v(&[2.0, 0.0])], &LinSubspace::coordinate(2, &[1]), &om).unwrap();
        assert!((f[0][1] - 0.5).abs() < 1e-15);
        assert_eq!(f[0][0], 0.0);
    }

    #[test]
    fn dual_completion_rejects_bad_input() {
        let om = SympForm::standard(2);
        let e = [v(&[1.0, 0.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0, 0.0])];
        assert!(matches!(
            dual_completion(&e, &LinSubspace::coordinate(4, &[0, 2]), &om),
            Err(Error::NotTransverse(_))
        ));
        assert!(matches!(
            dual_completion(&e, &LinSubspace::coordinate(4, &[2]), &om),
            Err(Error::NotTransverse(_))
        ));
        let symplectic_pair = [v(&[1.0, 0.0, 0.0, 0.0]), v(&[0.0, 0.0, 1.0, 0.0])];
        assert!(
            dual_completion(&symplectic_pair, &LinSubspace::coordinate(4, &[1, 3]), &om).is_err()
        );
    }

    #[test]
    fn sympform_validation() {
        assert!(SympForm::new(DMatrix::zeros(2, 2)).is_err());
        assert!(SympForm::new(DMatrix::identity(2, 2)).is_err());
        assert!(SympForm::new(DMatrix::zeros(3, 3)).is_err());
        assert!(SympForm::new(SympForm::standard(2).matrix().clone()).is_ok());
    }
}
