//! Differential forms with expression coefficients.
//!
//! A degree-`k` form stores one coefficient per strictly increasing
//! multi-index `I = (i1 < ... < ik)`; absent indices are zero. Evaluation uses
//! the determinant convention
//! `(dx_{i1} ^ ... ^ dx_{ik})(v_1, ..., v_k) = det[(v_j)_{i_l}]`
//! with no `1/k!`, so the standard contact form satisfies
//! `alpha ^ (d alpha)^n (d/dz, d/dx1, d/dy1, ...) = n!`.

mod lower;
pub mod numeric;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fields::{same_chart, Chart, Expr, ExprField, Node, SmoothMap, VectorField};
pub use lower::parse_form;
pub use numeric::NumForm;

/// Strictly increasing multi-index stored as a bit set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex(u32);

pub const MAX_DIM: usize = 32;

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        let mut last: Option<usize> = None;
        for &i in indices {
            if i >= MAX_DIM {
                return Err(Error::Dimension(format!("index {i} exceeds {MAX_DIM}")));
            }
            if matches!(last, Some(l) if l >= i) {
                return Err(Error::InvalidInput(format!(
                    "multi-index {indices:?} is not strictly increasing"
                )));
            }
            bits |= 1 << i;
            last = Some(i);
        }
        Ok(MultiIndex(bits))
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(1 << i)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn from_bits(bits: u32) -> Self {
        MultiIndex(bits)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(self) -> Vec<usize> {
        (0..MAX_DIM).filter(|&i| self.contains(i)).collect()
    }

    /// Number of members strictly below `i`.
    pub fn count_below(self, i: usize) -> usize {
        (self.0 & ((1u32 << i) - 1)).count_ones() as usize
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros() as usize)
    }

    /// Sign and index of `dx_I ^ dx_J`, or `None` when they overlap.
    pub fn wedge(self, other: MultiIndex) -> Option<(f64, MultiIndex)> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let swaps: usize = other
            .indices()
            .into_iter()
            .map(|j| self.len() - self.count_below(j))
            .sum();
        let sign = if swaps.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((sign, MultiIndex(self.0 | other.0)))
    }

    pub fn without(self, i: usize) -> MultiIndex {
        MultiIndex(self.0 & !(1 << i))
    }

    pub fn with(self, i: usize) -> MultiIndex {
        MultiIndex(self.0 | (1 << i))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiIndex {
    /// Lexicographic on the sorted index lists.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.indices().cmp(&other.indices())
    }
}

/// All multi-indices of length `k` in `0..dim`.
pub fn multi_indices(dim: usize, k: usize) -> Vec<MultiIndex> {
    fn rec(start: usize, dim: usize, k: usize, acc: u32, out: &mut Vec<MultiIndex>) {
        if k == 0 {
            out.push(MultiIndex(acc));
            return;
        }
        for i in start..dim {
            if dim - i < k {
                break;
            }
            rec(i + 1, dim, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= dim {
        rec(0, dim, k, 0, &mut out);
    }
    out
}

#[derive(Clone, PartialEq)]
pub struct DiffForm {
    chart: Chart,
    degree: usize,
    coeffs: BTreeMap<MultiIndex, Expr>,
}

impl DiffForm {
    pub fn zero(chart: &Chart, degree: usize) -> Self {
        Self {
            chart: chart.clone(),
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(field: &ExprField) -> Self {
        let mut f = Self::zero(&field.chart, 0);
        f.insert(MultiIndex::EMPTY, field.expr.clone());
        f
    }

    pub fn scalar_expr(chart: &Chart, expr: Expr) -> Self {
        let mut f = Self::zero(chart, 0);
        f.insert(MultiIndex::EMPTY, expr);
        f
    }

    /// The basis form `dx_{i1} ^ ... ^ dx_{ik}`.
    pub fn basis(chart: &Chart, indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i >= chart.dim()) {
            return Err(Error::Dimension(format!("index {i} outside chart")));
        }
        let idx = MultiIndex::from_indices(indices)?;
        let mut f = Self::zero(chart, indices.len());
        f.insert(idx, Expr::one());
        Ok(f)
    }

    /// `d(name)` for a coordinate of `chart`.
    pub fn coordinate_differential(chart: &Chart, name: &str) -> Result<Self> {
        Self::basis(chart, &[chart.index(name)?])
    }

    /// `sum_i comps[i] dx_i`.
    pub fn one_form(chart: &Chart, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::Dimension(format!(
                "{} components on a {}-dimensional chart",
                comps.len(),
                chart.dim()
            )));
        }
        let mut f = Self::zero(chart, 1);
        for (i, c) in comps.into_iter().enumerate() {
            f.insert(MultiIndex::single(i), c);
        }
        Ok(f)
    }

    pub fn from_terms(
        chart: &Chart,
        degree: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Expr)>,
    ) -> Result<Self> {
        let mut f = Self::zero(chart, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::InvalidInput(format!(
                    "term of degree {} in a {degree}-form",
                    idx.len()
                )));
            }
            if idx.max_index().is_some_and(|m| m >= chart.dim()) {
                return Err(Error::Dimension("multi-index outside chart".into()));
            }
            ExprField::new(chart.clone(), c.clone())?;
            f.accumulate(idx, &c);
        }
        Ok(f)
    }

    fn insert(&mut self, idx: MultiIndex, c: Expr) {
        if c.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, c);
        }
    }

    fn accumulate(&mut self, idx: MultiIndex, c: &Expr) {
        if c.is_zero() {
            return;
        }
        let next = match self.coeffs.get(&idx) {
            Some(prev) => prev.add(c),
            None => c.clone(),
        };
        self.insert(idx, next);
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, idx: MultiIndex) -> Expr {
        self.coeffs.get(&idx).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn coeff_of(&self, indices: &[usize]) -> Result<Expr> {
        Ok(self.coeff(MultiIndex::from_indices(indices)?))
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &Expr)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// True when every coefficient folded to the constant zero.
    pub fn is_symbolically_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &DiffForm) -> Result<DiffForm> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (idx, c) in other.terms() {
            out.accumulate(idx, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DiffForm) -> Result<DiffForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DiffForm {
        self.map_coeffs(|c| c.neg())
    }

    pub fn scale(&self, f: &Expr) -> DiffForm {
        self.map_coeffs(|c| c.mul(f))
    }

    pub fn scale_by(&self, c: f64) -> DiffForm {
        self.scale(&Expr::constant(c))
    }

    fn map_coeffs(&self, f: impl Fn(&Expr) -> Expr) -> DiffForm {
        let mut out = DiffForm::zero(&self.chart, self.degree);
        for (idx, c) in self.terms() {
            out.insert(idx, f(c));
        }
        out
    }

    fn check_compatible(&self, other: &DiffForm) -> Result<()> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::InvalidInput(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<DiffForm> {
        same_chart(&self.chart, &other.chart)?;
        let degree = self.degree + other.degree;
        if degree > self.chart.dim() {
            return Err(Error::DegreeOverflow {
                degree,
                dim: self.chart.dim(),
            });
        }
        let mut out = DiffForm::zero(&self.chart, degree);
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                if let Some((sign, k)) = i.wedge(j) {
                    out.accumulate(k, &a.mul(b).mul(&Expr::constant(sign)));
                }
            }
        }
        Ok(out)
    }

    /// `self ^ ... ^ self` (`k` factors); `k = 0` gives the constant 1.
    pub fn power(&self, k: usize) -> Result<DiffForm> {
        let mut out = DiffForm::scalar_expr(&self.chart, Expr::one());
        for _ in 0..k {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// `d(a dx_I) = sum_j (da/dx_j) dx_j ^ dx_I`.
    pub fn exterior_d(&self) -> Result<DiffForm> {
        let dim = self.chart.dim();
        if self.degree >= dim {
            return Err(Error::DegreeOverflow {
                degree: self.degree + 1,
                dim,
            });
        }
        let mut out = DiffForm::zero(&self.chart, self.degree + 1);
        for (idx, a) in self.terms() {
            for j in 0..dim {
                if idx.contains(j) || !a.depends_on(j) {
                    continue;
                }
                let sign = if idx.count_below(j) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                out.accumulate(idx.with(j), &a.diff(j).mul(&Expr::constant(sign)));
            }
        }
        Ok(out)
    }

    /// `(i_V w)(w_2, ...) = w(V, w_2, ...)`.
    pub fn interior(&self, v: &VectorField) -> Result<DiffForm> {
        same_chart(&self.chart, &v.chart)?;
        if self.degree == 0 {
            return Err(Error::InvalidInput("interior product of a 0-form".into()));
        }
        let mut out = DiffForm::zero(&self.chart, self.degree - 1);
        for (idx, a) in self.terms() {
            for (pos, i) in idx.indices().into_iter().enumerate() {
                let vi = &v.comps[i];
                if vi.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.accumulate(idx.without(i), &vi.mul(a).mul(&Expr::constant(sign)));
            }
        }
        Ok(out)
    }

    /// Cartan's formula `L_V w = d(i_V w) + i_V(dw)`.
    pub fn lie_derivative(&self, v: &VectorField) -> Result<DiffForm> {
        same_chart(&self.chart, &v.chart)?;
        if self.degree == 0 {
            return self.exterior_d()?.interior(v);
        }
        let first = self.interior(v)?.exterior_d()?;
        if self.degree == self.chart.dim() {
            return Ok(first);
        }
        first.add(&self.exterior_d()?.interior(v)?)
    }

    /// Pullback along `map`, assembled as `sum_I (a_I o map) d(map^{i1}) ^ ... `.
    pub fn pullback(&self, map: &SmoothMap) -> Result<DiffForm> {
        same_chart(&self.chart, &map.target)?;
        let src = &map.source;
        if self.degree > src.dim() {
            return Err(Error::DegreeOverflow {
                degree: self.degree,
                dim: src.dim(),
            });
        }
        let differentials: Vec<DiffForm> = map
            .comps
            .iter()
            .map(|c| DiffForm::scalar_expr(src, c.clone()).exterior_d_or_zero())
            .collect();
        let mut out = DiffForm::zero(src, self.degree);
        'terms: for (idx, a) in self.terms() {
            let coeff = a.substitute(&map.comps);
            if coeff.is_zero() {
                continue;
            }
            let mut term = DiffForm::scalar_expr(src, coeff);
            for i in idx.indices() {
                term = term.wedge(&differentials[i])?;
                if term.is_symbolically_zero() {
                    continue 'terms;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    fn exterior_d_or_zero(&self) -> DiffForm {
        self.exterior_d()
            .unwrap_or_else(|_| DiffForm::zero(&self.chart, self.degree + 1))
    }

    /// Numeric coefficients at `point` (periodic coordinates reduced).
    pub fn at(&self, point: &[f64]) -> NumForm {
        let p = self.chart.reduce(point);
        NumForm::new(
            self.chart.dim(),
            self.degree,
            self.terms().map(|(i, c)| (i, c.eval(&p))).collect(),
        )
    }

    /// `sum_I a_I(p) det(rows I of [v_1 .. v_k])`.
    pub fn evaluate(&self, point: &[f64], vectors: &[Vec<f64>]) -> Result<f64> {
        self.chart.check_point(point)?;
        if vectors.len() != self.degree {
            return Err(Error::Arity {
                expected: self.degree,
                got: vectors.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.chart.dim()) {
            return Err(Error::Dimension(format!(
                "tangent vector has {} components, chart has {}",
                v.len(),
                self.chart.dim()
            )));
        }
        Ok(self.at(point).evaluate(vectors))
    }

    /// Pretty form such as `-y1*dx1 + dz`.
    pub fn to_string_with(&self, names: &[String]) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (idx, c) in self.terms() {
            let basis: Vec<String> = idx
                .indices()
                .iter()
                .map(|&i| format!("d{}", names[i]))
                .collect();
            let (negative, c) = match c.node() {
                Node::Neg(a) => (true, a.clone()),
                Node::Const(v) if *v < 0.0 => (true, Expr::constant(-v)),
                _ => (false, c.clone()),
            };
            let body = if basis.is_empty() {
                format!("{}", c.display(names))
            } else if c.is_one() {
                basis.join("^")
            } else if c.precedence() >= 2 {
                format!("{}*{}", c.display(names), basis.join("^"))
            } else {
                format!("({})*{}", c.display(names), basis.join("^"))
            };
            match (out.is_empty(), negative) {
                (true, false) => out.push_str(&body),
                (true, true) => out.push_str(&format!("-{body}")),
                (false, false) => out.push_str(&format!(" + {body}")),
                (false, true) => out.push_str(&format!(" - {body}")),
            }
        }
        out
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_string_with(self.chart.names()))
    }
}

impl fmt::Debug for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffForm<{}>({self})", self.degree)
    }
}

pub fn wedge(a: &DiffForm, b: &DiffForm) -> Result<DiffForm> {
    a.wedge(b)
}

pub fn exterior_d(w: &DiffForm) -> Result<DiffForm> {
    w.exterior_d()
}

pub fn interior(v: &VectorField, w: &DiffForm) -> Result<DiffForm> {
    w.interior(v)
}

pub fn lie_derivative(v: &VectorField, w: &DiffForm) -> Result<DiffForm> {
    w.lie_derivative(v)
}

pub fn pullback(map: &SmoothMap, w: &DiffForm) -> Result<DiffForm> {
    w.pullback(map)
}

pub fn evaluate(w: &DiffForm, point: &[f64], vectors: &[Vec<f64>]) -> Result<f64> {
    w.evaluate(point, vectors)
}

/// `dz - sum_i y_i dx_i` on [`Chart::darboux`].
pub fn standard_contact_form(n: usize) -> DiffForm {
    let chart = Chart::darboux(n);
    let mut comps = vec![Expr::zero(); 2 * n + 1];
    for (i, c) in comps.iter_mut().take(n).enumerate() {
        *c = Expr::var(n + i).neg();
    }
    comps[2 * n] = Expr::one();
    DiffForm::one_form(&chart, comps).expect("component count matches")
}

/// Vectors as matrix columns, the layout [`DiffForm::evaluate`] expects.
pub fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter()
        .map(|c| c.iter().copied().collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy() -> Chart {
        Chart::new(["x", "y"]).unwrap()
    }

    fn e(dim: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        v
    }

    #[test]
    fn pullback_skips_terms_that_vanish_early() {
        let src = Chart::new(["a", "b"]).unwrap();
        let tgt = xy();
        let map = SmoothMap::new(
            src.clone(),
            tgt.clone(),
            vec![Expr::constant(1.0), Expr::var(0)],
        )
        .unwrap();
        let w = parse_form(&tgt, "dx^dy").unwrap();
        let back = w.pullback(&map).unwrap();
        assert_eq!(back.degree(), 2);
        assert!(back.is_symbolically_zero());
    }

    #[test]
    fn multi_index_wedge_signs() {
        let a = MultiIndex::from_indices(&[1]).unwrap();
        let b = MultiIndex::from_indices(&[0]).unwrap();
        assert_eq!(
            a.wedge(b),
            Some((-1.0, MultiIndex::from_indices(&[0, 1]).unwrap()))
        );
        assert_eq!(b.wedge(a).unwrap().0, 1.0);
        assert!(a.wedge(a).is_none());
        assert!(MultiIndex::from_indices(&[2, 1]).is_err());
        assert_eq!(multi_indices(4, 2).len(), 6);
        assert_eq!(multi_indices(2, 3).len(), 0);
    }

    #[test]
    fn odd_self_wedge_vanishes() {
        let c = Chart::darboux(1);
        let dz = DiffForm::coordinate_differential(&c, "z").unwrap();
        assert!(dz.wedge(&dz).unwrap().is_symbolically_zero());
    }

    #[test]
    fn normalization_convention() {
        let c = xy();
        let w = DiffForm::basis(&c, &[0, 1]).unwrap();
        assert_eq!(w.evaluate(&[0.3, 0.1], &[e(2, 0), e(2, 1)]).unwrap(), 1.0);
        assert_eq!(w.evaluate(&[0.3, 0.1], &[e(2, 1), e(2, 0)]).unwrap(), -1.0);
        assert!(matches!(
            w.evaluate(&[0.0, 0.0], &[e(2, 0)]),
            Err(Error::Arity {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn wedge_degree_overflow_is_an_error() {
        let c = xy();
        let w = DiffForm::basis(&c, &[0, 1]).unwrap();
        let dx = DiffForm::basis(&c, &[0]).unwrap();
        assert!(matches!(w.wedge(&dx), Err(Error::DegreeOverflow { .. })));
        assert!(matches!(w.exterior_d(), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn d_of_standard_contact_form() {
        let alpha = standard_contact_form(2);
        let c = alpha.chart().clone();
        let dalpha = alpha.exterior_d().unwrap();
        let expected = DiffForm::basis(&c, &[0, 2])
            .unwrap()
            .add(&DiffForm::basis(&c, &[1, 3]).unwrap())
            .unwrap();
        assert_eq!(dalpha, expected);
        assert!(dalpha.exterior_d().unwrap().is_symbolically_zero());
    }

    #[test]
    fn d_of_rotation_form() {
        let c = xy();
        let beta = parse_form(&c, "x*dy - y*dx").unwrap();
        let db = beta.exterior_d().unwrap();
        assert_eq!(db.evaluate(&[0.7, -0.2], &[e(2, 0), e(2, 1)]).unwrap(), 2.0);
    }

    #[test]
    fn interior_products() {
        let c = Chart::darboux(1);
        let w = parse_form(&c, "dx1^dy1").unwrap();
        let i = w.interior(&VectorField::coordinate(&c, 0)).unwrap();
        assert_eq!(i, DiffForm::basis(&c, &[1]).unwrap());
        let v = VectorField::new(c.clone(), vec![Expr::var(1), Expr::var(2), Expr::one()]).unwrap();
        let w3 = parse_form(&c, "x1*dx1^dy1 + dy1^dz").unwrap();
        let twice = w3.interior(&v).unwrap().interior(&v).unwrap();
        assert!(twice.at(&[0.2, 0.4, 0.9]).max_abs() < 1e-15);
    }

    #[test]
    fn lie_derivative_of_coordinate_field() {
        let c = xy();
        let dy = DiffForm::basis(&c, &[1]).unwrap();
        assert!(dy
            .lie_derivative(&VectorField::coordinate(&c, 0))
            .unwrap()
            .is_symbolically_zero());
        // L_{x d/dx} dx = dx
        let dx = DiffForm::basis(&c, &[0]).unwrap();
        let v = VectorField::new(c.clone(), vec![Expr::var(0), Expr::zero()]).unwrap();
        assert_eq!(dx.lie_derivative(&v).unwrap(), dx);
    }

    #[test]
    fn pullback_identity_and_legendrian_model() {
        let alpha = standard_contact_form(2);
        let amb = alpha.chart().clone();
        assert_eq!(alpha.pullback(&SmoothMap::identity(&amb)).unwrap(), alpha);
        // (x1, x2, y1) -> (x1, x2, y1, 0, 0)
        let src = Chart::new(["x1", "x2", "y1"]).unwrap();
        let map = SmoothMap::new(
            src.clone(),
            amb,
            vec![
                Expr::var(0),
                Expr::var(1),
                Expr::var(2),
                Expr::zero(),
                Expr::zero(),
            ],
        )
        .unwrap();
        let lambda = alpha.pullback(&map).unwrap();
        assert_eq!(lambda, parse_form(&src, "-y1*dx1").unwrap());
    }

    #[test]
    fn display_lists_terms() {
        let alpha = standard_contact_form(1);
        assert_eq!(alpha.to_string(), "-y1*dx1 + dz");
    }
}
