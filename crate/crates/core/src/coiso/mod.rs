//! Graph submanifolds of standard contact space and their characteristic
//! foliations.
//!
//! A [`GraphSubmanifold`] is the graph of a map from some `k` of the Darboux
//! coordinates (the free ones, which become the source chart) to the remaining
//! `2n + 1 - k`. The standard layout takes `x1..xn` together with the last
//! `k - n` of the `y`'s as free coordinates.

mod charfol;
pub mod families;
mod normal;
mod residuals;
mod scan;
mod vk;

use crate::error::{Error, Result};
use crate::fields::{Chart, Expr, ExprField, SmoothMap};
use crate::forms::{standard_contact_form, DiffForm};

pub use charfol::{kernel_dimension, CharFoliation, CharFoliationPoint};
pub use normal::{perturb_legendrian, singular_normal_data, Bump, NormalData};
pub use residuals::{
    coisotropy_residuals, pointwise_coisotropy, Equation, PointCoisotropy, ResidualEntry,
    ResidualSystem, Residuals,
};
pub(crate) use scan::{cluster, pca_dimension};
pub use scan::{
    singular_scan, Cluster, ClusterFlag, HitCriterion, SingularScanResult, DEFAULT_TOL as SCAN_TOL,
};
pub use vk::{build_vk, verify_claim, ClaimReport, ClaimResiduals, ClaimSystem, VkFields};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Free `x1..xn, y_{2n-k+1}..yn`; graph of `(y_1..y_{2n-k}, z)`.
    Standard,
    /// Any other choice of free coordinates.
    Custom,
}

#[derive(Debug, Clone)]
pub struct GraphSubmanifold {
    n: usize,
    ambient: Chart,
    source: Chart,
    /// Ambient index of each source coordinate.
    free: Vec<usize>,
    embedding: SmoothMap,
    lambda: DiffForm,
    layout: Layout,
}

/// Source coordinate names of the standard layout.
pub fn standard_free_names(n: usize, k: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((2 * n - k + 1..=n).map(|i| format!("y{i}")));
    names
}

/// Dependent coordinate names of the standard layout, in order.
pub fn standard_dependent_names(n: usize, k: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=2 * n - k).map(|i| format!("y{i}")).collect();
    names.push("z".into());
    names
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if k < n + 1 || k > 2 * n {
        return Err(Error::InvalidInput(format!(
            "graph dimension k = {k} outside [n+1, 2n] = [{}, {}]",
            n + 1,
            2 * n
        )));
    }
    Ok(())
}

impl GraphSubmanifold {
    /// Standard layout; `comps` are `y_1..y_{2n-k}, z` as expressions on
    /// [`GraphSubmanifold::standard_chart`].
    pub fn standard(n: usize, k: usize, comps: Vec<Expr>) -> Result<Self> {
        check_nk(n, k)?;
        let deps = standard_dependent_names(n, k);
        if comps.len() != deps.len() {
            return Err(Error::Arity {
                expected: deps.len(),
                got: comps.len(),
            });
        }
        let free = standard_free_names(n, k);
        Self::build(n, &free, deps.into_iter().zip(comps).collect())
    }

    /// Standard layout from expression strings.
    pub fn standard_from_strs(n: usize, k: usize, comps: &[&str]) -> Result<Self> {
        let chart = Self::standard_chart(n, k)?;
        let exprs = comps
            .iter()
            .map(|s| chart.parse_expr(s).map(|f| f.expr))
            .collect::<Result<Vec<_>>>()?;
        Self::standard(n, k, exprs)
    }

    pub fn standard_chart(n: usize, k: usize) -> Result<Chart> {
        check_nk(n, k)?;
        Chart::new(standard_free_names(n, k))
    }

    /// Free coordinates named explicitly; dependents not listed are zero.
    pub fn with_free_coordinates<S: AsRef<str>>(
        n: usize,
        free: &[S],
        dependent: Vec<(String, Expr)>,
    ) -> Result<Self> {
        check_nk(n, free.len())?;
        let free: Vec<String> = free.iter().map(|s| s.as_ref().to_string()).collect();
        Self::build(n, &free, dependent)
    }

    /// `{z = y2 = ... = yn = 0}` with free coordinates `x1..xn, y1`.
    pub fn legendrian_model(n: usize) -> Result<Self> {
        let mut free: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        free.push("y1".into());
        Self::with_free_coordinates(n, &free, Vec::new())
    }

    fn build(n: usize, free: &[String], dependent: Vec<(String, Expr)>) -> Result<Self> {
        let ambient = Chart::darboux(n);
        let source = Chart::new(free.to_vec())?;
        let free_idx = free
            .iter()
            .map(|name| ambient.index(name))
            .collect::<Result<Vec<_>>>()?;
        let mut comps: Vec<Option<Expr>> = vec![None; ambient.dim()];
        for (pos, &i) in free_idx.iter().enumerate() {
            comps[i] = Some(Expr::var(pos));
        }
        for (name, e) in dependent {
            let i = ambient.index(&name)?;
            if free_idx.contains(&i) {
                return Err(Error::InvalidInput(format!(
                    "`{name}` is a free coordinate and cannot also be a graph component"
                )));
            }
            if comps[i].is_some() {
                return Err(Error::InvalidInput(format!(
                    "component `{name}` given twice"
                )));
            }
            ExprField::new(source.clone(), e.clone())?;
            comps[i] = Some(e);
        }
        let comps = comps
            .into_iter()
            .map(|c| c.unwrap_or_else(Expr::zero))
            .collect();
        let embedding = SmoothMap::new(source.clone(), ambient.clone(), comps)?;
        let lambda = standard_contact_form(n).pullback(&embedding)?;
        let k = free.len();
        let layout = if free == standard_free_names(n, k).as_slice() {
            Layout::Standard
        } else {
            Layout::Custom
        };
        Ok(Self {
            n,
            ambient,
            source,
            free: free_idx,
            embedding,
            lambda,
            layout,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.source.dim()
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn ambient(&self) -> &Chart {
        &self.ambient
    }

    pub fn free_indices(&self) -> &[usize] {
        &self.free
    }

    pub fn embedding(&self) -> &SmoothMap {
        &self.embedding
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// The ambient coordinate `name` as a function on the source.
    pub fn component(&self, name: &str) -> Result<Expr> {
        Ok(self.embedding.comps[self.ambient.index(name)?].clone())
    }

    /// The graph with one component replaced.
    pub fn with_component(&self, name: &str, expr: Expr) -> Result<Self> {
        let i = self.ambient.index(name)?;
        if self.free.contains(&i) {
            return Err(Error::InvalidInput(format!(
                "`{name}` is a free coordinate"
            )));
        }
        let free: Vec<String> = self.source.names().to_vec();
        let dependent = (0..self.ambient.dim())
            .filter(|j| !self.free.contains(j))
            .map(|j| {
                let e = if j == i {
                    expr.clone()
                } else {
                    self.embedding.comps[j].clone()
                };
                (self.ambient.name(j).to_string(), e)
            })
            .collect();
        Self::build(self.n, &free, dependent)
    }

    pub fn lambda(&self) -> &DiffForm {
        &self.lambda
    }

    /// Expected dimension of a generic singular component, `2n - k`.
    pub fn generic_singular_dim(&self) -> usize {
        2 * self.n - self.k()
    }
}

/// `lambda = alpha|_Y`, the pullback of the standard contact form.
pub fn restricted_form(y: &GraphSubmanifold) -> DiffForm {
    y.lambda.clone()
}

/// Max coefficient of `lambda ^ d lambda` at `point`; zero exactly where the
/// characteristic distribution of a `k = n + 1` graph is Frobenius integrable.
pub fn foliation_residual(y: &GraphSubmanifold, point: &[f64]) -> Result<f64> {
    let w = y.lambda.wedge(&y.lambda.exterior_d()?)?;
    y.source.check_point(point)?;
    Ok(w.at(point).max_abs())
}
