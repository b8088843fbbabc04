//! Grid search for the singular set `S(Y) = {lambda = 0}`.
//!
//! A grid point is a hit when every coefficient of `lambda` is at most
//! `tol * (1 + |grad lambda|_F)`. Hits closer than three grid steps are
//! merged by single linkage, and each cluster's dimension is the number of
//! covariance eigenvalues above `(2 * step)^2`.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};

use super::GraphSubmanifold;
use crate::error::{Error, Result};
use crate::fields::Expr;
use crate::grid::Grid;
use crate::par;

pub const DEFAULT_TOL: f64 = 1e-6;

/// Precompiled test `|lambda_i(p)| <= tol * (1 + |D lambda(p)|_F)`.
#[derive(Debug, Clone)]
pub struct HitCriterion {
    coeffs: Vec<Expr>,
    grads: Vec<Vec<Expr>>,
    tol: f64,
}

impl HitCriterion {
    pub fn new(y: &GraphSubmanifold, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let k = y.k();
        let lambda = y.lambda();
        let coeffs: Vec<Expr> = (0..k)
            .map(|i| lambda.coeff_of(&[i]))
            .collect::<Result<_>>()?;
        let grads = coeffs
            .iter()
            .map(|c| (0..k).map(|j| c.diff(j)).collect())
            .collect();
        Ok(Self { coeffs, grads, tol })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Largest `|lambda_i(p)|`.
    pub fn lambda_norm(&self, p: &[f64]) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.eval(p).abs()))
    }

    pub fn threshold(&self, p: &[f64]) -> f64 {
        let g2: f64 = self.grads.iter().flatten().map(|g| g.eval(p).powi(2)).sum();
        self.tol * (1.0 + g2.sqrt())
    }

    pub fn is_hit(&self, p: &[f64]) -> bool {
        self.lambda_norm(p) <= self.threshold(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterFlag {
    /// Dimension `2n - k`.
    Generic,
    /// Dimension `n` with `k = n + 1`: a Legendrian piece that a small
    /// perturbation removes.
    PerturbableLegendrian,
    Other,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Cluster {
    /// Indices into [`SingularScanResult::hits`].
    pub members: Vec<usize>,
    pub centroid: Vec<f64>,
    pub dimension: usize,
    pub flag: ClusterFlag,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SingularScanResult {
    pub grid: Grid,
    pub tol: f64,
    pub step: f64,
    pub points_scanned: usize,
    pub hits: Vec<Vec<f64>>,
    pub clusters: Vec<Cluster>,
    /// Smallest `max_i |lambda_i|` over the grid.
    pub min_lambda: f64,
}

impl SingularScanResult {
    pub fn dimensions(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.dimension).collect()
    }
}

pub fn singular_scan(y: &GraphSubmanifold, grid: &Grid, tol: f64) -> Result<SingularScanResult> {
    if grid.dim() != y.k() {
        return Err(Error::Dimension(format!(
            "grid has dimension {}, submanifold has {}",
            grid.dim(),
            y.k()
        )));
    }
    let points = grid.points()?;
    let crit = HitCriterion::new(y, tol)?;
    let tested = par::map(&points, |p| {
        let norm = crit.lambda_norm(p);
        (norm, norm <= crit.threshold(p))
    });
    let min_lambda = tested.iter().fold(f64::INFINITY, |m, (v, _)| m.min(*v));
    let hits: Vec<Vec<f64>> = points
        .into_iter()
        .zip(&tested)
        .filter(|(_, (_, hit))| *hit)
        .map(|(p, _)| p)
        .collect();
    let step = grid.step();
    let clusters = cluster(&hits, 3.0 * step)
        .into_iter()
        .map(|members| {
            let (centroid, dimension) = pca_dimension(&hits, &members, 2.0 * step);
            let flag = if dimension == y.generic_singular_dim() {
                ClusterFlag::Generic
            } else if dimension == y.n() && y.k() == y.n() + 1 {
                ClusterFlag::PerturbableLegendrian
            } else {
                ClusterFlag::Other
            };
            Cluster {
                members,
                centroid,
                dimension,
                flag,
            }
        })
        .collect();
    Ok(SingularScanResult {
        grid: grid.clone(),
        tol,
        step,
        points_scanned: tested.len(),
        hits,
        clusters,
        min_lambda,
    })
}

/// Single-linkage clusters at distance `<= radius`, via a hash grid of
/// cell size `radius`.
pub(crate) fn cluster(points: &[Vec<f64>], radius: f64) -> Vec<Vec<usize>> {
    if points.is_empty() {
        return Vec::new();
    }
    let radius = if radius > 0.0 {
        radius
    } else {
        f64::MIN_POSITIVE
    };
    let dim = points[0].len();
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / radius).floor() as i64).collect() };
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        buckets.entry(cell(p)).or_default().push(i);
    }
    let mut parent: Vec<usize> = (0..points.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut code| {
            (0..dim)
                .map(|_| {
                    let o = (code % 3) as i64 - 1;
                    code /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let r2 = radius * radius * (1.0 + 1e-9);
    for (i, p) in points.iter().enumerate() {
        let c = cell(p);
        for off in &offsets {
            let key: Vec<i64> = c.iter().zip(off).map(|(a, b)| a + b).collect();
            let Some(bucket) = buckets.get(&key) else {
                continue;
            };
            for &j in bucket {
                if j <= i {
                    continue;
                }
                let d2: f64 = p.iter().zip(&points[j]).map(|(a, b)| (a - b).powi(2)).sum();
                if d2 <= r2 {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri.max(rj)] = ri.min(rj);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..points.len() {
        let r = find(&mut parent, i);
        let slot = *root_slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[slot].push(i);
    }
    groups
}

pub(crate) fn pca_dimension(
    points: &[Vec<f64>],
    members: &[usize],
    spread: f64,
) -> (Vec<f64>, usize) {
    let dim = points[members[0]].len();
    let m = members.len() as f64;
    let mut centroid = vec![0.0; dim];
    for &i in members {
        for (c, x) in centroid.iter_mut().zip(&points[i]) {
            *c += x / m;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for &i in members {
        let d: Vec<f64> = points[i]
            .iter()
            .zip(&centroid)
            .map(|(x, c)| x - c)
            .collect();
        for a in 0..dim {
            for b in 0..dim {
                cov[(a, b)] += d[a] * d[b] / m;
            }
        }
    }
    let cutoff = spread * spread;
    let dimension = SymmetricEigen::new(cov)
        .eigenvalues
        .iter()
        .filter(|&&e| e > cutoff)
        .count();
    (centroid, dimension)
}
