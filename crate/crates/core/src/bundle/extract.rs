//! The flat structure a coisotropic `k = n + 1` graph induces near a generic
//! singular component: the distribution `ker d lambda` spanned by the frame
//! `V~_1..V~_{n-1}`, and how far `lambda` is from being covariant constant.

use nalgebra::{DMatrix, DVector};

use crate::coiso::{build_vk, singular_scan, ClusterFlag, GraphSubmanifold, SingularScanResult};
use crate::error::{Error, Result};
use crate::fields::lie_bracket;
use crate::grid::Grid;
use crate::linalg;
use crate::par;

const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, serde::Serialize)]
pub struct FlatStructure {
    pub scan: SingularScanResult,
    pub samples: usize,
    /// Dimension of `ker d lambda`, the same at every sample.
    pub kernel_dim: usize,
    /// Smallest rank of the frame over the samples.
    pub frame_rank: usize,
    /// `max |i_V d lambda|`: how far the frame is from the distribution.
    pub frame_residual: f64,
    /// Largest component of `[V_k, V_l]` orthogonal to `ker d lambda`.
    pub integrability: f64,
    /// `max |L_V lambda|` over the frame.
    pub covariant_constancy: f64,
    /// Orthonormal kernel basis at each sample, in region order.
    #[serde(skip)]
    pub kernels: Vec<DMatrix<f64>>,
}

impl FlatStructure {
    pub fn max_residual(&self) -> f64 {
        self.frame_residual
            .max(self.integrability)
            .max(self.covariant_constancy)
    }
}

pub fn extract_flat_structure(
    y: &GraphSubmanifold,
    region: &Grid,
    tol: f64,
) -> Result<FlatStructure> {
    let frame = build_vk(y)?.source;
    let scan = singular_scan(y, region, tol)?;
    if scan.clusters.is_empty() {
        return Err(Error::NotSingular(format!(
            "no singular points of lambda in the region (min |lambda| = {:e})",
            scan.min_lambda
        )));
    }
    if let Some(c) = scan
        .clusters
        .iter()
        .find(|c| c.flag != ClusterFlag::Generic)
    {
        return Err(Error::NonGeneric(format!(
            "singular cluster near {:?} has dimension {}, expected {}",
            c.centroid,
            c.dimension,
            y.generic_singular_dim()
        )));
    }

    let lambda = y.lambda();
    let dlambda = lambda.exterior_d()?;
    let contractions = frame
        .iter()
        .map(|v| dlambda.interior(v))
        .collect::<Result<Vec<_>>>()?;
    let lies = frame
        .iter()
        .map(|v| lambda.lie_derivative(v))
        .collect::<Result<Vec<_>>>()?;
    let mut brackets = Vec::new();
    for i in 0..frame.len() {
        for j in i + 1..frame.len() {
            brackets.push(lie_bracket(&frame[i], &frame[j])?);
        }
    }

    let points = region.points()?;
    let dim = y.k();
    let per_point = par::map(&points, |p| {
        let w = dlambda.at(p);
        let rank = linalg::rank(&w.bilinear_matrix(), RANK_TOL);
        if rank != 2 {
            return Err(Error::NonGeneric(format!(
                "d lambda has rank {rank} at {p:?}, expected 2"
            )));
        }
        let kernel = w.kernel(RANK_TOL);
        let cols: Vec<DVector<f64>> = frame.iter().map(|v| DVector::from_vec(v.eval(p))).collect();
        let frame_rank = linalg::rank(&linalg::from_columns(dim, &cols), RANK_TOL);
        let off_kernel = |x: DVector<f64>| (&x - &kernel * (kernel.transpose() * &x)).amax();
        let integrability = brackets
            .iter()
            .map(|b| off_kernel(DVector::from_vec(b.eval(p))))
            .fold(0.0, f64::max);
        let frame_residual = contractions
            .iter()
            .map(|c| c.at(p).max_abs())
            .fold(0.0, f64::max);
        let covariant = lies.iter().map(|l| l.at(p).max_abs()).fold(0.0, f64::max);
        Ok((kernel, frame_rank, frame_residual, integrability, covariant))
    });

    let mut out = FlatStructure {
        samples: points.len(),
        kernel_dim: dim - 2,
        frame_rank: usize::MAX,
        frame_residual: 0.0,
        integrability: 0.0,
        covariant_constancy: 0.0,
        kernels: Vec::with_capacity(points.len()),
        scan,
    };
    for r in per_point {
        let (kernel, rank, fr, integ, cov) = r?;
        out.frame_rank = out.frame_rank.min(rank);
        out.frame_residual = out.frame_residual.max(fr);
        out.integrability = out.integrability.max(integ);
        out.covariant_constancy = out.covariant_constancy.max(cov);
        out.kernels.push(kernel);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coiso::families;

    fn region(k: usize) -> Grid {
        Grid::cube(k, 0.5, 8)
    }

    #[test]
    fn quadratic_model_n2() {
        let y = families::quadratic(2).unwrap();
        let f = extract_flat_structure(&y, &region(3), 1e-6).unwrap();
        assert_eq!(f.kernel_dim, 1);
        assert_eq!(f.frame_rank, 1);
        assert_eq!(f.max_residual(), 0.0);
        for k in &f.kernels {
            assert!((k[(0, 0)].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn quadratic_model_n3() {
        let y = families::quadratic(3).unwrap();
        let f = extract_flat_structure(&y, &region(4), 1e-6).unwrap();
        assert_eq!(f.kernel_dim, 2);
        assert_eq!(f.frame_rank, 2);
        assert_eq!(f.max_residual(), 0.0);
    }

    #[test]
    fn legendrian_model_is_rejected() {
        let y = families::zero(2, 3).unwrap();
        assert!(matches!(
            extract_flat_structure(&y, &region(3), 1e-6),
            Err(Error::NonGeneric(_))
        ));
    }

    #[test]
    fn nonsingular_region_is_rejected() {
        let y = families::quadratic(2).unwrap();
        let far = Grid::lattice(vec![0.0, 2.0, 2.0], vec![1.0, 3.0, 3.0], vec![4, 4, 4]).unwrap();
        assert!(matches!(
            extract_flat_structure(&y, &far, 1e-6),
            Err(Error::NotSingular(_))
        ));
    }
}
