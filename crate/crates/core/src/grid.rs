//! Sample point sets: regular lattices over a box and seeded random clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grid {
    /// `divisions[i] + 1` evenly spaced values `lo + (hi - lo) * j / divisions`
    /// per axis; zero divisions pins the axis at `lo`.
    Lattice {
        lo: Vec<f64>,
        hi: Vec<f64>,
        divisions: Vec<usize>,
    },
    Random {
        lo: Vec<f64>,
        hi: Vec<f64>,
        count: usize,
        seed: u64,
    },
}

impl Grid {
    pub fn lattice(lo: Vec<f64>, hi: Vec<f64>, divisions: Vec<usize>) -> Result<Self> {
        check_box(&lo, &hi)?;
        if divisions.len() != lo.len() {
            return Err(Error::Dimension("one division count per axis".into()));
        }
        Ok(Grid::Lattice { lo, hi, divisions })
    }

    /// Lattice whose spacing is as close to `step` as the box allows.
    pub fn with_step(lo: Vec<f64>, hi: Vec<f64>, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid step must be positive, got {step}"
            )));
        }
        check_box(&lo, &hi)?;
        let divisions = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| ((b - a) / step).round() as usize)
            .collect();
        Self::lattice(lo, hi, divisions)
    }

    /// The cube `[-r, r]^dim` with `divisions` per axis.
    pub fn cube(dim: usize, r: f64, divisions: usize) -> Self {
        Grid::Lattice {
            lo: vec![-r; dim],
            hi: vec![r; dim],
            divisions: vec![divisions; dim],
        }
    }

    pub fn random(lo: Vec<f64>, hi: Vec<f64>, count: usize, seed: u64) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(Grid::Random {
            lo,
            hi,
            count,
            seed,
        })
    }

    /// The same grid with `axes` extra coordinates ranging over `[lo, hi]`.
    /// Lattices get `divisions` steps per new axis; random clouds keep their count.
    pub fn extended(&self, lo: f64, hi: f64, axes: usize, divisions: usize) -> Result<Grid> {
        check_box(&[lo], &[hi])?;
        Ok(match self {
            Grid::Lattice {
                lo: l,
                hi: h,
                divisions: d,
            } => Grid::Lattice {
                lo: l
                    .iter()
                    .copied()
                    .chain(std::iter::repeat_n(lo, axes))
                    .collect(),
                hi: h
                    .iter()
                    .copied()
                    .chain(std::iter::repeat_n(hi, axes))
                    .collect(),
                divisions: d
                    .iter()
                    .copied()
                    .chain(std::iter::repeat_n(divisions, axes))
                    .collect(),
            },
            Grid::Random {
                lo: l,
                hi: h,
                count,
                seed,
            } => Grid::Random {
                lo: l
                    .iter()
                    .copied()
                    .chain(std::iter::repeat_n(lo, axes))
                    .collect(),
                hi: h
                    .iter()
                    .copied()
                    .chain(std::iter::repeat_n(hi, axes))
                    .collect(),
                count: *count,
                seed: *seed,
            },
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Grid::Lattice { lo, .. } | Grid::Random { lo, .. } => lo.len(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::Lattice { divisions, .. } => divisions.iter().map(|d| d + 1).product(),
            Grid::Random { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0 || self.len() == 0
    }

    /// Largest per-axis spacing of a lattice; for random clouds the mean
    /// spacing of a lattice with the same point count.
    pub fn step(&self) -> f64 {
        match self {
            Grid::Lattice { lo, hi, divisions } => lo
                .iter()
                .zip(hi)
                .zip(divisions)
                .filter(|(_, &d)| d > 0)
                .map(|((a, b), &d)| (b - a) / d as f64)
                .fold(0.0, f64::max),
            Grid::Random { lo, hi, count, .. } => {
                let vol: f64 = lo
                    .iter()
                    .zip(hi)
                    .map(|(a, b)| (b - a).max(f64::MIN_POSITIVE))
                    .product();
                (vol / (*count).max(1) as f64).powf(1.0 / lo.len().max(1) as f64)
            }
        }
    }

    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        if self.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(match self {
            Grid::Lattice { lo, hi, divisions } => {
                let dim = lo.len();
                let mut out = Vec::with_capacity(self.len());
                let mut idx = vec![0usize; dim];
                loop {
                    out.push(
                        (0..dim)
                            .map(|a| {
                                if divisions[a] == 0 {
                                    lo[a]
                                } else {
                                    lo[a] + (hi[a] - lo[a]) * idx[a] as f64 / divisions[a] as f64
                                }
                            })
                            .collect(),
                    );
                    let mut axis = dim;
                    loop {
                        if axis == 0 {
                            return Ok(out);
                        }
                        axis -= 1;
                        if idx[axis] < divisions[axis] {
                            idx[axis] += 1;
                            break;
                        }
                        idx[axis] = 0;
                    }
                }
            }
            Grid::Random {
                lo,
                hi,
                count,
                seed,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..*count)
                    .map(|_| {
                        lo.iter()
                            .zip(hi)
                            .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                            .collect()
                    })
                    .collect()
            }
        })
    }
}

fn check_box(lo: &[f64], hi: &[f64]) -> Result<()> {
    if lo.len() != hi.len() {
        return Err(Error::Dimension("box corners differ in dimension".into()));
    }
    for (a, b) in lo.iter().zip(hi) {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::InvalidInput(format!("bad box edge [{a}, {b}]")));
        }
    }
    Ok(())
}
