use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Tolerance on Hermiticity and unit trace enforced at construction.
pub const CONSTRUCTION_TOL: f64 = 1e-10;

/// Hermitian, unit-trace state stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    data: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(data: DMatrix<C64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch { expected: data.nrows(), found: data.ncols() });
        }
        let rho = Self { data };
        let herm = rho.hermiticity_error();
        if herm > CONSTRUCTION_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > CONSTRUCTION_TOL {
            return Err(Error::TraceNotUnity(tr));
        }
        Ok(rho)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.data.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.data)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.data.diagonal().iter().map(|z| z.re).collect()
    }

    /// Smallest eigenvalue.
    ///
    /// The matrix is split into the connected components of its nonzero
    /// pattern and each block is diagonalized separately.
    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.data)
    }
}

pub(crate) fn hermiticity_error(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in r..d {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Index groups of the block-diagonal structure implied by the nonzero pattern.
pub(crate) fn nonzero_blocks(m: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    for r in 0..d {
        for c in (r + 1)..d {
            if m[(r, c)] != C64::new(0.0, 0.0) || m[(c, r)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, r), find(&mut parent, c));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..d {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

pub(crate) fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    nonzero_blocks(m)
        .into_iter()
        .map(|idx| {
            if idx.len() == 1 {
                return m[(idx[0], idx[0])].re;
            }
            let k = idx.len();
            let block = DMatrix::from_fn(k, k, |r, c| {
                // symmetrize so the solver sees an exactly Hermitian input
                (m[(idx[r], idx[c])] + m[(idx[c], idx[r])].conj()) * 0.5
            });
            block.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min)
}
