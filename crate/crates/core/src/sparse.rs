//! Compressed sparse row storage for complex operators.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A square complex operator stored in canonical CSR layout.
///
/// Rows are sorted, columns within each row are strictly increasing and no
/// explicit zeros are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], cols: Vec::new(), vals: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, row_ptr: (0..=dim).collect(), cols: (0..dim).collect(), vals: vec![C64::new(1.0, 0.0); dim] }
    }

    /// Builds an operator from unordered triplets. Duplicates are summed and
    /// entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut entries: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &entries {
            if r >= dim || c >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: r.max(c) + 1 });
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<C64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        // drop exact zeros produced by cancellation
        let mut keep_rows = Vec::with_capacity(rows.len());
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != C64::new(0.0, 0.0) {
                keep_rows.push(r);
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for &r in &keep_rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { dim, row_ptr, cols: keep_cols, vals: keep_vals })
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let dim = m.nrows();
        let trip = (0..dim).flat_map(|r| (0..dim).map(move |c| (r, c))).map(|(r, c)| (r, c, m[(r, c)]));
        Self::from_triplets(dim, trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates over stored entries in canonical (row, col) order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k])))
    }

    /// Stored entries of one row as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let span = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match span.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v.conj()))).expect("adjoint keeps indices in range")
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.dim, self.entries().map(|(r, c, v)| (c, r, v))).expect("transpose keeps indices in range")
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_triplets(self.dim, self.entries().chain(other.entries()))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::from_triplets(self.dim, self.entries().chain(other.entries().map(|(r, c, v)| (r, c, -v))))
    }

    /// Sparse product `self * other`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut trip = Vec::new();
        let mut acc = vec![C64::new(0.0, 0.0); self.dim];
        let mut touched = vec![false; self.dim];
        let mut pattern = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    if !touched[c] {
                        touched[c] = true;
                        pattern.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            for &c in &pattern {
                trip.push((r, c, acc[c]));
                acc[c] = C64::new(0.0, 0.0);
                touched[c] = false;
            }
            pattern.clear();
        }
        Self::from_triplets(self.dim, trip)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    /// Kronecker product `self ⊗ other`; `other` indexes fastest.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        let trip =
            self.entries().flat_map(|(r1, c1, v1)| other.entries().map(move |(r2, c2, v2)| (r1 * d + r2, c1 * d + c2, v1 * v2)));
        Self::from_triplets(self.dim * d, trip).expect("kron indices in range")
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `y = self * x`.
    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok((0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect())
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.entries() {
            m[(r, c)] = v;
        }
        m
    }

    /// Largest absolute entry of `self - self†`.
    pub fn hermiticity_error(&self) -> f64 {
        self.entries().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }
}

impl Add for &SparseOperator {
    type Output = SparseOperator;
    fn add(self, rhs: Self) -> SparseOperator {
        self.try_add(rhs).expect("operator dimensions must agree")
    }
}

impl Sub for &SparseOperator {
    type Output = SparseOperator;
    fn sub(self, rhs: Self) -> SparseOperator {
        self.try_sub(rhs).expect("operator dimensions must agree")
    }
}

impl Mul for &SparseOperator {
    type Output = SparseOperator;
    fn mul(self, rhs: Self) -> SparseOperator {
        self.try_mul(rhs).expect("operator dimensions must agree")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let op = SparseOperator::from_triplets(
            3,
            vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (2, 0, c(0.5, 0.5)), (2, 0, c(0.5, 0.0))],
        )
        .unwrap();
        assert_eq!(op.nnz(), 1);
        assert_eq!(op.get(2, 0), c(1.0, 0.5));
        assert_eq!(op.get(0, 1), c(0.0, 0.0));
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(SparseOperator::from_triplets(2, vec![(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn dimension_mismatch_in_product() {
        let a = SparseOperator::identity(2);
        let b = SparseOperator::identity(3);
        assert!(a.try_mul(&b).is_err());
        assert!(a.try_add(&b).is_err());
    }

    #[test]
    fn kron_places_second_factor_fastest() {
        let a = SparseOperator::from_triplets(2, vec![(0, 1, c(2.0, 0.0))]).unwrap();
        let b = SparseOperator::from_triplets(3, vec![(1, 2, c(0.0, 1.0))]).unwrap();
        let k = a.kron(&b);
        assert_eq!(k.dim(), 6);
        assert_eq!(k.nnz(), 1);
        assert_eq!(k.get(1, 3 + 2), c(0.0, 2.0));
    }

    fn random_op(dim: usize, density: f64) -> impl Strategy<Value = SparseOperator> {
        proptest::collection::vec((0..dim, 0..dim, -1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), 0..(dim * dim)).prop_map(move |v| {
            SparseOperator::from_triplets(
                dim,
                v.into_iter().filter(|t| t.4 < density).map(|(r, c, re, im, _)| (r, c, C64::new(re, im))),
            )
            .unwrap()
        })
    }

    fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sparse_arithmetic_matches_dense(a in random_op(27, 0.3), b in random_op(27, 0.3), s in -2.0f64..2.0) {
            let (da, db) = (a.to_dense(), b.to_dense());
            prop_assert!(max_diff(&(&a * &b).to_dense(), &(&da * &db)) <= 1e-12);
            prop_assert!(max_diff(&(&a + &b).to_dense(), &(&da + &db)) <= 1e-12);
            prop_assert!(max_diff(&(&a - &b).to_dense(), &(&da - &db)) <= 1e-12);
            prop_assert!(max_diff(&a.adjoint().to_dense(), &da.adjoint()) <= 1e-12);
            prop_assert!(max_diff(&a.scale_real(s).to_dense(), &(&da * C64::new(s, 0.0))) <= 1e-12);
            let sa = a.kron(&SparseOperator::identity(3));
            let dense_k = DMatrix::from_fn(81, 81, |r, c| if r % 3 == c % 3 { da[(r / 3, c / 3)] } else { C64::new(0.0, 0.0) });
            prop_assert!(max_diff(&sa.to_dense(), &dense_k) <= 1e-12);
        }

        #[test]
        fn canonical_layout_holds(a in random_op(9, 0.5), b in random_op(9, 0.5)) {
            let p = &a * &b;
            let e: Vec<_> = p.entries().collect();
            prop_assert!(e.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1)));
            prop_assert!(e.iter().all(|t| t.2 != C64::new(0.0, 0.0)));
        }
    }
}
