//! Liouvillian restricted to the part of operator space a given state can reach.
//!
//! Starting from the nonzero entries of the initial density matrix, matrix
//! units `|x><y|` are added as long as the generator maps into them. The
//! result is closed under the generator, so integrating on it is exact. For the
//! two-atom cavity model the excitation number makes this a small fraction of
//! the full `dim²` space.

use std::collections::HashMap;
use std::collections::VecDeque;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::LindbladGenerator;
use crate::density::DensityMatrix;
use crate::sparse::SparseOperator;

#[derive(Clone, Debug)]
pub struct ReducedLiouvillian {
    dim: usize,
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

/// Nonzero entries `(row, value)` of one operator column.
type Column = Vec<(usize, C64)>;

/// Column-wise view of an operator: `columns[x]` lists `(row, value)` for column `x`.
fn columns(op: &SparseOperator) -> Vec<Column> {
    let mut cols = vec![Vec::new(); op.dim()];
    for (r, c, v) in op.entries() {
        cols[c].push((r, v));
    }
    cols
}

impl ReducedLiouvillian {
    /// Closure of `seed` under the generator.
    pub fn new(generator: &LindbladGenerator, seed: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let dim = generator.dim();
        let heff_cols = columns(&generator.effective_hamiltonian());
        let jumps: Vec<(f64, Vec<Column>)> = generator.channels.iter().map(|ch| (ch.rate, columns(&ch.operator))).collect();

        let mut pairs = Vec::new();
        let mut index = HashMap::new();
        let mut queue = VecDeque::new();
        fn push(
            p: (usize, usize),
            pairs: &mut Vec<(usize, usize)>,
            index: &mut HashMap<(usize, usize), usize>,
            queue: &mut VecDeque<usize>,
        ) -> usize {
            *index.entry(p).or_insert_with(|| {
                pairs.push(p);
                queue.push_back(pairs.len() - 1);
                pairs.len() - 1
            })
        }
        for p in seed {
            push(p, &mut pairs, &mut index, &mut queue);
        }

        let minus_i = C64::new(0.0, -1.0);
        let plus_i = C64::new(0.0, 1.0);
        let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
        while let Some(col) = queue.pop_front() {
            let (x, y) = pairs[col];
            // −i Heff |x><y|
            for &(r, v) in &heff_cols[x] {
                let row = push((r, y), &mut pairs, &mut index, &mut queue);
                triplets.push((row, col, minus_i * v));
            }
            // +i |x><y| Heff†
            for &(c, v) in &heff_cols[y] {
                let row = push((x, c), &mut pairs, &mut index, &mut queue);
                triplets.push((row, col, plus_i * v.conj()));
            }
            // rate A |x><y| A†
            for (rate, acols) in &jumps {
                for &(r, a) in &acols[x] {
                    for &(c, b) in &acols[y] {
                        let row = push((r, c), &mut pairs, &mut index, &mut queue);
                        triplets.push((row, col, a * b.conj() * *rate));
                    }
                }
            }
        }

        let n = pairs.len();
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                cols.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { dim, pairs, index, row_ptr, cols, vals }
    }

    /// Closure of the nonzero pattern of `rho`.
    pub fn for_state(generator: &LindbladGenerator, rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let d = m.nrows();
        let seed = (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).filter(|&(r, c)| m[(r, c)] != C64::new(0.0, 0.0));
        Self::new(generator, seed)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        self.index.get(&(row, col)).copied()
    }

    /// `out = L v`.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            *o = acc;
        }
    }

    /// Packs `rho` into the reduced vector. Entries outside the support are ignored.
    pub fn vectorize(&self, rho: &DMatrix<C64>) -> Vec<C64> {
        self.pairs.iter().map(|&(r, c)| rho[(r, c)]).collect()
    }

    pub fn unvectorize(&self, v: &[C64]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(r, c), &z) in self.pairs.iter().zip(v) {
            m[(r, c)] = z;
        }
        m
    }

    /// Weights `w` such that `tr(op ρ) = Σ w_k v_k` for states on this support.
    pub fn observable_weights(&self, op: &SparseOperator) -> Vec<(usize, C64)> {
        op.entries().filter_map(|(r, c, v)| self.position(c, r).map(|k| (k, v))).collect()
    }

    /// Position of the transposed matrix unit for every pair, when present.
    pub fn transpose_positions(&self) -> Vec<Option<usize>> {
        self.pairs.iter().map(|&(r, c)| self.position(c, r)).collect()
    }

    /// Reconstructs the full generator on the support as a dense matrix (tests only use this at small sizes).
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] = self.vals[k];
            }
        }
        m
    }
}

/// Largest deviation between the reduced and the dense generator on `rho`.
#[cfg(test)]
pub(crate) fn check_against_dense(
    gen: &LindbladGenerator,
    red: &ReducedLiouvillian,
    rho: &DMatrix<C64>,
) -> crate::error::Result<f64> {
    let dense = gen.apply(rho)?;
    let v = red.vectorize(rho);
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    red.apply(&v, &mut out);
    let recon = red.unvectorize(&out);
    Ok((dense - recon).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::build_generator;
    use crate::hilbert::{product_state, thermal_field_state, AtomLevel, BasisSpec};
    use crate::params::SystemParams;

    fn params() -> SystemParams {
        SystemParams { g1: 1.4, g2: 1.0, delta1: 30.0, delta2: 29.5, kappa: 0.02, n_th: 1.5, gamma: 0.01, gamma_c: 0.1 }
    }

    #[test]
    fn full_support_matches_dense_generator() {
        let basis = BasisSpec::new(2).unwrap();
        let gen = build_generator(&params(), &basis).unwrap();
        let d = basis.dim();
        let red = ReducedLiouvillian::new(&gen, (0..d).flat_map(|r| (0..d).map(move |c| (r, c))));
        assert_eq!(red.len(), d * d);
        let rho = DMatrix::from_fn(d, d, |r, c| C64::new((r * 7 + c) as f64 * 0.01, (r as f64 - c as f64) * 0.003));
        assert!(check_against_dense(&gen, &red, &rho).unwrap() < 1e-12);
    }

    #[test]
    fn thermal_product_state_support_is_closed_and_small() {
        let basis = BasisSpec::new(12).unwrap();
        let gen = build_generator(&params(), &basis).unwrap();
        let rho = product_state(AtomLevel::B, AtomLevel::A, &thermal_field_state(1.5, &basis).unwrap().state).unwrap();
        let red = ReducedLiouvillian::for_state(&gen, &rho);
        // at most 25 matrix units per excitation-number block
        assert!(red.len() <= 25 * (basis.n_max() + 3), "{}", red.len());
        assert!(red.len() < basis.dim() * basis.dim() / 10);
        // applying to a state supported on the closure reproduces the dense generator
        let v: Vec<C64> = (0..red.len()).map(|k| C64::new((k % 13) as f64 * 0.01, (k % 7) as f64 * 0.002)).collect();
        let rho_full = red.unvectorize(&v);
        assert!(check_against_dense(&gen, &red, &rho_full).unwrap() < 1e-12);
        // Hermitian closure
        assert!(red.transpose_positions().iter().all(Option::is_some));
    }
}
