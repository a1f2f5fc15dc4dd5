//! Hamiltonian, Lindblad generator and time integration of the full model.

mod evolve;
mod integrator;
mod steady;
mod superop;

pub use evolve::{
    evolve, top_fock_projector, transfer_observables, EvolutionDiagnostics, EvolveOptions, Observable, TimeSeries,
    TRUNCATION_THRESHOLD,
};
pub use integrator::{Dopri5, StepStats, Tolerances};
pub use steady::{field_generator, field_steady_state};
pub use superop::ReducedLiouvillian;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{atomic_operator, field_annihilator, AtomLevel, BasisSpec};
use crate::params::SystemParams;
use crate::sparse::SparseOperator;

/// One dissipator `rate * (A ρ A† − ½{A†A, ρ})`.
#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub label: String,
    pub rate: f64,
    pub operator: SparseOperator,
}

#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    pub hamiltonian: SparseOperator,
    pub channels: Vec<CollapseChannel>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: SparseOperator) -> Self {
        Self { hamiltonian, channels: Vec::new() }
    }

    /// Adds a channel; zero rates are skipped so they cost nothing downstream.
    pub fn with_channel(mut self, label: impl Into<String>, rate: f64, operator: SparseOperator) -> Result<Self> {
        if operator.dim() != self.hamiltonian.dim() {
            return Err(Error::DimensionMismatch { expected: self.hamiltonian.dim(), found: operator.dim() });
        }
        if rate < 0.0 || !rate.is_finite() {
            return Err(Error::InvalidParameter { name: "rate", reason: format!("channel rate {rate} must be non-negative") });
        }
        if rate > 0.0 {
            self.channels.push(CollapseChannel { label: label.into(), rate, operator });
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// `H − (i/2) Σ rate A†A`.
    pub fn effective_hamiltonian(&self) -> SparseOperator {
        self.channels.iter().fold(self.hamiltonian.clone(), |acc, ch| {
            let ada = &ch.operator.adjoint() * &ch.operator;
            &acc + &ada.scale(C64::new(0.0, -0.5 * ch.rate))
        })
    }

    /// `L[ρ]` on a dense matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if rho.nrows() != self.dim() || rho.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rho.nrows() });
        }
        let heff = self.effective_hamiltonian();
        let mut out =
            sparse_times_dense(&heff, rho) * C64::new(0.0, -1.0) + dense_times_sparse(rho, &heff.adjoint()) * C64::new(0.0, 1.0);
        for ch in &self.channels {
            let a_rho = sparse_times_dense(&ch.operator, rho);
            out += dense_times_sparse(&a_rho, &ch.operator.adjoint()) * C64::new(ch.rate, 0.0);
        }
        Ok(out)
    }
}

pub(crate) fn sparse_times_dense(a: &SparseOperator, m: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(a.dim(), m.ncols());
    for (r, k, v) in a.entries() {
        for c in 0..m.ncols() {
            out[(r, c)] += v * m[(k, c)];
        }
    }
    out
}

pub(crate) fn dense_times_sparse(m: &DMatrix<C64>, a: &SparseOperator) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(m.nrows(), a.dim());
    for (k, c, v) in a.entries() {
        for r in 0..m.nrows() {
            out[(r, c)] += m[(r, k)] * v;
        }
    }
    out
}

/// `H = Σ_i [½Δ_i(σ_bb − σ_aa) + g_i(c σ_ba + σ_ab c†)]` in the frame rotating at the cavity frequency.
pub fn build_hamiltonian(params: &SystemParams, basis: &BasisSpec) -> Result<SparseOperator> {
    params.validate()?;
    let c = field_annihilator(basis);
    let cd = c.adjoint();
    let mut h = SparseOperator::zeros(basis.dim());
    for (atom, detuning, g) in [(1, params.delta1, params.g1), (2, params.delta2, params.g2)] {
        let sbb = atomic_operator(atom, AtomLevel::B, AtomLevel::B, basis)?;
        let saa = atomic_operator(atom, AtomLevel::A, AtomLevel::A, basis)?;
        let sba = atomic_operator(atom, AtomLevel::B, AtomLevel::A, basis)?;
        let sab = atomic_operator(atom, AtomLevel::A, AtomLevel::B, basis)?;
        h = &h + &(&sbb - &saa).scale_real(0.5 * detuning);
        h = &h + &(&(&c * &sba) + &(&sab * &cd)).scale_real(g);
    }
    Ok(h)
}

/// Full generator: atomic decay of `a` and `b` into `s`, thermal cavity
/// relaxation and photon extraction.
pub fn build_generator(params: &SystemParams, basis: &BasisSpec) -> Result<LindbladGenerator> {
    let h = build_hamiltonian(params, basis)?;
    let c = field_annihilator(basis);
    let mut gen = LindbladGenerator::new(h);
    for atom in [1, 2] {
        gen =
            gen.with_channel(format!("decay_a{atom}"), params.gamma, atomic_operator(atom, AtomLevel::S, AtomLevel::A, basis)?)?;
        gen =
            gen.with_channel(format!("decay_b{atom}"), params.gamma, atomic_operator(atom, AtomLevel::S, AtomLevel::B, basis)?)?;
    }
    gen = gen.with_channel("cavity_loss", params.kappa * (1.0 + params.n_th), c.clone())?;
    gen = gen.with_channel("thermal_gain", params.kappa * params.n_th, c.adjoint())?;
    gen = gen.with_channel("extraction", params.gamma_c, c)?;
    Ok(gen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::DensityMatrix;
    use crate::hilbert::{pair_projector, product_state, thermal_field_state};
    use AtomLevel::*;

    fn fig2_upper() -> SystemParams {
        SystemParams { g1: 1.0, g2: 1.0, delta1: 30.0, delta2: 30.0, kappa: 1e-3, n_th: 5.0, gamma: 3e-4, gamma_c: 0.0 }
    }

    fn max_abs(m: &DMatrix<C64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Deterministic pseudo-random Hermitian unit-trace matrix (not necessarily positive).
    fn random_hermitian(d: usize, seed: u64) -> DMatrix<C64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a = DMatrix::from_fn(d, d, |_, _| C64::new(next(), next()));
        let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
        let tr: C64 = h.diagonal().iter().sum();
        let shift = (C64::new(1.0, 0.0) - tr) / C64::new(d as f64, 0.0);
        h + DMatrix::identity(d, d) * shift
    }

    #[test]
    fn hamiltonian_is_hermitian_and_has_coupling_elements() {
        let basis = BasisSpec::new(5).unwrap();
        let p = SystemParams { g1: 1.4, delta1: 31.0, delta2: 29.0, ..fig2_upper() };
        let h = build_hamiltonian(&p, &basis).unwrap();
        assert!(h.hermiticity_error() <= 1e-12);
        for n in 0..5 {
            let v = h.get(basis.index(B, A, n), basis.index(A, A, n + 1));
            assert!((v - C64::new(1.4 * ((n + 1) as f64).sqrt(), 0.0)).norm() < 1e-12);
            let v2 = h.get(basis.index(A, B, n), basis.index(A, A, n + 1));
            assert!((v2 - C64::new(((n + 1) as f64).sqrt(), 0.0)).norm() < 1e-12);
        }
        // s is never coupled: atom 1 stays in s under H
        for n in 0..=5 {
            let i = basis.index(S, A, n);
            assert!(h.row(i).all(|(c, _)| basis.decompose(c).0 == S));
            assert_eq!(h.get(i, i), C64::new(-14.5, 0.0));
        }
    }

    #[test]
    fn decoupled_hamiltonian_is_diagonal() {
        let basis = BasisSpec::new(3).unwrap();
        let p = SystemParams { g1: 1e-300, g2: 1e-300, delta1: 4.0, delta2: 2.0, ..fig2_upper() };
        let h = build_hamiltonian(&p, &basis).unwrap();
        for (r, c, v) in h.entries() {
            if r != c {
                assert!(v.norm() < 1e-290);
            }
        }
        let level_energy = |l: AtomLevel, d: f64| match l {
            A => -0.5 * d,
            B => 0.5 * d,
            S => 0.0,
        };
        for i in 0..basis.dim() {
            let (l1, l2, _) = basis.decompose(i);
            let e = level_energy(l1, 4.0) + level_energy(l2, 2.0);
            assert!((h.get(i, i).re - e).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_conserves_excitation_number_below_cutoff() {
        let n_max = 6;
        let basis = BasisSpec::new(n_max).unwrap();
        let p = SystemParams { g1: 1.4, ..fig2_upper() };
        let h = build_hamiltonian(&p, &basis).unwrap();
        let n_op = &crate::hilbert::photon_number(&basis)
            + &(&atomic_operator(1, B, B, &basis).unwrap() + &atomic_operator(2, B, B, &basis).unwrap());
        let comm = h.commutator(&n_op).unwrap();
        assert_eq!(comm.nnz(), 0);
    }

    #[test]
    fn rabi_splitting_matches_effective_coupling() {
        let basis = BasisSpec::new(5).unwrap();
        let p = SystemParams { gamma: 0.0, kappa: 0.0, ..fig2_upper() };
        let h = build_hamiltonian(&p, &basis).unwrap().to_dense();
        let eig = h.clone().symmetric_eigen();
        let (ba, ab) = (basis.index(B, A, 0), basis.index(A, B, 0));
        // two eigenvectors with the largest weight on {|ba,0>, |ab,0>}
        let mut weights: Vec<(f64, f64)> = (0..basis.dim())
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                (v[ba].norm_sqr() + v[ab].norm_sqr(), eig.eigenvalues[k])
            })
            .collect();
        weights.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let splitting = (weights[0].1 - weights[1].1).abs();
        let (g, d) = (1.0f64, 30.0f64);
        let g0_large_detuning = g * g / d * (1.0 - 2.0 * g * g / (d * d));
        let rel = (splitting - 2.0 * g0_large_detuning).abs() / (2.0 * g0_large_detuning);
        assert!(rel < 5.0 * g * g / (d * d), "relative error {rel}");
    }

    #[test]
    fn channels_follow_parameters() {
        let basis = BasisSpec::new(3).unwrap();
        let p = SystemParams { gamma: 0.0, n_th: 0.0, gamma_c: 0.0, kappa: 0.2, ..fig2_upper() };
        let gen = build_generator(&p, &basis).unwrap();
        assert_eq!(gen.channels.len(), 1);
        assert_eq!(gen.channels[0].rate, 0.2);
        // |ss, 0> is dark
        let vac = thermal_field_state(0.0, &basis).unwrap().state;
        let rho = product_state(S, S, &vac).unwrap();
        assert!(max_abs(&gen.apply(rho.matrix()).unwrap()) < 1e-15);

        let p = SystemParams { gamma_c: 0.3, ..fig2_upper() };
        let gen = build_generator(&p, &basis).unwrap();
        let labels: Vec<_> = gen.channels.iter().map(|c| (c.label.as_str(), c.rate)).collect();
        assert_eq!(labels.len(), 7);
        assert!(labels.contains(&("cavity_loss", 1e-3 * 6.0)));
        assert!(labels.contains(&("thermal_gain", 1e-3 * 5.0)));
        assert!(labels.contains(&("extraction", 0.3)));
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity() {
        let basis = BasisSpec::new(3).unwrap();
        let p = SystemParams { g1: 1.4, gamma_c: 0.05, gamma: 0.01, kappa: 0.02, ..fig2_upper() };
        let gen = build_generator(&p, &basis).unwrap();
        for seed in 0..20 {
            let rho = random_hermitian(basis.dim(), seed);
            let l = gen.apply(&rho).unwrap();
            let tr: C64 = l.diagonal().iter().sum();
            assert!(tr.norm() < 1e-10, "trace {tr}");
            assert!(max_abs(&(&l - l.adjoint())) < 1e-10);
        }
    }

    #[test]
    fn generic_dissipators_match_printed_liouvillians() {
        let basis = BasisSpec::new(3).unwrap();
        let p =
            SystemParams { g1: 1e-300, g2: 1e-300, delta1: 0.0, delta2: 0.0, gamma: 0.07, kappa: 0.11, n_th: 1.3, gamma_c: 0.19 };
        let gen = build_generator(&SystemParams { delta1: 1.0, delta2: 1.0, ..p }, &basis).unwrap();
        let rho = random_hermitian(basis.dim(), 7);
        let d = |op: &SparseOperator| op.to_dense();
        let (c, cd) = (d(&field_annihilator(&basis)), d(&field_annihilator(&basis).adjoint()));
        let mut hand = DMatrix::<C64>::zeros(basis.dim(), basis.dim());
        let half = C64::new(0.5, 0.0);
        for atom in [1, 2] {
            for lvl in [A, B] {
                let down = d(&atomic_operator(atom, S, lvl, &basis).unwrap());
                let up = d(&atomic_operator(atom, lvl, S, &basis).unwrap());
                let proj = d(&atomic_operator(atom, lvl, lvl, &basis).unwrap());
                hand += (&down * &rho * &up * C64::new(2.0, 0.0) - &proj * &rho - &rho * &proj) * half * C64::new(p.gamma, 0.0);
            }
        }
        let cav = |rate: f64, a: &DMatrix<C64>, ad: &DMatrix<C64>| {
            (a * &rho * ad * C64::new(2.0, 0.0) - ad * a * &rho - &rho * ad * a) * half * C64::new(rate, 0.0)
        };
        hand += cav(p.kappa * (1.0 + p.n_th), &c, &cd);
        hand += cav(p.kappa * p.n_th, &cd, &c);
        hand += cav(p.gamma_c, &c, &cd);
        // remove the (diagonal) Hamiltonian part before comparing
        let h = gen.hamiltonian.to_dense();
        let coherent = (&h * &rho - &rho * &h) * C64::new(0.0, -1.0);
        let generic = gen.apply(&rho).unwrap() - coherent;
        assert!(max_abs(&(generic - hand)) < 1e-12);
    }

    #[test]
    fn thermal_state_is_fixed_point_of_cavity_liouvillian() {
        let n_max = 40;
        let field = steady::field_generator(0.3, 2.5, 0.0, n_max).unwrap();
        let rho = thermal_field_state(2.5, &BasisSpec::new(n_max).unwrap()).unwrap().state;
        assert!(max_abs(&field.apply(rho.matrix()).unwrap()) < 1e-10);
    }

    #[test]
    fn pair_projector_expectation() {
        let basis = BasisSpec::new(2).unwrap();
        let rho: DensityMatrix = product_state(B, A, &thermal_field_state(0.5, &basis).unwrap().state).unwrap();
        let v = crate::hilbert::expectation(&rho, &pair_projector(B, A, &basis)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12);
    }
}
