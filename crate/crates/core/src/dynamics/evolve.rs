use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::integrator::{Dopri5, StepStats, Tolerances};
use super::superop::ReducedLiouvillian;
use super::LindbladGenerator;
use crate::density::{min_hermitian_eigenvalue, DensityMatrix};
use crate::error::{Error, Result};
use crate::hilbert::{atomic_operator, pair_projector, photon_number, AtomLevel, BasisSpec};
use crate::sparse::SparseOperator;

/// Population threshold on the highest Fock level above which a run is flagged.
pub const TRUNCATION_THRESHOLD: f64 = 1e-6;
/// Number of sample points at which the minimum eigenvalue is computed.
pub const EIGEN_CHECKPOINTS: usize = 5;

#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub operator: SparseOperator,
}

impl Observable {
    pub fn new(name: impl Into<String>, operator: SparseOperator) -> Self {
        Self { name: name.into(), operator }
    }
}

/// `p_ba`, `p_ab`, `p_s` (at least one atom in `s`) and `n_photon`.
pub fn transfer_observables(basis: &BasisSpec) -> Result<Vec<Observable>> {
    let s1 = atomic_operator(1, AtomLevel::S, AtomLevel::S, basis)?;
    let s2 = atomic_operator(2, AtomLevel::S, AtomLevel::S, basis)?;
    let either_decayed = &(&s1 + &s2) - &(&s1 * &s2);
    Ok(vec![
        Observable::new("p_ba", pair_projector(AtomLevel::B, AtomLevel::A, basis)),
        Observable::new("p_ab", pair_projector(AtomLevel::A, AtomLevel::B, basis)),
        Observable::new("p_s", either_decayed),
        Observable::new("n_photon", photon_number(basis)),
    ])
}

/// Projector on the highest kept photon number of the composite space.
pub fn top_fock_projector(basis: &BasisSpec) -> SparseOperator {
    let n = basis.n_max();
    SparseOperator::from_triplets(
        basis.dim(),
        (0..basis.atom_dim()).map(|a| {
            let i = a * basis.fock_dim() + n;
            (i, i, C64::new(1.0, 0.0))
        }),
    )
    .expect("projector indices in range")
}

#[derive(Clone, Debug, Default)]
pub struct EvolveOptions {
    pub tolerances: Tolerances,
    /// Escalate a truncation flag to an error.
    pub strict: bool,
    /// Projector whose population is monitored for truncation, if any.
    pub truncation_monitor: Option<SparseOperator>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct EvolutionDiagnostics {
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    /// `(t, smallest eigenvalue)` at the checkpoints.
    pub eigen_checkpoints: Vec<(f64, f64)>,
    pub max_top_fock_population: f64,
    pub truncation_suspect: bool,
    pub support_size: usize,
    pub steps: StepStats,
}

impl EvolutionDiagnostics {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_checkpoints.iter().map(|c| c.1).fold(f64::INFINITY, f64::min)
    }
}

/// Observables sampled on a time grid.
#[derive(Clone, Debug)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    /// Named columns in the order they were requested; `trace` is always last.
    pub columns: Vec<(String, Vec<f64>)>,
    pub diagnostics: EvolutionDiagnostics,
    pub final_state: DensityMatrix,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

fn weighted_sum(weights: &[(usize, C64)], v: &[C64]) -> C64 {
    weights.iter().map(|&(k, w)| w * v[k]).sum()
}

/// Integrates the master equation from `rho0` and samples `observables` on `t_grid`.
///
/// `t_grid` must start at 0 and be strictly increasing.
pub fn evolve(
    generator: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    observables: &[Observable],
    options: &EvolveOptions,
) -> Result<TimeSeries> {
    if rho0.dim() != generator.dim() {
        return Err(Error::DimensionMismatch { expected: generator.dim(), found: rho0.dim() });
    }
    if t_grid.first() != Some(&0.0) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid);
    }
    for obs in observables {
        if obs.operator.dim() != generator.dim() {
            return Err(Error::DimensionMismatch { expected: generator.dim(), found: obs.operator.dim() });
        }
    }

    let liouvillian = ReducedLiouvillian::for_state(generator, rho0);
    let weights: Vec<Vec<(usize, C64)>> = observables.iter().map(|o| liouvillian.observable_weights(&o.operator)).collect();
    let trace_weights = liouvillian.observable_weights(&SparseOperator::identity(generator.dim()));
    let monitor_weights = options.truncation_monitor.as_ref().map(|op| liouvillian.observable_weights(op));
    let transpose = liouvillian.transpose_positions();

    let n_samples = t_grid.len();
    let checkpoints: Vec<usize> = (0..EIGEN_CHECKPOINTS)
        .map(|k| (k * (n_samples - 1) + (EIGEN_CHECKPOINTS - 1) / 2) / (EIGEN_CHECKPOINTS - 1).max(1))
        .collect();

    let mut columns: Vec<(String, Vec<f64>)> = observables
        .iter()
        .map(|o| (o.name.clone(), Vec::with_capacity(n_samples)))
        .chain(std::iter::once(("trace".to_string(), Vec::with_capacity(n_samples))))
        .collect();
    let mut diag = EvolutionDiagnostics { support_size: liouvillian.len(), ..Default::default() };

    let mut v = liouvillian.vectorize(rho0.matrix());
    let rhs = |y: &[C64], dy: &mut [C64]| liouvillian.apply(y, dy);
    let mut stepper = Dopri5::new(v.len(), options.tolerances);

    let mut t = 0.0;
    for (i, &t_next) in t_grid.iter().enumerate() {
        stepper.advance(&rhs, &mut v, t, t_next)?;
        t = t_next;

        for ((_, col), w) in columns.iter_mut().zip(&weights) {
            col.push(weighted_sum(w, &v).re);
        }
        let tr = weighted_sum(&trace_weights, &v).re;
        columns.last_mut().expect("trace column").1.push(tr);
        diag.max_trace_drift = diag.max_trace_drift.max((tr - 1.0).abs());

        let herm = v
            .iter()
            .zip(&transpose)
            .map(|(z, tp)| match tp {
                Some(k) => (z - v[*k].conj()).norm(),
                None => z.norm(),
            })
            .fold(0.0, f64::max);
        diag.max_hermiticity_error = diag.max_hermiticity_error.max(herm);

        if let Some(w) = &monitor_weights {
            let top = weighted_sum(w, &v).re;
            diag.max_top_fock_population = diag.max_top_fock_population.max(top);
        }

        if checkpoints.contains(&i) && !diag.eigen_checkpoints.iter().any(|c| c.0 == t) {
            let lambda = min_hermitian_eigenvalue(&liouvillian.unvectorize(&v));
            diag.eigen_checkpoints.push((t, lambda));
        }
    }
    diag.steps = stepper.stats;

    if diag.max_top_fock_population > TRUNCATION_THRESHOLD {
        diag.truncation_suspect = true;
        if options.strict {
            return Err(Error::TruncationSuspect { population: diag.max_top_fock_population, threshold: TRUNCATION_THRESHOLD });
        }
    }

    let mut final_matrix = liouvillian.unvectorize(&v);
    // remove rounding-level anti-Hermitian residue before validation
    final_matrix = (&final_matrix + final_matrix.adjoint()) * C64::new(0.5, 0.0);
    let final_state = DensityMatrix::new(final_matrix)?;

    Ok(TimeSeries { times: t_grid.to_vec(), columns, diagnostics: diag, final_state })
}
