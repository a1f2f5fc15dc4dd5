//! The transfer protocol `|ba> ⊗ field → |ab>` run on the full master equation.

use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_generator, evolve, field_steady_state, top_fock_projector, transfer_observables, EvolveOptions, TimeSeries, Tolerances,
};
use crate::effective::transfer_time;
use crate::error::Result;
use crate::hilbert::{field_state_from_distribution, product_state, thermal_distribution, AtomLevel, BasisSpec};
use crate::params::SystemParams;

/// Initial photon distribution: the stationary state of the (cooled) cavity,
/// i.e. thermal with `n̄_eff`; thermal with `n̄_th` when the cavity is lossless.
pub fn initial_photon_distribution(params: &SystemParams, n_max: usize) -> Result<Vec<f64>> {
    if params.kappa > 0.0 {
        field_steady_state(params.kappa, params.n_th, params.gamma_c, n_max)
    } else {
        Ok(thermal_distribution(params.n_th, n_max)?.probabilities)
    }
}

/// Mean photon number of the initial field.
pub fn initial_mean_photons(params: &SystemParams) -> f64 {
    if params.kappa > 0.0 {
        params.n_th / (1.0 + params.gamma_c / params.kappa)
    } else {
        params.n_th
    }
}

/// Default truncation for a transfer run.
pub fn default_basis(params: &SystemParams) -> BasisSpec {
    BasisSpec::default_for(initial_mean_photons(params))
}

/// `n_samples` equally spaced times on `[0, t_final]`.
pub fn uniform_grid(t_final: f64, n_samples: usize) -> Vec<f64> {
    let n = n_samples.max(2);
    (0..n).map(|k| t_final * k as f64 / (n - 1) as f64).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransferOptions {
    pub tolerances: Tolerances,
    pub strict: bool,
}

#[derive(Clone, Debug)]
pub struct TransferRun {
    pub basis: BasisSpec,
    pub initial_distribution: Vec<f64>,
    pub series: TimeSeries,
}

/// Evolves `|ba>` ⊗ the initial field and samples the transfer observables.
pub fn simulate_transfer(
    params: &SystemParams,
    basis: &BasisSpec,
    times: &[f64],
    options: &TransferOptions,
) -> Result<TransferRun> {
    let generator = build_generator(params, basis)?;
    let initial_distribution = initial_photon_distribution(params, basis.n_max())?;
    let field = field_state_from_distribution(&initial_distribution)?;
    let rho0 = product_state(AtomLevel::B, AtomLevel::A, &field)?;
    let evolve_options = EvolveOptions {
        tolerances: options.tolerances,
        strict: options.strict,
        truncation_monitor: Some(top_fock_projector(basis)),
    };
    let series = evolve(&generator, &rho0, times, &transfer_observables(basis)?, &evolve_options)?;
    Ok(TransferRun { basis: *basis, initial_distribution, series })
}

/// Peak `p_ab` over `[0, 2 t_tr]` and the time at which it occurs.
pub fn peak_fidelity(params: &SystemParams, basis: &BasisSpec, options: &TransferOptions) -> Result<(f64, f64)> {
    let t_tr = transfer_time(params)?;
    let times = uniform_grid(2.0 * t_tr, 401);
    let run = simulate_transfer(params, basis, &times, options)?;
    Ok(peak_of(&times, run.series.column("p_ab").expect("p_ab is a transfer observable")))
}

/// `(max, argmax)` of a sampled curve.
pub fn peak_of(times: &[f64], values: &[f64]) -> (f64, f64) {
    times.iter().zip(values).fold((f64::NEG_INFINITY, 0.0), |best, (&t, &v)| if v > best.0 { (v, t) } else { best })
}
