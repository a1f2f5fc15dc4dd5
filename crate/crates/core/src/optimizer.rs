//! Fidelity budget of the cooled-cavity transfer and its closed-form optimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cooling::{CheckStatus, ValidityCheck};
use crate::effective::{cavity_damping_rate, transfer_time};
use crate::error::{Error, Result};
use crate::hilbert::BasisSpec;
use crate::params::SystemParams;
use crate::transfer::{default_basis, peak_fidelity, TransferOptions};

/// Terms of the product-form fidelity bound and the additive infidelity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityBudget {
    /// `κ n̄_th / (κ + γ_c)`, the thermal population outside `n = 0`.
    pub thermal_term: f64,
    /// `π Γ Δ / (g1 g2)`, atomic decay during the transfer.
    pub atomic_term: f64,
    /// `π (κ + γ_c) g² / (4 Δ g1 g2)`, loss through the virtual photon.
    pub cavity_term: f64,
    pub kappa_eff: f64,
    /// `(1 − thermal)(1 − atomic)(1 − cavity)`.
    pub f_bound: f64,
    /// `κ n̄_th/γ_c + π Γ Δ/(g1 g2) + π γ_c g²/(4 Δ g1 g2)`, valid for `γ_c ≫ κ`.
    pub additive_infidelity: f64,
    pub t_tr: f64,
    pub regime: Vec<ValidityCheck>,
}

fn ratio(big: f64, small: f64) -> f64 {
    if small == 0.0 {
        f64::INFINITY
    } else {
        big / small
    }
}

/// The three small-parameter conditions behind the bound:
/// (i) `κ + γ_c ≫ κ n̄_th`, (ii) `g1 g2/Δ ≫ Γ`, (iii) `Δ ≫ κ + γ_c`.
pub fn regime_checks(params: &SystemParams) -> Vec<ValidityCheck> {
    let d = params.mean_detuning();
    let loss = params.kappa + params.gamma_c;
    vec![
        ValidityCheck::new("(i) (kappa+gamma_c)/(kappa*n_th)", ratio(loss, params.kappa * params.n_th)),
        ValidityCheck::new("(ii) g1*g2/(Delta*Gamma)", ratio(params.g1 * params.g2 / d, params.gamma)),
        ValidityCheck::new("(iii) Delta/(kappa+gamma_c)", ratio(d, loss)),
    ]
}

/// `κ n̄_th/γ_c + π Γ Δ/(g1 g2) + π γ_c g²/(4 Δ g1 g2)` with `Δ` the mean detuning.
pub fn additive_infidelity(params: &SystemParams) -> f64 {
    let d = params.mean_detuning();
    let gg = params.g1 * params.g2;
    params.kappa * params.n_th / params.gamma_c
        + PI * params.gamma * d / gg
        + PI * params.gamma_c * params.g_sq() / (4.0 * d * gg)
}

/// All budget terms without enforcing the regime.
pub fn fidelity_budget(params: &SystemParams) -> Result<FidelityBudget> {
    params.validate()?;
    let d = params.mean_detuning();
    let gg = params.g1 * params.g2;
    let loss = params.kappa + params.gamma_c;
    let thermal_term = if loss > 0.0 { params.kappa * params.n_th / loss } else { 0.0 };
    let atomic_term = PI * params.gamma * d / gg;
    let cavity_term = PI * loss * params.g_sq() / (4.0 * d * gg);
    Ok(FidelityBudget {
        thermal_term,
        atomic_term,
        cavity_term,
        kappa_eff: cavity_damping_rate(params),
        f_bound: (1.0 - thermal_term) * (1.0 - atomic_term) * (1.0 - cavity_term),
        additive_infidelity: additive_infidelity(params),
        t_tr: transfer_time(params)?,
        regime: regime_checks(params),
    })
}

/// Budget with the regime enforced: any failed condition is a [`Error::RegimeViolation`].
pub fn fidelity_bound(params: &SystemParams) -> Result<FidelityBudget> {
    let budget = fidelity_budget(params)?;
    let failed: Vec<String> =
        budget.regime.iter().filter(|c| c.status == CheckStatus::Fail).map(|c| format!("{} = {:.4}", c.name, c.ratio)).collect();
    if failed.is_empty() {
        Ok(budget)
    } else {
        Err(Error::RegimeViolation(failed))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") })
    }
}

fn g_rms(g1: f64, g2: f64) -> f64 {
    (0.5 * (g1 * g1 + g2 * g2)).sqrt()
}

/// `Δ_opt = g √(γ_c / 4Γ)` minimizing the additive infidelity at fixed `γ_c`.
pub fn optimal_detuning(g1: f64, g2: f64, gamma: f64, gamma_c: f64) -> Result<f64> {
    for (name, v) in [("g1", g1), ("g2", g2), ("gamma", gamma), ("gamma_c", gamma_c)] {
        positive(name, v)?;
    }
    Ok(g_rms(g1, g2) * (gamma_c / (4.0 * gamma)).sqrt())
}

/// Closed-form joint optimum of the additive infidelity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub delta_opt: f64,
    pub gamma_c_opt: f64,
    pub min_infidelity: f64,
}

/// `γ_c = (2κn̄ g1g2/(πg√Γ))^{2/3}`, `min(1−F) = 3(κn̄)^{1/3}(πg√Γ/(2g1g2))^{2/3}` and the matching `Δ_opt`.
pub fn optimal_extraction(g1: f64, g2: f64, gamma: f64, kappa: f64, n_th: f64) -> Result<Optimum> {
    for (name, v) in [("g1", g1), ("g2", g2), ("gamma", gamma), ("kappa", kappa), ("n_th", n_th)] {
        positive(name, v)?;
    }
    let g = g_rms(g1, g2);
    let thermal = kappa * n_th;
    let b = PI * g * gamma.sqrt() / (g1 * g2);
    let gamma_c_opt = (2.0 * thermal / b).powf(2.0 / 3.0);
    Ok(Optimum {
        delta_opt: optimal_detuning(g1, g2, gamma, gamma_c_opt)?,
        gamma_c_opt,
        min_infidelity: 3.0 * thermal.cbrt() * (0.5 * b).powf(2.0 / 3.0),
    })
}

/// Frequency mismatch `δ = (g2² − g1²)/Δ` making `δE(0)` vanish.
pub fn resonance_offset(g1: f64, g2: f64, delta: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter { name: "delta", reason: "detuning must be finite and nonzero".into() });
    }
    Ok((g2 * g2 - g1 * g1) / delta)
}

/// Detunings `(Δ1, Δ2)` around the mean `Δ` with the resonant mismatch `Δ1 − Δ2 = (g2² − g1²)/Δ`.
pub fn resonant_detunings_about_mean(g1: f64, g2: f64, mean: f64) -> Result<(f64, f64)> {
    let delta = resonance_offset(g1, g2, mean)?;
    Ok((mean + 0.5 * delta, mean - 0.5 * delta))
}

/// `Δ2` for a given `Δ1` such that `(Δ1 − Δ2)·(Δ1 + Δ2)/2 = g2² − g1²`, i.e. the
/// resonance condition with `Δ` taken as the mean of the two detunings.
pub fn resonant_partner_detuning(g1: f64, g2: f64, delta1: f64) -> Result<f64> {
    let c = g2 * g2 - g1 * g1;
    let disc = delta1 * delta1 - 2.0 * c;
    if delta1 == 0.0 || disc < 0.0 {
        return Err(Error::InvalidParameter { name: "delta1", reason: "no resonant partner detuning exists".into() });
    }
    let delta = delta1 - delta1.signum() * disc.sqrt();
    Ok(delta1 - delta)
}

/// One candidate of the simulation-backed refinement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    pub delta: f64,
    pub gamma_c: f64,
    pub peak_fidelity: f64,
    pub t_peak: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationRefinement {
    pub points: Vec<RefinementPoint>,
    pub best: RefinementPoint,
}

/// Evaluates the full-simulation peak fidelity on every `(Δ, γ_c)` pair
/// (resonant detunings about each mean `Δ`) concurrently and returns the best.
///
/// `n_max` overrides the default truncation of each candidate.
pub fn refine_with_simulation(
    base: &SystemParams,
    deltas: &[f64],
    gamma_cs: &[f64],
    n_max: Option<usize>,
    options: &TransferOptions,
) -> Result<SimulationRefinement> {
    if deltas.is_empty() || gamma_cs.is_empty() {
        return Err(Error::InvalidParameter { name: "grid", reason: "refinement grid is empty".into() });
    }
    let candidates: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| gamma_cs.iter().map(move |&g| (d, g))).collect();
    let points = candidates
        .par_iter()
        .map(|&(delta, gamma_c)| {
            let (delta1, delta2) = resonant_detunings_about_mean(base.g1, base.g2, delta)?;
            let params = SystemParams { delta1, delta2, gamma_c, ..*base };
            let basis = match n_max {
                Some(n) => BasisSpec::new(n)?,
                None => default_basis(&params),
            };
            let (peak_fidelity, t_peak) = peak_fidelity(&params, &basis, options)?;
            Ok(RefinementPoint { delta, gamma_c, peak_fidelity, t_peak })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = *points.iter().max_by(|a, b| a.peak_fidelity.total_cmp(&b.peak_fidelity)).expect("non-empty grid");
    Ok(SimulationRefinement { points, best })
}
