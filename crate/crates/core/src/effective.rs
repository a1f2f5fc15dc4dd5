//! Adiabatic-elimination layer: Stark-shifted energies, effective coupling
//! and thermally averaged transfer probability.
//!
//! The per-`n` functions are guarded: a Stark denominator smaller than
//! `10·max(g1, g2)·√(n+1)` is outside the perturbative regime and reported as
//! [`Error::DenominatorNearZero`]. [`transfer_curve`] evaluates the same
//! formulas unguarded because a thermal sum may reach far into the tail;
//! [`regime_report`] says how much probability sits outside the regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Multiplier on `max(g)·√(n+1)` below which a Stark denominator is rejected.
pub const DENOMINATOR_GUARD: f64 = 10.0;

/// Photon-number resolved quantities of the effective two-level model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    pub n: usize,
    pub e_ba: f64,
    pub e_ab: f64,
    /// `E_ba − E_ab` from the Stark energies.
    pub delta_e: f64,
    /// Large-detuning form `δ + (g1² − g2²)(2n+1)/Δ`.
    pub delta_e_approx: f64,
    pub g: f64,
    /// Large-detuning form of the coupling.
    pub g_approx: f64,
    /// `√(G² + ¼ δE²)` with the exact `G` and `δE`.
    pub g_bar: f64,
}

/// Whether the cavity-induced damping `κ_eff` multiplies the oscillating term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    None,
    CavityInduced,
}

fn guard(params: &SystemParams, n: usize, denominators: &[f64]) -> Result<()> {
    let threshold = DENOMINATOR_GUARD * params.g_max() * ((n + 1) as f64).sqrt();
    for &value in denominators {
        if value.abs() < threshold {
            return Err(Error::DenominatorNearZero { n, value, threshold });
        }
    }
    Ok(())
}

fn denominators(p: &SystemParams, n: usize) -> [f64; 4] {
    let s = p.stark_sum();
    let n = n as f64;
    [p.delta1 + s * (n + 1.0), p.delta2 + s * n, p.delta2 + s * (n + 1.0), p.delta1 + s * n]
}

fn stark_unchecked(p: &SystemParams, n: usize) -> (f64, f64) {
    let [d1_up, d2_n, d2_up, d1_n] = denominators(p, n);
    let nf = n as f64;
    let (g1s, g2s) = (p.g1 * p.g1, p.g2 * p.g2);
    let delta = p.delta();
    let e_ba = 0.5 * delta + g1s * (nf + 1.0) / d1_up - g2s * nf / d2_n;
    let e_ab = -0.5 * delta + g2s * (nf + 1.0) / d2_up - g1s * nf / d1_n;
    (e_ba, e_ab)
}

fn coupling_unchecked(p: &SystemParams, n: usize) -> f64 {
    let [d1_up, d2_n, d2_up, d1_n] = denominators(p, n);
    let nf = n as f64;
    let gg = p.g1 * p.g2;
    0.5 * gg * (nf + 1.0) * (1.0 / d1_up + 1.0 / d2_up) - 0.5 * gg * nf * (1.0 / d1_n + 1.0 / d2_n)
}

/// Large-detuning coupling `(g1g2/Δ)(1 − δ/2Δ − (g1² + g2²)(2n+1)/Δ²)` with `Δ = (Δ1+Δ2)/2`.
pub fn coupling_approx(p: &SystemParams, n: usize) -> f64 {
    let d = p.mean_detuning();
    let sum_sq = p.g1 * p.g1 + p.g2 * p.g2;
    p.g1 * p.g2 / d * (1.0 - p.delta() / (2.0 * d) - sum_sq * (2 * n + 1) as f64 / (d * d))
}

fn mismatch_approx(p: &SystemParams, n: usize) -> f64 {
    p.delta() + (p.g1 * p.g1 - p.g2 * p.g2) * (2 * n + 1) as f64 / p.mean_detuning()
}

/// `(E_ba,n, E_ab,n)`, the Stark-shifted energies of `|ba, n>` and `|ab, n>`.
pub fn stark_energies(params: &SystemParams, n: usize) -> Result<(f64, f64)> {
    params.validate()?;
    guard(params, n, &denominators(params, n))?;
    Ok(stark_unchecked(params, n))
}

/// Exact effective coupling and its large-detuning approximation, `(G, G_approx)`.
pub fn effective_coupling(params: &SystemParams, n: usize) -> Result<(f64, f64)> {
    params.validate()?;
    guard(params, n, &denominators(params, n))?;
    Ok((coupling_unchecked(params, n), coupling_approx(params, n)))
}

/// Energy mismatch `δE(n) = δ + (g1² − g2²)(2n+1)/Δ`.
pub fn energy_mismatch(params: &SystemParams, n: usize) -> Result<f64> {
    params.validate()?;
    guard(params, n, &denominators(params, n))?;
    Ok(mismatch_approx(params, n))
}

fn couplings_unchecked(p: &SystemParams, n: usize) -> EffectiveCouplings {
    let (e_ba, e_ab) = stark_unchecked(p, n);
    let g = coupling_unchecked(p, n);
    let delta_e = e_ba - e_ab;
    EffectiveCouplings {
        n,
        e_ba,
        e_ab,
        delta_e,
        delta_e_approx: mismatch_approx(p, n),
        g,
        g_approx: coupling_approx(p, n),
        g_bar: (g * g + 0.25 * delta_e * delta_e).sqrt(),
    }
}

/// All photon-number resolved quantities at `n`.
pub fn effective_couplings(params: &SystemParams, n: usize) -> Result<EffectiveCouplings> {
    params.validate()?;
    guard(params, n, &denominators(params, n))?;
    Ok(couplings_unchecked(params, n))
}

/// Transfer time `π / (2 G(0))` with the exact coupling.
pub fn transfer_time(params: &SystemParams) -> Result<f64> {
    let (g0, _) = effective_coupling(params, 0)?;
    Ok(std::f64::consts::PI / (2.0 * g0.abs()))
}

/// Cavity-induced damping rate `(κ + γ_c)(g1² + g2²)/(2Δ²)`.
pub fn cavity_damping_rate(params: &SystemParams) -> f64 {
    let d = params.mean_detuning();
    (params.kappa + params.gamma_c) * (params.g1 * params.g1 + params.g2 * params.g2) / (2.0 * d * d)
}

fn check_distribution(photon_dist: &[f64]) -> Result<()> {
    if photon_dist.is_empty() || photon_dist.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidParameter { name: "photon_dist", reason: "probabilities must be non-negative".into() });
    }
    let total: f64 = photon_dist.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter { name: "photon_dist", reason: format!("sums to {total}, not 1") });
    }
    Ok(())
}

/// `p_ab(t) = Σ_n P_n e^{−2Γt} |G/Ḡ|² sin²(Ḡ t)` on every time in `times`.
///
/// With [`Damping::CavityInduced`] the oscillating part of `sin² = ½(1 − cos)`
/// is additionally damped by `e^{−κ_eff t}`.
pub fn transfer_curve(params: &SystemParams, times: &[f64], photon_dist: &[f64], damping: Damping) -> Result<Vec<f64>> {
    params.validate()?;
    check_distribution(photon_dist)?;
    let kappa_eff = match damping {
        Damping::None => 0.0,
        Damping::CavityInduced => cavity_damping_rate(params),
    };
    let terms: Vec<(f64, f64, f64)> = photon_dist
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(n, &p)| {
            let c = couplings_unchecked(params, n);
            let weight = if c.g_bar > 0.0 { (c.g / c.g_bar).powi(2) } else { 0.0 };
            (p, weight, c.g_bar)
        })
        .collect();
    Ok(times
        .iter()
        .map(|&t| {
            let envelope = (-2.0 * params.gamma * t).exp();
            let coherence = (-kappa_eff * t).exp();
            envelope * terms.iter().map(|&(p, w, gb)| p * w * 0.5 * (1.0 - coherence * (2.0 * gb * t).cos())).sum::<f64>()
        })
        .collect())
}

/// Single-time form of [`transfer_curve`] without cavity-induced damping.
pub fn transfer_probability(params: &SystemParams, t: f64, photon_dist: &[f64]) -> Result<f64> {
    Ok(transfer_curve(params, &[t], photon_dist, Damping::None)?[0])
}

/// `n̄_th / (1 + γ_c/κ)`.
pub fn effective_photon_number(kappa: f64, n_th: f64, gamma_c: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be positive, got {kappa}") });
    }
    if n_th < 0.0 {
        return Err(Error::NegativePhotonNumber(n_th));
    }
    if gamma_c < 0.0 {
        return Err(Error::InvalidParameter { name: "gamma_c", reason: format!("must be non-negative, got {gamma_c}") });
    }
    Ok(n_th / (1.0 + gamma_c / kappa))
}

/// How much of a photon distribution lies outside the perturbative regime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// Smallest `n` whose denominators fail the guard, if any.
    pub first_violating_n: Option<usize>,
    /// Total probability of photon numbers failing the guard.
    pub mass_outside: f64,
}

pub fn regime_report(params: &SystemParams, photon_dist: &[f64]) -> RegimeReport {
    let mut report = RegimeReport { first_violating_n: None, mass_outside: 0.0 };
    for (n, &p) in photon_dist.iter().enumerate() {
        if guard(params, n, &denominators(params, n)).is_err() {
            report.first_violating_n.get_or_insert(n);
            report.mass_outside += p;
        }
    }
    report
}
