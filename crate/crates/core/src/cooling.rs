//! Photon extraction by an ensemble of cooling atoms, reduced to one rate `γ_c`.
//!
//! Each cooling atom absorbs a cavity photon in a two-photon transition
//! `|g,n> → |r,n−1>` (pump `Ω`, cavity coupling `g_c`, intermediate detuning
//! `Δ_c`) and returns to `|g>` through a fast incoherent decay `Γ_r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio at or above which a "much larger than" condition passes.
pub const RATIO_PASS: f64 = 10.0;
/// Ratio at or above which a "much larger than" condition only warns.
pub const RATIO_WARN: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Warn,
    Fail,
}

impl CheckStatus {
    pub fn from_ratio(ratio: f64) -> Self {
        if ratio >= RATIO_PASS {
            Self::Pass
        } else if ratio >= RATIO_WARN {
            Self::Warn
        } else {
            Self::Fail
        }
    }
}

/// One "≫" condition evaluated as a ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityCheck {
    pub name: String,
    pub ratio: f64,
    pub status: CheckStatus,
}

impl ValidityCheck {
    pub fn new(name: impl Into<String>, ratio: f64) -> Self {
        Self { name: name.into(), ratio, status: CheckStatus::from_ratio(ratio) }
    }

    fn describe(&self) -> String {
        format!("{} = {:.4} (need ≥ {RATIO_WARN}, ≥ {RATIO_PASS} to pass)", self.name, self.ratio)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingEnsemble {
    /// Number of cooling atoms (an effective number when `g_c` varies across the ensemble).
    pub n_c: f64,
    pub omega: f64,
    pub g_c: f64,
    pub delta_c: f64,
    /// Decay rate of the Rydberg state; derived from the cascade fields when absent.
    #[serde(default)]
    pub gamma_r: Option<f64>,
    #[serde(default)]
    pub omega_r: Option<f64>,
    #[serde(default)]
    pub gamma_e: Option<f64>,
    /// `Γ_r` comes from laser ionization, which depletes the ensemble; only annotates reports.
    #[serde(default)]
    pub laser_ionization: bool,
}

/// Whether failed validity checks abort the computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidityPolicy {
    Enforce,
    Override,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoolingReport {
    pub gamma_c: f64,
    /// Extraction rate contributed by one cooling atom, `γ_c / N_c`.
    pub per_atom_rate: f64,
    pub gamma_r: f64,
    pub checks: Vec<ValidityCheck>,
    pub laser_ionization: bool,
}

impl CoolingReport {
    pub fn warnings(&self) -> Vec<String> {
        self.checks.iter().filter(|c| c.status != CheckStatus::Pass).map(ValidityCheck::describe).collect()
    }
}

/// `Ω_n⁽²⁾ = Ω g_c √n / Δ_c`.
pub fn two_photon_rabi(ens: &CoolingEnsemble, n: usize) -> f64 {
    ens.omega * ens.g_c * (n as f64).sqrt() / ens.delta_c
}

/// `Γ_r = 4Ω_r²/Γ_e` together with the `Γ_e ≫ Ω_r` check.
pub fn cascade_decay_rate(omega_r: f64, gamma_e: f64) -> Result<(f64, ValidityCheck)> {
    if !(gamma_e > 0.0) {
        return Err(Error::InvalidParameter { name: "gamma_e", reason: format!("must be positive, got {gamma_e}") });
    }
    let ratio = if omega_r == 0.0 { f64::INFINITY } else { gamma_e / omega_r.abs() };
    Ok((4.0 * omega_r * omega_r / gamma_e, ValidityCheck::new("Gamma_e/Omega_r", ratio)))
}

/// Incoherent single-atom extraction rate `R_n = 4|Ω_n⁽²⁾|²/Γ_r`.
pub fn incoherent_rate(ens: &CoolingEnsemble, gamma_r: f64, n: usize) -> f64 {
    4.0 * two_photon_rabi(ens, n).powi(2) / gamma_r
}

fn validate(ens: &CoolingEnsemble) -> Result<()> {
    for (name, v) in [("n_c", ens.n_c), ("omega", ens.omega), ("g_c", ens.g_c)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter { name, reason: format!("must be non-negative, got {v}") });
        }
    }
    if !(ens.delta_c.is_finite() && ens.delta_c != 0.0) {
        return Err(Error::InvalidParameter { name: "delta_c", reason: format!("must be nonzero, got {}", ens.delta_c) });
    }
    Ok(())
}

fn resolve_gamma_r(ens: &CoolingEnsemble, checks: &mut Vec<ValidityCheck>) -> Result<f64> {
    let cascade = match (ens.omega_r, ens.gamma_e) {
        (Some(omega_r), Some(gamma_e)) => {
            let (rate, check) = cascade_decay_rate(omega_r, gamma_e)?;
            checks.push(check);
            Some(rate)
        }
        (None, None) => None,
        _ => {
            return Err(Error::InvalidParameter { name: "omega_r", reason: "omega_r and gamma_e must be given together".into() })
        }
    };
    let gamma_r = ens
        .gamma_r
        .or(cascade)
        .ok_or_else(|| Error::InvalidParameter { name: "gamma_r", reason: "give gamma_r or both omega_r and gamma_e".into() })?;
    if !(gamma_r > 0.0 && gamma_r.is_finite()) {
        return Err(Error::InvalidParameter { name: "gamma_r", reason: format!("must be positive, got {gamma_r}") });
    }
    Ok(gamma_r)
}

/// Extraction rate `γ_c = N_c·4Ω²g_c²/(Δ_c²Γ_r)`, defined by `γ_c n = N_c R_n`.
pub fn extraction_rate(ens: &CoolingEnsemble, policy: ValidityPolicy) -> Result<CoolingReport> {
    validate(ens)?;
    let mut checks = Vec::new();
    let gamma_r = resolve_gamma_r(ens, &mut checks)?;
    let ratio = |big: f64, small: f64| if small == 0.0 { f64::INFINITY } else { big.abs() / small };
    checks.insert(0, ValidityCheck::new("Delta_c/Omega", ratio(ens.delta_c, ens.omega)));
    checks.insert(1, ValidityCheck::new("Delta_c/g_c", ratio(ens.delta_c, ens.g_c)));

    let failed: Vec<String> = checks.iter().filter(|c| c.status == CheckStatus::Fail).map(ValidityCheck::describe).collect();
    if policy == ValidityPolicy::Enforce && !failed.is_empty() {
        return Err(Error::ValidityViolation(failed));
    }
    let per_atom_rate = incoherent_rate(ens, gamma_r, 1);
    Ok(CoolingReport { gamma_c: ens.n_c * per_atom_rate, per_atom_rate, gamma_r, checks, laser_ionization: ens.laser_ionization })
}

/// Largest photon number with `P_n > 10⁻³` whose two-photon Rabi frequency
/// violates `Γ_r ≥ 5·Ω_n⁽²⁾`, if any.
pub fn single_excitation_violation(ens: &CoolingEnsemble, gamma_r: f64, photon_dist: &[f64]) -> Option<usize> {
    photon_dist
        .iter()
        .enumerate()
        .rev()
        .find(|(n, &p)| p > 1e-3 && gamma_r < RATIO_WARN * two_photon_rabi(ens, *n))
        .map(|(n, _)| n)
}
