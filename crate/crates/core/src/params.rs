use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical rates and detunings of the two-atom cavity system.
///
/// All quantities are angular frequencies in one common unit (the CLI uses
/// `g2 = 1`). `n_th` is dimensionless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g1: f64,
    pub g2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub kappa: f64,
    pub n_th: f64,
    pub gamma: f64,
    pub gamma_c: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("kappa", self.kappa),
            ("n_th", self.n_th),
            ("gamma", self.gamma),
            ("gamma_c", self.gamma_c),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: format!("{v} is not finite") });
            }
        }
        for (name, v) in [("g1", self.g1), ("g2", self.g2)] {
            if v <= 0.0 {
                return Err(Error::InvalidParameter { name, reason: format!("coupling must be positive, got {v}") });
            }
        }
        for (name, v) in [("kappa", self.kappa), ("n_th", self.n_th), ("gamma", self.gamma), ("gamma_c", self.gamma_c)] {
            if v < 0.0 {
                return Err(Error::InvalidParameter { name, reason: format!("must be non-negative, got {v}") });
            }
        }
        Ok(())
    }

    /// `δ = Δ1 − Δ2`.
    pub fn delta(&self) -> f64 {
        self.delta1 - self.delta2
    }

    /// `S = g1²/Δ1 + g2²/Δ2`.
    pub fn stark_sum(&self) -> f64 {
        self.g1 * self.g1 / self.delta1 + self.g2 * self.g2 / self.delta2
    }

    /// `Δ = (Δ1 + Δ2) / 2`, the common detuning used by the large-detuning expansions.
    pub fn mean_detuning(&self) -> f64 {
        0.5 * (self.delta1 + self.delta2)
    }

    /// `g² = (g1² + g2²) / 2`.
    pub fn g_sq(&self) -> f64 {
        0.5 * (self.g1 * self.g1 + self.g2 * self.g2)
    }

    pub fn g_max(&self) -> f64 {
        self.g1.max(self.g2)
    }

    /// Every frequency divided by `unit` (e.g. converting rad/s into units of g2).
    pub fn rescaled(&self, unit: f64) -> Self {
        Self {
            g1: self.g1 / unit,
            g2: self.g2 / unit,
            delta1: self.delta1 / unit,
            delta2: self.delta2 / unit,
            kappa: self.kappa / unit,
            n_th: self.n_th,
            gamma: self.gamma / unit,
            gamma_c: self.gamma_c / unit,
        }
    }
}
