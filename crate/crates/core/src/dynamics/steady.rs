use super::LindbladGenerator;
use crate::error::{Error, Result};
use crate::hilbert::fock_annihilator;
use crate::sparse::SparseOperator;

/// Cavity-only generator: thermal relaxation plus photon extraction on `0..=n_max`.
pub fn field_generator(kappa: f64, n_th: f64, gamma_c: f64, n_max: usize) -> Result<LindbladGenerator> {
    if n_max < 1 {
        return Err(Error::InvalidParameter { name: "n_max", reason: "need at least two Fock states".into() });
    }
    let c = fock_annihilator(n_max);
    LindbladGenerator::new(SparseOperator::zeros(n_max + 1))
        .with_channel("cavity_loss", kappa * (1.0 + n_th), c.clone())?
        .with_channel("thermal_gain", kappa * n_th, c.adjoint())?
        .with_channel("extraction", gamma_c, c)
}

/// Stationary photon-number distribution of the birth–death process with
/// gain `a = κ n̄_th` and loss `d = κ(n̄_th + 1) + γ_c`, from the detailed
/// balance recursion `P_{n+1} = (a/d) P_n`, normalized on `0..=n_max`.
pub fn field_steady_state(kappa: f64, n_th: f64, gamma_c: f64, n_max: usize) -> Result<Vec<f64>> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be positive, got {kappa}") });
    }
    if n_th < 0.0 {
        return Err(Error::NegativePhotonNumber(n_th));
    }
    if gamma_c < 0.0 {
        return Err(Error::InvalidParameter { name: "gamma_c", reason: format!("must be non-negative, got {gamma_c}") });
    }
    let gain = kappa * n_th;
    let loss = kappa * (n_th + 1.0) + gamma_c;
    let ratio = gain / loss;
    let mut p = Vec::with_capacity(n_max + 1);
    let mut current = 1.0;
    for _ in 0..=n_max {
        p.push(current);
        current *= ratio;
    }
    let norm: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= norm);
    Ok(p)
}
