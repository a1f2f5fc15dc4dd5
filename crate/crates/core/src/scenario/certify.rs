use super::config::Scenario;
use super::run::{run_with, scenario_basis, Convergence, RunOutput, ShiftReport};
use crate::dynamics::Tolerances;
use crate::error::Result;
use crate::hilbert::BasisSpec;

/// Largest allowed shift of any reported observable.
pub const CERTIFY_SHIFT_THRESHOLD: f64 = 1e-4;
/// Factor by which integrator tolerances are tightened for the reference run.
pub const CERTIFY_TOLERANCE_FACTOR: f64 = 10.0;

fn largest_shift(base: &RunOutput, reference: &RunOutput) -> ShiftReport {
    let mut worst = ShiftReport { observable: String::new(), index: 0, shift: 0.0 };
    let mut consider = |name: &str, a: &[f64], b: &[f64]| {
        for (k, (x, y)) in a.iter().zip(b).enumerate() {
            // an undefined analytic column is undefined in both runs
            let shift = if x.is_nan() && y.is_nan() { 0.0 } else { (x - y).abs() };
            if !(shift <= worst.shift) {
                worst = ShiftReport { observable: name.to_string(), index: k, shift };
            }
        }
    };
    for (name, values) in &base.columns {
        let other = reference.column(name).expect("both runs share their columns");
        consider(name, values, other);
    }
    // the reference distribution has twice as many bins; the base run has zero population above its cutoff
    let mut padded = base.photon_sim.clone();
    padded.resize(reference.photon_sim.len(), 0.0);
    consider("P_n_sim", &padded, &reference.photon_sim);
    let (a, b) = (base.report.transfer.as_ref(), reference.report.transfer.as_ref());
    if let (Some(a), Some(b)) = (a, b) {
        consider("peak_p_ab", &[a.peak_p_ab], &[b.peak_p_ab]);
    }
    worst
}

/// Reruns a scenario with `n_max` doubled and tolerances tightened tenfold and
/// compares every reported observable. The base run is returned with its
/// `convergence` field filled in.
pub fn certify(s: &Scenario) -> Result<RunOutput> {
    let basis = scenario_basis(s)?;
    let tolerances = Tolerances::default();
    let (base, reference) = rayon::join(
        || run_with(s, &basis, tolerances),
        || {
            let doubled = BasisSpec::new(2 * basis.n_max())?;
            run_with(s, &doubled, tolerances.tightened(CERTIFY_TOLERANCE_FACTOR))
        },
    );
    let mut base = base?;
    let reference = reference?;
    let largest = largest_shift(&base, &reference);
    let (n_max, n_max_doubled) = (basis.n_max(), 2 * basis.n_max());
    base.report.convergence = if largest.shift < CERTIFY_SHIFT_THRESHOLD {
        Convergence::Pass {
            n_max,
            n_max_doubled,
            tolerance_factor: CERTIFY_TOLERANCE_FACTOR,
            threshold: CERTIFY_SHIFT_THRESHOLD,
            largest,
        }
    } else {
        Convergence::Fail {
            n_max,
            n_max_doubled,
            tolerance_factor: CERTIFY_TOLERANCE_FACTOR,
            threshold: CERTIFY_SHIFT_THRESHOLD,
            largest,
        }
    };
    Ok(base)
}
