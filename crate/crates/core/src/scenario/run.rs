use serde::Serialize;

use super::config::{FieldSpec, Scenario, ScenarioKind};
use crate::cooling::{single_excitation_violation, CheckStatus, CoolingReport};
use crate::dynamics::{
    build_generator, evolve, field_generator, field_steady_state, top_fock_projector, transfer_observables, EvolutionDiagnostics,
    EvolveOptions, Observable, Tolerances, TRUNCATION_THRESHOLD,
};
use crate::effective::{regime_report, transfer_curve, transfer_time, Damping, RegimeReport};
use crate::error::Result;
use crate::hilbert::{
    field_state_from_distribution, fock_number, partial_trace_atoms, product_state, thermal_distribution, AtomLevel, BasisSpec,
};
use crate::optimizer::{fidelity_budget, optimal_extraction, FidelityBudget, Optimum};
use crate::params::SystemParams;
use crate::sparse::SparseOperator;
use crate::transfer::{peak_of, uniform_grid};
use num_complex::Complex64 as C64;

/// Mass of the effective model's photon distribution outside its regime above which a warning is raised.
const REGIME_MASS_WARNING: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct UnitsReport {
    /// Frequencies in `params` are in units of `g2`.
    pub frequency_unit: &'static str,
    pub g2_rad_s: Option<f64>,
    /// Unit of the `t` column of `timeseries.csv`.
    pub time_column_unit: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct EffectiveComparison {
    pub t_tr: f64,
    pub regime: RegimeReport,
    /// Max |simulation − effective model| over the whole run, without and with `κ_eff` damping.
    pub max_abs_deviation_undamped: f64,
    pub max_abs_deviation_damped: f64,
    /// Same over `[0, t_tr]`.
    pub max_abs_deviation_undamped_to_t_tr: f64,
    pub max_abs_deviation_damped_to_t_tr: f64,
    pub better_variant: Damping,
    pub peak_analytic: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferSummary {
    /// Largest `p_ab` over `[0, min(t_final, 2 t_tr)]` (the whole run if `t_tr` is unavailable).
    pub peak_p_ab: f64,
    pub t_peak: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldSummary {
    /// Largest |P_n(t_final) − P_n(closed form)|.
    pub max_bin_deviation: f64,
    pub final_mean_photons: f64,
    pub steady_mean_photons: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationReport {
    pub threshold: f64,
    pub max_top_fock_population: f64,
    pub suspect: bool,
    /// Population discarded when the initial thermal state was cut at `n_max`.
    pub initial_discarded_tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftReport {
    pub observable: String,
    pub index: usize,
    pub shift: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Convergence {
    NotCertified,
    Pass { n_max: usize, n_max_doubled: usize, tolerance_factor: f64, threshold: f64, largest: ShiftReport },
    Fail { n_max: usize, n_max_doubled: usize, tolerance_factor: f64, threshold: f64, largest: ShiftReport },
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub description: String,
    pub kind: ScenarioKind,
    pub units: UnitsReport,
    pub params: SystemParams,
    pub n_max: usize,
    pub initial_atoms: String,
    pub initial_field: FieldSpec,
    pub initial_mean_photons: f64,
    pub steady_mean_photons: f64,
    pub t_final: f64,
    pub samples: usize,
    pub cooling: Option<CoolingReport>,
    pub single_excitation_violation: Option<usize>,
    pub budget: Option<FidelityBudget>,
    pub optimum: Option<Optimum>,
    pub effective_model: Option<EffectiveComparison>,
    pub transfer: Option<TransferSummary>,
    pub field: Option<FieldSummary>,
    pub diagnostics: EvolutionDiagnostics,
    pub min_eigenvalue: f64,
    pub truncation: TruncationReport,
    pub convergence: Convergence,
    pub warnings: Vec<String>,
}

/// In-memory result of one scenario.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub scenario: Scenario,
    /// Times in model units.
    pub times: Vec<f64>,
    /// Time-series columns in output order (excluding `t`).
    pub columns: Vec<(String, Vec<f64>)>,
    /// Photon distribution of the initial field.
    pub initial_distribution: Vec<f64>,
    pub photon_sim: Vec<f64>,
    pub photon_analytic: Vec<f64>,
    pub report: RunReport,
}

impl RunOutput {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

fn level_char(l: AtomLevel) -> char {
    match l {
        AtomLevel::A => 'a',
        AtomLevel::B => 'b',
        AtomLevel::S => 's',
    }
}

fn steady_mean(p: &SystemParams) -> f64 {
    if p.kappa > 0.0 {
        p.n_th / (1.0 + p.gamma_c / p.kappa)
    } else {
        p.n_th
    }
}

fn initial_distribution(spec: FieldSpec, p: &SystemParams, n_max: usize) -> Result<(Vec<f64>, f64)> {
    match spec {
        FieldSpec::Steady => {
            let tail = (steady_mean(p) / (1.0 + steady_mean(p))).powi(n_max as i32 + 1);
            Ok((field_steady_state(p.kappa, p.n_th, p.gamma_c, n_max)?, tail))
        }
        FieldSpec::Thermal => {
            let th = thermal_distribution(p.n_th, n_max)?;
            Ok((th.probabilities, th.discarded_tail))
        }
        FieldSpec::Vacuum => {
            let mut v = vec![0.0; n_max + 1];
            v[0] = 1.0;
            Ok((v, 0.0))
        }
    }
}

fn analytic_distribution(p: &SystemParams, n_max: usize) -> Result<Vec<f64>> {
    if p.kappa > 0.0 {
        field_steady_state(p.kappa, p.n_th, p.gamma_c, n_max)
    } else {
        Ok(thermal_distribution(p.n_th, n_max)?.probabilities)
    }
}

fn mean(dist: &[f64]) -> f64 {
    dist.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Truncation used when the scenario does not fix one.
pub fn scenario_basis(s: &Scenario) -> Result<BasisSpec> {
    match s.n_max {
        Some(n) => BasisSpec::new(n),
        None => {
            let initial = match (s.kind, s.initial_field) {
                (ScenarioKind::Field, _) | (_, FieldSpec::Thermal) => s.params.n_th,
                (_, FieldSpec::Steady) => steady_mean(&s.params),
                (_, FieldSpec::Vacuum) => 0.0,
            };
            Ok(BasisSpec::default_for(initial.max(steady_mean(&s.params))))
        }
    }
}

/// Runs a scenario with the given truncation and integrator tolerances.
pub fn run_with(s: &Scenario, basis: &BasisSpec, tolerances: Tolerances) -> Result<RunOutput> {
    let p = &s.params;
    let times = uniform_grid(s.t_final, s.samples);
    let n_max = basis.n_max();
    let (initial_dist, initial_tail) = initial_distribution(s.initial_field, p, n_max)?;
    let photon_analytic = analytic_distribution(p, n_max)?;
    let mut warnings: Vec<String> = Vec::new();

    let field = field_state_from_distribution(&initial_dist)?;
    let (series, photon_sim) = match s.kind {
        ScenarioKind::Transfer => {
            let generator = build_generator(p, basis)?;
            let rho0 = product_state(s.initial_atoms.0, s.initial_atoms.1, &field)?;
            let options = EvolveOptions { tolerances, strict: s.strict, truncation_monitor: Some(top_fock_projector(basis)) };
            let series = evolve(&generator, &rho0, &times, &transfer_observables(basis)?, &options)?;
            let reduced = partial_trace_atoms(&series.final_state, basis)?;
            let dist = reduced.populations();
            (series, dist)
        }
        ScenarioKind::Field => {
            let generator = field_generator(p.kappa, p.n_th, p.gamma_c, n_max)?;
            let top = SparseOperator::from_triplets(n_max + 1, [(n_max, n_max, C64::new(1.0, 0.0))])?;
            let options = EvolveOptions { tolerances, strict: s.strict, truncation_monitor: Some(top) };
            let observables = [Observable::new("n_photon", fock_number(n_max))];
            let series = evolve(&generator, &field, &times, &observables, &options)?;
            let dist = series.final_state.populations();
            (series, dist)
        }
    };

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    let mut effective_model = None;
    let mut transfer = None;
    let mut field_summary = None;
    let t_tr = transfer_time(p).ok();

    match s.kind {
        ScenarioKind::Transfer => {
            let col = |name: &str| series.column(name).expect("transfer observable").to_vec();
            let p_ab = col("p_ab");
            let from_ba = s.initial_atoms == (AtomLevel::B, AtomLevel::A);
            let analytic = if from_ba {
                transfer_curve(p, &times, &initial_dist, Damping::None)?
            } else {
                warnings.push("p_ab_analytic is only defined for the initial atomic state ba".into());
                vec![f64::NAN; times.len()]
            };
            if from_ba {
                if let Some(t_tr) = t_tr {
                    let damped = transfer_curve(p, &times, &initial_dist, Damping::CavityInduced)?;
                    let upto = times.iter().take_while(|&&t| t <= t_tr * (1.0 + 1e-12)).count();
                    let dev_u = max_abs_diff(&p_ab, &analytic);
                    let dev_d = max_abs_diff(&p_ab, &damped);
                    let regime = regime_report(p, &initial_dist);
                    if regime.mass_outside > REGIME_MASS_WARNING {
                        warnings.push(format!(
                            "effective model: probability {:.3e} lies at photon numbers outside its validity regime (from n = {})",
                            regime.mass_outside,
                            regime.first_violating_n.unwrap_or(0)
                        ));
                    }
                    effective_model = Some(EffectiveComparison {
                        t_tr,
                        regime,
                        max_abs_deviation_undamped: dev_u,
                        max_abs_deviation_damped: dev_d,
                        max_abs_deviation_undamped_to_t_tr: max_abs_diff(&p_ab[..upto], &analytic[..upto]),
                        max_abs_deviation_damped_to_t_tr: max_abs_diff(&p_ab[..upto], &damped[..upto]),
                        better_variant: if dev_d < dev_u { Damping::CavityInduced } else { Damping::None },
                        peak_analytic: analytic.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    });
                } else {
                    warnings.push("effective model outside its validity regime at n = 0; t_tr undefined".into());
                }
            }
            let window = t_tr.map_or(times.len(), |t| times.iter().take_while(|&&x| x <= 2.0 * t * (1.0 + 1e-12)).count());
            let (peak_p_ab, t_peak) = peak_of(&times[..window], &p_ab[..window]);
            transfer = Some(TransferSummary { peak_p_ab, t_peak });
            columns.push(("p_ba".into(), col("p_ba")));
            columns.push(("p_ab".into(), p_ab));
            columns.push(("p_ab_analytic".into(), analytic));
            columns.push(("n_photon".into(), col("n_photon")));
            columns.push(("trace".into(), col("trace")));
        }
        ScenarioKind::Field => {
            let n0 = mean(&initial_dist);
            let n_ss = mean(&photon_analytic);
            let rate = p.kappa + p.gamma_c;
            let analytic: Vec<f64> = times.iter().map(|t| n_ss + (n0 - n_ss) * (-rate * t).exp()).collect();
            field_summary = Some(FieldSummary {
                max_bin_deviation: max_abs_diff(&photon_sim, &photon_analytic),
                final_mean_photons: mean(&photon_sim),
                steady_mean_photons: n_ss,
            });
            columns.push(("n_photon".into(), series.column("n_photon").expect("observable").to_vec()));
            columns.push(("n_photon_analytic".into(), analytic));
            columns.push(("trace".into(), series.column("trace").expect("trace").to_vec()));
        }
    }

    let budget = match s.kind {
        ScenarioKind::Transfer => fidelity_budget(p).ok(),
        ScenarioKind::Field => None,
    };
    if let Some(b) = &budget {
        for c in b.regime.iter().filter(|c| c.status != CheckStatus::Pass) {
            warnings.push(format!("fidelity-bound regime {}: ratio {:.4} ({:?})", c.name, c.ratio, c.status));
        }
    }
    let optimum = match s.kind {
        ScenarioKind::Transfer => optimal_extraction(p.g1, p.g2, p.gamma, p.kappa, p.n_th).ok(),
        ScenarioKind::Field => None,
    };
    let mut single_excitation = None;
    if let Some(c) = &s.cooling {
        warnings.extend(c.warnings().into_iter().map(|w| format!("cooling: {w}")));
        if let Some(ens) = &s.ensemble {
            single_excitation = single_excitation_violation(ens, c.gamma_r, &photon_analytic);
            if let Some(n) = single_excitation {
                warnings.push(format!("cooling: single-excitation condition Γ_r ≥ 5·Ω_n⁽²⁾ fails up to n = {n}"));
            }
        }
    }
    let diag = series.diagnostics.clone();
    if diag.truncation_suspect {
        warnings.push(format!(
            "TRUNCATION_SUSPECT: top Fock population {:.3e} exceeds {:.0e}; increase n_max",
            diag.max_top_fock_population, TRUNCATION_THRESHOLD
        ));
    }

    let report = RunReport {
        scenario: s.name.clone(),
        description: s.description.clone(),
        kind: s.kind,
        units: UnitsReport {
            frequency_unit: "g2",
            g2_rad_s: s.g2_rad_s,
            time_column_unit: if s.g2_rad_s.is_some() { "s" } else { "1/g2" },
        },
        params: *p,
        n_max,
        initial_atoms: match s.kind {
            ScenarioKind::Transfer => [level_char(s.initial_atoms.0), level_char(s.initial_atoms.1)].iter().collect(),
            ScenarioKind::Field => String::new(),
        },
        initial_field: s.initial_field,
        initial_mean_photons: mean(&initial_dist),
        steady_mean_photons: steady_mean(p),
        t_final: s.t_final,
        samples: s.samples,
        cooling: s.cooling.clone(),
        single_excitation_violation: single_excitation,
        budget,
        optimum,
        effective_model,
        transfer,
        field: field_summary,
        min_eigenvalue: diag.min_eigenvalue(),
        truncation: TruncationReport {
            threshold: TRUNCATION_THRESHOLD,
            max_top_fock_population: diag.max_top_fock_population,
            suspect: diag.truncation_suspect,
            initial_discarded_tail: initial_tail,
        },
        diagnostics: diag,
        convergence: Convergence::NotCertified,
        warnings,
    };
    Ok(RunOutput { scenario: s.clone(), times, columns, initial_distribution: initial_dist, photon_sim, photon_analytic, report })
}

/// Runs a scenario at its default (or configured) truncation and tolerances.
pub fn run_scenario(s: &Scenario) -> Result<RunOutput> {
    run_with(s, &scenario_basis(s)?, Tolerances::default())
}
