//! Scenario files: TOML with a fixed schema. Unknown keys are rejected and
//! every physics parameter must be given explicitly.

use serde::{Deserialize, Serialize};

use crate::cooling::{extraction_rate, CoolingEnsemble, CoolingReport, ValidityPolicy};
use crate::effective::{effective_coupling, transfer_time};
use crate::error::{Error, Result};
use crate::hilbert::AtomLevel;
use crate::optimizer::{resonant_detunings_about_mean, resonant_partner_detuning};
use crate::params::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Two atoms and the cavity, starting from the atomic state in `[initial]`.
    Transfer,
    /// The cavity alone relaxing from the thermal state under loss and extraction.
    Field,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSpec {
    /// Stationary state of the cooled cavity (thermal with `n̄_eff`).
    Steady,
    /// Thermal with `n̄_th`.
    Thermal,
    Vacuum,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    g1: f64,
    g2: Option<f64>,
    delta1: Option<f64>,
    delta2: Option<f64>,
    delta_mean: Option<f64>,
    /// Choose `Δ1 − Δ2` so that `δE(0) = 0`.
    resonant: Option<bool>,
    /// `Δ1 − Δ2` in multiples of `G(0)` evaluated at `Δ1 = Δ2 = delta_mean`.
    mismatch_g0: Option<f64>,
    kappa: f64,
    n_th: f64,
    gamma: f64,
    gamma_c: Option<f64>,
    gamma_c_ratio: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    atoms: Option<String>,
    field: FieldSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_final: Option<f64>,
    /// Final time in multiples of `t_tr = π/(2G(0))`.
    t_final_ttr: Option<f64>,
    /// Final time in multiples of `1/(κ + γ_c)`.
    t_final_relax: Option<f64>,
    samples: usize,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    n_max: Option<usize>,
    strict: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawUnits {
    g2_rad_s: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    gamma_c_ratio: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
    kind: ScenarioKind,
    params: RawParams,
    ensemble: Option<CoolingEnsemble>,
    initial: Option<RawInitial>,
    time: RawTime,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    units: RawUnits,
    sweep: Option<RawSweep>,
}

/// Command-line adjustments applied on top of a scenario file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n_max: Option<usize>,
    pub strict: bool,
    pub gamma_c_ratio: Option<f64>,
    pub g2_rad_s: Option<f64>,
}

/// A fully resolved, runnable scenario in model units (`g2 = 1` unless the
/// file sets another scale).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub kind: ScenarioKind,
    /// Parameters in model units.
    pub params: SystemParams,
    /// `g2` in rad/s when the file is written in absolute units.
    pub g2_rad_s: Option<f64>,
    pub cooling: Option<CoolingReport>,
    /// The cooling ensemble as written in the file, when `γ_c` comes from one.
    pub ensemble: Option<CoolingEnsemble>,
    pub initial_atoms: (AtomLevel, AtomLevel),
    pub initial_field: FieldSpec,
    pub t_final: f64,
    pub samples: usize,
    pub n_max: Option<usize>,
    pub strict: bool,
}

impl Scenario {
    /// Seconds per model time unit (1 when not in absolute units).
    pub fn time_scale(&self) -> f64 {
        self.g2_rad_s.map_or(1.0, |g| 1.0 / g)
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_atoms(s: &str) -> Result<(AtomLevel, AtomLevel)> {
    let chars: Vec<char> = s.chars().collect();
    match chars.as_slice() {
        [a, b] => match (AtomLevel::from_char(*a), AtomLevel::from_char(*b)) {
            (Some(l1), Some(l2)) => Ok((l1, l2)),
            _ => Err(config_err(format!("initial.atoms `{s}`: levels must be a, b or s"))),
        },
        _ => Err(config_err(format!("initial.atoms `{s}` must name two levels, e.g. \"ba\""))),
    }
}

fn resolve_detunings(p: &RawParams, g1: f64, g2: f64, scale: f64) -> Result<(f64, f64)> {
    let resonant = p.resonant.unwrap_or(false);
    match (p.delta1, p.delta2, p.delta_mean, p.mismatch_g0) {
        (Some(d1), Some(d2), None, None) if !resonant => Ok((d1 / scale, d2 / scale)),
        (Some(d1), None, None, None) if resonant => {
            let d1 = d1 / scale;
            Ok((d1, resonant_partner_detuning(g1, g2, d1)?))
        }
        (None, None, Some(mean), None) if resonant => resonant_detunings_about_mean(g1, g2, mean / scale),
        (None, None, Some(mean), Some(m)) if !resonant => {
            let mean = mean / scale;
            let probe = SystemParams { g1, g2, delta1: mean, delta2: mean, kappa: 0.0, n_th: 0.0, gamma: 0.0, gamma_c: 0.0 };
            let (g0, _) = effective_coupling(&probe, 0)?;
            Ok((mean + 0.5 * m * g0, mean - 0.5 * m * g0))
        }
        _ => Err(config_err(
            "detunings: give `delta1` and `delta2`; or `delta1` with `resonant = true`; \
             or `delta_mean` with `resonant = true`; or `delta_mean` with `mismatch_g0`",
        )),
    }
}

/// Parses a scenario file and expands its sweep into runnable scenarios.
pub fn parse_scenarios(text: &str, overrides: &Overrides) -> Result<Vec<Scenario>> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
    let g2_rad_s = overrides.g2_rad_s.or(raw.units.g2_rad_s);
    if let Some(g) = g2_rad_s {
        if !(g > 0.0 && g.is_finite()) {
            return Err(config_err(format!("g2_rad_s must be positive, got {g}")));
        }
    }
    let has_rate = raw.params.gamma_c.is_some() || raw.params.gamma_c_ratio.is_some() || raw.ensemble.is_some();
    if raw.sweep.is_some() && has_rate {
        return Err(config_err("[sweep] replaces params.gamma_c / gamma_c_ratio / [ensemble]; give only one"));
    }
    let ratios: Vec<Option<f64>> = match (overrides.gamma_c_ratio, &raw.sweep) {
        (Some(r), _) => vec![Some(r)],
        (None, Some(s)) if !s.gamma_c_ratio.is_empty() => s.gamma_c_ratio.iter().copied().map(Some).collect(),
        (None, Some(_)) => return Err(config_err("sweep.gamma_c_ratio is empty")),
        (None, None) => vec![None],
    };
    let sweeping = ratios.len() > 1 || overrides.gamma_c_ratio.is_some();
    ratios
        .into_iter()
        .map(|ratio| {
            let mut s = resolve(&raw, ratio, g2_rad_s, overrides)?;
            if sweeping {
                s.name = format!("{}-gcr{}", raw.name, ratio.expect("sweep value"));
            }
            Ok(s)
        })
        .collect()
}

fn resolve(raw: &RawScenario, ratio_override: Option<f64>, g2_rad_s: Option<f64>, overrides: &Overrides) -> Result<Scenario> {
    let p = &raw.params;
    let scale = g2_rad_s.unwrap_or(1.0);
    let g2 = match (p.g2, g2_rad_s) {
        (Some(g2), None) => g2,
        (None, Some(_)) => 1.0,
        (Some(g2), Some(unit)) if (g2 - unit).abs() <= 1e-12 * unit => 1.0,
        (Some(g2), Some(unit)) => {
            return Err(config_err(format!("params.g2 = {g2} conflicts with the declared unit g2_rad_s = {unit}")))
        }
        (None, None) => return Err(config_err("params.g2 is required unless units.g2_rad_s is set")),
    };
    let g1 = p.g1 / scale;
    let (delta1, delta2) = resolve_detunings(p, g1, g2, scale)?;
    let kappa = p.kappa / scale;
    let gamma = p.gamma / scale;

    let sources = [p.gamma_c.is_some(), p.gamma_c_ratio.is_some(), raw.ensemble.is_some()];
    let mut cooling = None;
    let gamma_c = if let Some(r) = ratio_override {
        r * kappa
    } else {
        match sources {
            [true, false, false] => p.gamma_c.unwrap() / scale,
            [false, true, false] => p.gamma_c_ratio.unwrap() * kappa,
            [false, false, true] => {
                let report = extraction_rate(raw.ensemble.as_ref().unwrap(), ValidityPolicy::Enforce)?;
                let rate = report.gamma_c / scale;
                cooling = Some(report);
                rate
            }
            _ => {
                return Err(config_err(
                    "give exactly one of params.gamma_c, params.gamma_c_ratio or an [ensemble] section \
                     (or a [sweep] of gamma_c_ratio)",
                ))
            }
        }
    };
    if ratio_override.is_some() && raw.ensemble.is_some() {
        cooling = None;
    }

    let params = SystemParams { g1, g2, delta1, delta2, kappa, n_th: p.n_th, gamma, gamma_c };
    params.validate()?;

    let (initial_atoms, initial_field) = match (raw.kind, &raw.initial) {
        (ScenarioKind::Transfer, Some(init)) => {
            let atoms = init.atoms.as_deref().ok_or_else(|| config_err("initial.atoms is required for transfer scenarios"))?;
            (parse_atoms(atoms)?, init.field)
        }
        (ScenarioKind::Transfer, None) => return Err(config_err("transfer scenarios need an [initial] section")),
        (ScenarioKind::Field, Some(init)) => {
            if init.atoms.is_some() {
                return Err(config_err("field scenarios have no atoms; remove initial.atoms"));
            }
            (parse_atoms("ss")?, init.field)
        }
        (ScenarioKind::Field, None) => return Err(config_err("field scenarios need an [initial] section")),
    };
    if initial_field == FieldSpec::Steady && kappa <= 0.0 {
        return Err(config_err("initial.field = \"steady\" needs kappa > 0"));
    }

    let t = &raw.time;
    let t_final = match (t.t_final, t.t_final_ttr, t.t_final_relax) {
        (Some(v), None, None) => v * scale,
        (None, Some(m), None) => m * transfer_time(&params)?,
        (None, None, Some(m)) => {
            let rate = params.kappa + params.gamma_c;
            if rate <= 0.0 {
                return Err(config_err("time.t_final_relax needs kappa + gamma_c > 0"));
            }
            m / rate
        }
        _ => return Err(config_err("time: give exactly one of t_final, t_final_ttr, t_final_relax")),
    };
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(config_err(format!("final time must be positive, got {t_final}")));
    }
    if t.samples < 2 {
        return Err(config_err("time.samples must be at least 2"));
    }

    Ok(Scenario {
        name: raw.name.clone(),
        description: raw.description.clone(),
        kind: raw.kind,
        params,
        g2_rad_s,
        ensemble: if cooling.is_some() { raw.ensemble } else { None },
        cooling,
        initial_atoms,
        initial_field,
        t_final,
        samples: t.samples,
        n_max: overrides.n_max.or(raw.run.n_max),
        strict: overrides.strict || raw.run.strict.unwrap_or(false),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const BASE: &str = r#"
name = "t"
kind = "transfer"
[params]
g1 = 1.4
g2 = 1.0
delta_mean = 30.0
resonant = true
kappa = 0.01
n_th = 5.0
gamma = 3e-4
gamma_c_ratio = 9.0
[initial]
atoms = "ba"
field = "steady"
[time]
t_final_ttr = 2.0
samples = 11
"#;

    fn one(text: &str) -> Result<Scenario> {
        parse_scenarios(text, &Overrides::default()).map(|mut v| v.remove(0))
    }

    #[test]
    fn base_resolves() {
        let s = one(BASE).unwrap();
        assert_relative_eq!(s.params.gamma_c, 0.09);
        assert_relative_eq!(s.params.delta(), -0.032, epsilon = 1e-13);
        assert_eq!(s.initial_atoms, (AtomLevel::B, AtomLevel::A));
        assert_relative_eq!(s.t_final, 2.0 * transfer_time(&s.params).unwrap());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = BASE.replace("gamma = 3e-4", "gamma = 3e-4\ngama = 1.0");
        assert!(matches!(one(&text), Err(Error::Config(_))));
        let text = BASE.replace("[time]", "[extra]\nx = 1\n[time]");
        assert!(matches!(one(&text), Err(Error::Config(_))));
    }

    #[test]
    fn physics_parameters_have_no_defaults() {
        let text = BASE.replace("kappa = 0.01\n", "");
        assert!(matches!(one(&text), Err(Error::Config(_))));
        let text = BASE.replace("gamma_c_ratio = 9.0\n", "");
        assert!(matches!(one(&text), Err(Error::Config(_))));
        let text = BASE.replace("resonant = true\n", "");
        assert!(matches!(one(&text), Err(Error::Config(_))));
    }

    #[test]
    fn conflicting_sources_are_rejected() {
        let text = BASE.replace("gamma_c_ratio = 9.0", "gamma_c_ratio = 9.0\ngamma_c = 0.1");
        assert!(one(&text).is_err());
        let text = BASE.replace("t_final_ttr = 2.0", "t_final_ttr = 2.0\nt_final = 3.0");
        assert!(one(&text).is_err());
        let text = BASE.to_string() + "[sweep]\ngamma_c_ratio = [0.0]\n";
        assert!(one(&text).is_err());
    }

    #[test]
    fn sweep_and_override() {
        let text = BASE.replace("gamma_c_ratio = 9.0\n", "") + "[sweep]\ngamma_c_ratio = [0.0, 4.0]\n";
        let all = parse_scenarios(&text, &Overrides::default()).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].name, "t-gcr4");
        assert_relative_eq!(all[1].params.gamma_c, 0.04);
        let single = parse_scenarios(&text, &Overrides { gamma_c_ratio: Some(49.0), ..Default::default() }).unwrap();
        assert_eq!(single.len(), 1);
        assert_relative_eq!(single[0].params.gamma_c, 0.49);
    }

    #[test]
    fn absolute_units_are_normalized_by_g2() {
        let text = r#"
name = "abs"
kind = "transfer"
[units]
g2_rad_s = 2.0e6
[params]
g1 = 2.0e6
delta1 = 6.0e7
delta2 = 6.0e7
kappa = 2.0e4
n_th = 1.0
gamma = 2.0e3
gamma_c = 0.0
[initial]
atoms = "ba"
field = "thermal"
[time]
t_final = 1.0e-5
samples = 3
"#;
        let s = one(text).unwrap();
        assert_eq!(s.params.g2, 1.0);
        assert_relative_eq!(s.params.delta1, 30.0);
        assert_relative_eq!(s.params.kappa, 0.01);
        assert_relative_eq!(s.t_final, 20.0);
        assert_relative_eq!(s.time_scale(), 5e-7);
        let bad = text.replace("g1 = 2.0e6", "g1 = 2.0e6\ng2 = 3.0e6");
        assert!(one(&bad).is_err());
    }

    #[test]
    fn mismatch_in_units_of_g0() {
        let text = BASE.replace("resonant = true", "mismatch_g0 = 20.0");
        let s = one(&text).unwrap();
        let probe = SystemParams { delta1: 30.0, delta2: 30.0, ..s.params };
        let g0 = effective_coupling(&probe, 0).unwrap().0;
        assert_relative_eq!(s.params.delta(), 20.0 * g0, max_relative = 1e-12);
    }

    #[test]
    fn initial_state_validation() {
        assert!(one(&BASE.replace("atoms = \"ba\"", "atoms = \"bx\"")).is_err());
        assert!(one(&BASE.replace("atoms = \"ba\"", "atoms = \"bab\"")).is_err());
        let field = BASE.replace("kind = \"transfer\"", "kind = \"field\"");
        assert!(one(&field).is_err());
        assert!(one(&field.replace("atoms = \"ba\"\n", "")).is_ok());
    }
}
