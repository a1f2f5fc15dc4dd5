use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use cavity_transfer::optimizer::{
    fidelity_budget, optimal_extraction, refine_with_simulation, FidelityBudget, Optimum, SimulationRefinement,
};
use cavity_transfer::scenario::{
    certify, load, preset_description, run_scenario, write_outputs, Convergence, Overrides, Scenario, ScenarioKind, PRESETS,
};
use cavity_transfer::transfer::TransferOptions;
use cavity_transfer::{Error, SystemParams};

#[derive(Parser)]
#[command(name = "cavity-transfer", version, about = "Qubit excitation transfer through a cooled thermal cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Preset name (see `list-presets`) or path to a scenario TOML file
    target: String,
    /// Output directory (sweeps write one subdirectory per member)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fock-space truncation; chosen from the photon number when absent
    #[arg(long)]
    n_max: Option<usize>,
    /// Treat a suspect truncation as an error (exit code 3)
    #[arg(long)]
    strict: bool,
    /// Replace the extraction rate (and any sweep) by gamma_c = R * kappa
    #[arg(long, value_name = "R")]
    gamma_c_ratio: Option<f64>,
    /// Read all rates in the file as rad/s, normalized by this g2
    #[arg(long, value_name = "G2_RAD_S")]
    absolute_units: Option<f64>,
}

impl ScenarioArgs {
    fn overrides(&self) -> Overrides {
        Overrides { n_max: self.n_max, strict: self.strict, gamma_c_ratio: self.gamma_c_ratio, g2_rad_s: self.absolute_units }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write timeseries.csv, photon_dist.csv and report.json
    Run(ScenarioArgs),
    /// Closed-form optimum of the fidelity budget, optionally refined by simulation
    Optimize {
        /// Preset name or scenario file
        target: String,
        /// Scan full simulations on a grid around the closed-form optimum
        #[arg(long)]
        simulate: bool,
        /// Fock-space truncation for --simulate
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Rerun with n_max doubled and tolerances tightened tenfold; fail if any observable moves by 1e-4 or more
    Certify(ScenarioArgs),
    /// List the built-in scenarios
    ListPresets,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::TruncationSuspect { .. } => 3,
        Error::Io(_) | Error::StepSizeUnderflow { .. } => 1,
        _ => 2,
    }
}

fn out_dirs(scenarios: &[Scenario], out: &Option<PathBuf>) -> Vec<PathBuf> {
    match (scenarios.len(), out) {
        (1, Some(dir)) => vec![dir.clone()],
        (_, Some(dir)) => scenarios.iter().map(|s| dir.join(&s.name)).collect(),
        (_, None) => scenarios.iter().map(|s| Path::new("out").join(&s.name)).collect(),
    }
}

/// Runs every scenario concurrently; returns the worst exit code.
fn run_all(args: &ScenarioArgs, certifying: bool) -> Result<u8, Error> {
    let scenarios = load(&args.target, &args.overrides())?;
    let dirs = out_dirs(&scenarios, &args.out);
    let results: Vec<_> = scenarios.par_iter().map(|s| if certifying { certify(s) } else { run_scenario(s) }).collect();
    let mut code = 0;
    for ((s, dir), result) in scenarios.iter().zip(&dirs).zip(results) {
        match result {
            Ok(out) => {
                write_outputs(&out, dir)?;
                let r = &out.report;
                let summary = match (&r.transfer, &r.field) {
                    (Some(t), _) => format!("peak p_ab = {:.4} at t = {:.6e}", t.peak_p_ab, t.t_peak * s.time_scale()),
                    (_, Some(f)) => format!("final <n> = {:.4} (steady {:.4})", f.final_mean_photons, f.steady_mean_photons),
                    _ => String::new(),
                };
                println!("{}: n_max = {}, {summary} -> {}", s.name, r.n_max, dir.display());
                for w in &r.warnings {
                    eprintln!("  warning: {w}");
                }
                match &r.convergence {
                    Convergence::NotCertified => {}
                    Convergence::Pass { largest, .. } => {
                        println!("  CERTIFIED: largest shift {:.3e} ({}[{}])", largest.shift, largest.observable, largest.index)
                    }
                    Convergence::Fail { largest, threshold, .. } => {
                        println!(
                            "  NOT CONVERGED: {}[{}] shifted by {:.3e} (threshold {threshold:e})",
                            largest.observable, largest.index, largest.shift
                        );
                        code = code.max(1);
                    }
                }
            }
            Err(e) => {
                eprintln!("{}: error: {e}", s.name);
                code = code.max(exit_code(&e));
            }
        }
    }
    Ok(code)
}

#[derive(Serialize)]
struct OptimizeReport {
    scenario: String,
    params: SystemParams,
    budget: FidelityBudget,
    optimum: Optimum,
    simulation: Option<SimulationRefinement>,
}

fn optimize(target: &str, simulate: bool, n_max: Option<usize>) -> Result<u8, Error> {
    let mut reports = Vec::new();
    for s in load(target, &Overrides::default())? {
        if s.kind != ScenarioKind::Transfer {
            return Err(Error::Config(format!("`{}` is not a transfer scenario", s.name)));
        }
        let p = s.params;
        let optimum = optimal_extraction(p.g1, p.g2, p.gamma, p.kappa, p.n_th)?;
        let budget = fidelity_budget(&p)?;
        let simulation = if simulate {
            let factors = [0.5, 0.7, 1.0, 1.4, 2.0];
            let deltas: Vec<f64> = factors.iter().map(|f| f * optimum.delta_opt).collect();
            let gamma_cs: Vec<f64> = factors.iter().map(|f| f * optimum.gamma_c_opt).collect();
            Some(refine_with_simulation(&p, &deltas, &gamma_cs, n_max, &TransferOptions::default())?)
        } else {
            None
        };
        reports.push(OptimizeReport { scenario: s.name.clone(), params: p, budget, optimum, simulation });
    }
    let json = serde_json::to_string_pretty(&reports).map_err(|e| Error::Config(e.to_string()))?;
    println!("{json}");
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run_all(args, false),
        Command::Certify(args) => run_all(args, true),
        Command::Optimize { target, simulate, n_max } => optimize(target, *simulate, *n_max),
        Command::ListPresets => {
            for p in PRESETS {
                println!("{:<12} {}", p.name, preset_description(p));
            }
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
