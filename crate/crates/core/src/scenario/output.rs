use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::run::RunOutput;
use crate::error::{Error, Result};

/// Shortest representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:?}")
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> String {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        let line: Vec<String> = row.into_iter().map(num).collect();
        let _ = writeln!(text, "{}", line.join(","));
    }
    text
}

/// Writes `timeseries.csv`, `photon_dist.csv` and `report.json` into `dir`.
///
/// The `t` column is in seconds for absolute-unit scenarios and in `1/g2` otherwise.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let scale = out.scenario.time_scale();
    let mut header = vec!["t"];
    header.extend(out.columns.iter().map(|(n, _)| n.as_str()));
    let rows = out.times.iter().enumerate().map(|(k, &t)| {
        let mut row = vec![t * scale];
        row.extend(out.columns.iter().map(|(_, v)| v[k]));
        row
    });
    fs::write(dir.join("timeseries.csv"), csv(&header, rows))?;

    let rows = out.photon_sim.iter().zip(&out.photon_analytic).enumerate().map(|(n, (&sim, &ana))| vec![n as f64, sim, ana]);
    let mut text = String::from("n,P_n_sim,P_n_analytic\n");
    for r in rows {
        let _ = writeln!(text, "{},{},{}", r[0] as usize, num(r[1]), num(r[2]));
    }
    fs::write(dir.join("photon_dist.csv"), text)?;

    let json = serde_json::to_string_pretty(&out.report).map_err(|e| Error::Config(format!("cannot serialize report: {e}")))?;
    fs::write(dir.join("report.json"), json + "\n")?;
    Ok(())
}
