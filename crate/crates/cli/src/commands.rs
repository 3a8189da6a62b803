use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qdchain::gate::{configurations, FIDELITY_CONVENTION};
use qdchain::random::{random_chain, relative_error, rng};
use qdchain::{
    cascade, dressed_mode_positions, find_features, gate_sweep, group_delay, oracle_scattering,
    scattering, sweep, Channel, DetuningScenario, FrequencyGrid, ValidatedChain,
};
use serde_json::json;

use crate::config::{self, ConfigDocument, Defaults, LoadedConfig};
use crate::error::CliError;
use crate::output::{num, sidecar, summary_line, write_atomic, Csv, RunManifest};

/// Engine and oracle must agree to this relative error.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Largest tolerated fraction of grid points lost to poles.
pub const MAX_MASKED_FRACTION: f64 = 0.01;

/// Prints a line to stdout, ignoring a closed pipe.
fn say(line: &str) {
    let _ = writeln!(std::io::stdout(), "{line}");
}

pub struct GridFlags {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

fn grid(loaded: &LoadedConfig, flags: &GridFlags) -> Result<FrequencyGrid, CliError> {
    loaded.grid(flags.start, flags.stop, flags.points)
}

fn write_pair(
    out: &Path,
    stem: &str,
    subcommand: &'static str,
    digest: &str,
    started: Instant,
    csv: String,
    extra: serde_json::Value,
) -> Result<(PathBuf, PathBuf), CliError> {
    let csv_path = out.join(format!("{stem}.csv"));
    let json_path = out.join(format!("{stem}.json"));
    write_atomic(&csv_path, csv.as_bytes())?;
    let manifest = RunManifest::new(
        digest,
        subcommand,
        started,
        vec![csv_path.clone(), json_path.clone()],
    );
    write_atomic(&json_path, sidecar(&manifest, extra)?.as_bytes())?;
    Ok((csv_path, json_path))
}

pub fn validate(config: &Path) -> Result<(), CliError> {
    let loaded = config::load(config)?;
    say(&loaded.echo());
    eprintln!("config_digest={}", loaded.digest());
    Ok(())
}

pub fn spectrum(
    config: &Path,
    flags: &GridFlags,
    oracle: bool,
    out: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = config::load(config)?;
    let digest = loaded.digest();
    let grid = grid(&loaded, flags)?;
    let spec = sweep(&loaded.chain, &grid);

    let mut columns = vec![
        "omega",
        "re_r",
        "im_r",
        "re_t",
        "im_t",
        "T_power",
        "R_power",
        "loss",
        "phase_unwrapped",
    ];
    if oracle {
        columns.extend(["oracle_re_t", "oracle_im_t", "max_rel_err"]);
    }
    let mut csv = Csv::new(&digest, &columns);
    let mut worst = 0.0f64;
    for p in &spec.points {
        let mut row = vec![
            num(p.omega),
            num(p.r.re),
            num(p.r.im),
            num(p.t.re),
            num(p.t.im),
            num(p.transmittance()),
            num(p.reflectance()),
            num(p.loss()),
            num(p.phase_t),
        ];
        if oracle {
            let (ot, err) = match oracle_scattering(&loaded.chain, p.omega) {
                Ok(o) => (o.t, relative_error(p.r, o.r).max(relative_error(p.t, o.t))),
                Err(_) => (qdchain::Complex64::new(f64::NAN, f64::NAN), f64::INFINITY),
            };
            worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
            row.extend([num(ot.re), num(ot.im), num(err)]);
        }
        csv.row(row);
    }

    let features = find_features(&spec, loaded.prominence());
    let masked: Vec<f64> = spec.masked.iter().map(|m| m.omega).collect();
    let extra = json!({
        "grid": grid,
        "units": "kappa0",
        "prominence": loaded.prominence(),
        "features": features,
        "masked_omega": masked,
        "masked_fraction": spec.masked_fraction(),
        "oracle_max_rel_err": if oracle { Some(worst) } else { None },
    });
    let (csv_path, _) = write_pair(
        out,
        "spectrum",
        "spectrum",
        &digest,
        started,
        csv.finish(),
        extra,
    )?;

    let mut summary = vec![
        ("samples", spec.sample_count().to_string()),
        ("features", features.len().to_string()),
        ("masked", spec.masked.len().to_string()),
    ];
    if oracle {
        summary.push(("oracle_max_rel_err", format!("{worst:.3e}")));
    }
    say(&summary_line(&csv_path.display().to_string(), &summary));

    if spec.masked_fraction() > MAX_MASKED_FRACTION {
        return Err(CliError::Degenerate(format!(
            "{} of {} samples hit a singularity",
            spec.masked.len(),
            spec.sample_count()
        )));
    }
    if oracle && worst > ORACLE_TOLERANCE {
        return Err(CliError::CrossCheck(format!(
            "engine and oracle differ by {worst:.3e} (> {ORACLE_TOLERANCE:e})"
        )));
    }
    Ok(())
}

pub fn delay(
    config: &Path,
    flags: &GridFlags,
    channel: Channel,
    out: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = config::load(config)?;
    let digest = loaded.digest();
    let grid = grid(&loaded, flags)?;
    let spec = sweep(&loaded.chain, &grid);
    if spec.masked_fraction() > MAX_MASKED_FRACTION {
        return Err(CliError::Degenerate(format!(
            "{} of {} samples hit a singularity",
            spec.masked.len(),
            spec.sample_count()
        )));
    }
    let delay = group_delay(&spec, channel).map_err(|e| CliError::Degenerate(e.to_string()))?;

    let mut csv = Csv::new(
        &digest,
        &["omega", "phase_unwrapped", "tau", "tau_over_taulife"],
    );
    for k in 0..delay.omega.len() {
        csv.row([
            num(delay.omega[k]),
            num(delay.phase[k]),
            num(delay.tau[k]),
            num(delay.tau_over_lifetime[k]),
        ]);
    }
    let (omega_peak, tau_peak) = delay.peak();
    let extra = json!({
        "grid": grid,
        "units": "kappa0",
        "channel": channel,
        "lifetime": delay.lifetime,
        "peak": { "omega": omega_peak, "tau": tau_peak, "tau_over_taulife": tau_peak / delay.lifetime },
    });
    let (csv_path, _) = write_pair(out, "delay", "delay", &digest, started, csv.finish(), extra)?;
    say(&summary_line(
        &csv_path.display().to_string(),
        &[
            ("peak_omega", format!("{omega_peak:.6}")),
            (
                "peak_tau_over_taulife",
                format!("{:.3}", tau_peak / delay.lifetime),
            ),
        ],
    ));
    Ok(())
}

/// Comma-separated reals, e.g. `0,0.5,1`.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("not a finite number: {s:?}"))
        })
        .collect()
}

/// Default g/Γ list: 0 to 2 in steps of 0.05.
pub fn default_g_list() -> Vec<f64> {
    (0..=40).map(|k| k as f64 / 20.0).collect()
}

fn load_scenarios(
    path: Option<&Path>,
    loaded: &LoadedConfig,
) -> Result<Vec<DetuningScenario>, CliError> {
    let mut scenarios = vec![DetuningScenario::resonant()];
    let Some(path) = path else {
        return Ok(scenarios);
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let listed: Vec<DetuningScenario> = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: parse error: {e}", path.display())))?;
    for mut s in listed {
        for v in s
            .cavity_detunings
            .iter_mut()
            .chain(s.qd_detunings.iter_mut())
        {
            if !v.is_finite() {
                return Err(CliError::Config(format!(
                    "scenario {}: detuning is not finite",
                    s.id
                )));
            }
            *v = loaded.to_kappa0(*v);
        }
        if s.id == scenarios[0].id {
            scenarios[0] = s;
        } else if scenarios.iter().any(|other| other.id == s.id) {
            return Err(CliError::Config(format!(
                "duplicate scenario id {:?}",
                s.id
            )));
        } else {
            scenarios.push(s);
        }
    }
    Ok(scenarios)
}

pub fn gate(
    config: &Path,
    g_list: Option<Vec<f64>>,
    scenario_list: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = config::load(config)?;
    let digest = loaded.digest();
    if loaded.chain.mirror().is_none() {
        return Err(CliError::Config(
            "gate requires a mirror termination".into(),
        ));
    }
    let labels: Vec<String> = configurations(&loaded.chain)
        .map_err(|e| CliError::Config(e.to_string()))?
        .iter()
        .map(|q| q.label())
        .collect();
    let g_list = g_list.unwrap_or_else(default_g_list);
    let scenarios = load_scenarios(scenario_list, &loaded)?;
    for s in &scenarios {
        s.apply(&loaded.chain, None)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let carrier = loaded.carrier();
    let rows = gate_sweep(&loaded.chain, &g_list, &scenarios, carrier);

    let mut columns: Vec<String> = [
        "g_over_Gamma",
        "scenario_id",
        "theta_m_star",
        "F",
        "deltaF",
        "P",
    ]
    .map(String::from)
    .to_vec();
    for label in &labels {
        columns.push(format!("re_{label}"));
        columns.push(format!("im_{label}"));
    }
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut csv = Csv::new(&digest, &column_refs);

    // The first scenario is the reference for deltaF and the best cell;
    // rows come scenario-major.
    let reference: Vec<f64> = rows[..g_list.len()]
        .iter()
        .map(|r| r.result.as_ref().map_or(f64::NAN, |g| g.fidelity))
        .collect();
    let mut failures = Vec::new();
    let mut best: Option<(f64, &str, f64, f64)> = None;
    for (k, row) in rows.iter().enumerate() {
        let mut cells = vec![num(row.g_over_gamma), row.scenario_id.clone()];
        match &row.result {
            Ok(r) => {
                cells.extend([
                    num(r.mirror_phase),
                    num(r.fidelity),
                    num(r.fidelity - reference[k % g_list.len()]),
                    num(r.photon_loss),
                ]);
                for a in &r.amplitudes {
                    cells.push(num(a.re));
                    cells.push(num(a.im));
                }
                if k < g_list.len() && best.is_none_or(|b| r.fidelity > b.2) {
                    best = Some((
                        row.g_over_gamma,
                        &row.scenario_id,
                        r.fidelity,
                        r.photon_loss,
                    ));
                }
            }
            Err(e) => {
                failures.push(format!(
                    "g/Gamma={} {}: {e}",
                    row.g_over_gamma, row.scenario_id
                ));
                cells.extend(std::iter::repeat_n(num(f64::NAN), 4 + 2 * labels.len()));
            }
        }
        csv.row(cells);
    }

    let extra = json!({
        "fidelity_convention": FIDELITY_CONVENTION,
        "units": "kappa0",
        "carrier": carrier,
        "gamma": loaded.chain.reference_decay(),
        "g_over_gamma": g_list,
        "scenarios": scenarios,
        "configurations": labels,
        "best": best.map(|(g, id, f, p)| json!({ "g_over_Gamma": g, "scenario_id": id, "F": f, "P": p })),
        "failed_cells": failures,
    });
    let (csv_path, _) = write_pair(out, "gate", "gate", &digest, started, csv.finish(), extra)?;
    let mut summary = vec![("cells", rows.len().to_string())];
    if let Some((g, id, f, p)) = best {
        summary.extend([
            ("best_g_over_Gamma", format!("{g:.4}")),
            ("best_scenario", id.to_string()),
            ("F", format!("{f:.6}")),
            ("P", format!("{p:.6}")),
        ]);
    }
    say(&summary_line(&csv_path.display().to_string(), &summary));

    if !failures.is_empty() {
        return Err(CliError::Degenerate(format!(
            "{} gate cells failed; first: {}",
            failures.len(),
            failures[0]
        )));
    }
    Ok(())
}

pub fn modes(config: &Path, out: &Path) -> Result<(), CliError> {
    let started = Instant::now();
    let loaded = config::load(config)?;
    let digest = loaded.digest();
    let modes =
        dressed_mode_positions(&loaded.chain).map_err(|e| CliError::Config(e.to_string()))?;
    let path = out.join("modes.json");
    let manifest = RunManifest::new(&digest, "modes", started, vec![path.clone()]);
    let extra = json!({
        "units": "kappa0",
        "modes": modes.modes,
        "windows": modes.windows,
        "predicted_peaks": modes.predicted_peaks(),
    });
    write_atomic(&path, sidecar(&manifest, extra)?.as_bytes())?;
    say(&summary_line(
        &path.display().to_string(),
        &[("windows", modes.windows.len().to_string())],
    ));
    Ok(())
}

/// Config document for a seeded random chain in κ₀ units.
pub fn random_document(seed: u64, subsystems: usize) -> ConfigDocument {
    let chain = random_chain(&mut rng(seed), subsystems);
    ConfigDocument {
        units: chain.units,
        reference_frequency: chain.reference_frequency,
        subsystems: chain.subsystems,
        links: chain.links,
        mirror: chain.mirror,
        defaults: Defaults::default(),
    }
}

fn max_engine_oracle_error(chain: &ValidatedChain, grid: &FrequencyGrid) -> f64 {
    let mut worst = 0.0f64;
    for omega in grid.values() {
        let Ok(engine) = cascade(chain, omega).and_then(|m| scattering(&m)) else {
            continue;
        };
        let err = match oracle_scattering(chain, omega) {
            Ok(o) => relative_error(engine.r, o.r).max(relative_error(engine.t, o.t)),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    worst
}

/// Engine against oracle on `trials` seeded random chains.
pub fn selfcheck(
    seed: u64,
    subsystems: usize,
    trials: usize,
    points: usize,
    emit_config: Option<&Path>,
) -> Result<(), CliError> {
    if subsystems == 0 {
        return Err(CliError::Config("--subsystems must be at least 1".into()));
    }
    if let Some(path) = emit_config {
        let doc = random_document(seed, subsystems);
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Config(format!("serialize config: {e}")))?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    let grid =
        FrequencyGrid::new(-100.0, 100.0, points).map_err(|e| CliError::Config(e.to_string()))?;
    let mut worst = 0.0f64;
    for trial in 0..trials {
        let doc = random_document(seed.wrapping_add(trial as u64), subsystems);
        let loaded = config::resolve(&doc)?;
        worst = worst.max(max_engine_oracle_error(&loaded.chain, &grid));
    }
    say(&summary_line(
        "selfcheck",
        &[
            ("seed", seed.to_string()),
            ("subsystems", subsystems.to_string()),
            ("trials", trials.to_string()),
            ("max_rel_err", format!("{worst:.3e}")),
        ],
    ));
    if worst > ORACLE_TOLERANCE {
        return Err(CliError::CrossCheck(format!(
            "engine and oracle differ by {worst:.3e} (> {ORACLE_TOLERANCE:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_list_parsing() {
        assert_eq!(parse_real_list("0, 0.5,1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_real_list("0,x").is_err());
        assert!(parse_real_list("nan").is_err());
    }

    #[test]
    fn default_g_list_spans_zero_to_two() {
        let g = default_g_list();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0], 0.0);
        assert!((g[40] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn random_documents_are_seeded() {
        assert_eq!(random_document(7, 3), random_document(7, 3));
        assert_ne!(random_document(7, 3), random_document(8, 3));
    }
}
