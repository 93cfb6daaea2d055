//! `spectrum`: excitation branches of the per-mode Hamiltonian on a |k|
//! sweep: the data behind the excitation-spectrum figure.

use anyhow::{Context, Result};
use serde::Serialize;

use bosonize::mode::build_mode;
use bosonize::secular::mode_spectrum_secular;
use bosonize::{hbar, KAPPA};

use crate::config::{OutputFormat, RunConfig};
use crate::output;

#[derive(Serialize)]
struct SpectrumRow {
    k_abs: f64,
    branch: usize,
    lambda: f64,
    energy_hbar_units: f64,
    is_plasmon: bool,
    energy_raw: f64,
    multiplicity: usize,
}

pub fn run(config: &RunConfig) -> Result<()> {
    let potential = config.parse_potential()?;
    let dir = config.parse_k_dir()?;
    let patchset = bosonize::patches::partition_sphere(config.m_patches, 0.0)?;
    if let Some(path) = &config.dump_patches {
        std::fs::write(path, patchset.to_text()).context("dumping patch set")?;
    }
    let hb = hbar(config.n_particles);

    let mut rows = Vec::new();
    for k_abs in config.k_grid() {
        let k = [dir[0] * k_abs, dir[1] * k_abs, dir[2] * k_abs];
        let mode = build_mode(k, &patchset, &potential, config.n_particles, config.delta)?;
        if mode.degenerate {
            continue;
        }
        let spectrum = mode_spectrum_secular(&mode)
            .with_context(|| format!("mode |k| = {k_abs}"))?;
        let scale = 2.0 * KAPPA * k_abs;
        for (branch, &e) in spectrum.frequencies.iter().enumerate() {
            rows.push(SpectrumRow {
                k_abs,
                branch,
                lambda: e * e,
                energy_hbar_units: scale * e,
                is_plasmon: spectrum.plasmon_index == Some(branch),
                energy_raw: hb * scale * e,
                multiplicity: spectrum.multiplicity,
            });
        }
    }

    let mut w = output::sink(config)?;
    match config.format {
        OutputFormat::Json => output::write_json(&mut w, config, "spectrum", &rows)?,
        OutputFormat::Csv => {
            let extra = vec![format!(
                "branches: one row per distinct frequency, each carried twice \
                 (multiplicity column); ground-state shift subtracted"
            )];
            output::write_preamble(&mut w, config, "spectrum", &extra)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        output::fmt(r.k_abs),
                        r.branch.to_string(),
                        output::fmt(r.lambda),
                        output::fmt(r.energy_hbar_units),
                        r.is_plasmon.to_string(),
                        output::fmt(r.energy_raw),
                        r.multiplicity.to_string(),
                    ]
                })
                .collect();
            output::write_csv(
                &mut w,
                &[
                    "k_abs",
                    "branch",
                    "lambda",
                    "energy_hbar_units",
                    "is_plasmon",
                    "energy_raw",
                    "multiplicity",
                ],
                &table,
            )?;
        }
    }
    Ok(())
}
