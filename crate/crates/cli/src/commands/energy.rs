//! `energy`: correlation-energy totals at finite M against the continuum
//! bracket, mode by mode.

use anyhow::Result;

use bosonize::continuum::total_energy;

use crate::config::{OutputFormat, RunConfig};
use crate::output;

pub fn run(config: &RunConfig) -> Result<()> {
    let potential = config.parse_potential()?;
    let patchset = bosonize::patches::partition_sphere(config.m_patches, 0.0)?;
    let report = total_energy(
        &potential,
        config.k_cutoff,
        &patchset,
        config.n_particles,
        config.delta,
    )?;

    let mut w = output::sink(config)?;
    match config.format {
        OutputFormat::Json => output::write_json(&mut w, config, "energy", &report)?,
        OutputFormat::Csv => {
            let mut extra = vec![
                format!(
                    "totals (hbar units): finite_m {} continuum {} rel_gap {}",
                    output::fmt(report.total_finite_m),
                    output::fmt(report.total_continuum),
                    output::fmt(report.total_rel_gap)
                ),
                format!(
                    "totals (raw): finite_m {} continuum {} with hbar {}",
                    output::fmt(report.total_finite_m_raw),
                    output::fmt(report.total_continuum_raw),
                    output::fmt(report.hbar)
                ),
                format!("potential: {}", report.potential_id),
            ];
            if report.formal {
                extra.push(
                    "formal: potential lacks compact support; sum truncated at k_cutoff".into(),
                );
            }
            output::write_preamble(&mut w, config, "energy", &extra)?;
            let table: Vec<Vec<String>> = report
                .per_mode
                .iter()
                .map(|m| {
                    vec![
                        m.k[0].to_string(),
                        m.k[1].to_string(),
                        m.k[2].to_string(),
                        output::fmt(m.k_abs),
                        output::fmt(m.v_hat_k),
                        output::fmt(m.shift_finite_m),
                        output::fmt(m.shift_continuum),
                        output::fmt(m.rel_gap),
                    ]
                })
                .collect();
            output::write_csv(
                &mut w,
                &[
                    "kx",
                    "ky",
                    "kz",
                    "k_abs",
                    "v_hat_k",
                    "shift_finite_m",
                    "shift_continuum",
                    "rel_gap",
                ],
                &table,
            )?;
        }
    }
    Ok(())
}
