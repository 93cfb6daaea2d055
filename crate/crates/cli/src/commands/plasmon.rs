//! `plasmon`: the continuum plasmon dispersion curve with its two-term fit.

use anyhow::Result;

use bosonize::continuum::{plasmon_continuum, plasmon_curve, plasmon_series, PlasmonCurve, PlasmonSample};
use bosonize::{hbar, KAPPA};

use crate::config::{OutputFormat, RunConfig};
use crate::output;

pub fn run(config: &RunConfig) -> Result<()> {
    let hb = hbar(config.n_particles);
    // The displayed sweep and the fit window are independent: the fit uses
    // its own uniform 26-point grid on the window.
    let fit_grid: Vec<f64> = (0..26)
        .map(|i| config.fit_k_min + (config.fit_k_max - config.fit_k_min) * i as f64 / 25.0)
        .collect();
    let fit = plasmon_curve(&fit_grid, (config.fit_k_min, config.fit_k_max))?.fit;
    let samples = config
        .k_grid()
        .into_iter()
        .map(|k| {
            let lambda = plasmon_continuum(k)?;
            Ok(PlasmonSample {
                k_abs: k,
                lambda,
                energy_hbar: 2.0 * KAPPA * k * lambda.sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let curve = PlasmonCurve { samples, fit };

    let mut w = output::sink(config)?;
    match config.format {
        OutputFormat::Json => output::write_json(&mut w, config, "plasmon", &curve)?,
        OutputFormat::Csv => {
            let extra = vec![
                format!(
                    "fit over [{}, {}]: intercept {} hbar, quadratic {} hbar ({} points)",
                    curve.fit.window.0,
                    curve.fit.window.1,
                    output::fmt(curve.fit.intercept),
                    output::fmt(curve.fit.quadratic),
                    curve.fit.n_points
                ),
                "series_hbar_units: two-term small-k expansion 2 + (3/10) sqrt(3 kappa/pi) |k|^2".into(),
            ];
            output::write_preamble(&mut w, config, "plasmon", &extra)?;
            let table: Vec<Vec<String>> = curve
                .samples
                .iter()
                .map(|s| {
                    vec![
                        output::fmt(s.k_abs),
                        output::fmt(s.lambda),
                        output::fmt(s.energy_hbar),
                        output::fmt(hb * s.energy_hbar),
                        output::fmt(plasmon_series(s.k_abs, 1.0)),
                    ]
                })
                .collect();
            output::write_csv(
                &mut w,
                &[
                    "k_abs",
                    "lambda",
                    "energy_hbar_units",
                    "energy_raw",
                    "series_hbar_units",
                ],
                &table,
            )?;
        }
    }
    Ok(())
}
