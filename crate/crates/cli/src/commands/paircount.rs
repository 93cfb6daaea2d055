//! `paircount`: exact lattice pair counts per patch against the
//! interpolation formula, on one shell pass over the Fermi ball.

use anyhow::Result;
use serde::Serialize;

use bosonize::lattice::{build_fermi_ball, norm_sq, BallSpec};
use bosonize::patches::{normalization, partition_sphere, NormalizationMode};

use crate::config::{OutputFormat, RunConfig};
use crate::output;

#[derive(Serialize)]
struct PairCountRow {
    alpha: usize,
    center_x: f64,
    center_y: f64,
    center_z: f64,
    k_dot_omega: f64,
    n_sq_exact: f64,
    n_sq_approx: f64,
    rel_error: f64,
}

pub fn run(config: &RunConfig) -> Result<()> {
    let k = config.parse_k_lattice()?;
    let ball = match config.k_fermi {
        Some(r) => build_fermi_ball(BallSpec::Radius(r))?,
        None => build_fermi_ball(BallSpec::TargetN(config.n_particles))?,
    };
    if ball.rounded_up {
        eprintln!(
            "note: requested N rounded up to the shell-complete count {}",
            ball.n_particles
        );
    }
    let patchset = partition_sphere(config.m_patches, config.corridor)?;
    if let Some(path) = &config.dump_patches {
        std::fs::write(path, patchset.to_text())?;
    }

    // Classify every hole of the active shell once: pairs (h, h+k) with
    // |h| <= k_F < |h+k| live in the band |h| > k_F - |k|.
    let mut counts = vec![0u64; patchset.m_patches];
    let k_norm = (norm_sq(k) as f64).sqrt();
    let inner = (ball.k_fermi - k_norm - 1.0).max(0.0);
    let inner_sq = (inner * inner).floor() as i64;
    let bound = ball.k_fermi.ceil() as i64 + k.iter().map(|c| c.abs()).max().unwrap();
    for x in -bound..=bound {
        for y in -bound..=bound {
            for z in -bound..=bound {
                let h = [x, y, z];
                let h_sq = norm_sq(h);
                if h_sq < inner_sq || h_sq > ball.radius_squared || h == [0, 0, 0] {
                    continue;
                }
                let p = [h[0] + k[0], h[1] + k[1], h[2] + k[2]];
                if norm_sq(p) <= ball.radius_squared {
                    continue;
                }
                let hd = dir(h);
                let pd = dir(p);
                if let Some(alpha) = patchset.find_patch(hd, ball.k_fermi) {
                    if patchset.find_patch(pd, ball.k_fermi) == Some(alpha) {
                        counts[alpha] += 1;
                    }
                }
            }
        }
    }

    let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
    let k_hat = bosonize::patches::normalize(kf);
    let mut rows = Vec::new();
    for alpha in 0..patchset.m_patches {
        let c = patchset.centers[alpha];
        let n_sq_exact = counts[alpha] as f64;
        let approx = normalization(
            &patchset,
            alpha,
            kf,
            ball.n_particles,
            NormalizationMode::Approx,
            None,
        )?;
        let n_sq_approx = approx * approx;
        let rel_error = if n_sq_approx > 0.0 {
            (n_sq_exact / n_sq_approx - 1.0).abs()
        } else if n_sq_exact == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        rows.push(PairCountRow {
            alpha,
            center_x: c[0],
            center_y: c[1],
            center_z: c[2],
            k_dot_omega: k_hat[0] * c[0] + k_hat[1] * c[1] + k_hat[2] * c[2],
            n_sq_exact,
            n_sq_approx,
            rel_error,
        });
    }

    let mut w = output::sink(config)?;
    match config.format {
        OutputFormat::Json => output::write_json(&mut w, config, "paircount", &rows)?,
        OutputFormat::Csv => {
            let extra = vec![format!(
                "ball: N = {}, k_F = {}, k = ({},{},{}), corridor half-width {}",
                ball.n_particles, ball.k_fermi, k[0], k[1], k[2], config.corridor
            )];
            output::write_preamble(&mut w, config, "paircount", &extra)?;
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.alpha.to_string(),
                        output::fmt(r.center_x),
                        output::fmt(r.center_y),
                        output::fmt(r.center_z),
                        output::fmt(r.k_dot_omega),
                        output::fmt(r.n_sq_exact),
                        output::fmt(r.n_sq_approx),
                        output::fmt(r.rel_error),
                    ]
                })
                .collect();
            output::write_csv(
                &mut w,
                &[
                    "alpha",
                    "center_x",
                    "center_y",
                    "center_z",
                    "k_dot_omega",
                    "n_sq_exact",
                    "n_sq_approx",
                    "rel_error",
                ],
                &table,
            )?;
        }
    }
    Ok(())
}

fn dir(v: [i64; 3]) -> [f64; 3] {
    bosonize::patches::normalize([v[0] as f64, v[1] as f64, v[2] as f64])
}
