//! Partition of the unit sphere of Fermi-surface directions into M
//! equal-area patches with exact antipodal symmetry, plus the per-mode
//! index sets, normalization constants and the half-space convention.
//!
//! The northern hemisphere is cut zonally (a polar cap and iso-latitude
//! bands subdivided in longitude, every patch of area exactly `4 pi / M`)
//! and mirrored through the origin to the southern hemisphere. Patch `alpha`
//! for `alpha < M/2` is northern; its antipode has index `alpha + M/2`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lattice::FermiBall;

/// Angular region of a northern patch in `(phi, c = cos theta)` coordinates.
#[derive(Debug, Clone, Copy)]
pub enum Zone {
    /// Polar cap `c in (c_min, 1]`, all longitudes.
    Cap { c_min: f64 },
    /// Band cell `c in (c_lo, c_hi]`, `phi in [phi_lo, phi_hi)`.
    Cell {
        c_lo: f64,
        c_hi: f64,
        phi_lo: f64,
        phi_hi: f64,
    },
}

/// Equal-area partition of the unit sphere with antipodal pairing.
#[derive(Debug, Clone)]
pub struct PatchSet {
    /// Total patch count M (even).
    pub m_patches: usize,
    /// Unit center directions, southern half mirrored exactly.
    pub centers: Vec<[f64; 3]>,
    /// Patch areas in steradians (after corridor shrinkage, if any).
    pub areas: Vec<f64>,
    /// Corridor half-width R; an arc margin of `R / radius` is removed from
    /// every patch boundary on a sphere of the given radius (unit sphere for
    /// the stored areas).
    pub corridor_half_width: f64,
    /// Northern zone geometry, index `alpha < M/2`.
    pub zones: Vec<Zone>,
}

/// Per-mode cutoff index sets.
///
/// Ordering contract: `i_minus[j]` is the antipode of `i_plus[j]`, so the
/// j-th entry of both halves carries the same `|k_hat . omega_hat|`.
#[derive(Debug, Clone)]
pub struct ModeIndexSets {
    pub k: [f64; 3],
    pub i_plus: Vec<usize>,
    pub i_minus: Vec<usize>,
    pub delta: f64,
    pub n_ref: usize,
    /// The cutoff value `n_ref^(-delta)`.
    pub cutoff: f64,
}

/// Normalization mode for `n_{alpha,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizationMode {
    /// Closed-form interpolation `sqrt(4 pi N^(2/3) M^(-1) |k . omega_hat|)`.
    Approx,
    /// Exact lattice pair count on the radially extended patch.
    Exact,
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Integral of sqrt(1 - c^2): (c sqrt(1-c^2) + asin c) / 2.
fn sin_integral(c: f64) -> f64 {
    (c * (1.0 - c * c).max(0.0).sqrt() + c.asin()) / 2.0
}

/// Area centroid of a band cell, projected back to the sphere.
fn cell_center(c_lo: f64, c_hi: f64, phi_lo: f64, phi_hi: f64) -> [f64; 3] {
    let sc = sin_integral(c_hi) - sin_integral(c_lo);
    let x = sc * (phi_hi.sin() - phi_lo.sin());
    let y = sc * (phi_lo.cos() - phi_hi.cos());
    let z = (phi_hi - phi_lo) * (c_hi * c_hi - c_lo * c_lo) / 2.0;
    normalize([x, y, z])
}

/// Build the equal-area partition. `corridor_half_width` is the arc margin R
/// removed from each patch boundary on the unit sphere (0 = exact partition).
pub fn partition_sphere(m_patches: usize, corridor_half_width: f64) -> Result<PatchSet> {
    if m_patches < 2 || m_patches % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "patch count must be even and at least 2, got {m_patches}"
        )));
    }
    if corridor_half_width < 0.0 {
        return Err(Error::InvalidArgument(
            "corridor half-width must be non-negative".into(),
        ));
    }

    let m2 = m_patches / 2;
    let area = 4.0 * PI / m_patches as f64;
    let mut zones = Vec::with_capacity(m2);

    if m2 == 1 {
        zones.push(Zone::Cap { c_min: 0.0 });
    } else {
        // Polar cap of one patch area.
        let c_cap = 1.0 - area / (2.0 * PI);
        zones.push(Zone::Cap { c_min: c_cap });

        // Collar from the cap edge to the equator, split into bands of
        // roughly square patches; patch areas stay exact because the c-span
        // of each band is derived from its integer patch count.
        let theta_cap = c_cap.acos();
        let ideal_height = area.sqrt();
        let n_bands = (((PI / 2.0 - theta_cap) / ideal_height).round() as usize).max(1);
        let band_height = (PI / 2.0 - theta_cap) / n_bands as f64;

        // Leopardi-style rounding keeps the total at exactly m2 - 1.
        let mut counts = Vec::with_capacity(n_bands);
        let mut running_ideal = 0.0;
        let mut assigned = 0usize;
        for j in 0..n_bands {
            let t0 = theta_cap + j as f64 * band_height;
            let t1 = theta_cap + (j + 1) as f64 * band_height;
            running_ideal += 2.0 * PI * (t0.cos() - t1.cos()) / area;
            let target = running_ideal.round() as usize;
            counts.push(target - assigned);
            assigned = target;
        }
        // Guard against rounding drift in the last band.
        let total: usize = counts.iter().sum();
        if total != m2 - 1 {
            *counts.last_mut().unwrap() += (m2 - 1) - total;
        }

        let mut c_hi = c_cap;
        for &n_j in &counts {
            if n_j == 0 {
                continue;
            }
            let c_lo = c_hi - n_j as f64 * area / (2.0 * PI);
            for l in 0..n_j {
                let phi_lo = 2.0 * PI * l as f64 / n_j as f64;
                let phi_hi = 2.0 * PI * (l + 1) as f64 / n_j as f64;
                zones.push(Zone::Cell {
                    c_lo,
                    c_hi,
                    phi_lo,
                    phi_hi,
                });
            }
            c_hi = c_lo;
        }
        debug_assert_eq!(zones.len(), m2);
        debug_assert!(c_hi.abs() < 1e-9, "collar must end at the equator");
    }

    let mut centers = Vec::with_capacity(m_patches);
    let mut areas = Vec::with_capacity(m_patches);
    for zone in &zones {
        let (center, patch_area) = zone_center_and_area(zone, corridor_half_width)?;
        centers.push(center);
        areas.push(patch_area);
    }
    for alpha in 0..m2 {
        let c = centers[alpha];
        centers.push([-c[0], -c[1], -c[2]]);
        areas.push(areas[alpha]);
    }

    Ok(PatchSet {
        m_patches,
        centers,
        areas,
        corridor_half_width,
        zones,
    })
}

fn zone_center_and_area(zone: &Zone, margin: f64) -> Result<([f64; 3], f64)> {
    match *zone {
        Zone::Cap { c_min } => {
            let theta = c_min.acos();
            let theta_shrunk = theta - margin;
            if theta_shrunk <= 0.0 {
                return Err(Error::InvalidArgument(
                    "corridor half-width eliminates the polar cap".into(),
                ));
            }
            let area = 2.0 * PI * (1.0 - theta_shrunk.cos());
            Ok(([0.0, 0.0, 1.0], area))
        }
        Zone::Cell {
            c_lo,
            c_hi,
            phi_lo,
            phi_hi,
        } => {
            let center = cell_center(c_lo, c_hi, phi_lo, phi_hi);
            let area = if margin == 0.0 {
                (phi_hi - phi_lo) * (c_hi - c_lo)
            } else {
                let th_lo = c_hi.acos() + margin;
                let th_hi = c_lo.acos() - margin;
                let theta_mid = (c_hi.acos() + c_lo.acos()) / 2.0;
                let dphi = (phi_hi - phi_lo) - 2.0 * margin / theta_mid.sin();
                if th_hi <= th_lo || dphi <= 0.0 {
                    return Err(Error::InvalidArgument(
                        "corridor half-width eliminates a band patch".into(),
                    ));
                }
                dphi * (th_lo.cos() - th_hi.cos())
            };
            Ok((center, area))
        }
    }
}

impl PatchSet {
    /// Antipode index: partner of `alpha` on the opposite hemisphere.
    pub fn antipode(&self, alpha: usize) -> usize {
        let m2 = self.m_patches / 2;
        if alpha < m2 {
            alpha + m2
        } else {
            alpha - m2
        }
    }

    /// Membership of a direction in patch `alpha`, with corridor margins
    /// scaled for a sphere of radius `sphere_radius`. Corridor points belong
    /// to no patch.
    pub fn contains_direction(&self, alpha: usize, dir: [f64; 3], sphere_radius: f64) -> bool {
        let m2 = self.m_patches / 2;
        let d = if alpha < m2 {
            dir
        } else {
            [-dir[0], -dir[1], -dir[2]]
        };
        let zone = &self.zones[alpha % m2];
        let margin = if self.corridor_half_width == 0.0 {
            0.0
        } else {
            self.corridor_half_width / sphere_radius
        };
        let c = d[2];
        let theta = c.clamp(-1.0, 1.0).acos();
        match *zone {
            Zone::Cap { c_min } => theta < c_min.acos() - margin,
            Zone::Cell {
                c_lo,
                c_hi,
                phi_lo,
                phi_hi,
            } => {
                let th_lo = c_hi.acos();
                let th_hi = c_lo.acos();
                if theta <= th_lo + margin || theta > th_hi - margin {
                    return false;
                }
                let mut phi = d[1].atan2(d[0]);
                if phi < 0.0 {
                    phi += 2.0 * PI;
                }
                let dphi_margin = margin / theta.sin();
                phi >= phi_lo + dphi_margin && phi < phi_hi - dphi_margin
            }
        }
    }

    /// Patch membership predicate for integer lattice points (the patch
    /// extended radially, so only the direction matters). `sphere_radius`
    /// scales the corridor margin.
    pub fn lattice_membership(
        &self,
        alpha: usize,
        sphere_radius: f64,
    ) -> impl Fn([i64; 3]) -> bool + '_ {
        move |v: [i64; 3]| {
            if v == [0, 0, 0] {
                return false;
            }
            let d = normalize([v[0] as f64, v[1] as f64, v[2] as f64]);
            self.contains_direction(alpha, d, sphere_radius)
        }
    }

    /// The patch containing a direction, if any (corridor points belong to
    /// no patch). Scans the northern zones against `dir` or its mirror.
    pub fn find_patch(&self, dir: [f64; 3], sphere_radius: f64) -> Option<usize> {
        let m2 = self.m_patches / 2;
        for alpha in 0..m2 {
            if self.contains_direction(alpha, dir, sphere_radius) {
                return Some(alpha);
            }
            if self.contains_direction(alpha + m2, dir, sphere_radius) {
                return Some(alpha + m2);
            }
        }
        None
    }

    /// Equal-weight average `(1/M) sum_alpha f(k_hat . omega_hat_alpha)` over
    /// all patches; the Riemann sum for `(1/4pi) int f(cos theta) dOmega`.
    pub fn riemann_average<F: Fn(f64) -> f64>(&self, k_hat: [f64; 3], f: F) -> f64 {
        let sum: f64 = self.centers.iter().map(|&w| f(dot(k_hat, w))).sum();
        sum / self.m_patches as f64
    }

    /// One line per patch: `x y z area`, preceded by a header comment.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "# patchset m={} corridor_half_width={:.17e}\n# center_x center_y center_z area\n",
            self.m_patches, self.corridor_half_width
        ));
        for (c, a) in self.centers.iter().zip(&self.areas) {
            s.push_str(&format!(
                "{:.17e} {:.17e} {:.17e} {:.17e}\n",
                c[0], c[1], c[2], a
            ));
        }
        s
    }

    /// Parse the text form written by [`PatchSet::to_text`]. Zones are not
    /// serialized, so the result supports inspection (centers, areas,
    /// Riemann averages) but not membership tests.
    pub fn centers_and_areas_from_text(text: &str) -> Result<(Vec<[f64; 3]>, Vec<f64>)> {
        let mut centers = Vec::new();
        let mut areas = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::InvalidArgument(format!(
                    "patch line must have 4 fields: {line:?}"
                )));
            }
            let vals: Vec<f64> = fields
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|e| {
                        Error::InvalidArgument(format!("bad float {f:?}: {e}"))
                    })
                })
                .collect::<Result<_>>()?;
            centers.push([vals[0], vals[1], vals[2]]);
            areas.push(vals[3]);
        }
        Ok((centers, areas))
    }
}

/// Cutoff index sets for mode `k`: patches with `k_hat . omega_hat >= n^(-delta)`
/// (closed boundary) and their antipodes.
pub fn index_sets(
    patchset: &PatchSet,
    k: [f64; 3],
    delta: f64,
    n_ref: usize,
) -> Result<ModeIndexSets> {
    if k == [0.0, 0.0, 0.0] {
        return Err(Error::InvalidArgument("mode momentum k = 0".into()));
    }
    if delta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cutoff exponent delta must be positive, got {delta}"
        )));
    }
    let cutoff = (n_ref as f64).powf(-delta);
    let k_hat = normalize(k);
    let mut i_plus = Vec::new();
    for (alpha, &w) in patchset.centers.iter().enumerate() {
        if dot(k_hat, w) >= cutoff {
            i_plus.push(alpha);
        }
    }
    // Antipodes in the same order, so entry j of both halves shares |k.w|.
    let i_minus: Vec<usize> = i_plus.iter().map(|&a| patchset.antipode(a)).collect();
    Ok(ModeIndexSets {
        k,
        i_plus,
        i_minus,
        delta,
        n_ref,
        cutoff,
    })
}

/// Patch normalization constant `n_{alpha,k}`.
///
/// Approx mode evaluates `sqrt(4 pi N^(2/3) M^(-1) |k . omega_hat_alpha|)`;
/// exact mode counts lattice pairs on the radially extended patch of the
/// given ball and returns the square root of the count.
pub fn normalization(
    patchset: &PatchSet,
    alpha: usize,
    k: [f64; 3],
    n_ref: usize,
    mode: NormalizationMode,
    ball: Option<&FermiBall>,
) -> Result<f64> {
    if alpha >= patchset.m_patches {
        return Err(Error::InvalidArgument(format!(
            "patch index {alpha} out of range (M = {})",
            patchset.m_patches
        )));
    }
    if k == [0.0, 0.0, 0.0] {
        return Err(Error::InvalidArgument("k = 0 in normalization".into()));
    }
    match mode {
        NormalizationMode::Approx => {
            let n23 = (n_ref as f64).powf(2.0 / 3.0);
            let kdw = dot(k, patchset.centers[alpha]).abs();
            Ok((4.0 * PI * n23 / patchset.m_patches as f64 * kdw).sqrt())
        }
        NormalizationMode::Exact => {
            let ball = ball.ok_or_else(|| {
                Error::InvalidArgument("exact normalization requires a Fermi ball".into())
            })?;
            let ki = [
                k[0].round() as i64,
                k[1].round() as i64,
                k[2].round() as i64,
            ];
            if (ki[0] as f64 - k[0]).abs() > 1e-9
                || (ki[1] as f64 - k[1]).abs() > 1e-9
                || (ki[2] as f64 - k[2]).abs() > 1e-9
            {
                return Err(Error::InvalidArgument(
                    "exact normalization requires an integer lattice k".into(),
                ));
            }
            let pred = patchset.lattice_membership(alpha, ball.k_fermi.max(1.0));
            let count = crate::lattice::count_pairs_exact(ball, pred, ki)?;
            Ok((count as f64).sqrt())
        }
    }
}

/// The fixed half-space convention picking one of `{k, -k}`: true iff
/// `k_z > 0`, or `k_z = 0` and `k_y > 0`, or `k_z = k_y = 0` and `k_x > 0`.
pub fn in_half_space(k: [f64; 3]) -> Result<bool> {
    if k == [0.0, 0.0, 0.0] {
        return Err(Error::InvalidArgument("k = 0 has no half-space sign".into()));
    }
    Ok(k[2] > 0.0 || (k[2] == 0.0 && (k[1] > 0.0 || (k[1] == 0.0 && k[0] > 0.0))))
}

/// Integer-vector variant of [`in_half_space`].
pub fn in_half_space_int(k: [i64; 3]) -> Result<bool> {
    in_half_space([k[0] as f64, k[1] as f64, k[2] as f64])
}
