//! Continuum (M -> infinity) limits: the arcoth secular equation and its
//! plasmon branch, the small-k dispersion series, the RPA correlation-energy
//! bracket, and lattice-summed energy totals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{build_mode, Potential};
use crate::patches::{in_half_space_int, PatchSet};
use crate::quad::integrate;
use crate::secular::mode_spectrum_secular;
use crate::{hbar, KAPPA};

/// Left-hand side of the continuum secular equation,
/// `-1 + sqrt(lambda) arcoth(sqrt(lambda))`, strictly decreasing on
/// (1, inf) from +inf to 0.
pub fn continuum_lhs(lambda: f64) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!(
            "arcoth requires lambda > 1, got {lambda}"
        )));
    }
    if lambda > 4.0 {
        // -1 + sqrt(l) arcoth(sqrt(l)) = sum_{j>=1} lambda^(-j) / (2j + 1),
        // free of the cancellation the log form suffers at large lambda.
        let mut sum = 0.0;
        let mut power = 1.0;
        for j in 1..200 {
            power /= lambda;
            let term = power / (2.0 * j as f64 + 1.0);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        Ok(sum)
    } else {
        let s = lambda.sqrt();
        let arcoth = 0.5 * ((s + 1.0) / (s - 1.0)).ln();
        Ok(s * arcoth - 1.0)
    }
}

/// d/dlambda of [`continuum_lhs`].
fn continuum_lhs_derivative(lambda: f64) -> f64 {
    if lambda > 4.0 {
        let mut sum = 0.0;
        let mut power = 1.0 / lambda;
        for j in 1..200 {
            power /= lambda;
            let term = -(j as f64) * power / (2.0 * j as f64 + 1.0);
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // d/dl [sqrt(l) arcoth sqrt(l)] = arcoth(sqrt l)/(2 sqrt l) + 1/(2(1 - l)).
        let s = lambda.sqrt();
        let arcoth = 0.5 * ((s + 1.0) / (s - 1.0)).ln();
        arcoth / (2.0 * s) + 0.5 / (1.0 - lambda)
    }
}

/// The unique `lambda > 1` with
/// `-1 + sqrt(lambda) arcoth(sqrt(lambda)) = |k|^2 / (4 pi kappa)`.
pub fn plasmon_continuum(abs_k: f64) -> Result<f64> {
    if !(abs_k > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavevector magnitude must be positive, got {abs_k}"
        )));
    }
    let rhs = abs_k * abs_k / (4.0 * PI * KAPPA);
    // Bracket: the LHS decreases from +inf at 1+ to 0 at infinity, and
    // behaves like 1/(3 lambda) for large lambda.
    let mut lo = 1.0 + 1e-14;
    let mut hi = (1.0 / (3.0 * rhs) + 2.0).max(4.0);
    let mut guard = 0;
    while continuum_lhs(hi)? > rhs {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::NumericalFailure(
                "plasmon bracket expansion failed".into(),
            ));
        }
    }
    // Bisection on the monotone LHS, then Newton polish.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if continuum_lhs(mid)? > rhs {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1.0) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = continuum_lhs(x)? - rhs;
        let df = continuum_lhs_derivative(x);
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let next = x - f / df;
        if next > 1.0 && next.is_finite() {
            x = next;
        }
    }
    Ok(x)
}

/// Small-k expansion coefficient `(3/10) sqrt(3 kappa / pi)` of the
/// dispersion relation (per unit hbar |k|^2).
pub fn plasmon_series_coefficient() -> f64 {
    0.3 * (3.0 * KAPPA / PI).sqrt()
}

/// Two-term dispersion series:
/// `hbar (2 + (3/10) sqrt(3 kappa/pi) |k|^2)`.
pub fn plasmon_series(abs_k: f64, hbar: f64) -> f64 {
    hbar * (2.0 + plasmon_series_coefficient() * abs_k * abs_k)
}

/// F(lambda) = 1 - lambda arctan(1/lambda): the angular average behind the
/// RPA log integrand. F(0) = 1, F ~ 1/(3 lambda^2) at infinity.
pub fn dispersion_kernel(lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else {
        1.0 - lambda * (1.0 / lambda).atan()
    }
}

/// Finite cutoff for the log integral; the remainder is added analytically.
const BRACKET_CUTOFF: f64 = 200.0;
const QUAD_TOLERANCE: f64 = 1e-12;

/// Tail `int_L^inf log(1 + c F) dlambda` through O(L^-5), using
/// F = 1/(3 l^2) - 1/(5 l^4) + 1/(7 l^6) + O(l^-8).
fn bracket_tail(c: f64, l: f64) -> f64 {
    let a2 = 1.0 / 3.0;
    let a4 = -1.0 / 5.0;
    let a6 = 1.0 / 7.0;
    c * a2 / l + (c * a4 - c * c * a2 * a2 / 2.0) / (3.0 * l.powi(3))
        + (c * a6 - c * c * a2 * a4 + c.powi(3) * a2.powi(3) / 3.0) / (5.0 * l.powi(5))
}

/// The RPA correlation bracket for one interaction value `v = V(k)`:
///
/// ```text
/// (1/pi) int_0^inf log(1 + v kappa 2 pi (1 - lambda arctan(1/lambda))) dlambda
///   - v kappa pi / 2
/// ```
///
/// Dimensionless, always <= 0, and O(v^2) as v -> 0 because
/// `int_0^inf (1 - lambda arctan(1/lambda)) dlambda = pi / 4`.
pub fn rpa_bracket(v_hat_k: f64) -> Result<f64> {
    if v_hat_k < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "potential value must be non-negative, got {v_hat_k}"
        )));
    }
    if v_hat_k == 0.0 {
        return Ok(0.0);
    }
    let c = v_hat_k * KAPPA * 2.0 * PI;
    let integrand = |l: f64| (c * dispersion_kernel(l)).ln_1p();
    let body = integrate(integrand, 0.0, BRACKET_CUTOFF, QUAD_TOLERANCE)?;
    let total = body + bracket_tail(c, BRACKET_CUTOFF);
    Ok(total / PI - v_hat_k * KAPPA * PI / 2.0)
}

/// `int_0^inf F dlambda` by quadrature plus analytic tail (equals pi/4).
pub fn dispersion_kernel_integral() -> Result<f64> {
    let body = integrate(dispersion_kernel, 0.0, BRACKET_CUTOFF, QUAD_TOLERANCE)?;
    let l = BRACKET_CUTOFF;
    let tail = 1.0 / (3.0 * l) - 1.0 / (15.0 * l.powi(3)) + 1.0 / (35.0 * l.powi(5));
    Ok(body + tail)
}

/// `int_0^inf F^2 dlambda` by quadrature plus analytic tail; fixes the
/// second-order coefficient of the bracket: bracket ~ -2 pi kappa^2 (int F^2) v^2.
pub fn dispersion_kernel_squared_integral() -> Result<f64> {
    let body = integrate(
        |l| dispersion_kernel(l).powi(2),
        0.0,
        BRACKET_CUTOFF,
        QUAD_TOLERANCE,
    )?;
    let l = BRACKET_CUTOFF;
    let tail = 1.0 / (27.0 * l.powi(3)) - 2.0 / (75.0 * l.powi(5));
    Ok(body + tail)
}

/// Per-mode entry of a correlation-energy report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeShift {
    pub k: [i64; 3],
    pub k_abs: f64,
    pub v_hat_k: f64,
    /// 1/2 tr(E - D - W) at the finite patch count.
    pub shift_finite_m: f64,
    /// The continuum bracket at the same V(k).
    pub shift_continuum: f64,
    /// |finite/continuum - 1| when the continuum value is non-zero.
    pub rel_gap: f64,
}

/// Correlation-energy totals at finite M and in the continuum.
///
/// Totals are coefficients of hbar: `total = 2 kappa sum_{k in half space}
/// |k| shift(k)`, equal to the full-lattice sum `kappa sum_k |k| bracket`
/// by reflection symmetry. `*_raw` carry the hbar factor.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationEnergyReport {
    pub per_mode: Vec<ModeShift>,
    pub total_finite_m: f64,
    pub total_continuum: f64,
    pub total_finite_m_raw: f64,
    pub total_continuum_raw: f64,
    pub total_rel_gap: f64,
    pub m_patches: usize,
    pub n_ref: usize,
    pub hbar: f64,
    pub potential_id: String,
    pub k_cutoff: Option<f64>,
    /// Set for potentials outside compact support (Coulomb with a declared
    /// cutoff): the lattice sum is truncated, not convergent.
    pub formal: bool,
}

/// Sum per-mode ground-state shifts over the lattice half space and compare
/// with the continuum bracket mode by mode.
///
/// Compactly supported potentials determine their own summation range; a
/// Coulomb potential requires `k_cutoff` and the result is flagged formal.
pub fn total_energy(
    potential: &Potential,
    k_cutoff: Option<f64>,
    patchset: &PatchSet,
    n_ref: usize,
    delta: f64,
) -> Result<CorrelationEnergyReport> {
    let support = potential.support_radius();
    let limit = match (support, k_cutoff) {
        (Some(r), Some(c)) => r.min(c),
        (Some(r), None) => r,
        (None, Some(c)) => c,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "potential without compact support requires a k cutoff".into(),
            ))
        }
    };
    let formal = support.is_none();

    let bound = limit.floor() as i64;
    let limit_sq = limit * limit;
    let mut per_mode = Vec::new();
    let mut total_finite_m = 0.0;
    let mut total_continuum = 0.0;
    // Fixed lexicographic order for reproducible sums.
    for kx in -bound..=bound {
        for ky in -bound..=bound {
            for kz in -bound..=bound {
                let k = [kx, ky, kz];
                if k == [0, 0, 0] || !in_half_space_int(k)? {
                    continue;
                }
                let k_abs_sq = crate::lattice::norm_sq(k) as f64;
                if k_abs_sq > limit_sq * (1.0 + 1e-12) {
                    continue;
                }
                let kf = [kx as f64, ky as f64, kz as f64];
                let v = potential.eval(kf);
                if v == 0.0 {
                    continue;
                }
                let mode = build_mode(kf, patchset, potential, n_ref, delta)?;
                let spectrum = mode_spectrum_secular(&mode)?;
                let bracket = rpa_bracket(v)?;
                let k_abs = k_abs_sq.sqrt();
                let rel_gap = if bracket != 0.0 {
                    (spectrum.shift / bracket - 1.0).abs()
                } else {
                    0.0
                };
                total_finite_m += 2.0 * KAPPA * k_abs * spectrum.shift;
                total_continuum += 2.0 * KAPPA * k_abs * bracket;
                per_mode.push(ModeShift {
                    k,
                    k_abs,
                    v_hat_k: v,
                    shift_finite_m: spectrum.shift,
                    shift_continuum: bracket,
                    rel_gap,
                });
            }
        }
    }

    let hb = hbar(n_ref);
    let total_rel_gap = if total_continuum != 0.0 {
        (total_finite_m / total_continuum - 1.0).abs()
    } else {
        0.0
    };
    Ok(CorrelationEnergyReport {
        per_mode,
        total_finite_m,
        total_continuum,
        total_finite_m_raw: hb * total_finite_m,
        total_continuum_raw: hb * total_continuum,
        total_rel_gap,
        m_patches: patchset.m_patches,
        n_ref,
        hbar: hb,
        potential_id: potential.id_string(),
        k_cutoff,
        formal,
    })
}

/// One sampled point of the continuum dispersion curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlasmonSample {
    pub k_abs: f64,
    pub lambda: f64,
    /// `2 kappa |k| sqrt(lambda)`: the energy in units of hbar.
    pub energy_hbar: f64,
}

/// Ordinary least-squares fit of energy against {1, |k|^2}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DispersionFit {
    pub intercept: f64,
    pub quadratic: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Continuum plasmon curve with a two-parameter dispersion fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlasmonCurve {
    pub samples: Vec<PlasmonSample>,
    pub fit: DispersionFit,
}

/// Sample the continuum plasmon branch on the given |k| grid and fit the
/// dispersion over `window` (energies in units of hbar).
pub fn plasmon_curve(k_values: &[f64], window: (f64, f64)) -> Result<PlasmonCurve> {
    let mut samples = Vec::with_capacity(k_values.len());
    for &k in k_values {
        let lambda = plasmon_continuum(k)?;
        samples.push(PlasmonSample {
            k_abs: k,
            lambda,
            energy_hbar: 2.0 * KAPPA * k * lambda.sqrt(),
        });
    }
    let fit = fit_dispersion(&samples, window)?;
    Ok(PlasmonCurve { samples, fit })
}

/// OLS of `energy_hbar = a + b |k|^2` over samples inside the window.
pub fn fit_dispersion(samples: &[PlasmonSample], window: (f64, f64)) -> Result<DispersionFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.k_abs >= window.0 && s.k_abs <= window.1)
        .map(|s| (s.k_abs * s.k_abs, s.energy_hbar))
        .collect();
    let n = pts.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "dispersion fit needs at least 2 samples in the window, got {n}"
        )));
    }
    let nf = n as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = nf * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::NumericalFailure("degenerate dispersion fit".into()));
    }
    let quadratic = (nf * sxy - sx * sy) / denom;
    let intercept = (sy - quadratic * sx) / nf;
    Ok(DispersionFit {
        intercept,
        quadratic,
        window,
        n_points: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patches::partition_sphere;

    #[test]
    fn lhs_closed_form_at_four() {
        // -1 + 2 arcoth 2 = ln 3 - 1.
        let v = continuum_lhs(4.0).unwrap();
        assert!((v - (3.0f64.ln() - 1.0)).abs() < 1e-14);
        assert!((v - 0.098612).abs() < 1e-6);
    }

    #[test]
    fn lhs_series_and_log_forms_agree() {
        // Both branches around the switch point.
        for l in [1.5f64, 2.0, 3.9, 4.1, 10.0, 100.0] {
            let s = l.sqrt();
            let log_form = s * (1.0 / s).atanh() - 1.0;
            let v = continuum_lhs(l).unwrap();
            assert!((v - log_form).abs() < 1e-13 * log_form.abs().max(1e-10), "lambda {l}");
        }
    }

    #[test]
    fn lhs_is_strictly_decreasing_and_vanishes_at_infinity() {
        let mut prev = f64::INFINITY;
        for l in [1.0001, 1.01, 1.2, 2.0, 4.0, 8.0, 100.0, 1e6] {
            let v = continuum_lhs(l).unwrap();
            assert!(v < prev);
            assert!(v > 0.0);
            prev = v;
        }
        assert!(prev < 1e-6);
        assert!(continuum_lhs(1.0).is_err());
        assert!(continuum_lhs(0.5).is_err());
    }

    #[test]
    fn lhs_matches_patch_riemann_sum() {
        let ps = partition_sphere(10_000, 0.0).unwrap();
        let lambda = 2.0;
        let sum = ps.riemann_average(crate::patches::normalize([1.0, 1.0, 1.0]), |c| {
            c * c / (lambda - c * c)
        });
        let exact = continuum_lhs(lambda).unwrap();
        assert!((sum - exact).abs() < 1e-3, "sum {sum} vs exact {exact}");
    }

    #[test]
    fn plasmon_root_inverts_the_closed_form() {
        // RHS = ln 3 - 1 corresponds to lambda = 4 exactly.
        let rhs = 3.0f64.ln() - 1.0;
        let abs_k = (rhs * 4.0 * PI * KAPPA).sqrt();
        let l = plasmon_continuum(abs_k).unwrap();
        assert!((l - 4.0).abs() < 1e-10, "lambda {l}");
    }

    #[test]
    fn plasmon_root_at_unit_k() {
        // Independent oracle: bisection on the atanh form.
        let rhs = 1.0 / (4.0 * PI * KAPPA);
        assert!((rhs - 0.12828).abs() < 1e-4);
        let f = |l: f64| l.sqrt() * (1.0 / l.sqrt()).atanh() - 1.0 - rhs;
        let (mut lo, mut hi) = (1.0 + 1e-12, 50.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let l = plasmon_continuum(1.0).unwrap();
        assert!((l - oracle).abs() < 1e-10, "root {l} vs oracle {oracle}");
        assert!(l > 3.0 && l < 3.3, "root {l} outside (3.0, 3.3)");
    }

    #[test]
    fn plasmon_energy_approaches_two_hbar() {
        // hbar 2 kappa |k| sqrt(lambda(|k|)) -> 2 hbar as |k| -> 0.
        let mut prev_dev = f64::INFINITY;
        for k in [0.3, 0.1, 0.03, 0.01] {
            let l = plasmon_continuum(k).unwrap();
            let e = 2.0 * KAPPA * k * l.sqrt();
            let dev = (e - 2.0).abs();
            assert!(dev < prev_dev, "|k| = {k}");
            prev_dev = dev;
        }
        assert!(prev_dev < 1e-4);
    }

    #[test]
    fn series_examples() {
        assert_eq!(plasmon_series(0.0, 0.01), 0.02);
        let c = plasmon_series_coefficient();
        assert!((c - 0.230903).abs() < 5e-6, "coefficient {c}");
        // Consistency with the quantum-correction form: the |k|^2 coefficient
        // equals (hbar^2/m) alpha with alpha = (3/5) E_F / (2 hbar),
        // E_F = hbar^2 k_F^2 = kappa^2 and m = 1/2, i.e. (3/5) kappa^2 per hbar.
        let alpha_form = 0.6 * KAPPA * KAPPA;
        assert!((c - alpha_form).abs() < 1e-12);
    }

    #[test]
    fn series_matches_numeric_root_to_fourth_order() {
        // |numeric - series| <= C |k|^4 over the fit window.
        let mut worst_c = 0.0f64;
        for i in 0..26 {
            let k = 0.05 + i as f64 * 0.01;
            let l = plasmon_continuum(k).unwrap();
            let numeric = 2.0 * KAPPA * k * l.sqrt();
            let series = plasmon_series(k, 1.0);
            let c = (numeric - series).abs() / k.powi(4);
            worst_c = worst_c.max(c);
        }
        assert!(worst_c < 0.01, "quartic constant {worst_c}");
    }

    #[test]
    fn kernel_integral_is_quarter_pi() {
        let v = dispersion_kernel_integral().unwrap();
        assert!((v - PI / 4.0).abs() < 1e-8, "got {v}");
    }

    #[test]
    fn bracket_is_zero_for_free_potential() {
        assert_eq!(rpa_bracket(0.0).unwrap(), 0.0);
    }

    #[test]
    fn bracket_is_negative_and_second_order() {
        // bracket / v^2 approaches the negative constant -2 pi kappa^2 int F^2.
        let f2 = dispersion_kernel_squared_integral().unwrap();
        let second_order = -2.0 * PI * KAPPA * KAPPA * f2;
        let mut prev_dev = f64::INFINITY;
        for v in [1e-3, 1e-4, 1e-5] {
            let b = rpa_bracket(v).unwrap();
            assert!(b < 0.0, "bracket({v}) = {b}");
            let ratio = b / (v * v);
            let dev = (ratio / second_order - 1.0).abs();
            assert!(dev < prev_dev, "v = {v}: deviation {dev} grew from {prev_dev}");
            prev_dev = dev;
        }
        assert!(prev_dev < 1e-4, "limit deviation {prev_dev}");
    }

    #[test]
    fn bracket_first_order_cancellation() {
        // bracket / v -> 0 linearly in v.
        let mut prev = f64::INFINITY;
        let mut ratios = Vec::new();
        for v in [1e-2, 1e-3, 1e-4] {
            let r = (rpa_bracket(v).unwrap() / v).abs();
            assert!(r < prev);
            prev = r;
            ratios.push(r);
        }
        assert!(prev < 1e-4);
        // Consecutive ratios shrink by about the step in v.
        assert!((ratios[0] / ratios[1] - 10.0).abs() < 1.0);
        assert!((ratios[1] / ratios[2] - 10.0).abs() < 1.0);
    }

    #[test]
    fn zero_potential_total_is_empty() {
        let ps = partition_sphere(8, 0.0).unwrap();
        let report = total_energy(&Potential::Zero, None, &ps, 1000, 0.25).unwrap();
        assert!(report.per_mode.is_empty());
        assert_eq!(report.total_finite_m, 0.0);
        assert_eq!(report.total_continuum, 0.0);
        assert!(!report.formal);
    }

    #[test]
    fn single_shell_support_total_assembles_by_hand() {
        // V = 1 only at |k| = 1: six lattice vectors, three in the half
        // space, so total_continuum = kappa * 6 * 1 * bracket(1).
        let mut map = std::collections::BTreeMap::new();
        for k in [[1i64, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]] {
            map.insert(k, 1.0);
        }
        let pot = Potential::Tabulated(map);
        let ps = partition_sphere(64, 0.0).unwrap();
        let report = total_energy(&pot, None, &ps, 1_000_000, 0.5).unwrap();
        assert_eq!(report.per_mode.len(), 3);
        let bracket = rpa_bracket(1.0).unwrap();
        let want = KAPPA * 6.0 * bracket;
        assert!(
            (report.total_continuum - want).abs() < 1e-12 * want.abs(),
            "total {} vs {}",
            report.total_continuum,
            want
        );
        assert!((report.total_continuum_raw - report.hbar * want).abs() < 1e-15);
    }

    #[test]
    fn coulomb_total_requires_cutoff_and_is_formal() {
        let ps = partition_sphere(8, 0.0).unwrap();
        assert!(total_energy(&Potential::Coulomb, None, &ps, 1000, 0.25).is_err());
        // Cutoff 1.2 keeps only the |k| = 1 shell: three half-space modes.
        let report = total_energy(&Potential::Coulomb, Some(1.2), &ps, 1000, 0.25).unwrap();
        assert!(report.formal);
        assert_eq!(report.per_mode.len(), 3);
    }

    #[test]
    fn dispersion_fit_recovers_series_on_synthetic_data() {
        let samples: Vec<PlasmonSample> = (0..30)
            .map(|i| {
                let k = 0.02 + i as f64 * 0.01;
                PlasmonSample {
                    k_abs: k,
                    lambda: 0.0,
                    energy_hbar: 2.0 + 0.25 * k * k,
                }
            })
            .collect();
        let fit = fit_dispersion(&samples, (0.0, 1.0)).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-12);
        assert!((fit.quadratic - 0.25).abs() < 1e-12);
    }
}
