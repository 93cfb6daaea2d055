//! Rank-one secular-equation path for the mode eigenvalues.
//!
//! A = d^2 + 2g |u~><u~| with u~_alpha = u_alpha^2, so the characteristic
//! polynomial factors as `prod_beta (u_beta^4 - lambda) w(lambda)` with
//!
//! ```text
//! w(lambda) = 1 + 2g sum_alpha u_alpha^4 / (u_alpha^4 - lambda).
//! ```
//!
//! Between consecutive distinct poles `w` is strictly increasing from -inf
//! to +inf, so bisection brackets every root; a repeated pole of
//! multiplicity m pins m-1 eigenvalues exactly at the pole, and for g > 0
//! one extra root sits above the largest pole: the collective (plasmon)
//! branch.
//!
//! The poles are the I_k values `u_alpha^4` of one antipodal half; the
//! physical mode carries every root twice (the A and B copies), which is
//! the `multiplicity` field of [`BosonSpectrum`].

use serde::{Deserialize, Serialize};

use crate::bogoliubov::BosonSpectrum;
use crate::error::{Error, Result};
use crate::mode::{ModeHamiltonian, QuadraticBlocks};
use crate::KAPPA;

/// Tolerance under which two u^4 values are grouped into one pole.
const POLE_GROUP_TOLERANCE: f64 = 1e-12;
/// Bisection stops when the bracket is this narrow (absolute, with a
/// relative floor for large roots).
const BISECTION_WIDTH: f64 = 1e-13;

/// A distinct pole of the secular function with its multiplicity.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Pole {
    pub value: f64,
    pub multiplicity: usize,
}

/// The diagonal-plus-rank-one eigenvalue problem of one mode half.
#[derive(Debug, Clone)]
pub struct SecularProblem {
    /// Sorted distinct pole values u_alpha^4 with multiplicities.
    pub poles: Vec<Pole>,
    /// Coupling g of the rank-one update 2g |u~><u~|.
    pub g: f64,
    /// Raw secular weights u_alpha^4 (one per half index).
    pub u4_weights: Vec<f64>,
    /// Patch count M used by the 1/M normalization of the Coulomb form.
    pub m_total: usize,
}

impl SecularProblem {
    pub fn from_blocks(blocks: &QuadraticBlocks, m_total: usize) -> Self {
        let u4: Vec<f64> = blocks.d.iter().map(|&d| d * d).collect();
        Self::from_u4(u4, blocks.g, m_total)
    }

    pub fn from_mode(mode: &ModeHamiltonian) -> Self {
        let u4: Vec<f64> = mode.u.iter().map(|&u| u.powi(4)).collect();
        Self::from_u4(u4, mode.g, mode.m_patches)
    }

    pub fn from_u4(u4_weights: Vec<f64>, g: f64, m_total: usize) -> Self {
        let mut sorted = u4_weights.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut poles: Vec<Pole> = Vec::new();
        for v in sorted {
            match poles.last_mut() {
                Some(p) if (v - p.value).abs() <= POLE_GROUP_TOLERANCE * p.value.max(1.0) => {
                    p.multiplicity += 1;
                }
                _ => poles.push(Pole {
                    value: v,
                    multiplicity: 1,
                }),
            }
        }
        SecularProblem {
            poles,
            g,
            u4_weights,
            m_total,
        }
    }

    /// Total eigenvalue count (with multiplicity) = the half dimension I_k.
    pub fn dimension(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    /// w(lambda); errors when lambda coincides with a pole.
    pub fn secular_value(&self, lambda: f64) -> Result<f64> {
        let mut sum = 0.0;
        for p in &self.poles {
            let denom = p.value - lambda;
            if denom == 0.0 {
                return Err(Error::PoleEvaluation { lambda });
            }
            sum += p.multiplicity as f64 * p.value / denom;
        }
        Ok(1.0 + 2.0 * self.g * sum)
    }

    /// dw/dlambda, positive wherever defined.
    fn secular_derivative(&self, lambda: f64) -> f64 {
        let mut sum = 0.0;
        for p in &self.poles {
            let denom = p.value - lambda;
            sum += p.multiplicity as f64 * p.value / (denom * denom);
        }
        2.0 * self.g * sum
    }

    /// One root of `w` inside the open interval `(lo, hi)`, where w runs
    /// from -inf at `lo+` to a positive value at `hi-`. Bisection on the
    /// sign, then two Newton polish steps.
    fn bracketed_root(&self, lo: f64, hi: f64) -> Result<f64> {
        let (mut lo, mut hi) = (lo, hi);
        let mut iterations = 0;
        while hi - lo > BISECTION_WIDTH.max(4.0 * f64::EPSILON * hi.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            // Mid never hits a pole: poles are the interval endpoints.
            let wm = self.secular_value(mid)?;
            if wm < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            iterations += 1;
            if iterations > 200 {
                return Err(Error::NumericalFailure(format!(
                    "secular bisection failed to converge in ({lo}, {hi})"
                )));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..2 {
            let w = self.secular_value(x)?;
            let dw = self.secular_derivative(x);
            if dw <= 0.0 || !dw.is_finite() {
                break;
            }
            let next = x - w / dw;
            if next > lo && next < hi {
                x = next;
            }
        }
        Ok(x)
    }

    /// All eigenvalues of A, ascending, counted with multiplicity:
    /// a pole of multiplicity m contributes m-1 copies of itself, each open
    /// gap between distinct poles holds one simple root, and for g > 0 one
    /// root lies above the largest pole.
    pub fn secular_roots(&self) -> Result<Vec<f64>> {
        if self.poles.is_empty() {
            return Ok(Vec::new());
        }
        if self.g == 0.0 {
            let mut roots = Vec::with_capacity(self.dimension());
            for p in &self.poles {
                roots.extend(std::iter::repeat(p.value).take(p.multiplicity));
            }
            return Ok(roots);
        }
        let mut roots = Vec::with_capacity(self.dimension());
        for (i, p) in self.poles.iter().enumerate() {
            roots.extend(std::iter::repeat(p.value).take(p.multiplicity - 1));
            if i + 1 < self.poles.len() {
                roots.push(self.bracketed_root(p.value, self.poles[i + 1].value)?);
            }
        }
        roots.push(self.plasmon_root()?);
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        debug_assert_eq!(roots.len(), self.dimension());
        Ok(roots)
    }

    /// The unique root above the largest pole. The upper bracket
    /// `max pole + 2g sum u^4 + 1` provably satisfies w > 0.
    pub fn plasmon_root(&self) -> Result<f64> {
        if self.g <= 0.0 {
            return Err(Error::NoPlasmon);
        }
        if self.poles.is_empty() {
            return Err(Error::InvalidArgument("empty secular problem".into()));
        }
        let top = self.poles.last().unwrap().value;
        let weight_sum: f64 = self
            .poles
            .iter()
            .map(|p| p.multiplicity as f64 * p.value)
            .sum();
        let hi = top + 2.0 * self.g * weight_sum + 1.0;
        self.bracketed_root(top, hi)
    }
}

/// Secular-path spectrum of one mode: frequencies are the square roots of
/// the secular roots, the shift is `tr A^(1/2) - tr d - tr b` (equal to
/// `1/2 tr(E - D - W)` by the A/B isospectrality).
pub fn mode_spectrum_secular(mode: &ModeHamiltonian) -> Result<BosonSpectrum> {
    if mode.i_k == 0 {
        return Ok(BosonSpectrum {
            k: mode.k,
            frequencies: Vec::new(),
            multiplicity: 2,
            shift: 0.0,
            plasmon_index: None,
        });
    }
    let problem = SecularProblem::from_mode(mode);
    let roots = problem.secular_roots()?;
    let frequencies: Vec<f64> = roots.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let tr_a_sqrt: f64 = frequencies.iter().sum();
    let tr_d: f64 = mode.u.iter().map(|&u| u * u).sum();
    let shift = tr_a_sqrt - (1.0 + mode.g) * tr_d;
    let plasmon_index = if mode.g > 0.0 {
        Some(frequencies.len() - 1)
    } else {
        None
    };
    Ok(BosonSpectrum {
        k: mode.k,
        frequencies,
        multiplicity: 2,
        shift,
        plasmon_index,
    })
}

/// The Coulomb form of the secular condition,
/// `(1/M) sum_{alpha in I_k^+} u_alpha^4 / (lambda - u_alpha^4) - |k|^2 / (4 pi kappa)`,
/// which vanishes exactly at the eigenvalues of A when V(k) = |k|^(-2).
pub fn coulomb_secular_residual(lambda: f64, mode: &ModeHamiltonian) -> Result<f64> {
    let k2 = mode.k_abs() * mode.k_abs();
    if mode.v_hat_k == 0.0 || (mode.v_hat_k * k2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "mode is not Coulomb: V(k) = {} at |k|^2 = {k2}",
            mode.v_hat_k
        )));
    }
    let mut sum = 0.0;
    for &u in &mode.u {
        let u4 = u.powi(4);
        let denom = lambda - u4;
        if denom == 0.0 {
            return Err(Error::PoleEvaluation { lambda });
        }
        sum += u4 / denom;
    }
    Ok(sum / mode.m_patches as f64 - k2 / (4.0 * std::f64::consts::PI * KAPPA))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bogoliubov;
    use crate::mode::{assemble_blocks, build_mode, Potential};
    use crate::patches::partition_sphere;

    #[test]
    fn free_secular_value_is_one() {
        let p = SecularProblem::from_u4(vec![0.3, 0.8], 0.0, 4);
        assert_eq!(p.secular_value(0.5).unwrap(), 1.0);
        assert_eq!(p.secular_value(100.0).unwrap(), 1.0);
    }

    #[test]
    fn secular_value_closed_form_example() {
        // u^4 = {1, 1}, g = 1/2: w(3) = 1 + 2*(1/2)*(1/(1-3) + 1/(1-3)) = 0.
        let p = SecularProblem::from_u4(vec![1.0, 1.0], 0.5, 2);
        assert_eq!(p.poles.len(), 1);
        assert_eq!(p.poles[0].multiplicity, 2);
        assert!(p.secular_value(3.0).unwrap().abs() < 1e-15);
        // lambda -> inf: w -> 1.
        assert!((p.secular_value(1e12).unwrap() - 1.0).abs() < 1e-9);
        // At a pole: error.
        assert!(matches!(
            p.secular_value(1.0),
            Err(Error::PoleEvaluation { .. })
        ));
    }

    #[test]
    fn roots_of_the_repeated_pole_example() {
        let p = SecularProblem::from_u4(vec![1.0, 1.0], 0.5, 2);
        let roots = p.secular_roots().unwrap();
        assert_eq!(roots.len(), 2);
        assert_eq!(roots[0], 1.0);
        assert!((roots[1] - 3.0).abs() < 1e-11);
        assert!((p.plasmon_root().unwrap() - 3.0).abs() < 1e-11);
    }

    #[test]
    fn free_roots_are_the_poles() {
        let u4 = vec![0.2, 0.5, 0.5, 0.9];
        let p = SecularProblem::from_u4(u4.clone(), 0.0, 8);
        let roots = p.secular_roots().unwrap();
        let mut want = u4;
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(roots, want);
        assert!(matches!(p.plasmon_root(), Err(Error::NoPlasmon)));
    }

    #[test]
    fn roots_match_dense_eigenvalues() {
        let cases = [
            (vec![0.9, 0.6, 0.3], 0.7),
            (vec![1.0, 1.0, 0.5, 0.5], 0.25),
            (vec![0.95, 0.94, 0.2], 3.0),
        ];
        for (u, g) in cases {
            let blocks = QuadraticBlocks::from_u_g(&u, g);
            let p = SecularProblem::from_blocks(&blocks, 2 * u.len());
            let roots = p.secular_roots().unwrap();
            let a = blocks.a_matrix();
            let eig = a.symmetric_eigen();
            let mut dense: Vec<f64> = eig.eigenvalues.iter().copied().collect();
            dense.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert_eq!(roots.len(), dense.len());
            for (r, d) in roots.iter().zip(&dense) {
                assert!(
                    (r - d).abs() <= 1e-9 * d.abs().max(1.0),
                    "u {u:?} g {g}: secular {r} vs dense {d}"
                );
            }
        }
    }

    #[test]
    fn plasmon_root_grows_with_coupling() {
        let u4 = vec![0.2, 0.6, 1.0];
        let mut prev = 0.0;
        for g in [0.1, 0.2, 0.5, 1.0, 4.0] {
            let p = SecularProblem::from_u4(u4.clone(), g, 6);
            let root = p.plasmon_root().unwrap();
            assert!(root > 1.0, "plasmon must exceed the top pole");
            assert!(root > prev, "g {g}: root {root} did not grow from {prev}");
            prev = root;
        }
    }

    #[test]
    fn all_roots_nondecreasing_in_coupling() {
        let u4 = vec![0.15, 0.4, 0.85];
        let mut prev: Option<Vec<f64>> = None;
        for step in 0..6 {
            let g = 0.2 * step as f64;
            let roots = SecularProblem::from_u4(u4.clone(), g, 6)
                .secular_roots()
                .unwrap();
            if let Some(p) = prev {
                for (a, b) in p.iter().zip(&roots) {
                    assert!(b + 1e-12 >= *a, "roots moved down at g = {g}");
                }
            }
            prev = Some(roots);
        }
    }

    #[test]
    fn interlacing_between_distinct_poles() {
        let u4 = vec![0.1, 0.3, 0.55, 0.8, 1.0];
        let p = SecularProblem::from_u4(u4.clone(), 0.9, 10);
        let roots = p.secular_roots().unwrap();
        // One root strictly inside each gap, one above the top pole.
        for w in u4.windows(2) {
            let inside: Vec<&f64> = roots.iter().filter(|&&r| r > w[0] && r < w[1]).collect();
            assert_eq!(inside.len(), 1, "gap ({}, {})", w[0], w[1]);
        }
        let above: Vec<&f64> = roots.iter().filter(|&&r| r > 1.0).collect();
        assert_eq!(above.len(), 1);
    }

    #[test]
    fn coulomb_residual_vanishes_at_secular_roots() {
        let ps = partition_sphere(24, 0.0).unwrap();
        let mode = build_mode([0.0, 1.0, 1.0], &ps, &Potential::Coulomb, 10_000, 0.25).unwrap();
        let problem = SecularProblem::from_mode(&mode);
        let roots = problem.secular_roots().unwrap();
        // Off-pole roots must kill the residual too.
        for &r in &roots {
            if problem
                .poles
                .iter()
                .any(|p| (p.value - r).abs() < 1e-10)
            {
                continue;
            }
            let res = coulomb_secular_residual(r, &mode).unwrap();
            assert!(res.abs() < 1e-10, "residual {res} at root {r}");
        }
        // lambda -> inf limit: -|k|^2 / (4 pi kappa).
        let limit = coulomb_secular_residual(1e14, &mode).unwrap();
        let want = -2.0 / (4.0 * std::f64::consts::PI * KAPPA);
        assert!((limit - want).abs() < 1e-9);
        assert!(limit < 0.0);
        // Non-Coulomb modes are rejected.
        let free = build_mode([0.0, 1.0, 1.0], &ps, &Potential::Zero, 10_000, 0.25).unwrap();
        assert!(coulomb_secular_residual(2.0, &free).is_err());
    }

    #[test]
    fn secular_spectrum_agrees_with_dense_path() {
        let ps = partition_sphere(32, 0.0).unwrap();
        for k in [[0.0, 0.0, 1.0], [1.0, 1.0, 0.0], [1.0, 2.0, 2.0]] {
            let mode = build_mode(k, &ps, &Potential::Coulomb, 10_000, 0.25).unwrap();
            let fast = mode_spectrum_secular(&mode).unwrap();
            let dense =
                bogoliubov::diagonalize_mode_at(&assemble_blocks(&mode), mode.k).unwrap();
            assert_eq!(fast.frequencies.len(), dense.frequencies.len());
            for (a, b) in fast.frequencies.iter().zip(&dense.frequencies) {
                assert!((a - b).abs() <= 1e-9 * b.max(1.0));
            }
            assert!((fast.shift - dense.shift).abs() <= 1e-9 * dense.shift.abs().max(1.0));
            assert_eq!(fast.plasmon_index, dense.plasmon_index);
        }
    }

    #[test]
    fn plasmon_root_increases_as_coulomb_k_shrinks() {
        let ps = partition_sphere(40, 0.0).unwrap();
        let mut prev = 0.0;
        for scale in [2.0, 1.0, 0.5, 0.25] {
            let mode = build_mode(
                [0.0, 0.0, scale],
                &ps,
                &Potential::Coulomb,
                1_000_000,
                0.5,
            )
            .unwrap();
            let root = SecularProblem::from_mode(&mode).plasmon_root().unwrap();
            assert!(root > prev, "|k| = {scale}: {root} <= {prev}");
            prev = root;
        }
    }
}
