//! Per-mode data: the u-vector, coupling g, and the coefficient matrices
//! D, W, W-tilde of the quadratic bosonic Hamiltonian for one momentum k.
//!
//! With the patch halves ordered antipodally (indices `1..I_k` for the
//! k-aligned half, `I_k+1..2I_k` for the mirrored half), the reordered
//! blocks are `D = diag(d, d)`, `W = diag(b, b)`, `W~ = antidiag(b, b)`
//! where `d = diag(u_alpha^2)` and `b = g |u><u|`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::patches::{index_sets, normalize, ModeIndexSets, PatchSet};
use crate::KAPPA;

/// Interaction potential in momentum space.
#[derive(Debug, Clone)]
pub enum Potential {
    /// V(k) = 0 everywhere: the free theory.
    Zero,
    /// Coulomb: V(k) = |k|^(-2).
    Coulomb,
    /// Indicator step: `amplitude` for |k| <= radius, 0 outside.
    CompactStep { radius: f64, amplitude: f64 },
    /// Values on integer lattice points; everything else is 0.
    Tabulated(BTreeMap<[i64; 3], f64>),
}

impl Potential {
    pub fn eval(&self, k: [f64; 3]) -> f64 {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        match self {
            Potential::Zero => 0.0,
            Potential::Coulomb => {
                if k2 == 0.0 {
                    0.0
                } else {
                    1.0 / k2
                }
            }
            Potential::CompactStep { radius, amplitude } => {
                if k2.sqrt() <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            Potential::Tabulated(map) => {
                let ki = [
                    k[0].round() as i64,
                    k[1].round() as i64,
                    k[2].round() as i64,
                ];
                let on_lattice = (ki[0] as f64 - k[0]).abs() < 1e-9
                    && (ki[1] as f64 - k[1]).abs() < 1e-9
                    && (ki[2] as f64 - k[2]).abs() < 1e-9;
                if on_lattice {
                    map.get(&ki).copied().unwrap_or(0.0)
                } else {
                    0.0
                }
            }
        }
    }

    /// Largest |k| with possibly non-zero value, when finite.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            Potential::Zero => Some(0.0),
            Potential::Coulomb => None,
            Potential::CompactStep { radius, .. } => Some(*radius),
            Potential::Tabulated(map) => map
                .keys()
                .map(|k| (crate::lattice::norm_sq(*k) as f64).sqrt())
                .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r)))),
        }
    }

    pub fn id_string(&self) -> String {
        match self {
            Potential::Zero => "zero".into(),
            Potential::Coulomb => "coulomb".into(),
            Potential::CompactStep { radius, amplitude } => {
                format!("compact(radius={radius},amplitude={amplitude})")
            }
            Potential::Tabulated(map) => format!("tabulated(n={})", map.len()),
        }
    }
}

/// All data defining the effective mode Hamiltonian at one k.
#[derive(Debug, Clone)]
pub struct ModeHamiltonian {
    pub k: [f64; 3],
    pub index_sets: ModeIndexSets,
    /// I_k = |i_plus|; the mode carries 2 I_k bosonic degrees of freedom.
    pub i_k: usize,
    /// u_alpha = sqrt(k_hat . omega_hat_alpha) for alpha in i_plus; the
    /// mirrored half reuses the same values through the antipodal pairing.
    pub u: Vec<f64>,
    /// Coupling g = kappa V(k) 2 pi / M.
    pub g: f64,
    pub v_hat_k: f64,
    /// M of the underlying patch set (the 1/M in g and in the Coulomb form).
    pub m_patches: usize,
    /// True when the cutoff removed every patch (I_k = 0).
    pub degenerate: bool,
}

impl ModeHamiltonian {
    pub fn k_abs(&self) -> f64 {
        (self.k[0] * self.k[0] + self.k[1] * self.k[1] + self.k[2] * self.k[2]).sqrt()
    }
}

/// Assemble the mode data for momentum `k`.
///
/// An empty cutoff set is not an error: the mode comes back flagged
/// `degenerate` with `I_k = 0`, an empty spectrum and zero shift.
pub fn build_mode(
    k: [f64; 3],
    patchset: &PatchSet,
    potential: &Potential,
    n_ref: usize,
    delta: f64,
) -> Result<ModeHamiltonian> {
    if k == [0.0, 0.0, 0.0] {
        return Err(Error::InvalidArgument("mode momentum k = 0".into()));
    }
    let v_hat_k = potential.eval(k);
    if v_hat_k < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "potential must be non-negative, got V(k) = {v_hat_k}"
        )));
    }
    let sets = index_sets(patchset, k, delta, n_ref)?;
    let k_hat = normalize(k);
    let u: Vec<f64> = sets
        .i_plus
        .iter()
        .map(|&alpha| {
            let w = patchset.centers[alpha];
            (k_hat[0] * w[0] + k_hat[1] * w[1] + k_hat[2] * w[2]).sqrt()
        })
        .collect();
    let i_k = u.len();
    let g = KAPPA * v_hat_k * 2.0 * PI / patchset.m_patches as f64;
    Ok(ModeHamiltonian {
        k,
        index_sets: sets,
        i_k,
        u,
        g,
        v_hat_k,
        m_patches: patchset.m_patches,
        degenerate: i_k == 0,
    })
}

/// The reordered coefficient blocks of one mode, kept in structured form
/// (`d` diagonal, `b = g |u><u|` rank one). Dense matrices are materialized
/// on demand for the validation paths.
#[derive(Debug, Clone)]
pub struct QuadraticBlocks {
    pub i_k: usize,
    /// Diagonal of d: the values u_alpha^2.
    pub d: Vec<f64>,
    pub u: Vec<f64>,
    pub g: f64,
}

pub fn assemble_blocks(mode: &ModeHamiltonian) -> QuadraticBlocks {
    QuadraticBlocks {
        i_k: mode.i_k,
        d: mode.u.iter().map(|&x| x * x).collect(),
        u: mode.u.clone(),
        g: mode.g,
    }
}

impl QuadraticBlocks {
    pub fn from_u_g(u: &[f64], g: f64) -> Self {
        QuadraticBlocks {
            i_k: u.len(),
            d: u.iter().map(|&x| x * x).collect(),
            u: u.to_vec(),
            g,
        }
    }

    pub fn trace_d(&self) -> f64 {
        self.d.iter().sum()
    }

    pub fn trace_b(&self) -> f64 {
        self.g * self.d.iter().sum::<f64>()
    }

    /// d as a dense I_k x I_k matrix.
    pub fn dense_d(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.d.clone()))
    }

    /// b = g |u><u| as a dense I_k x I_k matrix.
    pub fn dense_b(&self) -> DMatrix<f64> {
        let n = self.i_k;
        DMatrix::from_fn(n, n, |i, j| self.g * self.u[i] * self.u[j])
    }

    /// D = diag(d, d), size 2 I_k.
    pub fn dense_big_d(&self) -> DMatrix<f64> {
        let n = self.i_k;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if i == j {
                self.d[i % n]
            } else {
                0.0
            }
        })
    }

    /// W = diag(b, b), size 2 I_k.
    pub fn dense_big_w(&self) -> DMatrix<f64> {
        let n = self.i_k;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if (i < n) == (j < n) {
                self.g * self.u[i % n] * self.u[j % n]
            } else {
                0.0
            }
        })
    }

    /// W~ = antidiag(b, b), size 2 I_k: zero diagonal blocks.
    pub fn dense_big_w_tilde(&self) -> DMatrix<f64> {
        let n = self.i_k;
        DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            if (i < n) != (j < n) {
                self.g * self.u[i % n] * self.u[j % n]
            } else {
                0.0
            }
        })
    }

    /// A = d^(1/2) (d + 2b) d^(1/2) = d^2 + 2g |u^2><u^2|.
    pub fn a_matrix(&self) -> DMatrix<f64> {
        let n = self.i_k;
        DMatrix::from_fn(n, n, |i, j| {
            let rank_one = 2.0 * self.g * self.d[i] * self.d[j];
            if i == j {
                self.d[i] * self.d[i] + rank_one
            } else {
                rank_one
            }
        })
    }

    /// B = (d + 2b)^(1/2) d (d + 2b)^(1/2), built densely.
    pub fn b_similar_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.i_k;
        let d_plus_2b = DMatrix::from_fn(n, n, |i, j| {
            let two_b = 2.0 * self.g * self.u[i] * self.u[j];
            if i == j {
                self.d[i] + two_b
            } else {
                two_b
            }
        });
        let root = crate::bogoliubov::sqrt_psd(&d_plus_2b)?;
        Ok(&root * self.dense_d() * &root)
    }
}

/// The grand coefficient matrix of the field-quadratic form:
/// `M = 1/2 diag(D + W + W~, D + W - W~)`, size 4 I_k.
pub fn assemble_grand_matrix(blocks: &QuadraticBlocks) -> DMatrix<f64> {
    let n2 = 2 * blocks.i_k;
    let d = blocks.dense_big_d();
    let w = blocks.dense_big_w();
    let wt = blocks.dense_big_w_tilde();
    let plus = (&d + &w + &wt) * 0.5;
    let minus = (&d + &w - &wt) * 0.5;
    let mut grand = DMatrix::zeros(2 * n2, 2 * n2);
    grand.view_mut((0, 0), (n2, n2)).copy_from(&plus);
    grand.view_mut((n2, n2), (n2, n2)).copy_from(&minus);
    grand
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patches::partition_sphere;

    #[test]
    fn free_mode_on_two_patches() {
        let ps = partition_sphere(2, 0.0).unwrap();
        let mode = build_mode([0.0, 0.0, 1.0], &ps, &Potential::Zero, 1_000_000, 0.05).unwrap();
        assert_eq!(mode.i_k, 1);
        assert_eq!(mode.u, vec![1.0]);
        assert_eq!(mode.g, 0.0);
        assert!(!mode.degenerate);
    }

    #[test]
    fn coupling_for_unit_potential_on_two_patches() {
        let ps = partition_sphere(2, 0.0).unwrap();
        let pot = Potential::CompactStep {
            radius: 2.0,
            amplitude: 1.0,
        };
        let mode = build_mode([0.0, 0.0, 1.0], &ps, &pot, 1_000_000, 0.05).unwrap();
        // g = kappa * 2 pi / 2 = kappa pi.
        assert!((mode.g - KAPPA * PI).abs() < 1e-14);
        assert!((mode.g - 1.9489).abs() < 1e-3);
    }

    #[test]
    fn total_cutoff_gives_degenerate_mode() {
        let ps = partition_sphere(8, 0.0).unwrap();
        // n_ref^-delta close to 1 removes every patch.
        let mode = build_mode([1.0, 0.0, 0.0], &ps, &Potential::Coulomb, 2, 0.001).unwrap();
        assert!(mode.degenerate);
        assert_eq!(mode.i_k, 0);
        let blocks = assemble_blocks(&mode);
        assert_eq!(blocks.a_matrix().nrows(), 0);
    }

    #[test]
    fn u_values_respect_cutoff_bounds() {
        let ps = partition_sphere(64, 0.0).unwrap();
        let delta = 0.25;
        let n_ref = 10_000usize;
        let cutoff = (n_ref as f64).powf(-delta);
        let mode = build_mode([1.0, 2.0, 2.0], &ps, &Potential::Coulomb, n_ref, delta).unwrap();
        for &u in &mode.u {
            assert!(u >= cutoff.sqrt() - 1e-15 && u <= 1.0);
        }
    }

    #[test]
    fn blocks_match_hand_construction() {
        let blocks = QuadraticBlocks::from_u_g(&[1.0, 1.0], 0.5);
        let b = blocks.dense_b();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(b[(i, j)], 0.5);
            }
        }
        // W~ has zero diagonal blocks and b off-diagonal.
        let wt = blocks.dense_big_w_tilde();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(wt[(i, j)], 0.0);
                assert_eq!(wt[(i + 2, j + 2)], 0.0);
                assert_eq!(wt[(i, j + 2)], 0.5);
            }
        }
        // Free theory: D + W +/- W~ = diag(u^2) twice.
        let free = QuadraticBlocks::from_u_g(&[1.0], 0.0);
        let sum = free.dense_big_d() + free.dense_big_w() + free.dense_big_w_tilde();
        assert_eq!(sum, DMatrix::identity(2, 2));
    }

    #[test]
    fn grand_matrix_free_theory_and_hand_rows() {
        // g = 0: the grand matrix is 1/2 diag(D, D).
        let free = QuadraticBlocks::from_u_g(&[0.8, 0.5], 0.0);
        let grand = assemble_grand_matrix(&free);
        let d = free.dense_big_d();
        assert_eq!(grand.nrows(), 8);
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 0.5 * d[(i % 4, i % 4)] } else { 0.0 };
                assert_eq!(grand[(i, j)], expect);
            }
        }

        // u = (1,1), g = 1/2: top-left block 1/2 (D + W + W~); every entry of
        // W + W~ is 1/2, so rows of the top-left block sum to 1/2 (1 + 4*1/2) = 1.5.
        let blocks = QuadraticBlocks::from_u_g(&[1.0, 1.0], 0.5);
        let grand = assemble_grand_matrix(&blocks);
        for i in 0..4 {
            let row_sum: f64 = (0..4).map(|j| grand[(i, j)]).sum();
            assert!((row_sum - 1.5).abs() < 1e-14, "row {i} sum {row_sum}");
        }
    }

    #[test]
    fn scaling_potential_scales_g_and_b_not_d() {
        let ps = partition_sphere(16, 0.0).unwrap();
        let base = Potential::CompactStep {
            radius: 3.0,
            amplitude: 1.0,
        };
        let scaled = Potential::CompactStep {
            radius: 3.0,
            amplitude: 2.5,
        };
        let k = [1.0, 1.0, 0.0];
        let m1 = build_mode(k, &ps, &base, 10_000, 0.25).unwrap();
        let m2 = build_mode(k, &ps, &scaled, 10_000, 0.25).unwrap();
        assert!((m2.g - 2.5 * m1.g).abs() < 1e-14);
        assert_eq!(m1.u, m2.u);
        let b1 = assemble_blocks(&m1);
        let b2 = assemble_blocks(&m2);
        assert_eq!(b1.d, b2.d);
        let db1 = b1.dense_b();
        let db2 = b2.dense_b();
        for i in 0..b1.i_k {
            for j in 0..b1.i_k {
                assert!((db2[(i, j)] - 2.5 * db1[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn half_swap_leaves_big_blocks_invariant() {
        let blocks = QuadraticBlocks::from_u_g(&[0.9, 0.6, 0.4], 0.7);
        let n = blocks.i_k;
        let swap = |i: usize| (i + n) % (2 * n);
        for m in [
            blocks.dense_big_d(),
            blocks.dense_big_w(),
            blocks.dense_big_w_tilde(),
        ] {
            for i in 0..2 * n {
                for j in 0..2 * n {
                    assert_eq!(m[(i, j)], m[(swap(i), swap(j))]);
                }
            }
        }
    }

    #[test]
    fn potential_evaluation() {
        assert_eq!(Potential::Coulomb.eval([2.0, 0.0, 0.0]), 0.25);
        assert_eq!(Potential::Zero.eval([1.0, 0.0, 0.0]), 0.0);
        let step = Potential::CompactStep {
            radius: 2.0,
            amplitude: 3.0,
        };
        assert_eq!(step.eval([2.0, 0.0, 0.0]), 3.0);
        assert_eq!(step.eval([2.1, 0.0, 0.0]), 0.0);
        let mut map = BTreeMap::new();
        map.insert([1, 0, 0], 0.5);
        let tab = Potential::Tabulated(map);
        assert_eq!(tab.eval([1.0, 0.0, 0.0]), 0.5);
        assert_eq!(tab.eval([0.0, 1.0, 0.0]), 0.0);
        assert_eq!(tab.support_radius(), Some(1.0));
    }

    #[test]
    fn negative_potential_is_rejected() {
        let ps = partition_sphere(2, 0.0).unwrap();
        let mut map = BTreeMap::new();
        map.insert([0, 0, 1], -1.0);
        let pot = Potential::Tabulated(map);
        assert!(build_mode([0.0, 0.0, 1.0], &ps, &pot, 100, 0.3).is_err());
    }
}
