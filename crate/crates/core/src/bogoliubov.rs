//! Dense diagonalization of one mode: matrix square roots, the symplectic
//! transformation S, the block matrix E-tilde = diag(A^(1/2), B^(1/2)), the
//! oscillator frequencies and the ground-state shift.
//!
//! With P := D + W + W~ and Q := D + W - W~, the normal form is
//!
//! ```text
//! E = (Q^(1/2) P Q^(1/2))^(1/2),
//! S = diag(Q^(1/2) E^(-1/2) U,  Q^(-1/2) E^(1/2) U),
//! S^T J S = J,   S^T M S = 1/2 diag(E~, E~),
//! ```
//!
//! and the block Hadamard U = (1/sqrt2) [[I, I], [I, -I]] reduces everything
//! to the half-size pair A = d^(1/2)(d+2b)d^(1/2), B = (d+2b)^(1/2) d (d+2b)^(1/2),
//! which share their spectrum. Frequencies are extracted from A directly;
//! the full-size S is assembled only for validation.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::{assemble_grand_matrix, ModeHamiltonian, QuadraticBlocks};
use crate::{hbar, KAPPA};

/// Relative eigenvalue floor below which a matrix is rejected as not PSD.
const PSD_TOLERANCE: f64 = 1e-10;
/// Condition-number ceiling for the positive-definite blocks.
const CONDITION_LIMIT: f64 = 1e14;

/// Symmetric eigendecomposition, eigenvalues ascending.
fn eig_sym(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let mut vecs = DMatrix::zeros(n, n);
    for (i, &o) in order.iter().enumerate() {
        vecs.set_column(i, &eig.eigenvectors.column(o));
    }
    (vals, vecs)
}

/// Apply a spectral function to a symmetric matrix.
fn matrix_function<F: Fn(f64) -> f64>(m: &DMatrix<f64>, f: F) -> DMatrix<f64> {
    let (vals, vecs) = eig_sym(m);
    let fd = DMatrix::from_diagonal(&vals.map(f));
    &vecs * fd * vecs.transpose()
}

/// Principal square root of a symmetric PSD matrix. Eigenvalues inside the
/// rounding band `[-1e-10 ||m||, 0)` are clamped to zero; anything lower is
/// an error.
pub fn sqrt_psd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    let (vals, vecs) = eig_sym(m);
    let scale = vals.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let bound = -PSD_TOLERANCE * scale;
    let min = vals[0];
    if min < bound {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
            bound,
        });
    }
    let fd = DMatrix::from_diagonal(&vals.map(|v| v.max(0.0).sqrt()));
    Ok(&vecs * fd * vecs.transpose())
}

/// The dense factorization data for one mode.
#[derive(Debug, Clone)]
pub struct SymplecticFactorization {
    /// E = (Q^(1/2) P Q^(1/2))^(1/2), size 2 I_k.
    pub e_matrix: DMatrix<f64>,
    /// The symplectic matrix, size 4 I_k.
    pub s_matrix: DMatrix<f64>,
    /// Orthogonal block Hadamard, size 2 I_k.
    pub u_block: DMatrix<f64>,
    /// Field-to-ladder change of basis, size 4 I_k (complex).
    pub theta: DMatrix<Complex<f64>>,
    /// A = d^(1/2) (d + 2b) d^(1/2), size I_k.
    pub a_matrix: DMatrix<f64>,
    /// B = (d + 2b)^(1/2) d (d + 2b)^(1/2), size I_k.
    pub b_matrix: DMatrix<f64>,
}

/// U = (1/sqrt2) [[I, I], [I, -I]], size 2n.
pub fn block_hadamard(n: usize) -> DMatrix<f64> {
    let s = 1.0 / 2.0f64.sqrt();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (bi, bj) = (i / n, j / n);
        if i % n != j % n {
            0.0
        } else if bi == 1 && bj == 1 {
            -s
        } else {
            s
        }
    })
}

/// Theta = (1/sqrt2) [[I, iI], [I, -iI]], size 2n (complex).
pub fn theta_matrix(n: usize) -> DMatrix<Complex<f64>> {
    let s = 1.0 / 2.0f64.sqrt();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i % n != j % n {
            return Complex::new(0.0, 0.0);
        }
        match (i / n, j / n) {
            (0, 0) | (1, 0) => Complex::new(s, 0.0),
            (0, 1) => Complex::new(0.0, s),
            _ => Complex::new(0.0, -s),
        }
    })
}

/// The standard symplectic form J = [[0, I], [-I, 0]], size 2n.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if i + n == j {
            1.0
        } else if j + n == i {
            -1.0
        } else {
            0.0
        }
    })
}

fn condition_check(m: &DMatrix<f64>, name: &'static str) -> Result<()> {
    let (vals, _) = eig_sym(m);
    let min = vals[0];
    let max = vals[vals.len() - 1];
    if min <= 0.0 || max / min > CONDITION_LIMIT {
        return Err(Error::IllConditioned {
            block: name,
            cond: if min <= 0.0 { f64::INFINITY } else { max / min },
        });
    }
    Ok(())
}

/// Build E, S, U, Theta and the half-size pair A, B for one mode.
pub fn build_factorization(blocks: &QuadraticBlocks) -> Result<SymplecticFactorization> {
    let n = blocks.i_k;
    if n == 0 {
        return Ok(SymplecticFactorization {
            e_matrix: DMatrix::zeros(0, 0),
            s_matrix: DMatrix::zeros(0, 0),
            u_block: DMatrix::zeros(0, 0),
            theta: DMatrix::zeros(0, 0),
            a_matrix: DMatrix::zeros(0, 0),
            b_matrix: DMatrix::zeros(0, 0),
        });
    }
    let d = blocks.dense_big_d();
    let w = blocks.dense_big_w();
    let wt = blocks.dense_big_w_tilde();
    let p = &d + &w + &wt;
    let q = &d + &w - &wt;
    condition_check(&q, "D+W-W~")?;
    condition_check(&p, "D+W+W~")?;

    let q_sqrt = sqrt_psd(&q)?;
    let q_inv_sqrt = matrix_function(&q, |v| 1.0 / v.sqrt());
    let e2 = &q_sqrt * &p * &q_sqrt;
    let e_matrix = sqrt_psd(&e2)?;
    let e_sqrt = sqrt_psd(&e_matrix)?;
    let e_inv_sqrt = matrix_function(&e_matrix, |v| 1.0 / v.sqrt());

    let u_block = block_hadamard(n);
    let upper = &q_sqrt * &e_inv_sqrt * &u_block;
    let lower = &q_inv_sqrt * &e_sqrt * &u_block;
    let n2 = 2 * n;
    let mut s_matrix = DMatrix::zeros(2 * n2, 2 * n2);
    s_matrix.view_mut((0, 0), (n2, n2)).copy_from(&upper);
    s_matrix.view_mut((n2, n2), (n2, n2)).copy_from(&lower);

    Ok(SymplecticFactorization {
        e_matrix,
        s_matrix,
        u_block,
        theta: theta_matrix(n2),
        a_matrix: blocks.a_matrix(),
        b_matrix: blocks.b_similar_matrix()?,
    })
}

impl SymplecticFactorization {
    /// E~ = diag(A^(1/2), B^(1/2)), size 2 I_k.
    pub fn e_tilde(&self) -> Result<DMatrix<f64>> {
        let n = self.a_matrix.nrows();
        let a_sqrt = sqrt_psd(&self.a_matrix)?;
        let b_sqrt = sqrt_psd(&self.b_matrix)?;
        let mut et = DMatrix::zeros(2 * n, 2 * n);
        et.view_mut((0, 0), (n, n)).copy_from(&a_sqrt);
        et.view_mut((n, n), (n, n)).copy_from(&b_sqrt);
        Ok(et)
    }

    /// Max-norm of `S^T J S - J`.
    pub fn symplectic_residual(&self) -> f64 {
        let n = self.a_matrix.nrows();
        if n == 0 {
            return 0.0;
        }
        let j = symplectic_form(2 * n);
        (self.s_matrix.transpose() * &j * &self.s_matrix - j).amax()
    }

    /// Max-norm of `S^T M S - 1/2 diag(E~, E~)` for the grand matrix of the
    /// same blocks.
    pub fn block_diagonalization_residual(&self, blocks: &QuadraticBlocks) -> Result<f64> {
        let n = blocks.i_k;
        if n == 0 {
            return Ok(0.0);
        }
        let grand = assemble_grand_matrix(blocks);
        let et = self.e_tilde()?;
        let n2 = 2 * n;
        let mut target = DMatrix::zeros(2 * n2, 2 * n2);
        target.view_mut((0, 0), (n2, n2)).copy_from(&(0.5 * &et));
        target.view_mut((n2, n2), (n2, n2)).copy_from(&(0.5 * &et));
        Ok((self.s_matrix.transpose() * grand * &self.s_matrix - target).amax())
    }

    /// Max deviation of `1/2 Theta^H K Theta` from the grand matrix, where
    /// K = [[D+W, W~], [W~, D+W]] is the ladder-basis coefficient matrix.
    pub fn theta_conjugation_residual(&self, blocks: &QuadraticBlocks) -> f64 {
        let n = blocks.i_k;
        if n == 0 {
            return 0.0;
        }
        let n2 = 2 * n;
        let dw = blocks.dense_big_d() + blocks.dense_big_w();
        let wt = blocks.dense_big_w_tilde();
        let mut k = DMatrix::zeros(2 * n2, 2 * n2);
        k.view_mut((0, 0), (n2, n2)).copy_from(&dw);
        k.view_mut((n2, n2), (n2, n2)).copy_from(&dw);
        k.view_mut((0, n2), (n2, n2)).copy_from(&wt);
        k.view_mut((n2, 0), (n2, n2)).copy_from(&wt);
        let kc = k.map(|x| Complex::new(x, 0.0));
        let conj = self.theta.adjoint() * kc * &self.theta * Complex::new(0.5, 0.0);
        let grand = assemble_grand_matrix(blocks);
        let mut worst = 0.0f64;
        for i in 0..2 * n2 {
            for j in 0..2 * n2 {
                worst = worst
                    .max((conj[(i, j)].re - grand[(i, j)]).abs())
                    .max(conj[(i, j)].im.abs());
            }
        }
        worst
    }
}

/// Oscillator frequencies and ground-state shift of one mode.
///
/// `frequencies` holds the I_k distinct-role values (the eigenvalues of
/// A^(1/2), ascending); each appears in the physical mode with
/// `multiplicity` 2 because A and B contribute one copy each.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BosonSpectrum {
    pub k: [f64; 3],
    pub frequencies: Vec<f64>,
    pub multiplicity: usize,
    /// Ground-state shift 1/2 tr(E - D - W), dimensionless mode units.
    pub shift: f64,
    /// Index into `frequencies` of the isolated collective branch, when the
    /// coupling is positive.
    pub plasmon_index: Option<usize>,
}

/// Dense-path diagonalization: frequencies from A, shift from tr E~.
pub fn diagonalize_mode(blocks: &QuadraticBlocks) -> Result<BosonSpectrum> {
    diagonalize_mode_at(blocks, [0.0, 0.0, 0.0])
}

/// Same as [`diagonalize_mode`] with the mode momentum recorded.
pub fn diagonalize_mode_at(blocks: &QuadraticBlocks, k: [f64; 3]) -> Result<BosonSpectrum> {
    if blocks.i_k == 0 {
        return Ok(BosonSpectrum {
            k,
            frequencies: Vec::new(),
            multiplicity: 2,
            shift: 0.0,
            plasmon_index: None,
        });
    }
    let (a_vals, _) = eig_sym(&blocks.a_matrix());
    let b = blocks.b_similar_matrix()?;
    let (b_vals, _) = eig_sym(&b);
    let frequencies: Vec<f64> = a_vals.iter().map(|&v| v.max(0.0).sqrt()).collect();
    // tr E = tr A^(1/2) + tr B^(1/2); tr(D + W) = 2 (tr d + tr b).
    let tr_e: f64 = frequencies.iter().sum::<f64>()
        + b_vals.iter().map(|&v| v.max(0.0).sqrt()).sum::<f64>();
    let shift = 0.5 * (tr_e - 2.0 * blocks.trace_d() - 2.0 * blocks.trace_b());
    let plasmon_index = if blocks.g > 0.0 {
        Some(frequencies.len() - 1)
    } else {
        None
    };
    Ok(BosonSpectrum {
        k,
        frequencies,
        multiplicity: 2,
        shift,
        plasmon_index,
    })
}

/// Physical single-boson energies `hbar 2 kappa |k| e_gamma` for a spectrum
/// belonging to `mode`, and the ground-state shift on the same scale.
pub fn excitation_energies(spectrum: &BosonSpectrum, mode: &ModeHamiltonian) -> (Vec<f64>, f64) {
    let scale = hbar(mode.index_sets.n_ref) * 2.0 * KAPPA * mode.k_abs();
    (
        spectrum.frequencies.iter().map(|&e| scale * e).collect(),
        scale * spectrum.shift,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::{assemble_blocks, build_mode, Potential};
    use crate::patches::partition_sphere;
    use proptest::prelude::*;

    #[test]
    fn sqrt_psd_identity_and_diagonal() {
        let id = DMatrix::<f64>::identity(3, 3);
        let r = sqrt_psd(&id).unwrap();
        assert!((r - &id).amax() < 1e-14);

        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0]));
        let r = sqrt_psd(&d).unwrap();
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14);
        assert!((r[(1, 1)] - 3.0).abs() < 1e-14);
        assert!(r[(0, 1)].abs() < 1e-14);
    }

    #[test]
    fn sqrt_psd_rejects_indefinite_input() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -0.5]));
        match sqrt_psd(&m) {
            Err(Error::NotPositiveSemidefinite { .. }) => {}
            other => panic!("expected not-PSD error, got {other:?}"),
        }
    }

    #[test]
    fn extreme_conditioning_is_reported() {
        // A near-zero u drives cond(D + W - W~) past the 1e14 ceiling.
        let blocks = QuadraticBlocks::from_u_g(&[1.0, 1e-9], 1.0);
        match build_factorization(&blocks) {
            Err(Error::IllConditioned { block, .. }) => assert_eq!(block, "D+W-W~"),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn free_theory_factorization_is_trivial() {
        let blocks = QuadraticBlocks::from_u_g(&[0.9, 0.4], 0.0);
        let f = build_factorization(&blocks).unwrap();
        // E = D and S = diag(U, U).
        assert!((&f.e_matrix - blocks.dense_big_d()).amax() < 1e-12);
        let n2 = 4;
        let u = block_hadamard(2);
        for i in 0..n2 {
            for j in 0..n2 {
                assert!((f.s_matrix[(i, j)] - u[(i, j)]).abs() < 1e-12);
                assert!((f.s_matrix[(n2 + i, n2 + j)] - u[(i, j)]).abs() < 1e-12);
            }
        }
        // A = B = d^2.
        let d2 = blocks.dense_d() * blocks.dense_d();
        assert!((&f.a_matrix - &d2).amax() < 1e-14);
        assert!((&f.b_matrix - &d2).amax() < 1e-12);
    }

    #[test]
    fn rank_one_example_spectrum_and_shift() {
        // u = (1,1), g = 1/2: A = I + ones(2,2), spectrum {1, 3}; the
        // ground-state shift of the 2 I_k-dimensional form is sqrt(3) - 2.
        let blocks = QuadraticBlocks::from_u_g(&[1.0, 1.0], 0.5);
        let spec = diagonalize_mode(&blocks).unwrap();
        assert!((spec.frequencies[0] - 1.0).abs() < 1e-12);
        assert!((spec.frequencies[1] - 3.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(spec.multiplicity, 2);
        let expect = 3.0f64.sqrt() - 2.0;
        assert!(
            (spec.shift - expect).abs() < 1e-12,
            "shift {} vs {}",
            spec.shift,
            expect
        );
        // Cross-check the trace bookkeeping against the dense E.
        let f = build_factorization(&blocks).unwrap();
        let tr_e = f.e_matrix.trace();
        let dense_shift = 0.5
            * (tr_e
                - blocks.dense_big_d().trace()
                - blocks.dense_big_w().trace());
        assert!((spec.shift - dense_shift).abs() < 1e-12);
    }

    #[test]
    fn free_theory_spectrum_is_u_squared_with_zero_shift() {
        let blocks = QuadraticBlocks::from_u_g(&[0.3, 0.8, 0.6], 0.0);
        let spec = diagonalize_mode(&blocks).unwrap();
        let mut want: Vec<f64> = blocks.d.clone();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in spec.frequencies.iter().zip(&want) {
            assert!((got - want).abs() < 1e-12);
        }
        assert_eq!(spec.shift, 0.0);
        assert!(spec.plasmon_index.is_none());
    }

    #[test]
    fn degenerate_mode_yields_empty_spectrum() {
        let blocks = QuadraticBlocks::from_u_g(&[], 0.0);
        let spec = diagonalize_mode(&blocks).unwrap();
        assert!(spec.frequencies.is_empty());
        assert_eq!(spec.shift, 0.0);
        let f = build_factorization(&blocks).unwrap();
        assert_eq!(f.s_matrix.nrows(), 0);
    }

    #[test]
    fn excitation_energy_scale() {
        let ps = partition_sphere(2, 0.0).unwrap();
        let mode = build_mode([0.0, 0.0, 1.0], &ps, &Potential::Zero, 1, 0.5).unwrap();
        let blocks = assemble_blocks(&mode);
        let spec = diagonalize_mode_at(&blocks, mode.k).unwrap();
        let (energies, shift_energy) = excitation_energies(&spec, &mode);
        // N = 1 so hbar = 1; e = u^2 = 1 and |k| = 1: energy = 2 kappa.
        assert_eq!(energies.len(), 1);
        assert!((energies[0] - 2.0 * KAPPA).abs() < 1e-12);
        assert!((energies[0] - 1.2407).abs() < 1e-4);
        assert_eq!(shift_energy, 0.0);
    }

    #[test]
    fn symplectic_and_block_diagonal_residuals_small() {
        let cases = [
            (vec![1.0, 1.0], 0.5),
            (vec![0.9, 0.7, 0.3], 1.2),
            (vec![0.99, 0.95, 0.6, 0.2, 0.17], 0.05),
        ];
        for (u, g) in cases {
            let blocks = QuadraticBlocks::from_u_g(&u, g);
            let f = build_factorization(&blocks).unwrap();
            assert!(f.symplectic_residual() < 1e-9, "u {u:?} g {g}");
            assert!(
                f.block_diagonalization_residual(&blocks).unwrap() < 1e-9,
                "u {u:?} g {g}"
            );
            assert!(f.theta_conjugation_residual(&blocks) < 1e-12);
        }
    }

    #[test]
    fn spectra_of_a_and_b_agree() {
        let blocks = QuadraticBlocks::from_u_g(&[0.95, 0.8, 0.45, 0.31], 0.8);
        let f = build_factorization(&blocks).unwrap();
        let (a_vals, _) = eig_sym(&f.a_matrix);
        let (b_vals, _) = eig_sym(&f.b_matrix);
        for (a, b) in a_vals.iter().zip(b_vals.iter()) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn shift_is_nonpositive_and_zero_only_for_free_modes() {
        for (u, g) in [
            (vec![1.0, 0.5], 0.3),
            (vec![0.7, 0.7, 0.7], 2.0),
            (vec![0.2], 0.01),
        ] {
            let spec = diagonalize_mode(&QuadraticBlocks::from_u_g(&u, g)).unwrap();
            assert!(spec.shift < 0.0, "u {u:?} g {g}: shift {}", spec.shift);
        }
        let free = diagonalize_mode(&QuadraticBlocks::from_u_g(&[0.4, 0.9], 0.0)).unwrap();
        assert_eq!(free.shift, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sqrt_psd_squares_back(dim in 1usize..6, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let gmat = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
            let m = &gmat * gmat.transpose();
            let r = sqrt_psd(&m).unwrap();
            let back = &r * &r;
            let denom = m.norm().max(1e-12);
            prop_assert!((back - &m).norm() / denom < 1e-9);
        }

        #[test]
        fn grand_matrix_is_positive_definite(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1usize..6);
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1f64..1.0).sqrt()).collect();
            let g = rng.gen_range(0.0..2.0);
            let grand = assemble_grand_matrix(&QuadraticBlocks::from_u_g(&u, g));
            let (vals, _) = eig_sym(&grand);
            prop_assert!(vals[0] > 0.0, "min eigenvalue {}", vals[0]);
        }
    }
}
