//! Seeded random mode generators shared by the validation command and the
//! acceptance suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::mode::{build_mode, ModeHamiltonian, Potential, QuadraticBlocks};
use crate::patches::partition_sphere;

/// Random coefficient blocks with `1 <= I_k <= max_dim`, u^2 in
/// [cutoff, 1], and coupling g in [g_min, g_max). Occasionally injects
/// exact duplicate u values to exercise repeated poles.
pub fn random_blocks(rng: &mut ChaCha8Rng, max_dim: usize, g_min: f64, g_max: f64) -> QuadraticBlocks {
    let n = rng.gen_range(1..=max_dim);
    let mut u: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.01f64..1.0).sqrt())
        .collect();
    if n >= 2 && rng.gen_bool(0.3) {
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        u[dst] = u[src];
    }
    let g = rng.gen_range(g_min..g_max);
    QuadraticBlocks::from_u_g(&u, g)
}

/// A deterministic stream of random blocks.
pub fn random_block_suite(seed: u64, count: usize, max_dim: usize) -> Vec<QuadraticBlocks> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_blocks(&mut rng, max_dim, 0.01, 2.0))
        .collect()
}

/// Random Coulomb modes on real patch sets: random even M, random lattice-ish
/// momentum direction and magnitude.
pub fn random_coulomb_modes(seed: u64, count: usize) -> Result<Vec<ModeHamiltonian>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::with_capacity(count);
    while modes.len() < count {
        let m = 2 * rng.gen_range(4..40usize);
        let ps = partition_sphere(m, 0.0)?;
        let k = [
            rng.gen_range(-3i64..=3) as f64,
            rng.gen_range(-3i64..=3) as f64,
            rng.gen_range(-3i64..=3) as f64,
        ];
        if k == [0.0, 0.0, 0.0] {
            continue;
        }
        let mode = build_mode(k, &ps, &Potential::Coulomb, 1_000_000, 0.5)?;
        if mode.degenerate {
            continue;
        }
        modes.push(mode);
    }
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_deterministic() {
        let a = random_block_suite(42, 5, 10);
        let b = random_block_suite(42, 5, 10);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.u, y.u);
            assert_eq!(x.g, y.g);
        }
        let c = random_block_suite(43, 5, 10);
        assert!(a.iter().zip(&c).any(|(x, y)| x.u != y.u || x.g != y.g));
    }

    #[test]
    fn coulomb_modes_are_valid() {
        let modes = random_coulomb_modes(7, 10).unwrap();
        for m in &modes {
            assert!(!m.degenerate);
            assert!(m.g > 0.0);
            assert_eq!(m.i_k, m.u.len());
        }
    }
}
