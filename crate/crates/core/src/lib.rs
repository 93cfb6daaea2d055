//! Bosonized effective modes of the high-density Fermi gas.
//!
//! The library builds, for each momentum transfer `k`, the quadratic bosonic
//! Hamiltonian describing particle-hole excitations delocalized over
//! Fermi-surface patches, diagonalizes it two independent ways (dense
//! symplectic factorization and a rank-one secular equation), and compares
//! the resulting spectra and ground-state shifts against their continuum
//! limits: the plasmon dispersion relation and the RPA correlation-energy
//! integral.
//!
//! Modules:
//! - [`lattice`]: exact integer-lattice Fermi ball and particle-hole pair counts
//! - [`patches`]: equal-area partition of the unit sphere, per-mode index sets
//! - [`mode`]: assembly of the per-`k` mode data and coefficient matrices
//! - [`bogoliubov`]: dense diagonalization path (matrix square roots, symplectic `S`)
//! - [`secular`]: fast rank-one secular-equation path with interlacing
//! - [`continuum`]: `M -> infinity` limits: arcoth secular equation, plasmon
//!   series, RPA bracket, correlation-energy totals
//! - [`sampling`]: seeded random mode generators for validation suites

pub mod bogoliubov;
pub mod continuum;
pub mod error;
pub mod lattice;
pub mod mode;
pub mod patches;
pub mod quad;
pub mod sampling;
pub mod secular;

pub use error::{Error, Result};

/// kappa = (3 / 4 pi)^(1/3), the Fermi-radius constant: k_F ~ kappa N^(1/3).
pub const KAPPA: f64 = 0.620_350_490_899_400_1;

/// Effective Planck constant hbar = N^(-1/3).
pub fn hbar(n_particles: usize) -> f64 {
    1.0 / (n_particles as f64).cbrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_matches_definition() {
        let k = (3.0 / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
        assert!((KAPPA - k).abs() < 1e-15, "KAPPA = {KAPPA}, formula = {k}");
    }

    #[test]
    fn hbar_is_inverse_cube_root() {
        assert!((hbar(1_000_000) - 0.01).abs() < 1e-15);
        assert!((hbar(1) - 1.0).abs() < 1e-15);
    }
}
