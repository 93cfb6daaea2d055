//! Exact integer-lattice geometry: Fermi ball construction and
//! particle-hole pair enumeration.
//!
//! Everything here is integer arithmetic (`|k|^2` compared against a squared
//! radius), so shell boundaries are exact and the counts serve as ground
//! truth for the approximate patch normalization.

use crate::error::{Error, Result};
use crate::{hbar, KAPPA};

/// Squared Euclidean norm of an integer 3-vector.
pub fn norm_sq(v: [i64; 3]) -> i64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

/// The closed ball of integer momenta `|k| <= k_F`.
#[derive(Debug, Clone)]
pub struct FermiBall {
    /// Ball radius in lattice units, `sqrt(radius_squared)`.
    pub k_fermi: f64,
    /// Exact squared radius; membership is `|v|^2 <= radius_squared`.
    pub radius_squared: i64,
    /// Number of lattice points in the ball.
    pub n_particles: usize,
    /// All lattice points of the ball, sorted lexicographically.
    pub momenta: Vec<[i64; 3]>,
    /// kappa = (3/4pi)^(1/3).
    pub kappa: f64,
    /// hbar = n_particles^(-1/3).
    pub hbar: f64,
    /// True when a `TargetN` request fell strictly inside a shell and was
    /// rounded up to the shell-complete count.
    pub rounded_up: bool,
}

impl FermiBall {
    pub fn contains(&self, v: [i64; 3]) -> bool {
        norm_sq(v) <= self.radius_squared
    }
}

/// How to choose the ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BallSpec {
    /// Closed ball of the given radius (lattice units).
    Radius(f64),
    /// Closed ball with exact integer squared radius.
    RadiusSquared(i64),
    /// Smallest full-shell ball containing at least this many points.
    TargetN(usize),
}

/// Build the Fermi ball. A `TargetN` that falls strictly inside a shell is
/// rounded up to the complete shell (the ball is never split).
pub fn build_fermi_ball(spec: BallSpec) -> Result<FermiBall> {
    let (r2, rounded_up) = match spec {
        BallSpec::Radius(r) => {
            if !(r >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "ball radius must be non-negative, got {r}"
                )));
            }
            // One-ulp forgiveness so that e.g. sqrt(5)^2 = 5.000...001 maps to 5.
            ((r * r * (1.0 + 4.0 * f64::EPSILON)).floor() as i64, false)
        }
        BallSpec::RadiusSquared(r2) => {
            if r2 < 0 {
                return Err(Error::InvalidArgument(format!(
                    "squared radius must be non-negative, got {r2}"
                )));
            }
            (r2, false)
        }
        BallSpec::TargetN(n) => {
            if n == 0 {
                return Err(Error::InvalidArgument(
                    "target particle number must be at least 1".into(),
                ));
            }
            radius_squared_for_target(n)?
        }
    };

    let momenta = enumerate_ball(r2);
    let n = momenta.len();
    Ok(FermiBall {
        k_fermi: (r2 as f64).sqrt(),
        radius_squared: r2,
        n_particles: n,
        momenta,
        kappa: KAPPA,
        hbar: hbar(n),
        rounded_up,
    })
}

/// All lattice points with `|v|^2 <= r2`, sorted lexicographically.
fn enumerate_ball(r2: i64) -> Vec<[i64; 3]> {
    let r = (r2 as f64).sqrt().ceil() as i64;
    let mut pts = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            for z in -r..=r {
                let v = [x, y, z];
                if norm_sq(v) <= r2 {
                    pts.push(v);
                }
            }
        }
    }
    pts
}

/// Smallest squared radius whose ball holds at least `n` points, plus the
/// rounded-up flag.
fn radius_squared_for_target(n: usize) -> Result<(i64, bool)> {
    // Volume estimate (4pi/3) r^3 ~ n, padded by a few shells.
    let mut bound = ((3.0 * n as f64 / (4.0 * std::f64::consts::PI)).cbrt().ceil() as i64) + 3;
    loop {
        let r2_max = bound * bound;
        // Shell histogram: counts[m] = #{v : |v|^2 = m}.
        let mut counts = vec![0u64; (r2_max + 1) as usize];
        for x in -bound..=bound {
            for y in -bound..=bound {
                for z in -bound..=bound {
                    let m = norm_sq([x, y, z]);
                    if m <= r2_max {
                        counts[m as usize] += 1;
                    }
                }
            }
        }
        let mut cum = 0u64;
        for (m, &c) in counts.iter().enumerate() {
            cum += c;
            if cum >= n as u64 {
                return Ok((m as i64, cum > n as u64));
            }
        }
        bound *= 2;
        if bound > 4096 {
            return Err(Error::NumericalFailure(format!(
                "could not reach target N = {n} within radius {bound}"
            )));
        }
    }
}

/// Exact number of particle-hole pairs `(p, h)` with `p = h + k`, `h` inside
/// the ball, `p` outside, and both inside the patch predicate. This is the
/// exact squared normalization `n^2_{alpha,k}`.
pub fn count_pairs_exact<F>(ball: &FermiBall, patch: F, k: [i64; 3]) -> Result<u64>
where
    F: Fn([i64; 3]) -> bool,
{
    if k == [0, 0, 0] {
        return Err(Error::InvalidArgument(
            "relative momentum k = 0 creates no particle-hole pair".into(),
        ));
    }
    // Cube bound from the design: |h|_inf <= ceil(k_F) + |k|_inf covers every
    // hole whose partner can straddle the surface.
    let k_inf = k.iter().map(|c| c.abs()).max().unwrap();
    let bound = (ball.k_fermi.ceil() as i64) + k_inf;
    let mut count = 0u64;
    for x in -bound..=bound {
        for y in -bound..=bound {
            for z in -bound..=bound {
                let h = [x, y, z];
                if !ball.contains(h) {
                    continue;
                }
                let p = [h[0] + k[0], h[1] + k[1], h[2] + k[2]];
                if ball.contains(p) {
                    continue;
                }
                if patch(h) && patch(p) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}
