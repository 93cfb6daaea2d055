//! Run configuration: defaults, flat key=value config files, command-line
//! overrides, validation, and the provenance hash embedded in every output.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use bosonize::mode::Potential;

/// All knobs of a run. Assembled as defaults <- config file <- CLI flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Particle number (ball and hbar scale). `k_fermi`, when set, wins.
    pub n_particles: usize,
    /// Explicit ball radius overriding `n_particles` for lattice commands.
    pub k_fermi: Option<f64>,
    pub m_patches: usize,
    pub delta: f64,
    /// Potential descriptor string, e.g. `coulomb`, `zero`,
    /// `compact:2.0:1.0` (radius:amplitude), `table:<path>`.
    pub potential: String,
    pub k_min: f64,
    pub k_max: f64,
    pub k_steps: usize,
    /// Direction of the |k| sweep, e.g. `0,0,1`.
    pub k_dir: String,
    pub k_cutoff: Option<f64>,
    /// Integer mode momentum for `paircount`, e.g. `0,0,1`.
    pub k_lattice: String,
    /// Corridor half-width for lattice-faithful pair counting.
    pub corridor: f64,
    pub fit_k_min: f64,
    pub fit_k_max: f64,
    pub format: OutputFormat,
    pub out: Option<String>,
    pub seed: u64,
    /// Residual bound used by `validate`.
    pub tol_residual: f64,
    /// Number of randomized modes in `validate`.
    pub modes: usize,
    /// Optional path to dump the patch set in text form.
    pub dump_patches: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_particles: 1_000_000,
            k_fermi: None,
            m_patches: 200,
            delta: 0.05,
            potential: "coulomb".into(),
            k_min: 0.1,
            k_max: 2.0,
            k_steps: 20,
            k_dir: "0,0,1".into(),
            k_cutoff: None,
            k_lattice: "0,0,1".into(),
            corridor: 0.0,
            fit_k_min: 0.05,
            fit_k_max: 0.3,
            format: OutputFormat::Csv,
            out: None,
            seed: 0,
            tol_residual: 1e-9,
            modes: 50,
            dump_patches: None,
        }
    }
}

impl RunConfig {
    /// Apply one `key = value` pair (config-file line or flag).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "n_particles" => self.n_particles = v.parse().context("n_particles")?,
            "k_fermi" => self.k_fermi = Some(v.parse().context("k_fermi")?),
            "m_patches" => self.m_patches = v.parse().context("m_patches")?,
            "delta" => self.delta = v.parse().context("delta")?,
            "potential" => self.potential = v.to_string(),
            "k_min" => self.k_min = v.parse().context("k_min")?,
            "k_max" => self.k_max = v.parse().context("k_max")?,
            "k_steps" => self.k_steps = v.parse().context("k_steps")?,
            "k_dir" => self.k_dir = v.to_string(),
            "k_cutoff" => self.k_cutoff = Some(v.parse().context("k_cutoff")?),
            "k_lattice" => self.k_lattice = v.to_string(),
            "corridor" => self.corridor = v.parse().context("corridor")?,
            "fit_k_min" => self.fit_k_min = v.parse().context("fit_k_min")?,
            "fit_k_max" => self.fit_k_max = v.parse().context("fit_k_max")?,
            "format" => {
                self.format = match v {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => bail!("unknown format {other:?} (csv|json)"),
                }
            }
            "out" => self.out = Some(v.to_string()),
            "seed" => self.seed = v.parse().context("seed")?,
            "tol_residual" => self.tol_residual = v.parse().context("tol_residual")?,
            "modes" => self.modes = v.parse().context("modes")?,
            "dump_patches" => self.dump_patches = Some(v.to_string()),
            other => bail!("unknown config key {other:?}"),
        }
        Ok(())
    }

    /// Read a flat `key = value` file ('#' starts a comment).
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected key = value", lineno + 1))?;
            self.set(key.trim(), value)
                .with_context(|| format!("line {}", lineno + 1))?;
        }
        Ok(())
    }

    /// Check the numeric fields before any computation starts.
    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            bail!("n_particles must be positive");
        }
        if self.m_patches < 2 || self.m_patches % 2 != 0 {
            bail!("m_patches must be even and at least 2");
        }
        if self.delta <= 0.0 {
            bail!("delta must be positive");
        }
        if self.k_min <= 0.0 || self.k_max < self.k_min {
            bail!("need 0 < k_min <= k_max");
        }
        if self.k_steps == 0 {
            bail!("k_steps must be positive");
        }
        if self.corridor < 0.0 {
            bail!("corridor must be non-negative");
        }
        if self.tol_residual <= 0.0 {
            bail!("tol_residual must be positive");
        }
        self.parse_potential()?;
        self.parse_k_dir()?;
        self.parse_k_lattice()?;
        Ok(())
    }

    pub fn parse_potential(&self) -> Result<Potential> {
        let mut parts = self.potential.split(':');
        let name = parts.next().unwrap_or("");
        match name {
            "zero" => Ok(Potential::Zero),
            "coulomb" => Ok(Potential::Coulomb),
            "compact" => {
                let radius: f64 = parts
                    .next()
                    .context("compact potential needs compact:<radius>:<amplitude>")?
                    .parse()?;
                let amplitude: f64 = parts.next().map(str::parse).transpose()?.unwrap_or(1.0);
                if radius < 0.0 || amplitude < 0.0 {
                    bail!("compact potential needs non-negative radius and amplitude");
                }
                Ok(Potential::CompactStep { radius, amplitude })
            }
            "table" => {
                let path = parts.next().context("table potential needs table:<path>")?;
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading potential table {path}"))?;
                let mut map = BTreeMap::new();
                for (lineno, raw) in text.lines().enumerate() {
                    let line = raw.split('#').next().unwrap_or("").trim();
                    if line.is_empty() {
                        continue;
                    }
                    let fields: Vec<&str> = line.split_whitespace().collect();
                    if fields.len() != 4 {
                        bail!("table line {}: expected kx ky kz value", lineno + 1);
                    }
                    let kx: i64 = fields[0].parse()?;
                    let ky: i64 = fields[1].parse()?;
                    let kz: i64 = fields[2].parse()?;
                    let value: f64 = fields[3].parse()?;
                    if value < 0.0 {
                        bail!("table line {}: potential values must be >= 0", lineno + 1);
                    }
                    map.insert([kx, ky, kz], value);
                }
                Ok(Potential::Tabulated(map))
            }
            other => bail!("unknown potential {other:?} (zero|coulomb|compact:r:a|table:path)"),
        }
    }

    pub fn parse_k_dir(&self) -> Result<[f64; 3]> {
        let v = parse_triple::<f64>(&self.k_dir)?;
        if v == [0.0, 0.0, 0.0] {
            bail!("k_dir must be non-zero");
        }
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        Ok([v[0] / n, v[1] / n, v[2] / n])
    }

    pub fn parse_k_lattice(&self) -> Result<[i64; 3]> {
        let v = parse_triple::<i64>(&self.k_lattice)?;
        if v == [0, 0, 0] {
            bail!("k_lattice must be non-zero");
        }
        Ok(v)
    }

    /// The |k| sweep grid.
    pub fn k_grid(&self) -> Vec<f64> {
        if self.k_steps == 1 {
            return vec![self.k_min];
        }
        let step = (self.k_max - self.k_min) / (self.k_steps - 1) as f64;
        (0..self.k_steps)
            .map(|i| self.k_min + step * i as f64)
            .collect()
    }

    /// Canonical `key=value` listing; the provenance hash is taken over it.
    pub fn canonical(&self) -> String {
        let mut pairs: Vec<(String, String)> = vec![
            ("n_particles".into(), self.n_particles.to_string()),
            ("m_patches".into(), self.m_patches.to_string()),
            ("delta".into(), format!("{:e}", self.delta)),
            ("potential".into(), self.potential.clone()),
            ("k_min".into(), format!("{:e}", self.k_min)),
            ("k_max".into(), format!("{:e}", self.k_max)),
            ("k_steps".into(), self.k_steps.to_string()),
            ("k_dir".into(), self.k_dir.clone()),
            ("k_lattice".into(), self.k_lattice.clone()),
            ("corridor".into(), format!("{:e}", self.corridor)),
            ("fit_k_min".into(), format!("{:e}", self.fit_k_min)),
            ("fit_k_max".into(), format!("{:e}", self.fit_k_max)),
            (
                "format".into(),
                match self.format {
                    OutputFormat::Csv => "csv".into(),
                    OutputFormat::Json => "json".into(),
                },
            ),
            ("seed".into(), self.seed.to_string()),
            ("tol_residual".into(), format!("{:e}", self.tol_residual)),
            ("modes".into(), self.modes.to_string()),
        ];
        if let Some(kf) = self.k_fermi {
            pairs.push(("k_fermi".into(), format!("{kf:e}")));
        }
        if let Some(kc) = self.k_cutoff {
            pairs.push(("k_cutoff".into(), format!("{kc:e}")));
        }
        pairs.sort();
        pairs
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// FNV-1a hash of the canonical listing, as a hex provenance token.
    pub fn hash(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for b in self.canonical().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(PRIME);
        }
        format!("{h:016x}")
    }
}

fn parse_triple<T: std::str::FromStr>(s: &str) -> Result<[T; 3]>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("expected three comma-separated components, got {s:?}");
    }
    Ok([parts[0].parse()?, parts[1].parse()?, parts[2].parse()?])
}
