//! Run configuration: a TOML file plus `section.key=value` overrides.

use anyhow::{anyhow, bail, Context, Result};
use choquard::diagnostics::{DoubleIntegral, VirialWeight};
use choquard::evolution::EvolveConfig;
use choquard::ground_state::GroundStateConfig;
use choquard::{Grid, ProblemParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Seed for random initial fields.
    #[serde(default)]
    pub seed: u64,
    /// Single-threaded, fixed-order reductions. The toolkit has no other mode
    /// yet, so this is recorded rather than acted on.
    #[serde(default = "yes")]
    pub reproducible: bool,
    /// Write a field snapshot every this many recorded samples; 0 disables.
    #[serde(default)]
    pub snapshot_every: usize,
    pub params: ParamsSection,
    pub grid: GridSection,
    #[serde(default)]
    pub ground_state: GroundStateConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub exact: ExactSection,
    #[serde(default)]
    pub virial: VirialSection,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "three")]
    pub dim: usize,
    pub alpha: f64,
    pub p: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default = "one")]
    pub a: i32,
    /// Absolute regularization. Takes precedence over `delta_cells`.
    pub delta: Option<f64>,
    /// Regularization in units of `h^2`; the default is 1.
    pub delta_cells: Option<f64>,
}

fn three() -> usize {
    3
}

fn one() -> i32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub half_width: f64,
    #[serde(default = "yes")]
    pub offset: bool,
    /// Ground states are minimized on this grid and refined up to `n`.
    #[serde(default = "coarse")]
    pub coarse_n: usize,
}

fn coarse() -> usize {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Gaussian {
        #[serde(default = "unit")]
        width: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `scale * Q` for the computed ground state.
    GroundState {
        #[serde(default = "unit")]
        scale: f64,
    },
    Bump {
        radius: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// Smooth random field from `seed`, windowed by a Gaussian of `width`.
    Random {
        #[serde(default = "unit")]
        width: f64,
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// A field file; its grid must match the configured one.
    Field { path: PathBuf },
    /// Positive-energy blowup data built from a bump of `radius`.
    PositiveEnergy {
        #[serde(default = "bump_radius")]
        radius: f64,
        energy: f64,
        #[serde(default = "half")]
        eps_fraction: f64,
    },
}

impl Default for InitialData {
    fn default() -> Self {
        Self::Gaussian {
            width: 1.0,
            amplitude: 1.0,
        }
    }
}

fn unit() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn bump_radius() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub amplitudes: Vec<f64>,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            amplitudes: vec![0.6, 0.8, 1.0, 1.2, 1.4, 1.6],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactSection {
    /// Blowup time of the pseudo-conformal solution.
    pub big_t: f64,
    /// End of the comparison window.
    pub t_end: f64,
    pub tolerance: f64,
}

impl Default for ExactSection {
    fn default() -> Self {
        Self {
            big_t: 1.0,
            t_end: 0.5,
            tolerance: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VirialSection {
    pub weight: VirialWeight,
    pub method: DoubleIntegral,
    /// Allowed `max |d2 V - rhs| / max |rhs|`.
    pub tolerance: f64,
}

impl Default for VirialSection {
    fn default() -> Self {
        Self {
            weight: VirialWeight::Quadratic,
            method: DoubleIntegral::Reduced,
            tolerance: 1e-2,
        }
    }
}

impl RunConfig {
    /// Reads `path` and applies `section.key=value` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().context("config is not valid TOML")?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(doc)
            .try_into()
            .context("config does not match the expected layout")?;
        Ok(cfg)
    }

    pub fn grid(&self) -> choquard::Result<Grid> {
        Grid::new(self.params.dim, self.grid.n, self.grid.half_width, self.grid.offset)
    }

    /// Problem parameters with `delta` resolved on `grid`.
    pub fn params_on(&self, grid: &Grid) -> ProblemParams {
        let h = grid.spacing();
        let delta = self
            .params
            .delta
            .unwrap_or_else(|| self.params.delta_cells.unwrap_or(1.0) * h * h);
        ProblemParams::new(
            self.params.dim,
            self.params.alpha,
            self.params.p,
            self.params.b,
            self.params.a,
            delta,
        )
    }

    /// SHA-256 of the resolved configuration, as lowercase hex. The output
    /// directory is left out, so a rerun elsewhere keeps its file names.
    pub fn hash(&self) -> String {
        let mut inputs = self.clone();
        inputs.output = PathBuf::new();
        let canonical = serde_json::to_string(&inputs).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| anyhow!("override `{spec}` is not of the form section.key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("override `{spec}` has an empty key");
    }
    // a TOML literal when it parses as one, a bare string otherwise
    let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let (last, parents) = keys.split_last().expect("non-empty");
    let mut table = doc;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override `{spec}`: `{k}` is not a section"))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
