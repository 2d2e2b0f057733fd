//! Experiment configuration: a versioned TOML file plus flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Periodic,
    Percolation,
    Visible,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Periodic => "periodic",
            ModelKind::Percolation => "percolation",
            ModelKind::Visible => "visible",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NuRef {
    ClosedForm,
    LargestJ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodicParams {
    #[serde(default = "one")]
    pub period: usize,
    /// Colour indices over `C_N`, row-major. Default: alternating two colours.
    pub table: Option<Vec<usize>>,
    /// One on-site potential per colour; omitted means pure hopping.
    pub potentials: Option<Vec<f64>>,
}

impl Default for PeriodicParams {
    fn default() -> Self {
        PeriodicParams {
            period: 1,
            table: None,
            potentials: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PercolationParams {
    #[serde(default = "default_p_closed")]
    pub p_closed: f64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub open_potential: f64,
}

impl Default for PercolationParams {
    fn default() -> Self {
        PercolationParams {
            p_closed: default_p_closed(),
            seed: None,
            open_potential: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockParams {
    pub offset: Vec<i64>,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParams {
    /// Nearest-neighbour amplitude, used when no explicit blocks are given.
    #[serde(default = "unit")]
    pub amplitude: f64,
    pub blocks: Option<Vec<BlockParams>>,
}

impl Default for OperatorParams {
    fn default() -> Self {
        OperatorParams {
            amplitude: 1.0,
            blocks: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    #[serde(default = "default_j")]
    pub j: Vec<usize>,
    #[serde(rename = "M", default = "default_m")]
    pub m: Vec<usize>,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            j: default_j(),
            m: default_m(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub model: ModelKind,
    pub d: usize,
    #[serde(default)]
    pub periodic: PeriodicParams,
    #[serde(default)]
    pub percolation: PercolationParams,
    #[serde(default)]
    pub operator: OperatorParams,
    #[serde(default)]
    pub grid: GridParams,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Defaults to closed-form for periodic models, largest-j otherwise.
    pub nu_ref: Option<NuRef>,
    /// Side of the cube the empirical frequency reference is taken on; defaults to the largest j.
    pub reference_side: Option<usize>,
    /// Jump threshold; defaults to `2 / max j`.
    pub threshold: Option<f64>,
    /// Side of the cube eigenfunction probes run on; defaults to `min(max j, 60)`.
    pub probe_side: Option<usize>,
    #[serde(default = "default_probe_eps")]
    pub probe_eps: f64,
    /// Worker threads for grid cells; 0 uses all cores.
    #[serde(default)]
    pub threads: usize,
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

fn default_p_closed() -> f64 {
    0.3
}

fn default_j() -> Vec<usize> {
    vec![16, 32, 64]
}

fn default_m() -> Vec<usize> {
    vec![4, 8]
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_probe_eps() -> f64 {
    1e-3
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema: SCHEMA,
            model: ModelKind::Periodic,
            d: 1,
            periodic: PeriodicParams::default(),
            percolation: PercolationParams::default(),
            operator: OperatorParams::default(),
            grid: GridParams::default(),
            out: default_out(),
            nu_ref: None,
            reference_side: None,
            threshold: None,
            probe_side: None,
            probe_eps: default_probe_eps(),
            threads: 0,
        }
    }
}

/// Command-line overrides; every field replaces the file value when set.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Cube sides j of the sequence Q_j = C_j.
    #[arg(long = "side", visible_alias = "grid-j", value_delimiter = ',')]
    pub side: Option<Vec<usize>>,
    /// Pattern sides M.
    #[arg(long = "M", visible_alias = "grid-M", value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "p-closed")]
    pub p_closed: Option<f64>,
    #[arg(long)]
    pub period: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long = "nu-ref", value_enum)]
    pub nu_ref: Option<NuRef>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// File (or defaults) with the flag overrides applied.
    pub fn resolve(o: &Overrides) -> Result<Self, CliError> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Some(v) = o.model {
            c.model = v;
        }
        if let Some(v) = o.d {
            c.d = v;
        }
        if let Some(v) = &o.side {
            c.grid.j = v.clone();
        }
        if let Some(v) = &o.m {
            c.grid.m = v.clone();
        }
        if let Some(v) = o.seed {
            c.percolation.seed = Some(v);
        }
        if let Some(v) = o.p_closed {
            c.percolation.p_closed = v;
        }
        if let Some(v) = o.period {
            if v != c.periodic.period {
                c.periodic.table = None;
                c.periodic.potentials = None;
            }
            c.periodic.period = v;
        }
        if let Some(v) = &o.out {
            c.out = v.clone();
        }
        if let Some(v) = o.threshold {
            c.threshold = Some(v);
        }
        if let Some(v) = o.nu_ref {
            c.nu_ref = Some(v);
        }
        Ok(c)
    }

    pub fn nu_ref(&self) -> NuRef {
        self.nu_ref.unwrap_or(match self.model {
            ModelKind::Periodic => NuRef::ClosedForm,
            _ => NuRef::LargestJ,
        })
    }

    pub fn max_j(&self) -> usize {
        self.grid.j.iter().copied().max().unwrap_or(0)
    }

    pub fn reference_side(&self) -> usize {
        self.reference_side.unwrap_or_else(|| self.max_j())
    }

    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or_else(|| 2.0 / self.max_j() as f64)
    }

    pub fn probe_side(&self) -> usize {
        self.probe_side.unwrap_or_else(|| self.max_j().min(60))
    }

    pub fn periodic_table(&self) -> Vec<usize> {
        let cells = self.periodic.period.pow(self.d as u32);
        match &self.periodic.table {
            Some(t) => t.clone(),
            None if cells == 1 => vec![0],
            None => (0..cells).map(|i| i % 2).collect(),
        }
    }

    /// Checks everything that does not depend on the operator's range.
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.schema != SCHEMA {
            return fail(format!(
                "unsupported schema {} (expected {SCHEMA})",
                self.schema
            ));
        }
        if self.d == 0 || self.d > 4 {
            return fail(format!("d must be in 1..=4, got {}", self.d));
        }
        if self.grid.j.is_empty() || self.grid.m.is_empty() {
            return fail("grid needs at least one j and one M".into());
        }
        if self.grid.j.contains(&0) || self.grid.m.contains(&0) {
            return fail("grid sides must be >= 1".into());
        }
        let max_m = self.grid.m.iter().copied().max().unwrap_or(0);
        if let Some(j) = self.grid.j.iter().find(|&&j| j < max_m) {
            return fail(format!(
                "every grid cell needs j >= M (j = {j}, M = {max_m})"
            ));
        }
        if self.reference_side() < max_m {
            return fail("reference_side must be >= every M".into());
        }
        match self.model {
            ModelKind::Periodic => {
                let p = &self.periodic;
                if p.period == 0 {
                    return fail("period must be >= 1".into());
                }
                let table = self.periodic_table();
                if table.len() != p.period.pow(self.d as u32) {
                    return fail(format!(
                        "periodic table needs period^d = {} entries",
                        p.period.pow(self.d as u32)
                    ));
                }
                let colours = table.iter().max().map_or(0, |m| m + 1);
                if let Some(v) = &p.potentials {
                    if v.len() != colours {
                        return fail(format!("need one potential per colour ({colours})"));
                    }
                    if v.iter().any(|x| !x.is_finite()) {
                        return fail("periodic potentials must be finite".into());
                    }
                }
            }
            ModelKind::Percolation => {
                let p = &self.percolation;
                if p.seed.is_none() {
                    return fail("percolation requires a seed".into());
                }
                if !(0.0..=1.0).contains(&p.p_closed) {
                    return fail("p_closed must lie in [0, 1]".into());
                }
                if !p.open_potential.is_finite() {
                    return fail("open_potential must be finite".into());
                }
            }
            ModelKind::Visible => {
                if self.operator.blocks.is_some() {
                    return fail(
                        "the visible model uses its own Laplacian; remove operator.blocks".into(),
                    );
                }
            }
        }
        if self.nu_ref() == NuRef::ClosedForm && self.model != ModelKind::Periodic {
            return fail("closed-form frequencies exist only for the periodic model".into());
        }
        if let Some(b) = &self.operator.blocks {
            if b.is_empty() {
                return fail("operator.blocks must not be empty".into());
            }
            if b.iter().any(|x| x.offset.len() != self.d) {
                return fail("block offsets must have d coordinates".into());
            }
        }
        if let Some(t) = self.threshold {
            if t.is_nan() || t <= 0.0 {
                return fail("threshold must be positive".into());
            }
        }
        if self.probe_eps.is_nan() || self.probe_eps <= 0.0 {
            return fail("probe_eps must be positive".into());
        }
        Ok(())
    }

    /// Pattern cells need a non-empty interior core: `M > 2R`.
    pub fn validate_pattern_sides(&self, range: usize) -> Result<(), CliError> {
        match self.grid.m.iter().find(|&&m| m <= 2 * range) {
            Some(m) => Err(CliError::Config(format!(
                "pattern cells need M > 2R (M = {m}, R = {range})"
            ))),
            None => Ok(()),
        }
    }
}
