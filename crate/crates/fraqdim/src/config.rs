//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use fraqdim_core::dims::log_grid;
use fraqdim_core::ifs::{AxisBox, ContractionMap, RecurrentIfs, System};
use fraqdim_core::linalg::Matrix;
use fraqdim_core::markov::StochasticMatrix;
use fraqdim_core::quantizer::QuantSettings;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub system: SystemConfig,
    /// Seeds for the randomized steps; see [`SeedSlot`].
    pub seeds: Vec<u64>,
    #[serde(default = "default_attractor_depth")]
    pub attractor_depth: usize,
    #[serde(default)]
    pub quantization: QuantizationConfig,
    #[serde(default)]
    pub dims: DimsConfig,
    #[serde(default = "default_sampling")]
    pub sampling: SamplingConfig,
    #[serde(default)]
    pub birkhoff: SamplingConfig,
    #[serde(default)]
    pub frostman: FrostmanConfig,
    #[serde(default)]
    pub antichain: AntichainConfig,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_attractor_depth() -> usize {
    8
}

fn default_sampling() -> SamplingConfig {
    SamplingConfig { steps: 11_000, burnin: 1000 }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SystemConfig {
    pub dimension: usize,
    pub maps: Vec<MapConfig>,
    pub matrix: Vec<Vec<f64>>,
    pub ambient: BoxConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub open_sets: Option<Vec<BoxConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum MapConfig {
    /// `x ↦ ratio · Q x + offset`; `Q` defaults to the identity.
    Similarity {
        ratio: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        orthogonal: Option<Vec<Vec<f64>>>,
        offset: Vec<f64>,
    },
    /// `x ↦ A x + offset`.
    Affine { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxConfig {
    pub fn build(&self) -> Result<AxisBox> {
        Ok(AxisBox::new(self.lo.clone(), self.hi.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct QuantizationConfig {
    pub n_list: Vec<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub floor_factor: f64,
    pub tol_gap: f64,
    pub depth_cap: usize,
    pub atoms_per_cell: usize,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        let s = QuantSettings::default();
        Self {
            n_list: vec![2, 4, 8, 16, 32],
            restarts: s.restarts,
            max_iters: s.max_iters,
            floor_factor: s.floor_factor,
            tol_gap: s.tol_gap,
            depth_cap: s.depth_cap,
            atoms_per_cell: s.atoms_per_cell,
        }
    }
}

impl QuantizationConfig {
    /// Settings without a tail bound; the pipeline fills it in.
    pub fn settings(&self) -> QuantSettings {
        QuantSettings {
            restarts: self.restarts,
            max_iters: self.max_iters,
            floor_factor: self.floor_factor,
            tol_gap: self.tol_gap,
            depth_cap: self.depth_cap,
            atoms_per_cell: self.atoms_per_cell,
            tail: None,
        }
    }
}

/// Either explicit values or `count` log-spaced values in `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    #[serde(rename_all = "camelCase")]
    Log { min: f64, max: f64, count: usize },
}

impl GridSpec {
    /// Values in decreasing order.
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            GridSpec::List(v) => {
                if v.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    bail!("grid values must be positive and finite");
                }
                let mut v = v.clone();
                v.sort_by(|a, b| b.total_cmp(a));
                Ok(v)
            }
            GridSpec::Log { min, max, count } => Ok(log_grid(*min, *max, *count)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct DimsConfig {
    pub r_grid: GridSpec,
    pub sample_count: usize,
    pub bands: Bands,
    /// Smallest passing fraction of local-dimension slopes.
    pub min_fraction: f64,
    pub depth_cap: usize,
    /// Share of the curve, from the large-`n` end, used in the regression.
    pub regression_window: f64,
}

impl Default for DimsConfig {
    fn default() -> Self {
        Self {
            r_grid: GridSpec::Log { min: 1e-4, max: 0.05, count: 8 },
            sample_count: 200,
            bands: Bands::default(),
            min_fraction: 0.9,
            depth_cap: 40,
            regression_window: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct Bands {
    pub local_dimension: f64,
    pub quantization_dimension: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Self { local_dimension: 0.1, quantization_dimension: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct SamplingConfig {
    pub steps: usize,
    pub burnin: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { steps: 1_000_000, burnin: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct FrostmanConfig {
    pub samples: usize,
    pub eps_grid: GridSpec,
    pub depth_cap: usize,
    /// Smallest accepted slope of `log ratio` against `log ε`.
    pub min_trend: f64,
}

impl Default for FrostmanConfig {
    fn default() -> Self {
        Self { samples: 100, eps_grid: GridSpec::Log { min: 1e-4, max: 0.1, count: 7 }, depth_cap: 40, min_trend: -0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct AntichainConfig {
    pub eps: Vec<f64>,
}

impl Default for AntichainConfig {
    fn default() -> Self {
        Self { eps: vec![0.3, 0.05, 0.01, 0.001] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields, default)]
pub struct DecompositionConfig {
    pub n_list: Vec<usize>,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self { n_list: vec![2, 4, 8] }
    }
}

/// Which entry of `seeds` each randomized step uses (modulo the length).
#[derive(Debug, Clone, Copy)]
pub enum SeedSlot {
    Sampling = 0,
    Quantization = 1,
    LocalDims = 2,
    Frostman = 3,
    Birkhoff = 4,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Parses and validates; errors name the offending field and position.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            anyhow!("field `{path}` (line {}, column {}): {inner}", inner.line(), inner.column())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!("field `schemaVersion`: unsupported version {} (expected {SCHEMA_VERSION})", self.schema_version);
        }
        if self.seeds.is_empty() {
            bail!("field `seeds`: at least one seed is required");
        }
        if self.quantization.n_list.is_empty() || self.quantization.n_list.contains(&0) {
            bail!("field `quantization.nList`: budgets must be positive");
        }
        if !(self.dims.regression_window > 0.0 && self.dims.regression_window <= 1.0) {
            bail!("field `dims.regressionWindow`: must lie in (0, 1]");
        }
        Ok(())
    }

    pub fn seed(&self, slot: SeedSlot) -> u64 {
        self.seeds[slot as usize % self.seeds.len()]
    }

    /// Validated system plus its attractor approximation.
    pub fn build_system(&self) -> Result<System> {
        let ifs = self.system.build().context("field `system`")?;
        Ok(System::new(ifs, self.attractor_depth).context("field `attractorDepth`")?)
    }
}

impl SystemConfig {
    pub fn build(&self) -> Result<RecurrentIfs> {
        let k = self.dimension;
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(i, m)| m.build(k).with_context(|| format!("field `system.maps[{i}]`")))
            .collect::<Result<Vec<_>>>()?;
        let matrix = StochasticMatrix::validate(&self.matrix).context("field `system.matrix`")?;
        let ambient = self.ambient.build().context("field `system.ambient`")?;
        Ok(RecurrentIfs::new(maps, matrix, ambient)?)
    }

    pub fn open_sets(&self) -> Result<Option<Vec<AxisBox>>> {
        self.open_sets
            .as_ref()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(i, b)| b.build().with_context(|| format!("field `system.openSets[{i}]`")))
                    .collect()
            })
            .transpose()
    }
}

fn square(rows: &[Vec<f64>], k: usize, what: &str) -> Result<Matrix> {
    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
        bail!("{what} must be {k}×{k}");
    }
    Matrix::from_rows(rows).ok_or_else(|| anyhow!("{what} is malformed"))
}

impl MapConfig {
    pub fn build(&self, k: usize) -> Result<ContractionMap> {
        let offset = match self {
            MapConfig::Similarity { offset, .. } | MapConfig::Affine { offset, .. } => offset,
        };
        if offset.len() != k {
            bail!("offset has {} entries, expected {k}", offset.len());
        }
        Ok(match self {
            MapConfig::Similarity { ratio, orthogonal: None, offset } => ContractionMap::scaling(*ratio, offset.clone())?,
            MapConfig::Similarity { ratio, orthogonal: Some(q), offset } => {
                ContractionMap::similarity(*ratio, square(q, k, "orthogonal part")?, offset.clone())?
            }
            MapConfig::Affine { matrix, offset } => ContractionMap::affine(square(matrix, k, "matrix")?, offset.clone())?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schemaVersion": 1,
        "system": {
            "dimension": 1,
            "maps": [
                {"kind": "similarity", "ratio": 0.5, "offset": [0.0]},
                {"kind": "affine", "matrix": [[0.5]], "offset": [0.5]}
            ],
            "matrix": [[0.5, 0.5], [0.5, 0.5]],
            "ambient": {"lo": [0.0], "hi": [1.0]}
        },
        "seeds": [1]
    }"#;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.attractor_depth, 8);
        assert_eq!(cfg.quantization.restarts, 16);
        assert_eq!(cfg.seed(SeedSlot::Frostman), 1);
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.ifs.len(), 2);
    }

    #[test]
    fn errors_name_the_field() {
        let bad = MINIMAL.replace("\"ratio\": 0.5", "\"ratio\": \"half\"");
        let msg = format!("{:#}", ExperimentConfig::parse(&bad).unwrap_err());
        assert!(msg.contains("system.maps[0]"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL.replace("\"seeds\": [1]", "\"seeds\": [1], \"sedes\": 2");
        assert!(ExperimentConfig::parse(&bad).is_err());
    }

    #[test]
    fn wrong_schema_version() {
        let bad = MINIMAL.replace("\"schemaVersion\": 1", "\"schemaVersion\": 7");
        let msg = format!("{:#}", ExperimentConfig::parse(&bad).unwrap_err());
        assert!(msg.contains("schemaVersion"), "{msg}");
    }

    #[test]
    fn invalid_matrix_is_addressed() {
        let bad = MINIMAL.replace("[[0.5, 0.5], [0.5, 0.5]]", "[[0.5, 0.6], [0.5, 0.5]]");
        let cfg = ExperimentConfig::parse(&bad).unwrap();
        let msg = format!("{:#}", cfg.build_system().unwrap_err());
        assert!(msg.contains("system.matrix"), "{msg}");
    }

    #[test]
    fn grids_come_out_decreasing() {
        let g = GridSpec::List(vec![0.01, 0.1, 0.001]).values().unwrap();
        assert_eq!(g, vec![0.1, 0.01, 0.001]);
        let l = GridSpec::Log { min: 1e-3, max: 1e-1, count: 3 }.values().unwrap();
        assert!((l[1] - 1e-2).abs() < 1e-15);
    }
}
