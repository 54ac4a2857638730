//! JSON problem description.
//!
//! Rationals are written as strings (`"-4/7"`, `"0.125"`) and parsed exactly.

use std::path::Path;

use affinity_core::certify::{Multicone, PolyhedralCone};
use affinity_core::linalg::{parse_rational, RationalMatrix};
use affinity_core::traces::ReductionMode;
use affinity_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub type Grid = Vec<Vec<String>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeConfig {
    pub generators: Grid,
    pub facet_normals: Grid,
}

/// Separating functional `h` for cones `first` and `second` (1-based):
/// positive on the first, negative on the second.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparatorConfig {
    pub first: usize,
    pub second: usize,
    pub functional: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MulticoneConfig {
    /// Exterior degree whose power the cones are for.
    pub k: usize,
    pub cones: Vec<ConeConfig>,
    pub transverse: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub separators: Vec<SeparatorConfig>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Where the matrices come from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    pub dimension: usize,
    pub matrices: Vec<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision_bits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    #[serde(default = "default_mode")]
    pub reduction_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_pattern: Option<Vec<i32>>,
    /// Largest mesh size of the discretization ladder.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub multicones: Vec<MulticoneConfig>,
    /// Largest product length tried by the eventual-positivity check.
    #[serde(default = "default_certify_depth")]
    pub certify_depth: usize,
    /// Gram matrix of an alternative norm for the contraction check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_form: Option<Grid>,
}

fn default_n_max() -> usize {
    8
}

fn default_mode() -> String {
    "necklace".into()
}

fn default_certify_depth() -> usize {
    4
}

fn grid_to_matrix(grid: &Grid, what: &str) -> Result<RationalMatrix> {
    RationalMatrix::parse(grid).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

fn parse_vector(v: &[String]) -> Result<Vec<affinity_core::Rational>> {
    v.iter().map(|x| parse_rational(x)).collect()
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("bad config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if self.matrices.is_empty() {
            return Err(Error::InvalidInput("no matrices given".into()));
        }
        let mats = self.parsed_matrices()?;
        if let Some(bad) = mats.iter().position(|m| m.dim() != self.dimension) {
            return Err(Error::DimensionMismatch(format!(
                "matrix {} is {}×{}, expected {}×{}",
                bad + 1,
                mats[bad].dim(),
                mats[bad].dim(),
                self.dimension,
                self.dimension
            )));
        }
        self.mode()?;
        if let Some(p) = &self.sign_pattern {
            if p.len() != self.matrices.len() || p.iter().any(|&e| e != 1 && e != -1) {
                return Err(Error::InvalidInput(format!(
                    "sign_pattern needs {} entries of 1 or -1",
                    self.matrices.len()
                )));
            }
        }
        if let Some(k) = self.k {
            if k >= self.dimension {
                return Err(Error::InvalidInput(format!(
                    "k = {k} must be below the dimension {}",
                    self.dimension
                )));
            }
        }
        if let Some(m) = self.mesh_size {
            if m < 2 || !m.is_power_of_two() {
                return Err(Error::InvalidInput("mesh_size must be a power of two ≥ 2".into()));
            }
        }
        for mc in &self.multicones {
            self.build_multicone(mc)?;
        }
        if let Some(g) = &self.norm_form {
            grid_to_matrix(g, "norm_form")?;
        }
        Ok(())
    }

    pub fn parsed_matrices(&self) -> Result<Vec<RationalMatrix>> {
        self.matrices
            .iter()
            .enumerate()
            .map(|(i, g)| grid_to_matrix(g, &format!("matrix {}", i + 1)))
            .collect()
    }

    pub fn mode(&self) -> Result<ReductionMode> {
        match self.reduction_mode.as_str() {
            "necklace" => Ok(ReductionMode::Necklace),
            "full" => Ok(ReductionMode::Full),
            other => Err(Error::InvalidInput(format!(
                "reduction_mode must be \"necklace\" or \"full\", not \"{other}\""
            ))),
        }
    }

    pub fn build_multicone(&self, mc: &MulticoneConfig) -> Result<Multicone> {
        let cones = mc
            .cones
            .iter()
            .map(|c| PolyhedralCone::parse(&c.generators, &c.facet_normals))
            .collect::<Result<Vec<_>>>()?;
        let separators = mc
            .separators
            .iter()
            .map(|s| {
                if s.first == 0 || s.second == 0 || s.first > cones.len() || s.second > cones.len() {
                    return Err(Error::InvalidInput("separator cone index out of range".into()));
                }
                Ok((s.first - 1, s.second - 1, parse_vector(&s.functional)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Multicone::new(cones, parse_vector(&mc.transverse)?).with_separators(separators))
    }

    pub fn norm_matrix(&self) -> Result<Option<RationalMatrix>> {
        self.norm_form
            .as_ref()
            .map(|g| grid_to_matrix(g, "norm_form"))
            .transpose()
    }
}
