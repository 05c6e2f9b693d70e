use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hpdg::manufactured::SolutionCatalog;
use hpdg::study::StudyConfig;
use hpdg::{FieldCatalog, Refinement};
use serde::Deserialize;

/// Study settings read from a file; every field may be supplied or
/// overridden on the command line.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialStudy {
    pub dim: Option<usize>,
    pub refine: Option<Refinement>,
    pub field: Option<FieldCatalog>,
    pub solution: Option<SolutionCatalog>,
    pub gamma: Option<f64>,
    pub singular_point: Option<f64>,
    pub frequency: Option<f64>,
    pub degrees: Option<Vec<usize>>,
    pub meshes: Option<Vec<usize>>,
    pub quad_offset: Option<usize>,
    pub out: Option<String>,
}

impl PartialStudy {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())),
            Some("toml") => toml::from_str(&text).with_context(|| format!("parsing {}", path.display())),
            _ => bail!("config file must end in .toml or .json: {}", path.display()),
        }
    }

    /// Values set in `other` win.
    pub fn overlay(self, other: PartialStudy) -> PartialStudy {
        PartialStudy {
            dim: other.dim.or(self.dim),
            refine: other.refine.or(self.refine),
            field: other.field.or(self.field),
            solution: other.solution.or(self.solution),
            gamma: other.gamma.or(self.gamma),
            singular_point: other.singular_point.or(self.singular_point),
            frequency: other.frequency.or(self.frequency),
            degrees: other.degrees.or(self.degrees),
            meshes: other.meshes.or(self.meshes),
            quad_offset: other.quad_offset.or(self.quad_offset),
            out: other.out.or(self.out),
        }
    }

    pub fn resolve(self) -> Result<StudyConfig> {
        let refine = self.refine.ok_or_else(|| anyhow!("--refine is required (h or p)"))?;
        let degrees = self.degrees.ok_or_else(|| anyhow!("--degrees is required"))?;
        let meshes = self.meshes.ok_or_else(|| anyhow!("--meshes is required"))?;
        let config = StudyConfig {
            dim: self.dim.unwrap_or(1),
            refine,
            field: self.field.unwrap_or(FieldCatalog::Constant),
            solution: self.solution.unwrap_or(SolutionCatalog::SmoothSine),
            gamma: self.gamma.unwrap_or(2.5),
            singular_point: self.singular_point.unwrap_or(0.5),
            frequency: self.frequency.unwrap_or(1.0),
            degrees,
            meshes,
            quad_offset: self.quad_offset.unwrap_or(hpdg::dg::DEFAULT_QUAD_OFFSET),
            out: self.out,
        };
        config.validate()?;
        Ok(config)
    }
}
