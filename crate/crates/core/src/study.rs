//! h- and p-convergence studies on the unit box.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dg::{assemble, compute_error, solve, NormReport, DEFAULT_QUAD_OFFSET};
use crate::error::{invalid, DgError, Result};
use crate::manufactured::{ManufacturedSolution, SolutionCatalog};
use crate::mesh::{build_mesh, BoxDomain};
use crate::problem::FieldCatalog;
use crate::rates::{eoc, fit_loglog_slope};

/// Errors below this are reported as exact rather than given a rate.
pub const EXACT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Refinement {
    H,
    P,
}

impl FromStr for Refinement {
    type Err = DgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h" => Ok(Refinement::H),
            "p" => Ok(Refinement::P),
            _ => Err(invalid(format!("refinement must be 'h' or 'p', got '{s}'"))),
        }
    }
}

impl fmt::Display for Refinement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Refinement::H => "h",
            Refinement::P => "p",
        })
    }
}

fn default_gamma() -> f64 {
    2.5
}

fn default_frequency() -> f64 {
    1.0
}

fn default_singular_point() -> f64 {
    0.5
}

fn default_offset() -> usize {
    DEFAULT_QUAD_OFFSET
}

/// Configuration of one study on the unit box `(0, 1)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub dim: usize,
    pub refine: Refinement,
    pub field: FieldCatalog,
    pub solution: SolutionCatalog,
    /// Exponent of the singular solution.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Location `x_0` of the singularity along axis 0.
    #[serde(default = "default_singular_point")]
    pub singular_point: f64,
    /// Wave number `k` of the smooth solution `Π sin(k π x_j)`.
    #[serde(default = "default_frequency")]
    pub frequency: f64,
    /// One entry for h-studies, two or more for p-studies.
    pub degrees: Vec<usize>,
    /// Cells per axis; two or more entries for h-studies, one for p-studies.
    pub meshes: Vec<usize>,
    #[serde(default = "default_offset")]
    pub quad_offset: usize,
    #[serde(default)]
    pub out: Option<String>,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > crate::mesh::MAX_DIM {
            return Err(invalid(format!("unsupported dimension {}", self.dim)));
        }
        if self.meshes.contains(&0) {
            return Err(invalid("mesh sizes must be positive"));
        }
        match self.refine {
            Refinement::H => {
                if self.degrees.len() != 1 || self.meshes.len() < 2 {
                    return Err(invalid("an h-study needs exactly one degree and at least two meshes"));
                }
            }
            Refinement::P => {
                if self.meshes.len() != 1 || self.degrees.len() < 2 {
                    return Err(invalid("a p-study needs exactly one mesh and at least two degrees"));
                }
            }
        }
        if self.solution == SolutionCatalog::SingularGamma && !(self.gamma > 0.0) {
            return Err(invalid("gamma must be positive"));
        }
        self.field.build(self.dim)?;
        Ok(())
    }

    fn solution_for(&self, degree: usize) -> Result<ManufacturedSolution> {
        Ok(match self.solution {
            SolutionCatalog::SmoothSine => ManufacturedSolution::smooth_sine(self.dim, self.frequency),
            SolutionCatalog::PolyExact => {
                let m = self.degrees.iter().copied().min().unwrap_or(degree);
                ManufacturedSolution::poly_exact(self.dim, m)
            }
            SolutionCatalog::SingularGamma => {
                ManufacturedSolution::singular(self.dim, self.gamma, self.singular_point)?
            }
        })
    }

    /// Nominal regularity `ℓ` of the chosen solution (infinite when smooth).
    pub fn regularity(&self) -> f64 {
        match self.solution {
            SolutionCatalog::SingularGamma => self.gamma + 0.5,
            _ => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    /// Mesh size for h-studies, polynomial degree for p-studies.
    pub param: f64,
    pub degree: usize,
    pub cells: usize,
    pub dg_error: f64,
    pub l2_error: f64,
    pub parts: NormReport,
    /// Rate against the previous row: EOC in h, or local slope in `p + 1`.
    pub rate: Option<f64>,
}

/// Rate exponents predicted by the error bounds, with `s = min(p + 1, ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePredictions {
    /// `h^{s - 1/2}` exponent for h-studies.
    pub h_rate: Option<f64>,
    /// `-(s - 1/2)`: optimal p-slope.
    pub p_optimal: Option<f64>,
    /// `-(s - 1)`: bound for separable convection fields.
    pub p_separable_bound: Option<f64>,
    /// `-(s - 2)`: bound for general convection fields.
    pub p_general_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyMetadata {
    pub version: String,
    pub dim: usize,
    pub field: String,
    pub solution: String,
    pub gamma: Option<f64>,
    pub regularity: Option<f64>,
    pub quad_offset: usize,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub refine: Refinement,
    pub rows: Vec<StudyRow>,
    /// Least-squares slope of `log dg_error` against `log(p + 1)` (p ≥ 1).
    pub fitted_slope: Option<f64>,
    /// Every error is below [`EXACT_TOL`].
    pub exact: bool,
    pub predictions: RatePredictions,
    pub metadata: StudyMetadata,
}

pub const CSV_HEADER: &str = "param,dg_error,l2_error,volume_part,jump_part,inflow_part,outflow_part,eoc_or_slope";

impl StudyReport {
    pub fn dg_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.dg_error).collect()
    }

    pub fn params(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.param).collect()
    }

    /// Rate over the last two rows.
    pub fn last_rate(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.rate)
    }

    /// One row per refinement; the rate column holds `exact` when the study
    /// reproduced the solution.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let rate = if self.exact {
                "exact".to_string()
            } else {
                r.rate.map(|v| format!("{v:.6}")).unwrap_or_default()
            };
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{}\n",
                r.param,
                r.dg_error,
                r.l2_error,
                r.parts.volume,
                r.parts.jump,
                r.parts.inflow_boundary,
                r.parts.outflow_boundary,
                rate
            ));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn run_row(config: &StudyConfig, degree: usize, cells: usize) -> Result<StudyRow> {
    let (b, c) = config.field.build(config.dim)?;
    let solution = config.solution_for(degree)?;
    let data = solution.reaction_data(&b, c, 1.0)?;
    let mesh = Arc::new(build_mesh(&BoxDomain::unit(config.dim)?, &vec![cells; config.dim])?);
    let system = assemble(&b, &data, &mesh, degree, config.quad_offset)?;
    let uh = solve(&system)?;
    let err = compute_error(solution.field(), &uh, &b, &data)?;
    let param = match config.refine {
        Refinement::H => mesh.max_diameter(),
        Refinement::P => degree as f64,
    };
    Ok(StudyRow {
        param,
        degree,
        cells,
        dg_error: err.dg.total,
        l2_error: err.l2,
        parts: err.dg,
        rate: None,
    })
}

fn run_rows(config: &StudyConfig, cases: Vec<(usize, usize)>) -> Result<Vec<StudyRow>> {
    // rows are independent; any failure aborts with the failing case named
    cases
        .into_par_iter()
        .map(|(p, n)| {
            run_row(config, p, n).map_err(|e| match e {
                DgError::InvalidArgument(m) => DgError::InvalidArgument(format!("row p={p}, cells={n}: {m}")),
                DgError::Numerical(m) => DgError::Numerical(format!("row p={p}, cells={n}: {m}")),
                DgError::RejectedProblem(m) => DgError::RejectedProblem(format!("row p={p}, cells={n}: {m}")),
                DgError::NotApplicable(m) => DgError::NotApplicable(format!("row p={p}, cells={n}: {m}")),
            })
        })
        .collect()
}

fn metadata(config: &StudyConfig) -> StudyMetadata {
    let singular = config.solution == SolutionCatalog::SingularGamma;
    StudyMetadata {
        version: env!("CARGO_PKG_VERSION").to_string(),
        dim: config.dim,
        field: config.field.name().to_string(),
        solution: config.solution.name().to_string(),
        gamma: singular.then_some(config.gamma),
        regularity: singular.then_some(config.regularity()),
        quad_offset: config.quad_offset,
        threads: rayon::current_num_threads(),
    }
}

fn positive(v: &[f64]) -> bool {
    v.iter().all(|&e| e > 0.0)
}

/// Solves on each mesh at fixed degree and records EOCs.
pub fn run_h_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    if config.refine != Refinement::H {
        return Err(invalid("configuration is not an h-study"));
    }
    let p = config.degrees[0];
    let mut meshes = config.meshes.clone();
    meshes.sort_unstable();
    meshes.dedup();
    let mut rows = run_rows(config, meshes.iter().map(|&n| (p, n)).collect())?;
    let exact = rows.iter().all(|r| r.dg_error <= EXACT_TOL && r.l2_error <= EXACT_TOL);
    let errors: Vec<f64> = rows.iter().map(|r| r.dg_error).collect();
    if !exact && positive(&errors) && rows.len() >= 2 {
        let params: Vec<f64> = rows.iter().map(|r| r.param).collect();
        let rates = eoc(&errors, &params)?;
        for (row, rate) in rows[1..].iter_mut().zip(rates) {
            row.rate = Some(rate);
        }
    }
    let s = (p as f64 + 1.0).min(config.regularity());
    Ok(StudyReport {
        refine: Refinement::H,
        rows,
        fitted_slope: None,
        exact,
        predictions: RatePredictions {
            h_rate: Some(s - 0.5),
            p_optimal: None,
            p_separable_bound: None,
            p_general_bound: None,
        },
        metadata: metadata(config),
    })
}

/// Solves for each degree on one mesh and fits the p-slope.
pub fn run_p_study(config: &StudyConfig) -> Result<StudyReport> {
    config.validate()?;
    if config.refine != Refinement::P {
        return Err(invalid("configuration is not a p-study"));
    }
    let n = config.meshes[0];
    let mut degrees = config.degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let mut rows = run_rows(config, degrees.iter().map(|&p| (p, n)).collect())?;
    let exact = rows.iter().all(|r| r.dg_error <= EXACT_TOL && r.l2_error <= EXACT_TOL);

    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.degree >= 1)
        .map(|r| (r.degree as f64 + 1.0, r.dg_error))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
    let fitted_slope = if !exact && xs.len() >= 2 && positive(&ys) {
        Some(fit_loglog_slope(&xs, &ys)?)
    } else {
        None
    };
    if !exact {
        let errors: Vec<f64> = rows.iter().map(|r| r.dg_error).collect();
        let params: Vec<f64> = rows.iter().map(|r| r.degree as f64 + 1.0).collect();
        if positive(&errors) && rows.len() >= 2 {
            // with an increasing parameter the log-ratio is already the slope
            let rates = eoc(&errors, &params)?;
            for (row, rate) in rows[1..].iter_mut().zip(rates) {
                row.rate = Some(rate);
            }
        }
    }
    let l = config.regularity();
    let predictions = if l.is_finite() {
        RatePredictions {
            h_rate: None,
            p_optimal: Some(-(l - 0.5)),
            p_separable_bound: Some(-(l - 1.0)),
            p_general_bound: Some(-(l - 2.0)),
        }
    } else {
        RatePredictions {
            h_rate: None,
            p_optimal: None,
            p_separable_bound: None,
            p_general_bound: None,
        }
    };
    Ok(StudyReport {
        refine: Refinement::P,
        rows,
        fitted_slope,
        exact,
        predictions,
        metadata: metadata(config),
    })
}

/// Dispatches on `config.refine`.
pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    match config.refine {
        Refinement::H => run_h_study(config),
        Refinement::P => run_p_study(config),
    }
}
