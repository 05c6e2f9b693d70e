//! Self-checks of the discretisation: quadrature, basis, projection,
//! coercivity, consistency, inverse constants and solver agreement.

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::diagnostics::compute_t_terms;
use crate::dg::{
    assemble, assemble_operator, bilinear_value, dg_norm, downwind_sweep_solve, solve, DGFunction, Difference,
    DEFAULT_QUAD_OFFSET,
};
use crate::error::{invalid, Result};
use crate::manufactured::ManufacturedSolution;
use crate::mesh::{build_mesh, BoxDomain, TensorMesh};
use crate::problem::{FieldCatalog, ReactionData};
use crate::projection::{inverse_constant_report, InverseKind};
use crate::quadrature::{gauss_legendre, TensorBasis};
use crate::reference::ReferenceElement;

/// Extra Gauss points per axis used for reference integrals.
const REFERENCE_POINTS: usize = 12;
const SEED: u64 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub quad_offset: usize,
    pub fields: Vec<FieldCatalog>,
    pub degrees: Vec<usize>,
    pub dims: Vec<usize>,
    pub cells: usize,
    pub random_vectors: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quad_offset: DEFAULT_QUAD_OFFSET,
            fields: vec![FieldCatalog::Constant, FieldCatalog::Multilinear],
            degrees: vec![0, 1, 2, 3],
            dims: vec![1, 2],
            cells: 3,
            random_vectors: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Worst measured value for the check.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: value.is_finite() && value <= tolerance,
            value,
            tolerance,
            detail: detail.into(),
        }
    }

    fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            pass: false,
            value: f64::NAN,
            tolerance: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn unit_mesh(dim: usize, cells: usize) -> Result<Arc<TensorMesh>> {
    Ok(Arc::new(build_mesh(&BoxDomain::unit(dim)?, &vec![cells; dim])?))
}

fn check_quadrature() -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in 1..=20 {
        let rule = match gauss_legendre(n) {
            Ok(r) => r,
            Err(e) => return CheckResult::failed("quadrature exactness", e.to_string()),
        };
        for k in 0..2 * n {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let approx = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
            worst = worst.max((approx - exact).abs());
        }
    }
    CheckResult::new("quadrature exactness", worst, 1e-13, "Gauss rules n = 1..20, monomials up to 2n-1")
}

fn check_orthonormality(dims: &[usize], degrees: &[usize]) -> CheckResult {
    let mut worst: f64 = 0.0;
    for &dim in dims {
        for &p in degrees {
            let reference = match ReferenceElement::new(dim, p, p + 2) {
                Ok(r) => r,
                Err(e) => return CheckResult::failed("basis orthonormality", e.to_string()),
            };
            let nb = reference.basis.len();
            let nq = reference.volume_rule.weights.len();
            for i in 0..nb {
                for j in 0..nb {
                    let g: f64 = (0..nq)
                        .map(|q| {
                            reference.volume_rule.weights[q]
                                * reference.volume_values[i * nq + q]
                                * reference.volume_values[j * nq + q]
                        })
                        .sum();
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
            }
        }
    }
    CheckResult::new("basis orthonormality", worst, 1e-12, "reference Gram matrix equals the identity")
}

fn random_function(mesh: &Arc<TensorMesh>, degree: usize, rng: &mut StdRng) -> Result<DGFunction> {
    let n = mesh.n_elements() * TensorBasis::new(mesh.dim(), degree)?.len();
    let coeffs = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    DGFunction::from_coeffs(mesh.clone(), degree, coeffs)
}

fn homogeneous_data(c: crate::problem::ScalarFn) -> Result<ReactionData> {
    ReactionData::from_arcs(c, Arc::new(|_| 0.0), Arc::new(|_| 0.0), 1.0)
}

/// Worst relative gap `|vᵀAv - |||v|||²| / |||v|||²` over random `v`.
pub fn coercivity_residual(
    field: FieldCatalog,
    dim: usize,
    degree: usize,
    cells: usize,
    quad_offset: usize,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let (b, c) = field.build(dim)?;
    let data = homogeneous_data(c)?;
    let mesh = unit_mesh(dim, cells)?;
    let system = assemble_operator(&b, &data, &mesh, degree, quad_offset)?;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let v = random_function(&mesh, degree, &mut rng)?;
        let quad = system.matrix.bilinear(v.coeffs(), v.coeffs());
        let norm = dg_norm(&v, &b, &data, &mesh, degree + 1 + REFERENCE_POINTS)?.squared();
        worst = worst.max((quad - norm).abs() / norm);
    }
    Ok(worst)
}

fn check_coercivity(opts: &VerifyOptions) -> CheckResult {
    let name = format!("coercivity (offset {})", opts.quad_offset);
    let mut worst: f64 = 0.0;
    for &field in &opts.fields {
        for &dim in &opts.dims {
            if field == FieldCatalog::Rotating && dim != 2 {
                continue;
            }
            for &p in &opts.degrees {
                match coercivity_residual(field, dim, p, opts.cells, opts.quad_offset, opts.random_vectors, SEED) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return CheckResult::failed(name, format!("{} d={dim} p={p}: {e}", field.name())),
                }
            }
        }
    }
    CheckResult::new(name, worst, 1e-10, "B(v,v) from the assembled matrix against the dG norm")
}

/// Consistency: the exact solution satisfies the discrete equations, so
/// `B(u - u_n, v) = 0` for every discrete `v`.
fn check_galerkin(opts: &VerifyOptions) -> CheckResult {
    let mut worst: f64 = 0.0;
    let mut rng = StdRng::seed_from_u64(SEED + 1);
    let run = |field: FieldCatalog, dim: usize, p: usize, rng: &mut StdRng| -> Result<f64> {
        let (b, c) = field.build(dim)?;
        let u = ManufacturedSolution::smooth_sine(dim, 1.0);
        let data = u.reaction_data(&b, c, 1.0)?;
        let mesh = unit_mesh(dim, opts.cells)?;
        let system = assemble(&b, &data, &mesh, p, opts.quad_offset)?;
        let uh = solve(&system)?;
        let err = Difference {
            left: u.field(),
            right: &uh,
        };
        let mut local: f64 = 0.0;
        for _ in 0..3 {
            let v = random_function(&mesh, p, rng)?;
            let value = bilinear_value(&err, &v, &b, &data, &mesh, system.points_per_axis)?;
            let scale = bilinear_value(u.field(), &v, &b, &data, &mesh, system.points_per_axis)?
                .abs()
                .max(1.0);
            local = local.max(value.abs() / scale);
        }
        Ok(local)
    };
    for &field in &opts.fields {
        for &dim in &opts.dims {
            if field == FieldCatalog::Rotating && dim != 2 {
                continue;
            }
            for &p in &opts.degrees {
                match run(field, dim, p, &mut rng) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => {
                        return CheckResult::failed("galerkin orthogonality", format!("{} d={dim} p={p}: {e}", field.name()))
                    }
                }
            }
        }
    }
    CheckResult::new("galerkin orthogonality", worst, 1e-10, "B(u - u_n, v) relative to B(u, v)")
}

fn check_projection(opts: &VerifyOptions) -> CheckResult {
    let mut worst: f64 = 0.0;
    let f = |x: &[f64]| x.iter().map(|t| (1.3 * t).exp()).product::<f64>();
    for &dim in &opts.dims {
        for &p in &opts.degrees {
            let res = (|| -> Result<f64> {
                let mesh = unit_mesh(dim, 2)?;
                let points = p + 1 + REFERENCE_POINTS;
                let once = DGFunction::project(mesh.clone(), p, points, f)?;
                let twice = DGFunction::project(mesh.clone(), p, points, |x| once.eval_point(x).unwrap_or(0.0))?;
                Ok(once
                    .coeffs()
                    .iter()
                    .zip(twice.coeffs())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max))
            })();
            match res {
                Ok(r) => worst = worst.max(r),
                Err(e) => return CheckResult::failed("projection idempotence", e.to_string()),
            }
        }
    }
    CheckResult::new("projection idempotence", worst, 1e-11, "Π_p Π_p f = Π_p f")
}

fn check_inverse(degrees: &[usize]) -> Vec<CheckResult> {
    let mut out = Vec::new();
    match inverse_constant_report(InverseKind::Bubble, degrees) {
        Ok(r) => {
            let worst = r
                .ratios
                .iter()
                .zip(&r.reference)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            out.push(CheckResult::new(
                "bubble inverse constant",
                worst,
                1e-8,
                format!("ratios {:?}", r.ratios),
            ));
        }
        Err(e) => out.push(CheckResult::failed("bubble inverse constant", e.to_string())),
    }
    match inverse_constant_report(InverseKind::H1, degrees) {
        Ok(r) => {
            // p = 0 gives 0, p = 1 gives √3, and the constant grows with p
            let mut worst: f64 = 0.0;
            let mut prev = (0usize, f64::NEG_INFINITY);
            for (&p, &ratio) in r.degrees.iter().zip(&r.ratios) {
                let gap = match p {
                    0 => ratio.abs(),
                    1 => (ratio - 3f64.sqrt()).abs(),
                    _ => 0.0,
                };
                let decrease = if p > prev.0 { (prev.1 - ratio).max(0.0) } else { 0.0 };
                worst = worst.max(gap).max(decrease);
                prev = (p, ratio);
            }
            out.push(CheckResult::new("h1 inverse constant", worst, 1e-10, format!("ratios {:?}", r.ratios)));
        }
        Err(e) => out.push(CheckResult::failed("h1 inverse constant", e.to_string())),
    }
    out
}

/// Smallest offset at which the splitting identity holds to 1e-8 for the
/// catalog fields; integration by parts of the nonpolynomial `η` needs it.
pub const SPLITTING_MIN_OFFSET: usize = 3;

fn check_error_equation(opts: &VerifyOptions) -> CheckResult {
    let offset = opts.quad_offset.max(SPLITTING_MIN_OFFSET);
    let mut worst: f64 = 0.0;
    for &field in &opts.fields {
        for &dim in &opts.dims {
            if field == FieldCatalog::Rotating && dim != 2 {
                continue;
            }
            for &p in &opts.degrees {
                let res = (|| -> Result<f64> {
                    let (b, c) = field.build(dim)?;
                    let u = ManufacturedSolution::smooth_sine(dim, 1.0);
                    let data = u.reaction_data(&b, c, 1.0)?;
                    let mesh = unit_mesh(dim, opts.cells)?;
                    let system = assemble(&b, &data, &mesh, p, offset)?;
                    let uh = solve(&system)?;
                    let report = compute_t_terms(u.field(), &uh, &b, &data, system.points_per_axis)?;
                    Ok(report.relative_residual().max(report.relative_error_equation_residual()))
                })();
                match res {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => {
                        return CheckResult::failed("error splitting", format!("{} d={dim} p={p}: {e}", field.name()))
                    }
                }
            }
        }
    }
    CheckResult::new("error splitting", worst, 1e-8, format!("T1+T2+T3+T4 = B(η, ξ) and |||ξ|||² + B(η, ξ) = 0, offset {offset}"))
}

fn check_sweep(opts: &VerifyOptions) -> CheckResult {
    let mut worst: f64 = 0.0;
    for &field in &opts.fields {
        for &dim in &opts.dims {
            if field == FieldCatalog::Rotating {
                continue;
            }
            for &p in &opts.degrees {
                let res = (|| -> Result<f64> {
                    let (b, c) = field.build(dim)?;
                    let u = ManufacturedSolution::smooth_sine(dim, 1.0);
                    let data = u.reaction_data(&b, c, 1.0)?;
                    let mesh = unit_mesh(dim, opts.cells)?;
                    let system = assemble(&b, &data, &mesh, p, opts.quad_offset)?;
                    let direct = solve(&system)?;
                    let sweep = downwind_sweep_solve(&system)?;
                    Ok(direct
                        .coeffs()
                        .iter()
                        .zip(sweep.coeffs())
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max))
                })();
                match res {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => return CheckResult::failed("downwind sweep", format!("{} d={dim} p={p}: {e}", field.name())),
                }
            }
        }
    }
    CheckResult::new("downwind sweep", worst, 1e-9, "sweep and direct solve agree")
}

/// Runs every check; failures are collected rather than returned early.
pub fn run_verification_suite(options: &VerifyOptions) -> Result<VerifyReport> {
    if options.degrees.is_empty() || options.dims.is_empty() || options.fields.is_empty() {
        return Err(invalid("verification needs at least one degree, dimension and field"));
    }
    if options.cells == 0 {
        return Err(invalid("cells must be positive"));
    }
    let mut checks = vec![
        check_quadrature(),
        check_orthonormality(&options.dims, &options.degrees),
        check_projection(options),
        check_coercivity(options),
        check_galerkin(options),
        check_error_equation(options),
        check_sweep(options),
    ];
    checks.extend(check_inverse(&options.degrees));
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        options: options.clone(),
        checks,
        pass,
    })
}
