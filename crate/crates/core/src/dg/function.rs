use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mesh::{MeshDescription, TensorMesh};
use crate::projection::l2_project;
use crate::quadrature::{gauss_legendre, TensorBasis};
use crate::reference::eval_expansion;

/// A function given elementwise, so traces on a face can be taken from
/// either adjacent element.
pub trait BrokenField: Sync {
    /// Value of the restriction to `element` at `x` (in the closure of the element).
    fn value(&self, element: usize, x: &[f64]) -> f64;

    /// Gradient of the restriction to `element` at `x`.
    fn gradient(&self, element: usize, x: &[f64], out: &mut [f64]);
}

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradientFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;

/// A globally defined field with analytic gradient.
#[derive(Clone)]
pub struct SmoothField {
    value: ScalarFn,
    gradient: GradientFn,
}

impl SmoothField {
    pub fn new(
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn from_arcs(value: ScalarFn, gradient: GradientFn) -> Self {
        Self { value, gradient }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn value_fn(&self) -> ScalarFn {
        self.value.clone()
    }
}

impl fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SmoothField")
    }
}

impl BrokenField for SmoothField {
    fn value(&self, _element: usize, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, _element: usize, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }
}

/// `left - right`, elementwise.
pub struct Difference<'a> {
    pub left: &'a dyn BrokenField,
    pub right: &'a dyn BrokenField,
}

impl BrokenField for Difference<'_> {
    fn value(&self, element: usize, x: &[f64]) -> f64 {
        self.left.value(element, x) - self.right.value(element, x)
    }

    fn gradient(&self, element: usize, x: &[f64], out: &mut [f64]) {
        let mut tmp = [0.0; 3];
        self.left.gradient(element, x, out);
        self.right.gradient(element, x, &mut tmp[..out.len()]);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o -= t;
        }
    }
}

/// Element of the broken space `V_n`: one coefficient block per element in
/// the `L²(K)`-orthonormal tensor Legendre basis.
#[derive(Debug, Clone)]
pub struct DGFunction {
    mesh: Arc<TensorMesh>,
    basis: TensorBasis,
    coeffs: Vec<f64>,
}

impl DGFunction {
    pub fn zeros(mesh: Arc<TensorMesh>, degree: usize) -> Self {
        let basis = TensorBasis::new(mesh.dim(), degree).expect("mesh dimension is positive");
        let coeffs = vec![0.0; mesh.n_elements() * basis.len()];
        Self { mesh, basis, coeffs }
    }

    pub fn from_coeffs(mesh: Arc<TensorMesh>, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        let basis = TensorBasis::new(mesh.dim(), degree)?;
        if coeffs.len() != mesh.n_elements() * basis.len() {
            return Err(invalid(format!(
                "expected {} coefficients, got {}",
                mesh.n_elements() * basis.len(),
                coeffs.len()
            )));
        }
        Ok(Self { mesh, basis, coeffs })
    }

    /// Elementwise `L²` projection `Π_p f` using `points_per_axis` Gauss points.
    pub fn project<F>(mesh: Arc<TensorMesh>, degree: usize, points_per_axis: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64,
    {
        let rule = gauss_legendre(points_per_axis)?;
        let mut out = Self::zeros(mesh.clone(), degree);
        for e in mesh.elements() {
            let c = l2_project(&f, e, degree, &rule)?;
            out.block_mut(e.id).copy_from_slice(&c.coeffs);
        }
        Ok(out)
    }

    pub fn mesh(&self) -> &Arc<TensorMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn block_size(&self) -> usize {
        self.basis.len()
    }

    pub fn n_blocks(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn block(&self, element: usize) -> &[f64] {
        let n = self.block_size();
        &self.coeffs[element * n..(element + 1) * n]
    }

    pub fn block_mut(&mut self, element: usize) -> &mut [f64] {
        let n = self.block_size();
        &mut self.coeffs[element * n..(element + 1) * n]
    }

    /// `self + alpha * other` on the same mesh and degree.
    pub fn axpy(&self, alpha: f64, other: &DGFunction) -> Result<DGFunction> {
        if other.coeffs.len() != self.coeffs.len() || other.degree() != self.degree() {
            return Err(invalid("incompatible dG functions"));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + alpha * b).collect();
        DGFunction::from_coeffs(self.mesh.clone(), self.degree(), coeffs)
    }

    pub fn scaled(&self, alpha: f64) -> DGFunction {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= alpha);
        out
    }

    /// Value at `x` using the element that owns it.
    pub fn eval_point(&self, x: &[f64]) -> Option<f64> {
        self.mesh.locate(x).map(|e| self.value(e, x))
    }

    /// Samples on a uniform grid of `n` points per axis over the domain.
    pub fn sample_grid(&self, n: usize) -> Vec<(Vec<f64>, f64)> {
        let domain = self.mesh.domain();
        let d = domain.dim();
        let n = n.max(2);
        (0..n.pow(d as u32))
            .map(|idx| {
                let mut rest = idx;
                let x: Vec<f64> = domain
                    .intervals
                    .iter()
                    .map(|(a, b)| {
                        let i = rest % n;
                        rest /= n;
                        a + (b - a) * i as f64 / (n - 1) as f64
                    })
                    .collect();
                let v = self.eval_point(&x).unwrap_or(f64::NAN);
                (x, v)
            })
            .collect()
    }

    pub fn export(&self) -> SolutionExport {
        SolutionExport {
            mesh: self.mesh.description(),
            degree: self.degree(),
            blocks: (0..self.n_blocks()).map(|e| self.block(e).to_vec()).collect(),
        }
    }
}

impl BrokenField for DGFunction {
    fn value(&self, element: usize, x: &[f64]) -> f64 {
        let geom = self.mesh.element(element);
        let r = geom.inverse_map(x);
        eval_expansion(&self.basis, self.block(element), &r, None) / geom.jacobian_det().sqrt()
    }

    fn gradient(&self, element: usize, x: &[f64], out: &mut [f64]) {
        let geom = self.mesh.element(element);
        let r = geom.inverse_map(x);
        eval_expansion(&self.basis, self.block(element), &r, Some(out));
        let s = geom.jacobian_det().sqrt();
        for (g, hw) in out.iter_mut().zip(&geom.half_widths) {
            *g /= hw * s;
        }
    }
}

/// Serialized dG solution: mesh breakpoints plus coefficient blocks in the
/// orthonormal tensor Legendre basis (axis 0 index fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionExport {
    pub mesh: MeshDescription,
    pub degree: usize,
    pub blocks: Vec<Vec<f64>>,
}

impl SolutionExport {
    pub fn into_function(self) -> Result<DGFunction> {
        let mesh = Arc::new(TensorMesh::from_description(&self.mesh)?);
        let coeffs = self.blocks.into_iter().flatten().collect();
        DGFunction::from_coeffs(mesh, self.degree, coeffs)
    }

    /// CSV with one row per coefficient: `element,index,coefficient`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("element,index,coefficient\n");
        for (e, block) in self.blocks.iter().enumerate() {
            for (i, c) in block.iter().enumerate() {
                s.push_str(&format!("{e},{i},{c:e}\n"));
            }
        }
        s
    }
}
