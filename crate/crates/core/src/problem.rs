//! Problem data for `b·∇u + c u = f` with inflow data `g_D`, Fichera
//! classification of boundary points and the coercivity check
//! `c - ½∇·b ≥ c_s`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, DgError, Result};
use crate::mesh::{Face, TensorMesh};
use crate::quadrature::{gauss_legendre, TensorRule};

/// Step for central differences when a field has no analytic derivative.
pub const FD_STEP: f64 = 1e-5;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Structural class of a convection field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldClass {
    Constant,
    Multilinear,
    Separable,
    General,
}

/// Scalar function of one variable with its first two derivatives.
#[derive(Clone)]
pub struct AxisFunction {
    value: RealFn,
    d1: RealFn,
    d2: RealFn,
}

impl AxisFunction {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            d1: Arc::new(d1),
            d2: Arc::new(d2),
        }
    }

    pub fn affine(intercept: f64, slope: f64) -> Self {
        Self::new(move |x| intercept + slope * x, move |_| slope, |_| 0.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.d1)(x)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        (self.d2)(x)
    }
}

impl fmt::Debug for AxisFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("AxisFunction")
    }
}

#[derive(Clone)]
enum Repr {
    Constant(Vec<f64>),
    Separable(Vec<AxisFunction>),
    Custom {
        value: VectorFn,
        /// Row-major `d x d`: entry `i * d + j` is `∂b_i/∂x_j`.
        jacobian: Option<VectorFn>,
    },
}

/// The convection field `b`.
#[derive(Clone)]
pub struct ConvectionField {
    name: String,
    class: FieldClass,
    dim: usize,
    repr: Repr,
}

impl fmt::Debug for ConvectionField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvectionField")
            .field("name", &self.name)
            .field("class", &self.class)
            .field("dim", &self.dim)
            .finish()
    }
}

impl ConvectionField {
    pub fn constant(b: Vec<f64>) -> Self {
        Self {
            name: "constant".into(),
            class: FieldClass::Constant,
            dim: b.len(),
            repr: Repr::Constant(b),
        }
    }

    /// `b(x) = (b_1(x_1), ..., b_d(x_d))`.
    pub fn separable(components: Vec<AxisFunction>) -> Self {
        Self {
            name: "separable".into(),
            class: FieldClass::Separable,
            dim: components.len(),
            repr: Repr::Separable(components),
        }
    }

    /// Separable field with affine components `b_j = a_j + s_j x_j`.
    pub fn separable_affine(intercepts: &[f64], slopes: &[f64]) -> Self {
        let comps = intercepts
            .iter()
            .zip(slopes)
            .map(|(&a, &s)| AxisFunction::affine(a, s))
            .collect();
        Self {
            name: "multilinear".into(),
            class: FieldClass::Multilinear,
            dim: intercepts.len(),
            repr: Repr::Separable(comps),
        }
    }

    /// Arbitrary field; without a jacobian, derivatives fall back to
    /// central differences.
    pub fn custom(
        dim: usize,
        class: FieldClass,
        value: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        jacobian: Option<VectorFn>,
    ) -> Self {
        Self {
            name: "custom".into(),
            class,
            dim,
            repr: Repr::Custom {
                value: Arc::new(value),
                jacobian,
            },
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_class(mut self, class: FieldClass) -> Self {
        self.class = class;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn class(&self) -> FieldClass {
        self.class
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.repr {
            Repr::Constant(b) => out[..self.dim].copy_from_slice(b),
            Repr::Separable(comps) => {
                for (j, c) in comps.iter().enumerate() {
                    out[j] = c.value(x[j]);
                }
            }
            Repr::Custom { value, .. } => value(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// Row-major jacobian, `∂b_i/∂x_j` at `i * d + j`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut jac = vec![0.0; d * d];
        match &self.repr {
            Repr::Constant(_) => {}
            Repr::Separable(comps) => {
                for (j, c) in comps.iter().enumerate() {
                    jac[j * d + j] = c.derivative(x[j]);
                }
            }
            Repr::Custom {
                jacobian: Some(jf), ..
            } => jf(x, &mut jac),
            Repr::Custom { value, .. } => {
                let mut xp = x.to_vec();
                let mut plus = vec![0.0; d];
                let mut minus = vec![0.0; d];
                for j in 0..d {
                    xp[j] = x[j] + FD_STEP;
                    value(&xp, &mut plus);
                    xp[j] = x[j] - FD_STEP;
                    value(&xp, &mut minus);
                    xp[j] = x[j];
                    for i in 0..d {
                        jac[i * d + j] = (plus[i] - minus[i]) / (2.0 * FD_STEP);
                    }
                }
            }
        }
        jac
    }

    /// `∇·b(x)`; for separable fields `Σ b_j'(x_j)`.
    pub fn divergence(&self, x: &[f64]) -> f64 {
        match &self.repr {
            Repr::Constant(_) => 0.0,
            Repr::Separable(comps) => comps.iter().enumerate().map(|(j, c)| c.derivative(x[j])).sum(),
            Repr::Custom { .. } => {
                let jac = self.jacobian(x);
                (0..self.dim).map(|i| jac[i * self.dim + i]).sum()
            }
        }
    }

    /// Per-axis component for separable (and separable-affine) fields.
    pub fn axis_function(&self, axis: usize) -> Option<&AxisFunction> {
        match &self.repr {
            Repr::Separable(comps) => comps.get(axis),
            _ => None,
        }
    }

    pub fn is_separable(&self) -> bool {
        matches!(self.repr, Repr::Separable(_) | Repr::Constant(_))
    }

    /// Vector average `b_0` of the field over an element, by tensor Gauss
    /// quadrature with `points` per axis.
    pub fn element_average(&self, bounds: &[(f64, f64)], points: usize) -> Result<Vec<f64>> {
        let rule = TensorRule::new(&gauss_legendre(points)?, bounds.len());
        let mut x = vec![0.0; bounds.len()];
        let mut bx = vec![0.0; self.dim];
        let mut avg = vec![0.0; self.dim];
        for q in 0..rule.len() {
            map_ref(bounds, rule.point(q), &mut x);
            self.eval_into(&x, &mut bx);
            for (a, v) in avg.iter_mut().zip(&bx) {
                *a += rule.weights[q] * v;
            }
        }
        let ref_volume = 2f64.powi(bounds.len() as i32);
        avg.iter_mut().for_each(|a| *a /= ref_volume);
        Ok(avg)
    }

    /// Sampled `|b|_{W^{1,∞}(K)}`: max over a uniform grid of the largest
    /// absolute jacobian entry.
    pub fn w1_inf_seminorm(&self, bounds: &[(f64, f64)], samples_per_axis: usize) -> f64 {
        let mut best: f64 = 0.0;
        for_each_grid_point(bounds, samples_per_axis, |x| {
            for v in self.jacobian(x) {
                best = best.max(v.abs());
            }
        });
        best
    }
}

fn map_ref(bounds: &[(f64, f64)], reference: &[f64], out: &mut [f64]) {
    for (a, (lo, hi)) in bounds.iter().enumerate() {
        out[a] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * reference[a];
    }
}

fn for_each_grid_point(bounds: &[(f64, f64)], n: usize, mut f: impl FnMut(&[f64])) {
    let d = bounds.len();
    let n = n.max(2);
    let total = n.pow(d as u32);
    let mut x = vec![0.0; d];
    for idx in 0..total {
        let mut rest = idx;
        for (a, (lo, hi)) in bounds.iter().enumerate() {
            let i = rest % n;
            rest /= n;
            x[a] = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        }
        f(&x);
    }
}

/// Reaction coefficient, source, inflow data and the declared lower bound
/// `c_s` for `c - ½∇·b`.
#[derive(Clone)]
pub struct ReactionData {
    pub c: ScalarFn,
    pub f: ScalarFn,
    pub g_d: ScalarFn,
    pub c_s: f64,
}

impl fmt::Debug for ReactionData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReactionData").field("c_s", &self.c_s).finish()
    }
}

impl ReactionData {
    pub fn new(
        c: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        g_d: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        c_s: f64,
    ) -> Result<Self> {
        if !(c_s > 0.0) {
            return Err(invalid("c_s must be positive"));
        }
        Ok(Self {
            c: Arc::new(c),
            f: Arc::new(f),
            g_d: Arc::new(g_d),
            c_s,
        })
    }

    pub fn from_arcs(c: ScalarFn, f: ScalarFn, g_d: ScalarFn, c_s: f64) -> Result<Self> {
        if !(c_s > 0.0) {
            return Err(invalid("c_s must be positive"));
        }
        Ok(Self { c, f, g_d, c_s })
    }

    /// `c_0² = c - ½∇·b` at `x`.
    pub fn c0_squared(&self, b: &ConvectionField, x: &[f64]) -> f64 {
        (self.c)(x) - 0.5 * b.divergence(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowLabel {
    Inflow,
    Outflow,
}

impl FlowLabel {
    /// Inflow iff `b·n < 0`; characteristic points go to outflow.
    pub fn from_fichera(bn: f64) -> Self {
        if bn < 0.0 {
            FlowLabel::Inflow
        } else {
            FlowLabel::Outflow
        }
    }
}

/// The Fichera function `b(x)·n`.
pub fn fichera(b: &ConvectionField, x: &[f64], n: &[f64]) -> f64 {
    b.eval(x).iter().zip(n).map(|(u, v)| u * v).sum()
}

/// `∇·b(x)`.
pub fn divergence(b: &ConvectionField, x: &[f64]) -> f64 {
    b.divergence(x)
}

/// Labels points of `face` as seen from `element`.
pub fn classify_face_points(
    b: &ConvectionField,
    face: &Face,
    element: usize,
    points: &[Vec<f64>],
) -> Result<Vec<FlowLabel>> {
    let side = face
        .side_of(element)
        .ok_or_else(|| invalid(format!("element {element} is not adjacent to face {}", face.id)))?;
    let sign = face.sides[side].normal_sign;
    let mut bx = vec![0.0; b.dim()];
    Ok(points
        .iter()
        .map(|x| {
            b.eval_into(x, &mut bx);
            FlowLabel::from_fichera(sign * bx[face.axis])
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellPosednessReport {
    pub min_c0_squared: f64,
    pub samples: usize,
    pub c_s: f64,
    pub pass: bool,
}

/// Samples `c - ½∇·b` at `points_per_axis^d` Gauss points of every element.
pub fn check_well_posedness(
    data: &ReactionData,
    b: &ConvectionField,
    mesh: &TensorMesh,
    points_per_axis: usize,
) -> Result<WellPosednessReport> {
    if b.dim() != mesh.dim() {
        return Err(invalid("field and mesh dimensions differ"));
    }
    let rule = TensorRule::new(&gauss_legendre(points_per_axis)?, mesh.dim());
    let mut x = vec![0.0; mesh.dim()];
    let mut min = f64::INFINITY;
    let mut samples = 0;
    for e in mesh.elements() {
        for q in 0..rule.len() {
            e.map_into(rule.point(q), &mut x);
            let v = data.c0_squared(b, &x);
            if !v.is_finite() {
                return Err(DgError::Numerical(format!("non-finite c - ½div b at {x:?}")));
            }
            min = min.min(v);
            samples += 1;
        }
    }
    Ok(WellPosednessReport {
        min_c0_squared: min,
        samples,
        c_s: data.c_s,
        pass: min >= data.c_s,
    })
}

/// Named convection fields on the unit box, each paired with a reaction
/// coefficient giving `c - ½∇·b ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldCatalog {
    Constant,
    Multilinear,
    SeparableTanh,
    GeneralSwirl,
    Rotating,
}

impl FieldCatalog {
    pub const ALL: [FieldCatalog; 5] = [
        FieldCatalog::Constant,
        FieldCatalog::Multilinear,
        FieldCatalog::SeparableTanh,
        FieldCatalog::GeneralSwirl,
        FieldCatalog::Rotating,
    ];

    /// The four fields spanning the constant / multilinear / separable /
    /// general taxonomy.
    pub const TAXONOMY: [FieldCatalog; 4] = [
        FieldCatalog::Constant,
        FieldCatalog::Multilinear,
        FieldCatalog::SeparableTanh,
        FieldCatalog::GeneralSwirl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FieldCatalog::Constant => "constant",
            FieldCatalog::Multilinear => "multilinear",
            FieldCatalog::SeparableTanh => "separable-tanh",
            FieldCatalog::GeneralSwirl => "general-swirl",
            FieldCatalog::Rotating => "rotating",
        }
    }

    /// The field in dimension `dim` together with its reaction coefficient.
    pub fn build(&self, dim: usize) -> Result<(ConvectionField, ScalarFn)> {
        if dim == 0 || dim > crate::mesh::MAX_DIM {
            return Err(invalid(format!("unsupported dimension {dim}")));
        }
        let d = dim as f64;
        let field = match self {
            FieldCatalog::Constant => {
                let c: ScalarFn = Arc::new(|_| 1.0);
                (ConvectionField::constant(vec![1.0; dim]), c)
            }
            FieldCatalog::Multilinear => {
                // b_j = 1 + x_j / 2, ∇·b = d / 2
                let c0 = 1.0 + 0.25 * d;
                let c: ScalarFn = Arc::new(move |_| c0);
                (ConvectionField::separable_affine(&vec![1.0; dim], &vec![0.5; dim]), c)
            }
            FieldCatalog::SeparableTanh => {
                let comps = (0..dim)
                    .map(|_| {
                        AxisFunction::new(
                            |x: f64| 2.0 + x.tanh(),
                            |x: f64| 1.0 / x.cosh().powi(2),
                            |x: f64| -2.0 * x.tanh() / x.cosh().powi(2),
                        )
                    })
                    .collect();
                // 0 < ∇·b ≤ d
                let c0 = 1.0 + 0.5 * d;
                let c: ScalarFn = Arc::new(move |_| c0);
                (ConvectionField::separable(comps).with_name("separable-tanh"), c)
            }
            FieldCatalog::GeneralSwirl => {
                let field = match dim {
                    1 => ConvectionField::custom(
                        1,
                        FieldClass::General,
                        |x, out| out[0] = 2.0 + x[0].sin(),
                        Some(Arc::new(|x: &[f64], jac: &mut [f64]| jac[0] = x[0].cos())),
                    ),
                    2 => ConvectionField::custom(
                        2,
                        FieldClass::General,
                        |x, out| {
                            out[0] = 2.0 + x[1].sin();
                            out[1] = 2.0 + x[0].cos();
                        },
                        Some(Arc::new(|x: &[f64], jac: &mut [f64]| {
                            jac[0] = 0.0;
                            jac[1] = x[1].cos();
                            jac[2] = -x[0].sin();
                            jac[3] = 0.0;
                        })),
                    ),
                    _ => ConvectionField::custom(
                        3,
                        FieldClass::General,
                        |x, out| {
                            out[0] = 2.0 + x[1].sin();
                            out[1] = 2.0 + x[2].cos();
                            out[2] = 2.0 + x[0].sin();
                        },
                        Some(Arc::new(|x: &[f64], jac: &mut [f64]| {
                            jac.iter_mut().for_each(|v| *v = 0.0);
                            jac[1] = x[1].cos();
                            jac[5] = -x[2].sin();
                            jac[6] = x[0].cos();
                        })),
                    ),
                };
                // |∇·b| ≤ 1 in 1D, zero otherwise
                let c: ScalarFn = Arc::new(|_| 1.5);
                (field.with_name("general-swirl"), c)
            }
            FieldCatalog::Rotating => {
                if dim != 2 {
                    return Err(invalid("the rotating field is two-dimensional"));
                }
                let field = ConvectionField::custom(
                    2,
                    FieldClass::General,
                    |x, out| {
                        out[0] = x[1] - 0.5;
                        out[1] = 0.5 - x[0];
                    },
                    Some(Arc::new(|_: &[f64], jac: &mut [f64]| {
                        jac.copy_from_slice(&[0.0, 1.0, -1.0, 0.0]);
                    })),
                )
                .with_name("rotating");
                let c: ScalarFn = Arc::new(|_| 1.0);
                (field, c)
            }
        };
        Ok(field)
    }
}

impl FromStr for FieldCatalog {
    type Err = DgError;

    fn from_str(s: &str) -> Result<Self> {
        FieldCatalog::ALL
            .iter()
            .find(|f| f.name() == s)
            .copied()
            .ok_or_else(|| invalid(format!("unknown field '{s}'")))
    }
}

impl fmt::Display for FieldCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, BoxDomain};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn shear() -> ConvectionField {
        ConvectionField::custom(2, FieldClass::General, |x, o| {
            o[0] = x[1];
            o[1] = 0.0;
        }, None)
    }

    #[test]
    fn fichera_examples() {
        let b = ConvectionField::constant(vec![1.0, 0.0]);
        assert_eq!(fichera(&b, &[0.0, 0.0], &[-1.0, 0.0]), -1.0);
        let b = ConvectionField::constant(vec![0.0, 1.0]);
        assert_eq!(fichera(&b, &[0.3, 0.3], &[1.0, 0.0]), 0.0);
        assert_eq!(fichera(&shear(), &[1.0, 0.25], &[1.0, 0.0]), 0.25);
    }

    #[test]
    fn classify_examples() {
        let mesh = build_mesh(&BoxDomain::unit(2).unwrap(), &[1, 1]).unwrap();
        let left = mesh.faces().iter().find(|f| f.axis == 0 && f.coordinate == 0.0).unwrap();
        let right = mesh.faces().iter().find(|f| f.axis == 0 && f.coordinate == 1.0).unwrap();
        let b = ConvectionField::constant(vec![1.0, 0.0]);
        let pts = vec![vec![0.0, 0.1], vec![0.0, 0.9]];
        assert_eq!(
            classify_face_points(&b, left, 0, &pts).unwrap(),
            vec![FlowLabel::Inflow, FlowLabel::Inflow]
        );
        let tangential = ConvectionField::constant(vec![0.0, 1.0]);
        assert_eq!(
            classify_face_points(&tangential, left, 0, &pts).unwrap(),
            vec![FlowLabel::Outflow, FlowLabel::Outflow]
        );
        let sheared = ConvectionField::custom(2, FieldClass::General, |x, o| {
            o[0] = x[1] - 0.5;
            o[1] = 0.0;
        }, None);
        let pts = vec![vec![1.0, 0.25], vec![1.0, 0.75]];
        assert_eq!(
            classify_face_points(&sheared, right, 0, &pts).unwrap(),
            vec![FlowLabel::Inflow, FlowLabel::Outflow]
        );
        assert!(classify_face_points(&b, right, 7, &pts).is_err());
    }

    #[test]
    fn interior_labels_are_complementary() {
        let mesh = build_mesh(&BoxDomain::unit(2).unwrap(), &[3, 3]).unwrap();
        let (b, _) = FieldCatalog::Rotating.build(2).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for face in mesh.faces() {
            let pts: Vec<Vec<f64>> = (0..20)
                .map(|_| {
                    let t = rng.random_range(-1.0..1.0);
                    let mut x = vec![0.0; 2];
                    face.map_into(&[t], &mut x);
                    x
                })
                .collect();
            let labels: Vec<Vec<FlowLabel>> = face
                .sides
                .iter()
                .map(|s| classify_face_points(&b, face, s.element, &pts).unwrap())
                .collect();
            assert_eq!(labels[0].len(), pts.len());
            if labels.len() == 2 {
                for (q, x) in pts.iter().enumerate() {
                    let bn = fichera(&b, x, &face.normal(0, 2));
                    if bn == 0.0 {
                        assert_eq!(labels[0][q], FlowLabel::Outflow);
                        assert_eq!(labels[1][q], FlowLabel::Outflow);
                    } else {
                        assert_ne!(labels[0][q], labels[1][q]);
                    }
                }
            }
        }
    }

    #[test]
    fn well_posedness_examples() {
        let mesh = build_mesh(&BoxDomain::unit(2).unwrap(), &[2, 2]).unwrap();
        let b = ConvectionField::constant(vec![1.0, 2.0]);
        let data = ReactionData::new(|_| 1.0, |_| 0.0, |_| 0.0, 1.0).unwrap();
        let r = check_well_posedness(&data, &b, &mesh, 3).unwrap();
        assert_eq!(r.min_c0_squared, 1.0);
        assert!(r.pass);
        assert_eq!(r.samples, 4 * 9);

        let radial = ConvectionField::separable_affine(&[0.0, 0.0], &[1.0, 1.0]);
        let zero = ReactionData::new(|_| 0.0, |_| 0.0, |_| 0.0, 0.5).unwrap();
        let r = check_well_posedness(&zero, &radial, &mesh, 3).unwrap();
        assert_abs_diff_eq!(r.min_c0_squared, -1.0, epsilon = 1e-15);
        assert!(!r.pass);
        let two = ReactionData::new(|_| 2.0, |_| 0.0, |_| 0.0, 1.0).unwrap();
        let r = check_well_posedness(&two, &radial, &mesh, 3).unwrap();
        assert_abs_diff_eq!(r.min_c0_squared, 1.0, epsilon = 1e-15);
        assert!(r.pass);
        assert!(ReactionData::new(|_| 1.0, |_| 0.0, |_| 0.0, 0.0).is_err());
    }

    #[test]
    fn divergence_examples() {
        let b = ConvectionField::constant(vec![3.0, -1.0]);
        assert_eq!(divergence(&b, &[0.2, 0.4]), 0.0);
        let swap = ConvectionField::custom(2, FieldClass::Multilinear, |x, o| {
            o[0] = x[1];
            o[1] = x[0];
        }, None);
        assert_abs_diff_eq!(divergence(&swap, &[0.3, 0.8]), 0.0, epsilon = 1e-9);
        let mixed = ConvectionField::separable(vec![
            AxisFunction::new(|x: f64| x.tanh(), |x: f64| 1.0 / x.cosh().powi(2), |x: f64| -2.0 * x.tanh() / x.cosh().powi(2)),
            AxisFunction::new(|x| x * x, |x| 2.0 * x, |_| 2.0),
        ]);
        assert_abs_diff_eq!(divergence(&mixed, &[0.0, 1.0]), 3.0, epsilon = 1e-15);
    }

    #[test]
    fn catalog_fields_are_well_posed() {
        for dim in 1..=3 {
            let mesh = build_mesh(&BoxDomain::unit(dim).unwrap(), &vec![3; dim]).unwrap();
            for cat in FieldCatalog::ALL {
                let Ok((b, c)) = cat.build(dim) else {
                    assert_eq!(cat, FieldCatalog::Rotating);
                    continue;
                };
                let data = ReactionData::from_arcs(c, Arc::new(|_| 0.0), Arc::new(|_| 0.0), 1.0).unwrap();
                let r = check_well_posedness(&data, &b, &mesh, 4).unwrap();
                assert!(r.pass, "{cat} in {dim}D: {r:?}");
            }
        }
        assert_eq!("separable-tanh".parse::<FieldCatalog>().unwrap(), FieldCatalog::SeparableTanh);
        assert!("nope".parse::<FieldCatalog>().is_err());
    }

    #[test]
    fn separable_fields_have_no_cross_partials() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for cat in [FieldCatalog::Multilinear, FieldCatalog::SeparableTanh] {
            let (b, _) = cat.build(3).unwrap();
            assert!(b.is_separable());
            for _ in 0..100 {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..1.0)).collect();
                let analytic = b.jacobian(&x);
                for i in 0..3 {
                    for j in 0..3 {
                        let mut xp = x.clone();
                        let mut xm = x.clone();
                        xp[j] += FD_STEP;
                        xm[j] -= FD_STEP;
                        let fd = (b.eval(&xp)[i] - b.eval(&xm)[i]) / (2.0 * FD_STEP);
                        if i != j {
                            assert!(fd.abs() <= 1e-6);
                        }
                        assert!((fd - analytic[i * 3 + j]).abs() <= 1e-6);
                    }
                }
                let trace: f64 = (0..3).map(|i| analytic[i * 3 + i]).sum();
                assert!((trace - b.divergence(&x)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn general_swirl_jacobian_matches_differences() {
        let (b, _) = FieldCatalog::GeneralSwirl.build(2).unwrap();
        let x = [0.3, 0.7];
        let jac = b.jacobian(&x);
        let fd_field = ConvectionField::custom(2, FieldClass::General, {
            let b = b.clone();
            move |x, o| b.eval_into(x, o)
        }, None);
        let fd = fd_field.jacobian(&x);
        for (a, f) in jac.iter().zip(&fd) {
            assert!((a - f).abs() < 1e-8);
        }
    }

    #[test]
    fn element_average_of_affine_field() {
        let b = ConvectionField::separable_affine(&[1.0, 0.0], &[2.0, 1.0]);
        let avg = b.element_average(&[(0.0, 1.0), (2.0, 4.0)], 2).unwrap();
        assert_abs_diff_eq!(avg[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(avg[1], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.w1_inf_seminorm(&[(0.0, 1.0), (0.0, 1.0)], 5), 2.0, epsilon = 1e-15);
    }
}
