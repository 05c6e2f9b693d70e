//! The dG energy norm, direct-quadrature evaluation of the bilinear form,
//! and error measurement.

use serde::{Deserialize, Serialize};

use crate::dg::function::{BrokenField, DGFunction, Difference};
use crate::error::{invalid, DgError, Result};
use crate::mesh::TensorMesh;
use crate::problem::{ConvectionField, ReactionData};
use crate::projection::ERROR_OVERINTEGRATION;
use crate::quadrature::{gauss_legendre, TensorRule};

/// Squared contributions to `|||v|||²`, each already carrying its ½ factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    /// `Σ_K ‖c₀ v‖²_{0,K}`
    pub volume: f64,
    /// `½ Σ_K ‖sqrt|b·n| v⁺‖²` over inflow boundary points
    pub inflow_boundary: f64,
    /// `½ Σ_K ‖sqrt|b·n| v⁺‖²` over outflow boundary points
    pub outflow_boundary: f64,
    /// `½ Σ_K ‖sqrt|b·n| ⟦v⟧‖²` over interior inflow points
    pub jump: f64,
    /// `|||v|||`
    pub total: f64,
}

impl NormReport {
    pub fn squared(&self) -> f64 {
        self.volume + self.inflow_boundary + self.outflow_boundary + self.jump
    }
}

/// One quadrature point on a face: physical location and `ds` weight.
pub(crate) fn for_each_face_point(
    mesh: &TensorMesh,
    rule: &TensorRule,
    mut visit: impl FnMut(&crate::mesh::Face, &[f64], f64),
) {
    let dim = mesh.dim();
    let mut x = vec![0.0; dim];
    for face in mesh.faces() {
        let det = face.jacobian_det();
        for q in 0..rule.len() {
            face.map_into(rule.point(q), &mut x);
            visit(face, &x, rule.weights[q] * det);
        }
    }
}

pub(crate) fn for_each_volume_point(
    mesh: &TensorMesh,
    rule: &TensorRule,
    mut visit: impl FnMut(usize, &[f64], f64),
) {
    let mut x = vec![0.0; mesh.dim()];
    for e in mesh.elements() {
        let det = e.jacobian_det();
        for q in 0..rule.len() {
            e.map_into(rule.point(q), &mut x);
            visit(e.id, &x, rule.weights[q] * det);
        }
    }
}

fn rules(dim: usize, points_per_axis: usize) -> Result<(TensorRule, TensorRule)> {
    let rule = gauss_legendre(points_per_axis)?;
    Ok((TensorRule::new(&rule, dim), TensorRule::new(&rule, dim - 1)))
}

/// `|||v|||_dG` and its parts, using `points_per_axis` Gauss points.
pub fn dg_norm(
    v: &dyn BrokenField,
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &TensorMesh,
    points_per_axis: usize,
) -> Result<NormReport> {
    let dim = mesh.dim();
    let (vrule, frule) = rules(dim, points_per_axis)?;
    let mut report = NormReport::default();
    let mut bad = None;
    for_each_volume_point(mesh, &vrule, |e, x, w| {
        let c0sq = data.c0_squared(b, x);
        if c0sq < 0.0 {
            bad.get_or_insert_with(|| x.to_vec());
        }
        let val = v.value(e, x);
        report.volume += w * c0sq * val * val;
    });
    if let Some(x) = bad {
        return Err(DgError::RejectedProblem(format!("c - ½div b is negative at {x:?}")));
    }
    let mut bx = vec![0.0; dim];
    for_each_face_point(mesh, &frule, |face, x, ds| {
        b.eval_into(x, &mut bx);
        let bn0 = face.sides[0].normal_sign * bx[face.axis];
        if face.boundary {
            let val = v.value(face.sides[0].element, x);
            let part = 0.5 * bn0.abs() * val * val * ds;
            if bn0 < 0.0 {
                report.inflow_boundary += part;
            } else {
                report.outflow_boundary += part;
            }
        } else if bn0 != 0.0 {
            let jump = v.value(face.sides[0].element, x) - v.value(face.sides[1].element, x);
            report.jump += 0.5 * bn0.abs() * jump * jump * ds;
        }
    });
    report.total = report.squared().sqrt();
    Ok(report)
}

/// `B_n(v, w)` by direct quadrature with `points_per_axis` Gauss points.
pub fn bilinear_value(
    v: &dyn BrokenField,
    w: &dyn BrokenField,
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &TensorMesh,
    points_per_axis: usize,
) -> Result<f64> {
    let dim = mesh.dim();
    let (vrule, frule) = rules(dim, points_per_axis)?;
    let mut total = 0.0;
    let mut bx = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    for_each_volume_point(mesh, &vrule, |e, x, wq| {
        b.eval_into(x, &mut bx);
        v.gradient(e, x, &mut grad);
        let conv: f64 = bx.iter().zip(&grad).map(|(a, g)| a * g).sum();
        total += wq * (conv + (data.c)(x) * v.value(e, x)) * w.value(e, x);
    });
    for_each_face_point(mesh, &frule, |face, x, ds| {
        b.eval_into(x, &mut bx);
        for (s, side) in face.sides.iter().enumerate() {
            let bn = side.normal_sign * bx[face.axis];
            if bn >= 0.0 {
                continue;
            }
            let own = v.value(side.element, x);
            let jump = if face.boundary {
                own
            } else {
                own - v.value(face.sides[1 - s].element, x)
            };
            total -= bn * jump * w.value(side.element, x) * ds;
        }
    });
    Ok(total)
}

/// Error of a discrete solution against the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub l2: f64,
    pub dg: NormReport,
}

/// `‖u - u_n‖_{0,Ω}` and `|||u - u_n|||_dG` with `p + 1 + 4` points per axis.
pub fn compute_error(
    exact: &dyn BrokenField,
    discrete: &DGFunction,
    b: &ConvectionField,
    data: &ReactionData,
) -> Result<ErrorReport> {
    let points = discrete.degree() + 1 + ERROR_OVERINTEGRATION;
    compute_error_with(exact, discrete, b, data, points)
}

pub fn compute_error_with(
    exact: &dyn BrokenField,
    discrete: &DGFunction,
    b: &ConvectionField,
    data: &ReactionData,
    points_per_axis: usize,
) -> Result<ErrorReport> {
    let mesh = discrete.mesh();
    if b.dim() != mesh.dim() {
        return Err(invalid("field and mesh dimensions differ"));
    }
    let diff = Difference {
        left: exact,
        right: discrete,
    };
    let dg = dg_norm(&diff, b, data, mesh, points_per_axis)?;
    let (vrule, _) = rules(mesh.dim(), points_per_axis)?;
    let mut l2 = 0.0;
    for_each_volume_point(mesh, &vrule, |e, x, w| {
        let d = diff.value(e, x);
        l2 += w * d * d;
    });
    Ok(ErrorReport { l2: l2.sqrt(), dg })
}
