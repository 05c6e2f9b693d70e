//! Assembly of the upwind bilinear form and load vector.
//!
//! For an element `K` and test function `v` supported on `K`:
//!
//! ```text
//! B(u, v) = (b·∇u + c u, v)_K
//!         - Σ_{x ∈ ∂₋K \ Γ₋} (b·n)(u_K - u_{K'}) v_K
//!         - Σ_{x ∈ ∂₋K ∩ Γ₋} (b·n) u_K v_K
//! F(v)    = (f, v)_K - Σ_{x ∈ ∂₋K ∩ Γ₋} (b·n) g_D v_K
//! ```
//!
//! where `∂₋K` is selected pointwise at face quadrature points by the sign
//! of `b·n_K`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dg::system::BlockSparseMatrix;
use crate::error::{invalid, DgError, Result};
use crate::mesh::TensorMesh;
use crate::problem::{check_well_posedness, ConvectionField, ReactionData};
use crate::reference::ReferenceElement;

/// Default overintegration offset: rules use `p + 1 + offset` points per axis.
pub const DEFAULT_QUAD_OFFSET: usize = 2;

/// Assembled linear system `A u = F` realizing the dG method.
#[derive(Debug, Clone)]
pub struct DGSystem {
    pub mesh: Arc<TensorMesh>,
    pub degree: usize,
    pub points_per_axis: usize,
    pub matrix: BlockSparseMatrix,
    pub rhs: Vec<f64>,
}

struct ElementRow {
    diag: DMatrix<f64>,
    off: Vec<(usize, DMatrix<f64>)>,
    load: Vec<f64>,
}

/// Which parts of the element row to compute.
#[derive(Clone, Copy)]
struct Parts {
    matrix: bool,
    rhs: bool,
}

fn validate(
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &TensorMesh,
    points_per_axis: usize,
) -> Result<()> {
    if b.dim() != mesh.dim() {
        return Err(invalid("field and mesh dimensions differ"));
    }
    let report = check_well_posedness(data, b, mesh, points_per_axis)?;
    if !report.pass {
        return Err(DgError::RejectedProblem(format!(
            "c - ½div b has sampled minimum {} below c_s = {}",
            report.min_c0_squared, report.c_s
        )));
    }
    Ok(())
}

fn element_row(
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &TensorMesh,
    reference: &ReferenceElement,
    element: usize,
    parts: Parts,
) -> ElementRow {
    let dim = mesh.dim();
    let nb = reference.n_basis();
    let nq = reference.n_volume_points();
    let geom = mesh.element(element);
    let sqrt_det = geom.jacobian_det().sqrt();

    let mut diag = DMatrix::zeros(nb, nb);
    let mut load = vec![0.0; nb];
    let mut x = vec![0.0; dim];
    let mut bx = vec![0.0; dim];
    let mut trial = vec![0.0; nb];

    // Volume terms. With φ = φ̂ / sqrt(det J): w det J φ_i φ_j = w φ̂_i φ̂_j and
    // ∂_a φ_j = ∂̂_a φ̂_j / (h_a sqrt(det J)) with h_a the half-width.
    for q in 0..nq {
        let w = reference.volume_rule.weights[q];
        geom.map_into(reference.volume_rule.point(q), &mut x);
        if parts.matrix {
            b.eval_into(&x, &mut bx);
            let c = (data.c)(&x);
            for (j, t) in trial.iter_mut().enumerate() {
                let mut v = c * reference.volume_values[j * nq + q];
                for a in 0..dim {
                    v += bx[a] / geom.half_widths[a] * reference.volume_grads[(j * dim + a) * nq + q];
                }
                *t = v;
            }
            for j in 0..nb {
                let wt = w * trial[j];
                if wt == 0.0 {
                    continue;
                }
                for i in 0..nb {
                    diag[(i, j)] += wt * reference.volume_values[i * nq + q];
                }
            }
        }
        if parts.rhs {
            let wf = w * (data.f)(&x) * sqrt_det;
            for (i, l) in load.iter_mut().enumerate() {
                *l += wf * reference.volume_values[i * nq + q];
            }
        }
    }

    // Inflow face terms.
    let nf = reference.n_face_points();
    let mut off = Vec::new();
    let mut r = vec![0.0; dim.saturating_sub(1).max(1)];
    for (slot, lf) in mesh.element_faces(element).iter().enumerate() {
        let face = mesh.face(lf.face);
        let sign = face.sides[lf.side].normal_sign;
        let own = &reference.face_traces[slot];
        let neighbor = (!face.boundary).then(|| face.sides[1 - lf.side].element);
        let mut coupling: Option<DMatrix<f64>> = None;
        let face_det = face.jacobian_det();
        let neighbor_sqrt_det = neighbor.map(|n| mesh.element(n).jacobian_det().sqrt());
        // the neighbor sees this face from the opposite end of the same axis
        let neighbor_slot = slot ^ 1;
        for f in 0..nf {
            r[..dim - 1].copy_from_slice(reference.face_rule.point(f));
            face.map_into(&r[..dim - 1], &mut x);
            b.eval_into(&x, &mut bx);
            let bn = sign * bx[face.axis];
            if bn >= 0.0 {
                continue;
            }
            // weight -(b·n) ds > 0, times 1/sqrt(det J) per trace factor
            let ds = reference.face_rule.weights[f] * face_det;
            let weight = -bn * ds;
            match neighbor {
                Some(_) => {
                    if parts.matrix {
                        let own_scale = weight / (sqrt_det * sqrt_det);
                        for j in 0..nb {
                            let tj = own[j * nf + f] * own_scale;
                            for i in 0..nb {
                                diag[(i, j)] += tj * own[i * nf + f];
                            }
                        }
                        let cpl = coupling.get_or_insert_with(|| DMatrix::zeros(nb, nb));
                        let cross = -weight / (sqrt_det * neighbor_sqrt_det.unwrap());
                        let theirs = &reference.face_traces[neighbor_slot];
                        for j in 0..nb {
                            let tj = theirs[j * nf + f] * cross;
                            for i in 0..nb {
                                cpl[(i, j)] += tj * own[i * nf + f];
                            }
                        }
                    }
                }
                None => {
                    if parts.matrix {
                        let own_scale = weight / (sqrt_det * sqrt_det);
                        for j in 0..nb {
                            let tj = own[j * nf + f] * own_scale;
                            for i in 0..nb {
                                diag[(i, j)] += tj * own[i * nf + f];
                            }
                        }
                    }
                    if parts.rhs {
                        let g = weight * (data.g_d)(&x) / sqrt_det;
                        for (i, l) in load.iter_mut().enumerate() {
                            *l += g * own[i * nf + f];
                        }
                    }
                }
            }
        }
        if let (Some(n), Some(cpl)) = (neighbor, coupling) {
            off.push((n, cpl));
        }
    }
    off.sort_by_key(|(c, _)| *c);
    ElementRow { diag, off, load }
}

fn assemble_rows(
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &TensorMesh,
    degree: usize,
    quad_offset: usize,
    parts: Parts,
) -> Result<(Vec<ElementRow>, usize)> {
    let points = degree + 1 + quad_offset;
    validate(b, data, mesh, points)?;
    let reference = ReferenceElement::new(mesh.dim(), degree, points)?;
    // Each element writes only its own block row.
    let rows = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| element_row(b, data, mesh, &reference, e, parts))
        .collect();
    Ok((rows, points))
}

/// Matrix of the bilinear form; the right-hand side is left zero.
pub fn assemble_operator(
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &Arc<TensorMesh>,
    degree: usize,
    quad_offset: usize,
) -> Result<DGSystem> {
    let parts = Parts {
        matrix: true,
        rhs: false,
    };
    let (rows, points) = assemble_rows(b, data, mesh, degree, quad_offset, parts)?;
    let nb = (degree + 1).pow(mesh.dim() as u32);
    Ok(DGSystem {
        mesh: mesh.clone(),
        degree,
        points_per_axis: points,
        matrix: to_matrix(nb, rows),
        rhs: vec![0.0; mesh.n_elements() * nb],
    })
}

/// Load vector of the right-hand side functional.
pub fn assemble_rhs(
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &Arc<TensorMesh>,
    degree: usize,
    quad_offset: usize,
) -> Result<Vec<f64>> {
    let parts = Parts {
        matrix: false,
        rhs: true,
    };
    let (rows, _) = assemble_rows(b, data, mesh, degree, quad_offset, parts)?;
    Ok(rows.into_iter().flat_map(|r| r.load).collect())
}

/// Matrix and right-hand side in one pass.
pub fn assemble(
    b: &ConvectionField,
    data: &ReactionData,
    mesh: &Arc<TensorMesh>,
    degree: usize,
    quad_offset: usize,
) -> Result<DGSystem> {
    let parts = Parts {
        matrix: true,
        rhs: true,
    };
    let (rows, points) = assemble_rows(b, data, mesh, degree, quad_offset, parts)?;
    let nb = (degree + 1).pow(mesh.dim() as u32);
    let rhs = rows.iter().flat_map(|r| r.load.iter().copied()).collect();
    Ok(DGSystem {
        mesh: mesh.clone(),
        degree,
        points_per_axis: points,
        matrix: to_matrix(nb, rows),
        rhs,
    })
}

fn to_matrix(nb: usize, rows: Vec<ElementRow>) -> BlockSparseMatrix {
    let rows = rows
        .into_iter()
        .enumerate()
        .map(|(e, row)| {
            let mut blocks = Vec::with_capacity(1 + row.off.len());
            blocks.push((e, row.diag));
            blocks.extend(row.off);
            blocks
        })
        .collect();
    BlockSparseMatrix::new(nb, rows)
}
