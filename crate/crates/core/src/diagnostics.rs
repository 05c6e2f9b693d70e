//! Splitting of `B_n(η, ξ)` into the four terms of the a priori error
//! analysis, with `η = u - Π_p u` and `ξ = Π_p u - u_n`:
//!
//! ```text
//! T1 = Σ_K ((c - ∇·b) η, ξ)_K
//! T2 = -Σ_K (b·∇ξ, η)_K
//! T3 = Σ_K ((b·n) ⟦ξ⟧, η⁻)_{∂₋K \ Γ₋}
//! T4 = Σ_K ((b·n) ξ⁺, η⁺)_{∂₊K ∩ Γ₊}
//! ```

use serde::{Deserialize, Serialize};

use crate::dg::norm::{for_each_face_point, for_each_volume_point};
use crate::dg::{bilinear_value, dg_norm, BrokenField, DGFunction, Difference, SmoothField};
use crate::error::{invalid, Result};
use crate::problem::{ConvectionField, ReactionData};
use crate::quadrature::{gauss_legendre, TensorRule};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTermReport {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
    /// `T2` recomputed with `b - b₀`, `b₀` the element average of `b`.
    pub t2_centered: f64,
    /// `B_n(η, ξ)` by direct quadrature.
    pub b_eta_xi: f64,
    /// `|T1 + T2 + T3 + T4 - B_n(η, ξ)|`
    pub residual: f64,
    /// `|||ξ|||²_dG`
    pub xi_norm_squared: f64,
    /// `| |||ξ|||² + B_n(η, ξ) |`
    pub error_equation_residual: f64,
    /// `max_K ‖c - ∇·b‖_{∞,K} ‖η‖₀ ‖ξ‖₀`, sampled at quadrature points.
    pub t1_bound: f64,
    pub eta_l2: f64,
    pub xi_l2: f64,
    /// `|T1| + |T2| + |T3| + |T4| + |B_n(η, ξ)|`, the scale for relative checks.
    pub scale: f64,
}

impl TTermReport {
    pub fn sum(&self) -> f64 {
        self.t1 + self.t2 + self.t3 + self.t4
    }

    pub fn relative_residual(&self) -> f64 {
        relative(self.residual, self.scale)
    }

    pub fn relative_error_equation_residual(&self) -> f64 {
        relative(
            self.error_equation_residual,
            self.xi_norm_squared.abs() + self.b_eta_xi.abs(),
        )
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        value
    } else {
        value / scale
    }
}

/// Evaluates the four terms with `points_per_axis` Gauss points; `Π_p u` is
/// computed with the same rule, so `η` is discretely orthogonal to `Q_p`.
pub fn compute_t_terms(
    exact: &SmoothField,
    discrete: &DGFunction,
    b: &ConvectionField,
    data: &ReactionData,
    points_per_axis: usize,
) -> Result<TTermReport> {
    let mesh = discrete.mesh().clone();
    let dim = mesh.dim();
    if b.dim() != dim {
        return Err(invalid("field and mesh dimensions differ"));
    }
    let p = discrete.degree();
    let projected = DGFunction::project(mesh.clone(), p, points_per_axis, |x| exact.eval(x))?;
    let eta = Difference {
        left: exact,
        right: &projected,
    };
    let xi = projected.axpy(-1.0, discrete)?;

    let rule = gauss_legendre(points_per_axis)?;
    let vrule = TensorRule::new(&rule, dim);
    let frule = TensorRule::new(&rule, dim - 1);

    let averages: Vec<Vec<f64>> = mesh
        .elements()
        .iter()
        .map(|e| b.element_average(&e.bounds, points_per_axis))
        .collect::<Result<_>>()?;

    let (mut t1, mut t2, mut t2c) = (0.0, 0.0, 0.0);
    let (mut eta2, mut xi2) = (0.0, 0.0);
    let mut reaction_sup: f64 = 0.0;
    let mut bx = vec![0.0; dim];
    let mut grad = vec![0.0; dim];
    for_each_volume_point(&mesh, &vrule, |e, x, w| {
        b.eval_into(x, &mut bx);
        let eta_v = eta.value(e, x);
        let xi_v = xi.value(e, x);
        xi.gradient(e, x, &mut grad);
        let reaction = (data.c)(x) - b.divergence(x);
        reaction_sup = reaction_sup.max(reaction.abs());
        t1 += w * reaction * eta_v * xi_v;
        let conv: f64 = bx.iter().zip(&grad).map(|(a, g)| a * g).sum();
        let centered: f64 = bx
            .iter()
            .zip(&averages[e])
            .zip(&grad)
            .map(|((a, a0), g)| (a - a0) * g)
            .sum();
        t2 -= w * conv * eta_v;
        t2c -= w * centered * eta_v;
        eta2 += w * eta_v * eta_v;
        xi2 += w * xi_v * xi_v;
    });

    let (mut t3, mut t4) = (0.0, 0.0);
    for_each_face_point(&mesh, &frule, |face, x, ds| {
        b.eval_into(x, &mut bx);
        if face.boundary {
            let s = face.sides[0];
            let bn = s.normal_sign * bx[face.axis];
            if bn >= 0.0 {
                t4 += bn * xi.value(s.element, x) * eta.value(s.element, x) * ds;
            }
            return;
        }
        for (k, side) in face.sides.iter().enumerate() {
            let bn = side.normal_sign * bx[face.axis];
            if bn < 0.0 {
                let upwind = face.sides[1 - k].element;
                let jump = xi.value(side.element, x) - xi.value(upwind, x);
                t3 += bn * jump * eta.value(upwind, x) * ds;
            }
        }
    });

    let b_eta_xi = bilinear_value(&eta, &xi, b, data, &mesh, points_per_axis)?;
    let xi_norm = dg_norm(&xi, b, data, &mesh, points_per_axis)?;
    let xi_norm_squared = xi_norm.squared();
    let sum = t1 + t2 + t3 + t4;
    Ok(TTermReport {
        t1,
        t2,
        t3,
        t4,
        t2_centered: t2c,
        b_eta_xi,
        residual: (sum - b_eta_xi).abs(),
        xi_norm_squared,
        error_equation_residual: (xi_norm_squared + b_eta_xi).abs(),
        t1_bound: reaction_sup * eta2.sqrt() * xi2.sqrt(),
        eta_l2: eta2.sqrt(),
        xi_l2: xi2.sqrt(),
        scale: t1.abs() + t2.abs() + t3.abs() + t4.abs() + b_eta_xi.abs(),
    })
}
