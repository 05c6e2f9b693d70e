use std::collections::VecDeque;

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DVector;

use crate::dg::assembly::DGSystem;
use crate::dg::function::DGFunction;
use crate::error::{DgError, Result};

/// Relative residual accepted from the direct solver.
pub const RESIDUAL_TOL: f64 = 1e-10;

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖A x - F‖ / (‖A‖ ‖x‖ + ‖F‖)`.
pub fn relative_residual(system: &DGSystem, x: &[f64]) -> f64 {
    let ax = system.matrix.matvec(x);
    let res: Vec<f64> = ax.iter().zip(&system.rhs).map(|(a, f)| a - f).collect();
    let scale = system.matrix.frobenius_norm() * norm2(x) + norm2(&system.rhs);
    if scale == 0.0 {
        0.0
    } else {
        norm2(&res) / scale
    }
}

/// Solves the assembled system by sparse LU factorization.
pub fn solve(system: &DGSystem) -> Result<DGFunction> {
    let n = system.matrix.dim();
    let triplets: Vec<Triplet<usize, usize, f64>> = system
        .matrix
        .triplets()
        .into_iter()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| DgError::Numerical(format!("sparse matrix construction failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| DgError::Numerical(format!("sparse LU factorization failed: {e:?}")))?;
    let mut rhs = Mat::<f64>::zeros(n, 1);
    for (i, v) in system.rhs.iter().enumerate() {
        rhs[(i, 0)] = *v;
    }
    let sol = lu.solve(&rhs);
    let mut x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();

    if relative_residual(system, &x) > RESIDUAL_TOL {
        // one step of iterative refinement
        let ax = system.matrix.matvec(&x);
        let mut r = Mat::<f64>::zeros(n, 1);
        for i in 0..n {
            r[(i, 0)] = system.rhs[i] - ax[i];
        }
        let dx = lu.solve(&r);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += dx[(i, 0)];
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DgError::Numerical("direct solve produced non-finite values".into()));
    }
    let res = relative_residual(system, &x);
    if res > RESIDUAL_TOL {
        return Err(DgError::Numerical(format!("relative residual {res:e} exceeds {RESIDUAL_TOL:e}")));
    }
    DGFunction::from_coeffs(system.mesh.clone(), system.degree, x)
}

/// Element order in which every element comes after all elements it takes
/// inflow data from, or `None` if the inflow coupling has a cycle.
pub fn downwind_order(system: &DGSystem) -> Option<Vec<usize>> {
    let m = &system.matrix;
    let n = m.n_blocks();
    let mut indegree = vec![0usize; n];
    let mut dependents = vec![Vec::new(); n];
    for r in 0..n {
        for c in m.off_diagonal_columns(r) {
            indegree[r] += 1;
            dependents[c].push(r);
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&e| indegree[e] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(e) = queue.pop_front() {
        order.push(e);
        for &d in &dependents[e] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                queue.push_back(d);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Block forward substitution along the downwind order. Fails with
/// [`DgError::NotApplicable`] when the inflow coupling is cyclic.
pub fn downwind_sweep_solve(system: &DGSystem) -> Result<DGFunction> {
    let order = downwind_order(system)
        .ok_or_else(|| DgError::NotApplicable("inflow coupling between elements is cyclic".into()))?;
    let m = &system.matrix;
    let nb = m.block_size();
    let mut x = vec![0.0; m.dim()];
    for e in order {
        let mut r = DVector::from_row_slice(&system.rhs[e * nb..(e + 1) * nb]);
        for (c, blk) in &m.row(e)[1..] {
            let xc = DVector::from_row_slice(&x[c * nb..(c + 1) * nb]);
            r -= blk * xc;
        }
        let sol = m
            .diagonal(e)
            .clone()
            .lu()
            .solve(&r)
            .ok_or_else(|| DgError::Numerical(format!("singular diagonal block for element {e}")))?;
        x[e * nb..(e + 1) * nb].copy_from_slice(sol.as_slice());
    }
    DGFunction::from_coeffs(system.mesh.clone(), system.degree, x)
}
