//! Basis tables on the reference cube, shared by every element of a mesh.
//!
//! The physical basis on `K` is `φ_i = φ̂_i ∘ Φ_K⁻¹ / sqrt(det J_K)`, which
//! is `L²(K)`-orthonormal, so element mass matrices are identities.

use crate::error::{invalid, Result};
use crate::quadrature::{gauss_legendre, legendre_all, TensorBasis, TensorRule};

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub basis: TensorBasis,
    pub points_per_axis: usize,
    pub volume_rule: TensorRule,
    /// `volume_values[i * nq + q]`
    pub volume_values: Vec<f64>,
    /// `volume_grads[(i * d + a) * nq + q]`, reference coordinates.
    pub volume_grads: Vec<f64>,
    /// Rule on `(-1, 1)^{d-1}` for faces.
    pub face_rule: TensorRule,
    /// Per local face slot (`2 * axis + high`), `traces[slot][i * nf + f]`.
    pub face_traces: Vec<Vec<f64>>,
}

impl ReferenceElement {
    pub fn new(dim: usize, degree: usize, points_per_axis: usize) -> Result<Self> {
        if points_per_axis < degree + 1 {
            return Err(invalid(format!(
                "{points_per_axis} quadrature points per axis cannot integrate degree {degree} exactly"
            )));
        }
        let basis = TensorBasis::new(dim, degree)?;
        let rule1d = gauss_legendre(points_per_axis)?;
        let volume_rule = TensorRule::new(&rule1d, dim);
        let face_rule = TensorRule::new(&rule1d, dim - 1);
        let nb = basis.len();
        let np = degree + 1;

        // 1D tables at the Gauss nodes and at the endpoints.
        let mut node_vals = vec![vec![0.0; np]; points_per_axis];
        let mut node_ders = vec![vec![0.0; np]; points_per_axis];
        for (q, &x) in rule1d.nodes().iter().enumerate() {
            legendre_all(degree, x, &mut node_vals[q], &mut node_ders[q]);
        }
        let mut end_vals = [vec![0.0; np], vec![0.0; np]];
        let mut scratch = vec![0.0; np];
        legendre_all(degree, -1.0, &mut end_vals[0], &mut scratch);
        legendre_all(degree, 1.0, &mut end_vals[1], &mut scratch);

        let multis: Vec<Vec<usize>> = (0..nb).map(|i| basis.multi_index(i).unwrap()).collect();

        let nq = volume_rule.len();
        let mut volume_values = vec![0.0; nb * nq];
        let mut volume_grads = vec![0.0; nb * dim * nq];
        for (i, m) in multis.iter().enumerate() {
            for q in 0..nq {
                let idx = &volume_rule.indices[q * dim..(q + 1) * dim];
                let mut v = 1.0;
                for a in 0..dim {
                    v *= node_vals[idx[a]][m[a]];
                }
                volume_values[i * nq + q] = v;
                for g in 0..dim {
                    let mut dv = 1.0;
                    for a in 0..dim {
                        dv *= if a == g {
                            node_ders[idx[a]][m[a]]
                        } else {
                            node_vals[idx[a]][m[a]]
                        };
                    }
                    volume_grads[(i * dim + g) * nq + q] = dv;
                }
            }
        }

        let nf = face_rule.len();
        let fdim = dim - 1;
        let mut face_traces = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            for high in 0..2 {
                let mut t = vec![0.0; nb * nf];
                for (i, m) in multis.iter().enumerate() {
                    for f in 0..nf {
                        let idx = &face_rule.indices[f * fdim..(f + 1) * fdim];
                        let mut v = end_vals[high][m[axis]];
                        let mut t_axis = 0;
                        for (a, &k) in m.iter().enumerate() {
                            if a != axis {
                                v *= node_vals[idx[t_axis]][k];
                                t_axis += 1;
                            }
                        }
                        t[i * nf + f] = v;
                    }
                }
                face_traces.push(t);
            }
        }

        Ok(Self {
            basis,
            points_per_axis,
            volume_rule,
            volume_values,
            volume_grads,
            face_rule,
            face_traces,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_basis(&self) -> usize {
        self.basis.len()
    }

    pub fn n_volume_points(&self) -> usize {
        self.volume_rule.len()
    }

    pub fn n_face_points(&self) -> usize {
        self.face_rule.len()
    }
}

/// Evaluates `Σ_i coeffs[i] φ̂_i(x̂)` and optionally its reference gradient.
pub fn eval_expansion(
    basis: &TensorBasis,
    coeffs: &[f64],
    reference: &[f64],
    gradient: Option<&mut [f64]>,
) -> f64 {
    let dim = basis.dim();
    let p = basis.degree();
    let np = p + 1;
    let mut vals = vec![vec![0.0; np]; dim];
    let mut ders = vec![vec![0.0; np]; dim];
    for a in 0..dim {
        legendre_all(p, reference[a], &mut vals[a], &mut ders[a]);
    }
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    let want_grad = gradient.is_some();
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mut rest = i;
        let mut m = [0usize; 3];
        for slot in m.iter_mut().take(dim) {
            *slot = rest % np;
            rest /= np;
        }
        let mut v = c;
        for a in 0..dim {
            v *= vals[a][m[a]];
        }
        value += v;
        if want_grad {
            for (g, gv) in grad.iter_mut().enumerate().take(dim) {
                let mut dv = c;
                for a in 0..dim {
                    dv *= if a == g { ders[a][m[a]] } else { vals[a][m[a]] };
                }
                *gv += dv;
            }
        }
    }
    if let Some(out) = gradient {
        out[..dim].copy_from_slice(&grad[..dim]);
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn tables_match_direct_evaluation() {
        let r = ReferenceElement::new(2, 2, 4).unwrap();
        let nq = r.n_volume_points();
        for i in 0..r.n_basis() {
            for q in 0..nq {
                let (v, g) = r.basis.eval(i, r.volume_rule.point(q)).unwrap();
                assert_abs_diff_eq!(r.volume_values[i * nq + q], v, epsilon = 1e-14);
                for a in 0..2 {
                    assert_abs_diff_eq!(r.volume_grads[(i * 2 + a) * nq + q], g[a], epsilon = 1e-13);
                }
            }
        }
        // slot 1 is axis 0 at x = +1; slot 2 is axis 1 at y = -1
        let nf = r.n_face_points();
        for i in 0..r.n_basis() {
            for f in 0..nf {
                let t = r.face_rule.point(f)[0];
                let (v1, _) = r.basis.eval(i, &[1.0, t]).unwrap();
                let (v2, _) = r.basis.eval(i, &[t, -1.0]).unwrap();
                assert_abs_diff_eq!(r.face_traces[1][i * nf + f], v1, epsilon = 1e-14);
                assert_abs_diff_eq!(r.face_traces[2][i * nf + f], v2, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn one_dimensional_faces_are_points() {
        let r = ReferenceElement::new(1, 3, 4).unwrap();
        assert_eq!(r.n_face_points(), 1);
        assert_abs_diff_eq!(r.face_traces[0][3], -(3.5f64).sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn rejects_underintegration() {
        assert!(ReferenceElement::new(2, 3, 3).is_err());
    }

    #[test]
    fn expansion_matches_basis_sum() {
        let basis = TensorBasis::new(3, 2).unwrap();
        let coeffs: Vec<f64> = (0..basis.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = [0.1, -0.6, 0.9];
        let mut g = [0.0; 3];
        let v = eval_expansion(&basis, &coeffs, &x, Some(&mut g));
        let mut v_ref = 0.0;
        let mut g_ref = [0.0; 3];
        for (i, c) in coeffs.iter().enumerate() {
            let (bv, bg) = basis.eval(i, &x).unwrap();
            v_ref += c * bv;
            for a in 0..3 {
                g_ref[a] += c * bg[a];
            }
        }
        assert_abs_diff_eq!(v, v_ref, epsilon = 1e-13);
        for a in 0..3 {
            assert_abs_diff_eq!(g[a], g_ref[a], epsilon = 1e-12);
        }
    }
}
