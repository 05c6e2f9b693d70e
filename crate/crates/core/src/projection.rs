//! Elementwise `L²` projection onto `Q_p`, projection error measurement and
//! the one-dimensional inequality toolkit: affine interpolants, quadratic
//! bubbles, and extremal inverse-inequality constants.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, DgError, Result};
use crate::mesh::ElementGeometry;
use crate::quadrature::{gauss_legendre, legendre_eval, QuadratureRule1D, TensorBasis, TensorRule};
use crate::rates::fit_loglog_slope;
use crate::reference::eval_expansion;

/// Extra Gauss points used when measuring errors.
pub const ERROR_OVERINTEGRATION: usize = 4;

/// Default number of interior samples for sampled sup norms.
pub const DEFAULT_SUP_SAMPLES: usize = 4097;

/// Coefficients of `Π_p f` on one element in the `L²(K)`-orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCoeffs {
    pub element: usize,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl ProjectionCoeffs {
    pub fn eval(&self, geom: &ElementGeometry, x: &[f64]) -> f64 {
        let basis = TensorBasis::new(geom.dim(), self.degree).expect("nonzero dimension");
        let r = geom.inverse_map(x);
        eval_expansion(&basis, &self.coeffs, &r, None) / geom.jacobian_det().sqrt()
    }

    pub fn gradient(&self, geom: &ElementGeometry, x: &[f64], out: &mut [f64]) {
        let basis = TensorBasis::new(geom.dim(), self.degree).expect("nonzero dimension");
        let r = geom.inverse_map(x);
        eval_expansion(&basis, &self.coeffs, &r, Some(out));
        let s = geom.jacobian_det().sqrt();
        for (g, hw) in out.iter_mut().zip(&geom.half_widths) {
            *g /= hw * s;
        }
    }
}

/// `Π_p f` on `geom` with the tensor rule built from `rule`.
pub fn l2_project<F>(f: F, geom: &ElementGeometry, degree: usize, rule: &QuadratureRule1D) -> Result<ProjectionCoeffs>
where
    F: Fn(&[f64]) -> f64,
{
    if rule.len() < degree + 1 {
        return Err(invalid(format!(
            "projection onto degree {degree} needs at least {} points per axis, got {}",
            degree + 1,
            rule.len()
        )));
    }
    let dim = geom.dim();
    let basis = TensorBasis::new(dim, degree)?;
    let trule = TensorRule::new(rule, dim);
    let mut coeffs = vec![0.0; basis.len()];
    let mut x = vec![0.0; dim];
    let sqrt_det = geom.jacobian_det().sqrt();
    for q in 0..trule.len() {
        let r = trule.point(q);
        geom.map_into(r, &mut x);
        let w = trule.weights[q] * f(&x) * sqrt_det;
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c += w * basis.eval(i, r)?.0;
        }
    }
    Ok(ProjectionCoeffs {
        element: geom.id,
        degree,
        coeffs,
    })
}

/// `‖f - Π_p f‖_{0,K}` and `‖f - Π_p f‖_{0,F}` for each face of `K` in the
/// order (axis 0 low, axis 0 high, axis 1 low, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionError {
    pub volume: f64,
    pub faces: Vec<f64>,
}

impl ProjectionError {
    /// `‖f - Π_p f‖_{0,∂K}`.
    pub fn boundary(&self) -> f64 {
        self.faces.iter().map(|e| e * e).sum::<f64>().sqrt()
    }
}

pub fn projection_error<F>(f: F, coeffs: &ProjectionCoeffs, geom: &ElementGeometry) -> Result<ProjectionError>
where
    F: Fn(&[f64]) -> f64,
{
    let dim = geom.dim();
    let n = coeffs.degree + 1 + ERROR_OVERINTEGRATION;
    let rule = gauss_legendre(n)?;
    let vrule = TensorRule::new(&rule, dim);
    let frule = TensorRule::new(&rule, dim - 1);
    let mut x = vec![0.0; dim];
    let mut volume = 0.0;
    for q in 0..vrule.len() {
        geom.map_into(vrule.point(q), &mut x);
        let e = f(&x) - coeffs.eval(geom, &x);
        volume += vrule.weights[q] * e * e;
    }
    volume *= geom.jacobian_det();

    let mut faces = Vec::with_capacity(2 * dim);
    let mut r = vec![0.0; dim];
    for axis in 0..dim {
        let face_det: f64 = (0..dim).filter(|&a| a != axis).map(|a| geom.half_widths[a]).product();
        for end in [-1.0, 1.0] {
            let mut sum = 0.0;
            for q in 0..frule.len() {
                let t = frule.point(q);
                let mut k = 0;
                for (a, slot) in r.iter_mut().enumerate() {
                    if a == axis {
                        *slot = end;
                    } else {
                        *slot = t[k];
                        k += 1;
                    }
                }
                geom.map_into(&r, &mut x);
                let e = f(&x) - coeffs.eval(geom, &x);
                sum += frule.weights[q] * e * e;
            }
            faces.push((sum * face_det).sqrt());
        }
    }
    Ok(ProjectionError {
        volume: volume.sqrt(),
        faces,
    })
}

/// Affine function matching a given function at both ends of `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineInterpolant {
    pub alpha: f64,
    pub beta: f64,
    pub value_alpha: f64,
    pub value_beta: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl AffineInterpolant {
    pub fn eval(&self, x: f64) -> f64 {
        // Two-point form so both endpoints are reproduced exactly.
        let t = (x - self.alpha) / (self.beta - self.alpha);
        (1.0 - t) * self.value_alpha + t * self.value_beta
    }
}

pub fn linear_interpolant<F: Fn(f64) -> f64>(f: F, alpha: f64, beta: f64) -> Result<AffineInterpolant> {
    check_interval(alpha, beta)?;
    let (fa, fb) = (f(alpha), f(beta));
    let slope = (fb - fa) / (beta - alpha);
    Ok(AffineInterpolant {
        alpha,
        beta,
        value_alpha: fa,
        value_beta: fb,
        slope,
        intercept: fa - slope * alpha,
    })
}

/// The quadratic bubble `w(x) = -(x - α)(x - β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bubble {
    pub alpha: f64,
    pub beta: f64,
}

impl Bubble {
    pub fn eval(&self, x: f64) -> f64 {
        -(x - self.alpha) * (x - self.beta)
    }
}

pub fn bubble_weight(alpha: f64, beta: f64) -> Result<Bubble> {
    check_interval(alpha, beta)?;
    Ok(Bubble { alpha, beta })
}

fn check_interval(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite() && alpha < beta) {
        return Err(invalid(format!("degenerate interval ({alpha}, {beta})")));
    }
    Ok(())
}

/// Interior sample points `α + (β - α) i / (n + 1)`, `i = 1..=n`.
fn interior_samples(alpha: f64, beta: f64, n: usize) -> impl Iterator<Item = f64> {
    let h = beta - alpha;
    (1..=n).map(move |i| alpha + h * i as f64 / (n + 1) as f64)
}

/// Sampled `sup |(f - I f) / sqrt(w)|` over the open interval.
pub fn weighted_interpolant_deficit<F: Fn(f64) -> f64>(f: F, alpha: f64, beta: f64, samples: usize) -> Result<f64> {
    if samples < 1000 {
        return Err(invalid("the deficit needs at least 1000 samples"));
    }
    let interp = linear_interpolant(&f, alpha, beta)?;
    let bubble = bubble_weight(alpha, beta)?;
    Ok(interior_samples(alpha, beta, samples)
        .map(|x| ((f(x) - interp.eval(x)) / bubble.eval(x).sqrt()).abs())
        .fold(0.0, f64::max))
}

/// Sampled `|f|_{W^{2,∞}(α, β)}` from an analytic second derivative.
pub fn w2_inf_seminorm<F: Fn(f64) -> f64>(second_derivative: F, alpha: f64, beta: f64, samples: usize) -> f64 {
    let n = samples.max(2);
    (0..n)
        .map(|i| alpha + (beta - alpha) * i as f64 / (n - 1) as f64)
        .map(|x| second_derivative(x).abs())
        .fold(0.0, f64::max)
}

/// Gram matrix `∫ weight(x) L̂_i'(x) L̂_j'(x) dx` on `(-1, 1)` for degrees `0..=p`.
fn derivative_gram<W: Fn(f64) -> f64>(degree: usize, weight: W) -> Result<DMatrix<f64>> {
    // Integrands have degree at most 2p; p + 2 points are exact for the
    // polynomial weights used here.
    let rule = gauss_legendre(degree + 2)?;
    let n = degree + 1;
    let mut gram = DMatrix::zeros(n, n);
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let ders: Vec<f64> = (0..n).map(|k| legendre_eval(k, x).1).collect();
        let wx = w * weight(x);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += wx * ders[i] * ders[j];
            }
        }
    }
    Ok(gram)
}

fn sqrt_largest_eigenvalue(gram: DMatrix<f64>) -> Result<f64> {
    if gram.iter().any(|v| !v.is_finite()) {
        return Err(DgError::Numerical("non-finite Gram matrix".into()));
    }
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 1000)
        .ok_or_else(|| DgError::Numerical("symmetric eigen-solve did not converge".into()))?;
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    Ok(max.sqrt())
}

/// `max |ξ|₁ / ‖ξ‖₀` over `ξ ∈ P_p(-1, 1)`.
///
/// The mass matrix is the identity in the orthonormal basis, so this is the
/// square root of the largest stiffness eigenvalue. On an interval of length
/// `h` the constant scales by `2 / h`.
pub fn measure_h1_inverse_constant(degree: usize) -> Result<f64> {
    if degree == 0 {
        return Ok(0.0);
    }
    sqrt_largest_eigenvalue(derivative_gram(degree, |_| 1.0)?)
}

/// `max ‖sqrt(w) ξ'‖₀ / ‖ξ‖₀` over `ξ ∈ P_p(-1, 1)` with `w = 1 - x²`.
///
/// This ratio is invariant under affine rescaling of the interval.
pub fn measure_bubble_inverse_constant(degree: usize) -> Result<f64> {
    if degree == 0 {
        return Ok(0.0);
    }
    sqrt_largest_eigenvalue(derivative_gram(degree, |x| 1.0 - x * x)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseKind {
    H1,
    Bubble,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseConstantReport {
    pub kind: InverseKind,
    pub degrees: Vec<usize>,
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log ratio` against `log(p + 1)` over `p ≥ 1`;
    /// `None` with fewer than two such degrees.
    pub fitted_slope: Option<f64>,
    /// `p²` for the `H¹` constant, `sqrt(p (p + 1))` for the bubble constant.
    pub reference: Vec<f64>,
}

pub fn inverse_constant_report(kind: InverseKind, degrees: &[usize]) -> Result<InverseConstantReport> {
    let mut degrees = degrees.to_vec();
    degrees.sort_unstable();
    degrees.dedup();
    let ratios = degrees
        .iter()
        .map(|&p| match kind {
            InverseKind::H1 => measure_h1_inverse_constant(p),
            InverseKind::Bubble => measure_bubble_inverse_constant(p),
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = degrees
        .iter()
        .map(|&p| {
            let pf = p as f64;
            match kind {
                InverseKind::H1 => pf * pf,
                InverseKind::Bubble => (pf * (pf + 1.0)).sqrt(),
            }
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = degrees
        .iter()
        .zip(&ratios)
        .filter(|(&p, _)| p >= 1)
        .map(|(&p, &r)| (p as f64 + 1.0, r))
        .unzip();
    let fitted_slope = if xs.len() >= 2 {
        Some(fit_loglog_slope(&xs, &ys)?)
    } else {
        None
    };
    Ok(InverseConstantReport {
        kind,
        degrees,
        ratios,
        fitted_slope,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn interval(a: f64, b: f64) -> ElementGeometry {
        ElementGeometry::from_bounds(0, vec![0], vec![(a, b)])
    }

    #[test]
    fn projection_examples() {
        let rule = gauss_legendre(4).unwrap();
        let k = interval(-1.0, 1.0);
        let c = l2_project(|x| x[0] * x[0], &k, 1, &rule).unwrap();
        // Π_1 x² = 1/3 on (-1, 1): the odd coefficient vanishes
        assert_abs_diff_eq!(c.coeffs[1], 0.0, epsilon = 1e-15);
        for x in [-0.8, 0.0, 0.5] {
            assert_abs_diff_eq!(c.eval(&k, &[x]), 1.0 / 3.0, epsilon = 1e-14);
        }

        let unit = interval(0.0, 1.0);
        let rule = gauss_legendre(12).unwrap();
        let c = l2_project(|x| (PI * x[0]).sin(), &unit, 0, &rule).unwrap();
        assert_abs_diff_eq!(c.eval(&unit, &[0.3]), 2.0 / PI, epsilon = 1e-13);

        assert!(l2_project(|x| x[0], &unit, 3, &gauss_legendre(3).unwrap()).is_err());
    }

    #[test]
    fn projection_reproduces_q_p() {
        let k = ElementGeometry::from_bounds(0, vec![0, 0], vec![(0.5, 0.75), (-1.0, 0.0)]);
        let f = |x: &[f64]| 1.0 + x[0] * x[0] * x[1] - 3.0 * x[1] * x[1] * x[0] * x[0];
        let c = l2_project(f, &k, 2, &gauss_legendre(3).unwrap()).unwrap();
        for x in [[0.6, -0.2], [0.51, -0.99], [0.7, -0.5]] {
            assert!((c.eval(&k, &x) - f(&x)).abs() <= 1e-12);
        }
        let err = projection_error(f, &c, &k).unwrap();
        assert!(err.volume <= 1e-11);
        assert!(err.faces.iter().all(|&e| e <= 1e-11));
        assert_eq!(err.faces.len(), 4);
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let k = ElementGeometry::from_bounds(0, vec![0, 0], vec![(0.0, 0.5), (0.25, 0.5)]);
        let f = |x: &[f64]| (3.0 * x[0]).exp() * (2.0 * x[1]).cos();
        let rule = gauss_legendre(8).unwrap();
        let c = l2_project(f, &k, 3, &rule).unwrap();
        let again = l2_project(|x| c.eval(&k, x), &k, 3, &rule).unwrap();
        for (a, b) in c.coeffs.iter().zip(&again.coeffs) {
            assert!((a - b).abs() <= 1e-12);
        }
        // (f - Π f, φ_i) on the projection rule
        let fine = TensorRule::new(&rule, 2);
        let basis = TensorBasis::new(2, 3).unwrap();
        let norm_f = c.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; 2];
        for i in 0..basis.len() {
            let mut s = 0.0;
            for q in 0..fine.len() {
                k.map_into(fine.point(q), &mut x);
                let phi = basis.eval(i, fine.point(q)).unwrap().0 / k.jacobian_det().sqrt();
                s += fine.weights[q] * k.jacobian_det() * (f(&x) - c.eval(&k, &x)) * phi;
            }
            assert!(s.abs() <= 1e-11 * norm_f, "mode {i}: {s}");
        }
    }

    #[test]
    fn monomial_error_scaling() {
        // f = x^{p+1} on (0, h): the local volume error scales like h^{p+3/2}
        let p = 2;
        let errs: Vec<f64> = [1.0, 0.5, 0.25]
            .iter()
            .map(|&h| {
                let k = interval(0.0, h);
                let f = |x: &[f64]| x[0].powi(p as i32 + 1);
                let c = l2_project(f, &k, p, &gauss_legendre(p + 3).unwrap()).unwrap();
                projection_error(f, &c, &k).unwrap().volume
            })
            .collect();
        for w in errs.windows(2) {
            assert_abs_diff_eq!((w[0] / w[1]).log2(), p as f64 + 1.5, epsilon = 1e-9);
        }
    }

    #[test]
    fn interpolant_examples() {
        let aff = linear_interpolant(|x| 2.0 - 3.0 * x, -1.0, 4.0).unwrap();
        for x in [-1.0, 0.3, 4.0] {
            assert_abs_diff_eq!(aff.eval(x), 2.0 - 3.0 * x, epsilon = 1e-14);
        }
        let sq = linear_interpolant(|x| x * x, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(sq.slope, 1.0);
        assert_abs_diff_eq!(sq.intercept, 0.0);
        let c = linear_interpolant(f64::cos, 0.0, PI / 2.0).unwrap();
        for x in [0.0, 0.4, 1.2] {
            assert_abs_diff_eq!(c.eval(x), 1.0 - 2.0 * x / PI, epsilon = 1e-15);
        }
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(PI / 2.0), (PI / 2.0).cos());
        assert!(linear_interpolant(f64::cos, 1.0, 1.0).is_err());
    }

    #[test]
    fn bubble_examples() {
        let h = 0.3;
        let w = bubble_weight(0.0, h).unwrap();
        assert_abs_diff_eq!(w.eval(h / 2.0), h * h / 4.0, epsilon = 1e-16);
        assert_eq!(w.eval(0.0), 0.0);
        assert_eq!(w.eval(h), 0.0);
        assert_eq!(bubble_weight(-1.0, 1.0).unwrap().eval(0.0), 1.0);
        assert!(bubble_weight(1.0, 0.0).is_err());
    }

    #[test]
    fn deficit_examples() {
        let d = weighted_interpolant_deficit(|x| 3.0 * x + 1.0, 0.0, 1.0, 4097).unwrap();
        assert!(d <= 1e-14);
        let d = weighted_interpolant_deficit(|x| x * x, 0.0, 1.0, DEFAULT_SUP_SAMPLES).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-12);
        for h in [0.5, 0.125, 1.0 / 64.0] {
            let d = weighted_interpolant_deficit(|x| x * x, 0.0, h, DEFAULT_SUP_SAMPLES).unwrap();
            assert_abs_diff_eq!(d, h / 2.0, epsilon = 1e-12);
        }
        assert!(weighted_interpolant_deficit(|x| x, 0.0, 1.0, 10).is_err());
    }

    #[test]
    fn deficit_is_bounded_by_second_derivative() {
        // |f - I f| <= ½ |f''|_∞ w, hence the deficit <= |f''|_∞ h / 4
        for h in [0.5, 0.1] {
            let d = weighted_interpolant_deficit(f64::exp, 0.5, 0.5 + h, 4097).unwrap();
            let bound = w2_inf_seminorm(f64::exp, 0.5, 0.5 + h, 4097) * h / 4.0;
            assert!(d <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn inverse_constant_examples() {
        assert_eq!(measure_h1_inverse_constant(0).unwrap(), 0.0);
        assert_abs_diff_eq!(measure_h1_inverse_constant(1).unwrap(), 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(measure_bubble_inverse_constant(0).unwrap(), 0.0);
        assert_abs_diff_eq!(measure_bubble_inverse_constant(1).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        for p in 0..=20 {
            let m = measure_bubble_inverse_constant(p).unwrap();
            let e = ((p * (p + 1)) as f64).sqrt();
            assert!((m - e).abs() <= 1e-8, "p={p}: {m} vs {e}");
        }
    }

    #[test]
    fn inverse_reports() {
        let r = inverse_constant_report(InverseKind::H1, &(2..=16).collect::<Vec<_>>()).unwrap();
        let slope = r.fitted_slope.unwrap();
        assert!((1.85..=2.10).contains(&slope), "slope {slope}");
        assert!(r.ratios.windows(2).all(|w| w[0] <= w[1]));
        let r = inverse_constant_report(InverseKind::Bubble, &[0]).unwrap();
        assert_eq!(r.ratios, vec![0.0]);
        assert_eq!(r.fitted_slope, None);
    }
}
