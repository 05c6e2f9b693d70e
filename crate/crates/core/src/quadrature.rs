//! Gauss–Legendre rules and the orthonormal Legendre tensor basis on the
//! reference cube `(-1, 1)^d`.

use crate::error::{invalid, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// An `n`-point Gauss–Legendre rule on `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f` on the interval `(a, b)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

/// Classical Legendre polynomial `P_n(x)` and its derivative by the
/// three-term recurrence.
fn legendre_classical(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // P'_{k+1} = P'_{k-1} + (2k+1) P_k
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Computes the `n`-point Gauss–Legendre rule by Newton iteration on `P_n`
/// started from Chebyshev points.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule1D> {
    if n == 0 {
        return Err(invalid("Gauss-Legendre rule needs at least one point"));
    }
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // Only the nonnegative half is iterated; the rest follows by symmetry.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_classical(n, x);
            let dx = p / d;
            x -= dx;
            deriv = d;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        let (_, d) = legendre_classical(n, x);
        if d != 0.0 {
            deriv = d;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(QuadratureRule1D { nodes, weights })
}

/// Value and derivative of the orthonormal Legendre polynomial
/// `sqrt((2k+1)/2) P_k` at `x`.
pub fn legendre_eval(k: usize, x: f64) -> (f64, f64) {
    let scale = ((2 * k + 1) as f64 / 2.0).sqrt();
    let (p, d) = legendre_classical(k, x);
    (scale * p, scale * d)
}

/// Values and derivatives of all orthonormal Legendre polynomials of degree
/// `0..=degree` at `x`, written into `values` and `derivs`.
pub fn legendre_all(degree: usize, x: f64, values: &mut [f64], derivs: &mut [f64]) {
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    values[0] = std::f64::consts::FRAC_1_SQRT_2;
    derivs[0] = 0.0;
    for k in 1..=degree {
        let scale = ((2 * k + 1) as f64 / 2.0).sqrt();
        values[k] = scale * p;
        derivs[k] = scale * d;
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
}

/// Tensor products of orthonormal Legendre polynomials spanning `Q_p` on
/// `(-1, 1)^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorBasis {
    dim: usize,
    degree: usize,
}

impl TensorBasis {
    pub fn new(dim: usize, degree: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("basis dimension must be positive"));
        }
        Ok(Self { dim, degree })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of basis functions, `(p+1)^d`.
    pub fn len(&self) -> usize {
        (self.degree + 1).pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Maps a flat index to its multi-index; axis 0 varies fastest.
    pub fn multi_index(&self, index: usize) -> Result<Vec<usize>> {
        if index >= self.len() {
            return Err(invalid(format!(
                "basis index {index} out of range for {} functions",
                self.len()
            )));
        }
        let n = self.degree + 1;
        let mut rest = index;
        Ok((0..self.dim)
            .map(|_| {
                let k = rest % n;
                rest /= n;
                k
            })
            .collect())
    }

    pub fn flat_index(&self, multi: &[usize]) -> Result<usize> {
        if multi.len() != self.dim || multi.iter().any(|&k| k > self.degree) {
            return Err(invalid(format!("multi-index {multi:?} not in basis")));
        }
        let n = self.degree + 1;
        Ok(multi.iter().rev().fold(0, |acc, &k| acc * n + k))
    }

    /// Value and reference-coordinate gradient of basis function `index`.
    pub fn eval(&self, index: usize, point: &[f64]) -> Result<(f64, Vec<f64>)> {
        if point.len() != self.dim {
            return Err(invalid("point dimension does not match basis"));
        }
        let multi = self.multi_index(index)?;
        let factors: Vec<(f64, f64)> = multi
            .iter()
            .zip(point)
            .map(|(&k, &x)| legendre_eval(k, x))
            .collect();
        let value = factors.iter().map(|f| f.0).product();
        let gradient = (0..self.dim)
            .map(|a| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(j, f)| if j == a { f.1 } else { f.0 })
                    .product()
            })
            .collect();
        Ok((value, gradient))
    }
}

/// Free-function form of [`TensorBasis::eval`].
pub fn tensor_basis_eval(basis: &TensorBasis, index: usize, point: &[f64]) -> Result<(f64, Vec<f64>)> {
    basis.eval(index, point)
}

/// One-dimensional Legendre values and derivatives tabulated at a set of
/// points: `values[k][q]`, `derivs[k][q]`.
#[derive(Debug, Clone)]
pub struct Tabulation1D {
    pub values: Vec<Vec<f64>>,
    pub derivs: Vec<Vec<f64>>,
}

impl Tabulation1D {
    pub fn new(degree: usize, points: &[f64]) -> Self {
        let mut values = vec![vec![0.0; points.len()]; degree + 1];
        let mut derivs = vec![vec![0.0; points.len()]; degree + 1];
        for (q, &x) in points.iter().enumerate() {
            for k in 0..=degree {
                let (v, d) = legendre_eval(k, x);
                values[k][q] = v;
                derivs[k][q] = d;
            }
        }
        Self { values, derivs }
    }
}

/// Tensor-product Gauss rule on `(-1, 1)^m` (with `m` possibly zero, for the
/// faces of a 1D element).
#[derive(Debug, Clone)]
pub struct TensorRule {
    /// `points[q * m + a]` is coordinate `a` of point `q`.
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `indices[q * m + a]`: 1D node index of point `q` along axis `a`.
    pub indices: Vec<usize>,
    pub dim: usize,
}

impl TensorRule {
    pub fn new(rule: &QuadratureRule1D, dim: usize) -> Self {
        let n = rule.len();
        let count = n.pow(dim as u32);
        let mut points = Vec::with_capacity(count * dim);
        let mut weights = Vec::with_capacity(count);
        let mut indices = Vec::with_capacity(count * dim);
        for q in 0..count {
            let mut rest = q;
            let mut w = 1.0;
            for _ in 0..dim {
                let i = rest % n;
                rest /= n;
                points.push(rule.nodes()[i]);
                indices.push(i);
                w *= rule.weights()[i];
            }
            weights.push(w);
        }
        Self {
            points,
            weights,
            indices,
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, q: usize) -> &[f64] {
        &self.points[q * self.dim..(q + 1) * self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Exact integral of x^k over (-1, 1).
    fn monomial_integral(k: usize) -> f64 {
        if k % 2 == 1 {
            0.0
        } else {
            2.0 / (k as f64 + 1.0)
        }
    }

    #[test]
    fn rejects_zero_points() {
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn small_rules() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_abs_diff_eq!(r1.weights()[0], 2.0, epsilon = 1e-15);

        let r2 = gauss_legendre(2).unwrap();
        assert_abs_diff_eq!(r2.nodes()[1], 0.5773502691896258, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes()[0], -0.5773502691896258, epsilon = 1e-15);
        for w in r2.weights() {
            assert_abs_diff_eq!(*w, 1.0, epsilon = 1e-14);
        }

        let r3 = gauss_legendre(3).unwrap();
        assert_abs_diff_eq!(r3.nodes()[1], 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(r3.nodes()[2], 0.7745966692414834, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.weights()[1], 8.0 / 9.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r3.weights()[0], 5.0 / 9.0, epsilon = 1e-14);
    }

    #[test]
    fn exactness_on_monomials_up_to_twenty_points() {
        for n in 1..=20 {
            let rule = gauss_legendre(n).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 2.0).abs() <= 1e-13, "n={n}: weight sum {total}");
            for w in rule.nodes().windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..n {
                assert_abs_diff_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i], epsilon = 1e-15);
            }
            for k in 0..2 * n {
                let exact = monomial_integral(k);
                let approx = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                let scale = exact.abs().max(1.0);
                assert!(
                    (approx - exact).abs() <= 1e-13 * scale,
                    "n={n} k={k}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn legendre_values() {
        let (v, d) = legendre_eval(0, 0.3);
        assert_abs_diff_eq!(v, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(d, 0.0);
        assert_abs_diff_eq!(legendre_eval(1, 1.0).0, 1.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(legendre_eval(4, 1.0).1, 4.5f64.sqrt() * 10.0, epsilon = 1e-12);
    }

    #[test]
    fn legendre_all_matches_single_evaluations() {
        let mut v = [0.0; 9];
        let mut d = [0.0; 9];
        for x in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            legendre_all(8, x, &mut v, &mut d);
            for k in 0..=8 {
                let (lv, ld) = legendre_eval(k, x);
                assert_abs_diff_eq!(v[k], lv, epsilon = 1e-13);
                assert_abs_diff_eq!(d[k], ld, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn tensor_basis_examples() {
        let b = TensorBasis::new(2, 3).unwrap();
        assert_eq!(b.len(), 16);
        let (v, g) = b.eval(0, &[0.2, -0.7]).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-15);
        assert_eq!(g, vec![0.0, 0.0]);
        let idx = b.flat_index(&[1, 1]).unwrap();
        assert_abs_diff_eq!(b.eval(idx, &[1.0, 1.0]).unwrap().0, 1.5, epsilon = 1e-14);
        assert!(b.eval(16, &[0.0, 0.0]).is_err());

        let b1 = TensorBasis::new(1, 5).unwrap();
        for k in 0..=5 {
            let (v, g) = b1.eval(k, &[0.37]).unwrap();
            let (lv, ld) = legendre_eval(k, 0.37);
            assert_eq!(v, lv);
            assert_eq!(g[0], ld);
        }
    }

    #[test]
    fn multi_index_roundtrip() {
        let b = TensorBasis::new(3, 2).unwrap();
        for i in 0..b.len() {
            let m = b.multi_index(i).unwrap();
            assert_eq!(b.flat_index(&m).unwrap(), i);
        }
    }

    #[test]
    fn discrete_orthonormality() {
        for dim in 1..=3 {
            for p in 0..=4 {
                let basis = TensorBasis::new(dim, p).unwrap();
                let rule = TensorRule::new(&gauss_legendre(p + 1).unwrap(), dim);
                let vals: Vec<Vec<f64>> = (0..basis.len())
                    .map(|i| {
                        (0..rule.len())
                            .map(|q| basis.eval(i, rule.point(q)).unwrap().0)
                            .collect()
                    })
                    .collect();
                for i in 0..basis.len() {
                    for j in 0..basis.len() {
                        let g: f64 = (0..rule.len())
                            .map(|q| rule.weights[q] * vals[i][q] * vals[j][q])
                            .sum();
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!((g - expected).abs() <= 1e-12, "d={dim} p={p} ({i},{j}) {g}");
                    }
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let basis = TensorBasis::new(3, 4).unwrap();
        let step = 1e-6;
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-0.99..0.99)).collect();
            let i = rng.random_range(0..basis.len());
            let (_, g) = basis.eval(i, &x).unwrap();
            for a in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[a] += step;
                xm[a] -= step;
                let fd = (basis.eval(i, &xp).unwrap().0 - basis.eval(i, &xm).unwrap().0) / (2.0 * step);
                assert!((fd - g[a]).abs() <= 1e-6, "fd {fd} vs {}", g[a]);
            }
        }
    }
}
