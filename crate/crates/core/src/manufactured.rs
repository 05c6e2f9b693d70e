//! Manufactured solutions with analytic gradients; the source `f` and the
//! inflow data `g_D` are derived from the exact solution.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dg::SmoothField;
use crate::error::{invalid, DgError, Result};
use crate::problem::{ConvectionField, ReactionData, ScalarFn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionCatalog {
    /// `Π_j sin(k π x_j)`
    SmoothSine,
    /// `Π_j q(x_j)` with `q(t) = Σ_{k ≤ m} t^k / (k + 1)`, a member of `Q_m`.
    PolyExact,
    /// `|x_1 - x_0|^γ Π_{j>1} exp(x_j)`
    SingularGamma,
}

impl SolutionCatalog {
    pub const ALL: [SolutionCatalog; 3] = [
        SolutionCatalog::SmoothSine,
        SolutionCatalog::PolyExact,
        SolutionCatalog::SingularGamma,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SolutionCatalog::SmoothSine => "smooth-sine",
            SolutionCatalog::PolyExact => "poly-exact",
            SolutionCatalog::SingularGamma => "singular-gamma",
        }
    }
}

impl FromStr for SolutionCatalog {
    type Err = DgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "singular-γ" | "singular" => Ok(SolutionCatalog::SingularGamma),
            _ => SolutionCatalog::ALL
                .iter()
                .find(|c| c.name() == s)
                .copied()
                .ok_or_else(|| invalid(format!("unknown solution '{s}'"))),
        }
    }
}

impl fmt::Display for SolutionCatalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ManufacturedSolution {
    pub kind: SolutionCatalog,
    pub dim: usize,
    field: SmoothField,
    /// Nominal elementwise Sobolev regularity `ℓ`; `None` for smooth solutions.
    pub regularity: Option<f64>,
    /// Largest polynomial degree per axis, for solutions in some `Q_m`.
    pub polynomial_degree: Option<usize>,
}

impl ManufacturedSolution {
    pub fn smooth_sine(dim: usize, frequency: f64) -> Self {
        let k = frequency * std::f64::consts::PI;
        let value = move |x: &[f64]| x.iter().map(|xi| (k * xi).sin()).product::<f64>();
        let gradient = move |x: &[f64], out: &mut [f64]| {
            for (a, o) in out.iter_mut().enumerate() {
                *o = x
                    .iter()
                    .enumerate()
                    .map(|(j, xj)| if j == a { k * (k * xj).cos() } else { (k * xj).sin() })
                    .product();
            }
        };
        Self {
            kind: SolutionCatalog::SmoothSine,
            dim,
            field: SmoothField::new(value, gradient),
            regularity: None,
            polynomial_degree: None,
        }
    }

    pub fn poly_exact(dim: usize, degree: usize) -> Self {
        let q = move |t: f64| (0..=degree).map(|k| t.powi(k as i32) / (k as f64 + 1.0)).sum::<f64>();
        let dq = move |t: f64| {
            (1..=degree)
                .map(|k| k as f64 * t.powi(k as i32 - 1) / (k as f64 + 1.0))
                .sum::<f64>()
        };
        let value = move |x: &[f64]| x.iter().map(|&t| q(t)).product::<f64>();
        let gradient = move |x: &[f64], out: &mut [f64]| {
            for (a, o) in out.iter_mut().enumerate() {
                *o = x
                    .iter()
                    .enumerate()
                    .map(|(j, &t)| if j == a { dq(t) } else { q(t) })
                    .product();
            }
        };
        Self {
            kind: SolutionCatalog::PolyExact,
            dim,
            field: SmoothField::new(value, gradient),
            regularity: None,
            polynomial_degree: Some(degree),
        }
    }

    /// `|x_1 - x_0|^γ Π_{j>1} exp(x_j)`, in `H^{γ + 1/2 - ε}` near `x_1 = x_0`.
    pub fn singular(dim: usize, gamma: f64, x0: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(invalid("the singular exponent must be positive"));
        }
        let gradient = move |x: &[f64], out: &mut [f64]| {
            let r = x[0] - x0;
            let smooth = x[1..].iter().map(|t| t.exp()).product::<f64>();
            let radial = r.abs().powf(gamma);
            out[0] = if r == 0.0 {
                0.0
            } else {
                gamma * r.abs().powf(gamma - 1.0) * r.signum() * smooth
            };
            for o in out[1..].iter_mut() {
                *o = radial * smooth;
            }
        };
        let value = move |x: &[f64]| {
            (x[0] - x0).abs().powf(gamma) * x[1..].iter().map(|t| t.exp()).product::<f64>()
        };
        Ok(Self {
            kind: SolutionCatalog::SingularGamma,
            dim,
            field: SmoothField::new(value, gradient),
            regularity: Some(gamma + 0.5),
            polynomial_degree: None,
        })
    }

    pub fn field(&self) -> &SmoothField {
        &self.field
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.field.eval(x)
    }

    /// `f = b·∇u + c u` and `g_D = u`.
    pub fn reaction_data(&self, b: &ConvectionField, c: ScalarFn, c_s: f64) -> Result<ReactionData> {
        if b.dim() != self.dim {
            return Err(invalid("field and solution dimensions differ"));
        }
        let field = self.field.clone();
        let b = b.clone();
        let c_f = c.clone();
        let f: ScalarFn = Arc::new(move |x: &[f64]| {
            let mut g = [0.0; 3];
            let mut bx = [0.0; 3];
            let d = x.len();
            <SmoothField as crate::dg::BrokenField>::gradient(&field, 0, x, &mut g[..d]);
            b.eval_into(x, &mut bx[..d]);
            let conv: f64 = (0..d).map(|a| bx[a] * g[a]).sum();
            conv + c_f(x) * field.eval(x)
        });
        let g_d = self.field.value_fn();
        ReactionData::from_arcs(c, f, g_d, c_s)
    }
}
