//! Axis-aligned tensor-product meshes of box domains.
//!
//! Elements are indexed with axis 0 varying fastest. Every element is the
//! image of the reference cube `(-1, 1)^d` under a diagonal affine map, so
//! all Jacobians are products of half-widths.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MAX_DIM: usize = 3;

/// The box `(a_1, b_1) x ... x (a_d, b_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub intervals: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() || intervals.len() > MAX_DIM {
            return Err(invalid(format!(
                "domain dimension must be in 1..={MAX_DIM}, got {}",
                intervals.len()
            )));
        }
        for &(a, b) in &intervals {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(format!("degenerate interval ({a}, {b})")));
            }
        }
        Ok(Self { intervals })
    }

    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(vec![(0.0, 1.0); dim])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry {
    pub id: usize,
    /// Grid position of the element, one entry per axis.
    pub grid_index: Vec<usize>,
    pub bounds: Vec<(f64, f64)>,
    pub half_widths: Vec<f64>,
    pub diameter: f64,
    pub volume: f64,
}

impl ElementGeometry {
    pub fn from_bounds(id: usize, grid_index: Vec<usize>, bounds: Vec<(f64, f64)>) -> Self {
        let half_widths: Vec<f64> = bounds.iter().map(|(a, b)| 0.5 * (b - a)).collect();
        let diameter = bounds.iter().map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        let volume = bounds.iter().map(|(a, b)| b - a).product();
        Self {
            id,
            grid_index,
            bounds,
            half_widths,
            diameter,
            volume,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Determinant of the affine map `Φ_K`.
    pub fn jacobian_det(&self) -> f64 {
        self.half_widths.iter().product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Longest over shortest edge.
    pub fn aspect_ratio(&self) -> f64 {
        let max = self.half_widths.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.half_widths.iter().cloned().fold(f64::MAX, f64::min);
        max / min
    }

    pub fn map_into(&self, reference: &[f64], out: &mut [f64]) {
        for (a, ((lo, hi), x)) in self.bounds.iter().zip(reference).enumerate() {
            out[a] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
        }
    }

    pub fn inverse_map(&self, physical: &[f64]) -> Vec<f64> {
        self.bounds
            .iter()
            .zip(physical)
            .map(|((lo, hi), x)| (2.0 * x - lo - hi) / (hi - lo))
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounds.iter().zip(x).all(|((lo, hi), v)| *lo <= *v && *v <= *hi)
    }
}

/// `Φ_K(x̂)`: reference point to physical point.
pub fn element_map(geom: &ElementGeometry, reference: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; geom.dim()];
    geom.map_into(reference, &mut out);
    out
}

/// One element adjacent to a face, with the outward normal `sign * e_axis`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceSide {
    pub element: usize,
    pub normal_sign: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub id: usize,
    /// Normal axis, zero-based.
    pub axis: usize,
    pub coordinate: f64,
    /// Tangential extents, one per axis other than `axis`, in axis order.
    pub tangential_bounds: Vec<(f64, f64)>,
    pub sides: Vec<FaceSide>,
    pub boundary: bool,
}

impl Face {
    pub fn normal(&self, side: usize, dim: usize) -> Vec<f64> {
        let mut n = vec![0.0; dim];
        n[self.axis] = self.sides[side].normal_sign;
        n
    }

    pub fn area(&self) -> f64 {
        self.tangential_bounds.iter().map(|(a, b)| b - a).product()
    }

    /// Index of `element` among the sides, if adjacent.
    pub fn side_of(&self, element: usize) -> Option<usize> {
        self.sides.iter().position(|s| s.element == element)
    }

    /// Physical point for reference tangential coordinates in `(-1, 1)^{d-1}`.
    pub fn map_into(&self, reference: &[f64], out: &mut [f64]) {
        let mut t = 0;
        for (a, o) in out.iter_mut().enumerate() {
            if a == self.axis {
                *o = self.coordinate;
            } else {
                let (lo, hi) = self.tangential_bounds[t];
                *o = 0.5 * (lo + hi) + 0.5 * (hi - lo) * reference[t];
                t += 1;
            }
        }
    }

    /// Jacobian of the tangential map (1 for a point face).
    pub fn jacobian_det(&self) -> f64 {
        self.tangential_bounds.iter().map(|(a, b)| 0.5 * (b - a)).product()
    }
}

/// Reference to a face from one of its elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalFace {
    pub face: usize,
    pub side: usize,
}

/// Portable mesh description: breakpoints per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshDescription {
    pub breakpoints: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct TensorMesh {
    breakpoints: Vec<Vec<f64>>,
    cells: Vec<usize>,
    elements: Vec<ElementGeometry>,
    faces: Vec<Face>,
    /// Per element, its `2d` faces ordered (axis 0 low, axis 0 high, axis 1 low, ...).
    element_faces: Vec<Vec<LocalFace>>,
}

/// Uniform partition of `domain` with `cells_per_axis[j]` cells along axis `j`.
pub fn build_mesh(domain: &BoxDomain, cells_per_axis: &[usize]) -> Result<TensorMesh> {
    let domain = BoxDomain::new(domain.intervals.clone())?;
    if cells_per_axis.len() != domain.dim() {
        return Err(invalid("cell counts do not match domain dimension"));
    }
    if cells_per_axis.contains(&0) {
        return Err(invalid("cell counts must be positive"));
    }
    let breakpoints = domain
        .intervals
        .iter()
        .zip(cells_per_axis)
        .map(|(&(a, b), &n)| {
            (0..=n)
                .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
                .collect()
        })
        .collect();
    TensorMesh::from_breakpoints(breakpoints)
}

impl TensorMesh {
    /// Builds a (possibly graded) mesh from strictly increasing breakpoints.
    pub fn from_breakpoints(breakpoints: Vec<Vec<f64>>) -> Result<Self> {
        let dim = breakpoints.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("mesh dimension must be in 1..={MAX_DIM}")));
        }
        for axis in &breakpoints {
            if axis.len() < 2 {
                return Err(invalid("each axis needs at least two breakpoints"));
            }
            if axis.iter().any(|x| !x.is_finite()) || axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("breakpoints must be finite and strictly increasing"));
            }
        }
        let cells: Vec<usize> = breakpoints.iter().map(|b| b.len() - 1).collect();
        let n_elements: usize = cells.iter().product();

        let elements: Vec<ElementGeometry> = (0..n_elements)
            .map(|id| {
                let grid = unflatten(id, &cells);
                let bounds = grid
                    .iter()
                    .enumerate()
                    .map(|(a, &i)| (breakpoints[a][i], breakpoints[a][i + 1]))
                    .collect();
                ElementGeometry::from_bounds(id, grid, bounds)
            })
            .collect();

        let mut faces = Vec::new();
        let mut element_faces = vec![vec![LocalFace { face: 0, side: 0 }; 2 * dim]; n_elements];
        for axis in 0..dim {
            // Faces normal to `axis` are indexed by the grid with `cells[axis] + 1`
            // positions along that axis.
            let mut counts = cells.clone();
            counts[axis] += 1;
            let n_faces: usize = counts.iter().product();
            for f in 0..n_faces {
                let pos = unflatten(f, &counts);
                let i = pos[axis];
                let tangential_bounds = (0..dim)
                    .filter(|&a| a != axis)
                    .map(|a| (breakpoints[a][pos[a]], breakpoints[a][pos[a] + 1]))
                    .collect();
                let mut sides = Vec::with_capacity(2);
                if i > 0 {
                    let mut g = pos.clone();
                    g[axis] = i - 1;
                    sides.push(FaceSide {
                        element: flatten(&g, &cells),
                        normal_sign: 1.0,
                    });
                }
                if i < cells[axis] {
                    sides.push(FaceSide {
                        element: flatten(&pos, &cells),
                        normal_sign: -1.0,
                    });
                }
                let id = faces.len();
                for (s, side) in sides.iter().enumerate() {
                    let slot = 2 * axis + usize::from(side.normal_sign > 0.0);
                    element_faces[side.element][slot] = LocalFace { face: id, side: s };
                }
                let boundary = sides.len() == 1;
                faces.push(Face {
                    id,
                    axis,
                    coordinate: breakpoints[axis][i],
                    tangential_bounds,
                    sides,
                    boundary,
                });
            }
        }

        Ok(Self {
            breakpoints,
            cells,
            elements,
            faces,
            element_faces,
        })
    }

    pub fn from_description(desc: &MeshDescription) -> Result<Self> {
        Self::from_breakpoints(desc.breakpoints.clone())
    }

    pub fn description(&self) -> MeshDescription {
        MeshDescription {
            breakpoints: self.breakpoints.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.breakpoints.len()
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells
    }

    pub fn breakpoints(&self) -> &[Vec<f64>] {
        &self.breakpoints
    }

    pub fn domain(&self) -> BoxDomain {
        BoxDomain {
            intervals: self
                .breakpoints
                .iter()
                .map(|b| (b[0], b[b.len() - 1]))
                .collect(),
        }
    }

    pub fn elements(&self) -> &[ElementGeometry] {
        &self.elements
    }

    pub fn element(&self, id: usize) -> &ElementGeometry {
        &self.elements[id]
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, id: usize) -> &Face {
        &self.faces[id]
    }

    pub fn element_faces(&self, element: usize) -> &[LocalFace] {
        &self.element_faces[element]
    }

    /// Largest element diameter.
    pub fn max_diameter(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(0.0, f64::max)
    }

    pub fn max_aspect_ratio(&self) -> f64 {
        self.elements.iter().map(|e| e.aspect_ratio()).fold(1.0, f64::max)
    }

    /// Element containing `x`; points on shared faces go to the upper element.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut grid = Vec::with_capacity(self.dim());
        for (a, bp) in self.breakpoints.iter().enumerate() {
            let v = x[a];
            if v < bp[0] || v > bp[bp.len() - 1] {
                return None;
            }
            let i = bp.partition_point(|&b| b <= v).saturating_sub(1);
            grid.push(i.min(self.cells[a] - 1));
        }
        Some(flatten(&grid, &self.cells))
    }
}

/// Complete face list of `mesh`.
pub fn enumerate_faces(mesh: &TensorMesh) -> Vec<Face> {
    mesh.faces().to_vec()
}

fn unflatten(mut index: usize, counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .map(|&n| {
            let i = index % n;
            index /= n;
            i
        })
        .collect()
}

fn flatten(pos: &[usize], counts: &[usize]) -> usize {
    pos.iter()
        .zip(counts)
        .rev()
        .fold(0, |acc, (&i, &n)| acc * n + i)
}
