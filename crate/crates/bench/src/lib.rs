//! Shared setup for the benchmarks.

use std::sync::Arc;

use hpdg::manufactured::ManufacturedSolution;
use hpdg::{build_mesh, BoxDomain, ConvectionField, FieldCatalog, ReactionData, TensorMesh};

pub struct Problem {
    pub b: ConvectionField,
    pub data: ReactionData,
    pub mesh: Arc<TensorMesh>,
}

/// Smooth manufactured problem on the unit box with `cells` per axis.
pub fn problem(field: FieldCatalog, dim: usize, cells: usize) -> Problem {
    let (b, c) = field.build(dim).expect("catalog field");
    let u = ManufacturedSolution::smooth_sine(dim, 1.0);
    let data = u.reaction_data(&b, c, 1.0).expect("reaction data");
    let mesh = Arc::new(build_mesh(&BoxDomain::unit(dim).unwrap(), &vec![cells; dim]).unwrap());
    Problem { b, data, mesh }
}
