//! Finite tight-binding models: geometry, Hamiltonians, disorder and Bloch
//! decompositions.

mod cell;
mod geometry;
mod model;
mod operator;

pub use cell::{BlochHamiltonian, CellModel, Hop};
pub use geometry::{Boundary, SiteGeometry};
pub use model::{
    add_disorder, bloch_hamiltonian, build_model, build_model_from_spec, CustomCell, CustomHop, DisorderKind,
    DisorderSpec, Family, Flux, Gauge, ModelSpec,
};
pub use operator::{position_operators, HermitianOperator, HERMITICITY_TOL};

pub(crate) use cell::grid_point;
pub(crate) use geometry::min_pairwise_distance;
