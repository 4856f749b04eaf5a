//! Pseudo-Verlet list neighbour interactions between pairs of cells.
//!
//! Particles of two adjacent cells are projected on the axis joining the cell
//! centres and sorted, so each particle only inspects the candidates whose
//! axial gap is below its cut-off. On top of the scalar sweep this crate
//! provides the lane-parallel variant (single-precision SoA caches, per-pair
//! loop bounds, masked lane blocks with one accumulator flush per particle),
//! an O(N^2) oracle and the `test27cells` benchmark harness.
//!
//! Geometry and the scalar paths are generic over [`Real`] (`f32`/`f64`);
//! the aliases below fix the usual choice of double-precision particles with
//! single-precision caches.

pub mod bench;
pub mod cache;
pub mod error;
pub mod geometry;
pub mod kernel;
pub mod lanes;
pub mod num;
pub mod oracle;
pub mod scalar;
pub mod setup;
pub mod trace;

pub use error::{Error, Result};
pub use geometry::{
    make_direction_set, project, sort_cell, Cell, CellPairDirection, PairKind, Particle, SortedProjection,
};
pub use kernel::{CubicFalloff, Kernel};
pub use lanes::{pair_interact_vectorised, pair_interact_vectorised_in, LaneWidth, LaneWorkspace};
pub use num::Real;
pub use oracle::{brute_force_reference, compare, PairStatistics};
pub use scalar::{naive_pair, pseudo_verlet_scalar, InteractionBounds};

pub type Particle64 = Particle<f64>;
pub type Cell64 = Cell<f64>;
pub type Direction64 = CellPairDirection<f64>;
pub type SortedProjection64 = SortedProjection<f64>;
pub type ParticleCache32 = cache::ParticleCache<f32>;
pub type Block64 = setup::Block<f64>;
