//! Multi-parametric linear programming over a right-hand-side parameter box.
//!
//! The partitioner splits the box into critical regions, each carrying affine
//! primal and dual maps. Degenerate optima are handled with pseudoinverses;
//! multiple optima with lexicographic objectives, a random equivalent cost
//! vector, or a norm-minimizing auxiliary QP.

pub mod face_geometry;
pub mod fba_adapter;
pub mod fixtures;
pub mod lp_engine;
pub mod mpp_core;
pub mod sparse_linalg;
pub mod tol;

pub use tol::Tolerances;
