//! P1 finite elements for the diffusion model of bioluminescence
//! tomography: meshes, assembly, boundary value solves and the boundary
//! source operator `K = K_D − K_N` with its adjoint.

pub mod assembly;
pub mod blt;
pub mod cg;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod mesh;

pub use assembly::{Coefficients, FemSystem, Field};
pub use blt::{
    reconstruct, reconstruct_with, relative_error, simulate_measurements, transfer_boundary,
    BltOperator, BoundaryData, MassMetric, MatrixOperator, MeshCheck, Reconstruction,
};
pub use error::{FemError, Result};
pub use fixtures::{BltSetup, Example};
pub use mesh::{disk_mesh, disk_mesh_with, Mesh, Point, Region};
