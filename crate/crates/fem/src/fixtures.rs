//! The two model sources on the unit disk and a coarse/fine mesh pair for
//! reconstructions without inverse crime.

use std::fmt;
use std::str::FromStr;

use accreg_core::noise::NoiseSpec;

use crate::assembly::{Coefficients, FemSystem};
use crate::blt::{simulate_measurements, BoundaryData};
use crate::error::{invalid, FemError, Result};
use crate::mesh::{disk_mesh_with, Mesh, Point, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    /// `f† = 1 + x₁ + x₂` on the square `|x₁|, |x₂| < 1/2`.
    Square,
    /// `f† = 1 + x₁ + x₂` on the disk of radius 0.1 at `(−1/2, 0)` and
    /// `exp(1 + x₁ + x₂)` on the one at `(1/2, 0)`.
    TwoDisks,
}

impl Example {
    pub fn region(self) -> Region {
        match self {
            Example::Square => Region::Square {
                center: [0.0, 0.0],
                half_width: 0.5,
            },
            Example::TwoDisks => Region::Union(vec![
                Region::Disk {
                    center: [-0.5, 0.0],
                    radius: 0.1,
                },
                Region::Disk {
                    center: [0.5, 0.0],
                    radius: 0.1,
                },
            ]),
        }
    }

    /// Ground-truth source; meaningful on `Ω₀` only.
    pub fn source(self, p: Point) -> f64 {
        let linear = 1.0 + p[0] + p[1];
        match self {
            Example::TwoDisks if p[0] > 0.0 => linear.exp(),
            _ => linear,
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::Square => "square",
            Example::TwoDisks => "two-disks",
        })
    }
}

impl FromStr for Example {
    type Err = FemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(Example::Square),
            "two-disks" => Ok(Example::TwoDisks),
            other => Err(invalid(format!(
                "unknown example {other:?}; expected one of: square, two-disks"
            ))),
        }
    }
}

/// Reconstruction system plus a finer measurement system.
#[derive(Debug, Clone)]
pub struct BltSetup {
    pub example: Example,
    pub coarse: FemSystem,
    pub fine: FemSystem,
}

impl BltSetup {
    /// Marks the example's `Ω₀` on both meshes and assembles them.
    pub fn from_meshes(
        example: Example,
        coarse: Mesh,
        fine: Mesh,
        coefficients: Coefficients,
    ) -> Result<Self> {
        let region = example.region();
        Ok(Self {
            example,
            coarse: FemSystem::assemble(coarse.mark_omega0(&region)?, coefficients.clone())?,
            fine: FemSystem::assemble(fine.mark_omega0(&region)?, coefficients)?,
        })
    }

    /// Disk meshes with `core`/`layers` cells for reconstruction and
    /// `fine_factor` times as many per direction for the measurements.
    pub fn disk(
        example: Example,
        core: usize,
        layers: usize,
        fine_factor: usize,
        coefficients: Coefficients,
    ) -> Result<Self> {
        if fine_factor < 2 {
            return Err(invalid("fine_factor must be at least 2"));
        }
        Self::from_meshes(
            example,
            disk_mesh_with(core, layers)?,
            disk_mesh_with(core * fine_factor, layers * fine_factor)?,
            coefficients,
        )
    }

    /// About 2.4k reconstruction nodes and 38k measurement nodes.
    pub fn desk(example: Example) -> Result<Self> {
        Self::disk(example, 28, 14, 4, Coefficients::tissue())
    }

    /// `f†` on the reconstruction mesh's `Ω₀` nodes.
    pub fn f_true(&self) -> Vec<f64> {
        let mesh = self.coarse.mesh();
        mesh.omega0_nodes()
            .iter()
            .map(|&i| self.example.source(mesh.nodes()[i]))
            .collect()
    }

    /// Dark-environment measurements (`g⁻ = 0`).
    pub fn measurements(&self, noise: &NoiseSpec) -> Result<BoundaryData> {
        let example = self.example;
        simulate_measurements(&self.fine, &self.coarse, |p| example.source(p), 0.0, noise)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in [Example::Square, Example::TwoDisks] {
            assert_eq!(e.to_string().parse::<Example>().unwrap(), e);
        }
        assert!("three".parse::<Example>().is_err());
    }

    #[test]
    fn two_disk_source() {
        let e = Example::TwoDisks;
        assert!(e.region().contains([0.55, 0.0]) && !e.region().contains([0.0, 0.0]));
        assert!((e.source([0.5, 0.0]) - 1.5f64.exp()).abs() < 1e-15);
        assert_eq!(e.source([-0.5, 0.0]), 0.5);
    }
}
