//! Forward problems a config can describe, with their noisy data.

use accreg_core::linop::{DiagonalOperator, LinearOperator};
use accreg_core::noise::{add_uniform_noise, NoiseSpec};
use accreg_core::spectral::RateProblem;
use accreg_fem::io::read_mesh;
use accreg_fem::{BltOperator, BltSetup, MatrixOperator};

use crate::config::{ProblemConfig, ProblemKind};
use crate::error::{config_err, Result};

pub enum Problem {
    /// `K = diag(σ)` with `f†_j = σ_j^{2μ}/√n`.
    Spectral {
        op: DiagonalOperator,
        f_true: Vec<f64>,
        y: Vec<f64>,
    },
    /// Bioluminescence source problem on a disk, `K` held as a dense matrix.
    Blt {
        setup: Box<BltSetup>,
        op: MatrixOperator,
        f_true: Vec<f64>,
    },
}

/// Noisy data `y^δ` and its noise level `δ = ‖y^δ − y‖`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyData {
    pub delta_prime: f64,
    pub y_delta: Vec<f64>,
    pub delta: f64,
}

impl Problem {
    pub fn build(cfg: &ProblemConfig) -> Result<Self> {
        match cfg.kind {
            ProblemKind::Spectral => {
                let n = cfg
                    .n
                    .ok_or_else(|| config_err("problem.n", "required for spectral problems"))?;
                let mu = cfg.mu.unwrap_or(0.5);
                let sigma = RateProblem::log_spectrum(
                    n,
                    cfg.sigma_max.unwrap_or(1.0),
                    cfg.sigma_min.unwrap_or(1e-6),
                    1.0,
                    1.0,
                )?
                .sigma;
                let v = 1.0 / (n as f64).sqrt();
                let f_true: Vec<f64> = sigma.iter().map(|s| s.powf(2.0 * mu) * v).collect();
                let y = sigma.iter().zip(&f_true).map(|(s, f)| s * f).collect();
                Ok(Problem::Spectral {
                    op: DiagonalOperator::new(sigma)?,
                    f_true,
                    y,
                })
            }
            ProblemKind::Blt => {
                let example = cfg.example()?;
                let coeff = cfg
                    .coefficients
                    .clone()
                    .unwrap_or_default()
                    .to_coefficients();
                let mesh = cfg.mesh.clone().unwrap_or_default();
                let setup = match (&mesh.coarse, &mesh.fine) {
                    (Some(c), Some(f)) => {
                        BltSetup::from_meshes(example, read_mesh(c)?, read_mesh(f)?, coeff)?
                    }
                    _ => BltSetup::disk(example, mesh.core, mesh.layers, mesh.fine_factor, coeff)?,
                };
                let op = MatrixOperator::from_operator(&BltOperator::new(&setup.coarse)?)?;
                let f_true = setup.f_true();
                Ok(Problem::Blt {
                    setup: Box::new(setup),
                    op,
                    f_true,
                })
            }
        }
    }

    pub fn operator(&self) -> &dyn LinearOperator {
        match self {
            Problem::Spectral { op, .. } => op,
            Problem::Blt { op, .. } => op,
        }
    }

    pub fn f_true(&self) -> &[f64] {
        match self {
            Problem::Spectral { f_true, .. } | Problem::Blt { f_true, .. } => f_true,
        }
    }

    /// Spectral data get the multiplicative noise directly; BLT data get
    /// it on the boundary flux before the data field is formed.
    pub fn data(&self, noise: &NoiseSpec) -> Result<NoisyData> {
        let (y_delta, delta) = match self {
            Problem::Spectral { op, y, .. } => {
                let y_delta = add_uniform_noise(y, noise);
                let diff: Vec<f64> = y_delta.iter().zip(y).map(|(a, b)| a - b).collect();
                let delta = op.data_metric().norm(&diff);
                (y_delta, delta)
            }
            Problem::Blt { setup, .. } => {
                let data = setup.measurements(noise)?;
                let y_delta = BltOperator::cold(&setup.coarse)?.data_field(&data.g1, &data.g2)?;
                (y_delta, data.delta)
            }
        };
        Ok(NoisyData {
            delta_prime: noise.relative_level(),
            y_delta,
            delta,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn spectral_problem_is_consistent() {
        let cfg =
            ExperimentConfig::parse("[problem]\nkind = \"spectral\"\nn = 5\nmu = 0.5\n").unwrap();
        let p = Problem::build(cfg.problem().unwrap()).unwrap();
        let exact = p.data(&NoiseSpec::new(0.0, 0).unwrap()).unwrap();
        assert_eq!(exact.delta, 0.0);
        let kf = p.operator().apply(p.f_true()).unwrap();
        assert_eq!(kf, exact.y_delta);
        let noisy = p.data(&NoiseSpec::new(0.1, 0).unwrap()).unwrap();
        let y_norm = p.operator().data_metric().norm(&kf);
        assert!(noisy.delta > 0.0 && noisy.delta <= 0.1 * y_norm);
    }
}
