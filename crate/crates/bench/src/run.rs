//! Executing a config: one reconstruction per (δ′, sweep value, method).

use accreg_core::noise::NoiseSpec;
use accreg_core::solvers::{Method, SchemeParams, Solver, StopReason, StoppingRule};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, SweepParameter};
use crate::error::{BenchError, Result};
use crate::problem::{NoisyData, Problem};

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub method: Method,
    pub delta_prime: f64,
    pub delta: f64,
    pub tau: f64,
    pub params: SchemeParams,
    pub sweep: Option<(SweepParameter, f64)>,
    pub k_star: usize,
    pub e_kstar: Option<f64>,
    pub stopped_by: StopReason,
    pub error_history: Vec<f64>,
    pub residual_history: Vec<f64>,
}

impl Record {
    /// The step length the method actually uses: `Δt`, or `ω` for the
    /// ν-method and Nesterov.
    pub fn step(&self) -> f64 {
        match self.method {
            Method::Nu | Method::Nesterov => self.params.omega,
            _ => self.params.dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
    /// Replaces `noise.seed` when set.
    pub seed: Option<u64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Job {
    data: usize,
    method: Method,
    params: SchemeParams,
    tau: f64,
    sweep: Option<(SweepParameter, f64)>,
}

fn plan(cfg: &ExperimentConfig) -> Result<Vec<Job>> {
    let solver = cfg.solver()?;
    let methods = solver.parsed_methods()?;
    let sweep_points: Vec<Option<(SweepParameter, f64)>> = match &cfg.sweep {
        Some(sw) => sw.values.iter().map(|v| Some((sw.parameter, *v))).collect(),
        None => vec![None],
    };
    let mut jobs = Vec::new();
    for data in 0..cfg.noise()?.levels.len() {
        for &sweep in &sweep_points {
            for &method in &methods {
                let mut params = solver.params_for(method);
                let mut tau = cfg.stopping.tau;
                if let Some((p, v)) = sweep {
                    match p {
                        SweepParameter::Tau => tau = v,
                        SweepParameter::Dt => params.dt = v,
                        SweepParameter::S => params.s = v,
                        SweepParameter::Nu => params.nu = v,
                        SweepParameter::Alpha => params.alpha = v,
                        SweepParameter::Omega => params.omega = v,
                    }
                }
                jobs.push(Job {
                    data,
                    method,
                    params,
                    tau,
                    sweep,
                });
            }
        }
    }
    Ok(jobs)
}

/// Runs every configured reconstruction. Records come back in declaration
/// order (noise level, then sweep value, then method) whatever the number
/// of workers.
pub fn run_config(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<Record>> {
    cfg.validate_run()?;
    let jobs = plan(cfg)?;
    let problem = Problem::build(cfg.problem()?)?;
    let noise = cfg.noise()?;
    let seed = opts.seed.unwrap_or(noise.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot start {} workers: {e}", opts.workers)))?;
    pool.install(|| {
        let data: Vec<NoisyData> = noise
            .levels
            .par_iter()
            .map(|&level| problem.data(&NoiseSpec::new(level, seed)?))
            .collect::<Result<_>>()?;
        let f0 = vec![cfg.problem()?.initial_guess; problem.f_true().len()];
        let admissibility = cfg.solver()?.admissibility();
        jobs.par_iter()
            .map(|job| {
                let d = &data[job.data];
                let op = problem.operator();
                let stop = StoppingRule::Discrepancy {
                    tau: job.tau,
                    delta: d.delta,
                    max_iter: cfg.stopping.max_iter,
                };
                let rec = Solver::new(job.method, job.params, op, admissibility)?.run(
                    &d.y_delta,
                    &f0,
                    stop,
                    Some(problem.f_true()),
                )?;
                Ok(Record {
                    method: job.method,
                    delta_prime: d.delta_prime,
                    delta: d.delta,
                    tau: job.tau,
                    params: job.params,
                    sweep: job.sweep,
                    k_star: rec.k_star,
                    e_kstar: rec.final_error(),
                    stopped_by: rec.stopped_by,
                    error_history: rec.error_history,
                    residual_history: rec.residual_history,
                })
            })
            .collect()
    })
}

/// True when there is at least one record and every one diverged.
pub fn only_divergence(records: &[Record]) -> bool {
    !records.is_empty()
        && records
            .iter()
            .all(|r| r.stopped_by == StopReason::Divergence)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECTRAL: &str = r#"
[problem]
kind = "spectral"
n = 50
sigma_min = 1e-3
mu = 0.5

[solver]
methods = ["landweber", "arm"]
dt = 1.0

[noise]
levels = [0.0, 0.01]
seed = 4

[stopping]
tau = 2.0
max_iter = 300

[sweep]
parameter = "s"
values = [0.5, 1.0]
"#;

    #[test]
    fn records_follow_declaration_order() {
        let cfg = ExperimentConfig::parse(SPECTRAL).unwrap();
        let one = run_config(&cfg, &RunOptions::default()).unwrap();
        let many = run_config(
            &cfg,
            &RunOptions {
                workers: 3,
                seed: None,
            },
        )
        .unwrap();
        assert_eq!(one, many);
        assert_eq!(one.len(), 8);
        let keys: Vec<(f64, f64, Method)> = one
            .iter()
            .map(|r| (r.delta_prime, r.params.s, r.method))
            .collect();
        assert_eq!(keys[0], (0.0, 0.5, Method::Landweber));
        assert_eq!(keys[1], (0.0, 0.5, Method::Arm));
        assert_eq!(keys[2], (0.0, 1.0, Method::Landweber));
        assert_eq!(keys[7], (0.01, 1.0, Method::Arm));
    }

    #[test]
    fn exact_data_errors_keep_falling() {
        let cfg = ExperimentConfig::parse(SPECTRAL).unwrap();
        let recs = run_config(&cfg, &RunOptions::default()).unwrap();
        let exact: Vec<&Record> = recs.iter().filter(|r| r.delta_prime == 0.0).collect();
        for r in exact {
            assert_eq!(r.stopped_by, StopReason::MaxIter);
            let e = &r.error_history;
            assert!(
                e[e.len() - 1] < 0.2 * e[0],
                "{}: {} -> {}",
                r.method,
                e[0],
                e[e.len() - 1]
            );
        }
    }

    #[test]
    fn seed_override_changes_noise() {
        let cfg = ExperimentConfig::parse(SPECTRAL).unwrap();
        let a = run_config(&cfg, &RunOptions::default()).unwrap();
        let b = run_config(
            &cfg,
            &RunOptions {
                workers: 1,
                seed: Some(5),
            },
        )
        .unwrap();
        assert_eq!(a[0], b[0]);
        assert_ne!(a[7].delta, b[7].delta);
    }
}
