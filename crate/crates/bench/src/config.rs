//! Experiment configuration files.
//!
//! A config is a TOML document with these tables, each optional unless a
//! command needs it:
//!
//! ```toml
//! name = "square source, tau sweep"
//!
//! [problem]
//! kind = "blt"              # "blt" or "spectral"
//! example = "square"        # blt: "square" or "two-disks"
//! initial_guess = 1.0       # constant f0
//!
//! [problem.mesh]            # blt: disk meshes (these are the defaults)
//! core = 28
//! layers = 14
//! fine_factor = 4
//!
//! [problem.coefficients]    # blt: optical parameters (defaults shown)
//! mu_a = 0.04
//! mu_s_prime = 1.5
//! robin_a = 3.2
//!
//! [solver]
//! methods = ["arm"]         # arm, msvm, landweber, nu, nesterov
//! s = 1.0
//! dt = 0.125
//! admissibility = "unchecked"
//!
//! [solver.per_method.landweber]  # overrides of s, dt, nu, alpha, omega
//! dt = 0.01
//!
//! [noise]
//! levels = [0.05]           # relative levels δ′
//! seed = 1
//!
//! [stopping]
//! tau = 1.0
//! max_iter = 5000
//!
//! [sweep]
//! parameter = "tau"         # tau, dt, s, nu, alpha, omega
//! values = [0.5, 1.0, 2.0]
//!
//! [output]
//! csv = "results/tau.csv"
//! series = "results/tau_series.csv"
//! ```
//!
//! Spectral problems replace the BLT keys with `n`, `sigma_max`,
//! `sigma_min` and `mu`: `n` log-spaced singular values and a ground truth
//! with `f† = (K*K)^μ v`, `v` flat and of unit norm. Rate studies use a
//! `[rates]` table instead; see [`RatesConfig`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use accreg_core::solvers::{Admissibility, Method, SchemeParams};
use accreg_fem::{Coefficients, Example};
use serde::Deserialize;

use crate::error::{config_err, BenchError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: Option<String>,
    pub problem: Option<ProblemConfig>,
    pub solver: Option<SolverConfig>,
    pub noise: Option<NoiseConfig>,
    #[serde(default)]
    pub stopping: StoppingConfig,
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    pub rates: Option<RatesConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Spectral,
    Blt,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    #[serde(default)]
    pub initial_guess: f64,
    pub example: Option<String>,
    pub mesh: Option<MeshConfig>,
    pub coefficients: Option<CoefficientsConfig>,
    pub n: Option<usize>,
    pub sigma_max: Option<f64>,
    pub sigma_min: Option<f64>,
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "default_core")]
    pub core: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_fine_factor")]
    pub fine_factor: usize,
    /// Mesh files; when given they replace the generated disk meshes.
    pub coarse: Option<PathBuf>,
    pub fine: Option<PathBuf>,
}

fn default_core() -> usize {
    28
}

fn default_layers() -> usize {
    14
}

fn default_fine_factor() -> usize {
    4
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            core: default_core(),
            layers: default_layers(),
            fine_factor: default_fine_factor(),
            coarse: None,
            fine: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    #[serde(default = "default_mu_a")]
    pub mu_a: f64,
    #[serde(default = "default_mu_s")]
    pub mu_s_prime: f64,
    #[serde(default = "default_robin")]
    pub robin_a: f64,
}

fn default_mu_a() -> f64 {
    0.04
}

fn default_mu_s() -> f64 {
    1.5
}

fn default_robin() -> f64 {
    3.2
}

impl Default for CoefficientsConfig {
    fn default() -> Self {
        Self {
            mu_a: default_mu_a(),
            mu_s_prime: default_mu_s(),
            robin_a: default_robin(),
        }
    }
}

impl CoefficientsConfig {
    /// `D = 1/(3(μ_a + μ′_s))`.
    pub fn to_coefficients(&self) -> Coefficients {
        let d = 1.0 / (3.0 * (self.mu_a + self.mu_s_prime));
        Coefficients::constant(d, self.mu_a, self.robin_a)
    }
}

/// Scheme parameters; unset fields fall back to the library defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub s: Option<f64>,
    pub dt: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
}

impl ParamOverrides {
    fn apply(&self, p: &mut SchemeParams) {
        let set = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.s, self.s);
        set(&mut p.dt, self.dt);
        set(&mut p.nu, self.nu);
        set(&mut p.alpha, self.alpha);
        set(&mut p.omega, self.omega);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdmissibilityConfig {
    Enforce,
    #[default]
    Unchecked,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub methods: Vec<String>,
    pub s: Option<f64>,
    pub dt: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub omega: Option<f64>,
    #[serde(default)]
    pub admissibility: AdmissibilityConfig,
    /// Overrides keyed by method name.
    #[serde(default)]
    pub per_method: BTreeMap<String, ParamOverrides>,
}

impl SolverConfig {
    fn shared(&self) -> ParamOverrides {
        ParamOverrides {
            s: self.s,
            dt: self.dt,
            nu: self.nu,
            alpha: self.alpha,
            omega: self.omega,
        }
    }

    /// Parameters for `method`: defaults, then shared keys, then the
    /// method's own table.
    pub fn params_for(&self, method: Method) -> SchemeParams {
        let mut p = SchemeParams::default();
        self.shared().apply(&mut p);
        if let Some(o) = self.per_method.get(method.name()) {
            o.apply(&mut p);
        }
        p
    }

    pub fn admissibility(&self) -> Admissibility {
        match self.admissibility {
            AdmissibilityConfig::Enforce => Admissibility::Enforce,
            AdmissibilityConfig::Unchecked => Admissibility::Unchecked,
        }
    }

    pub fn parsed_methods(&self) -> Result<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(config_err(
                "solver.methods",
                "list is empty; expected one or more of arm, msvm, landweber, nu, nesterov",
            ));
        }
        for key in self.per_method.keys() {
            key.parse::<Method>()
                .map_err(|e| config_err(&format!("solver.per_method.{key}"), e))?;
        }
        self.methods
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.parse()
                    .map_err(|e| config_err(&format!("solver.methods[{i}]"), e))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub levels: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingConfig {
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_tau() -> f64 {
    1.2
}

pub const DEFAULT_MAX_ITER: usize = 5000;

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

impl Default for StoppingConfig {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Tau,
    Dt,
    S,
    Nu,
    Alpha,
    Omega,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Tau => "tau",
            SweepParameter::Dt => "dt",
            SweepParameter::S => "s",
            SweepParameter::Nu => "nu",
            SweepParameter::Alpha => "alpha",
            SweepParameter::Omega => "omega",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Summary table, one row per run.
    pub csv: Option<PathBuf>,
    /// `E_k` and residual histories of every run.
    pub series: Option<PathBuf>,
}

/// Slope study on a diagonal operator with `n` log-spaced singular values
/// and a Hölder source condition of each listed exponent.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    pub mu: Vec<f64>,
    pub deltas: Vec<f64>,
    #[serde(default = "default_rate_n")]
    pub n: usize,
    #[serde(default = "one")]
    pub sigma_max: f64,
    #[serde(default = "default_sigma_min")]
    pub sigma_min: f64,
    #[serde(default = "one")]
    pub s: f64,
    #[serde(default = "default_rate_tau")]
    pub tau: f64,
    /// Time step of the discrete iteration.
    #[serde(default = "one")]
    pub dt: f64,
    #[serde(default = "default_rate_max_iter")]
    pub max_iter: usize,
}

fn default_rate_n() -> usize {
    400
}

fn one() -> f64 {
    1.0
}

fn default_sigma_min() -> f64 {
    1e-6
}

fn default_rate_tau() -> f64 {
    2.0
}

fn default_rate_max_iter() -> usize {
    1_000_000
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_err(
            field,
            format!("must be a positive number, got {v}"),
        ))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn problem(&self) -> Result<&ProblemConfig> {
        self.problem
            .as_ref()
            .ok_or_else(|| config_err("problem", "missing table"))
    }

    pub fn solver(&self) -> Result<&SolverConfig> {
        self.solver
            .as_ref()
            .ok_or_else(|| config_err("solver", "missing table"))
    }

    pub fn noise(&self) -> Result<&NoiseConfig> {
        self.noise
            .as_ref()
            .ok_or_else(|| config_err("noise", "missing table"))
    }

    /// Checks everything a run, sweep or comparison needs.
    pub fn validate_run(&self) -> Result<()> {
        let problem = self.problem()?;
        if !problem.initial_guess.is_finite() {
            return Err(config_err("problem.initial_guess", "must be finite"));
        }
        match problem.kind {
            ProblemKind::Blt => {
                problem.example()?;
                if let Some(m) = &problem.mesh {
                    if m.coarse.is_some() != m.fine.is_some() {
                        return Err(config_err(
                            "problem.mesh",
                            "give both `coarse` and `fine` mesh files or neither",
                        ));
                    }
                    for (field, path) in [("coarse", &m.coarse), ("fine", &m.fine)] {
                        if let Some(p) = path {
                            if !p.exists() {
                                return Err(config_err(
                                    &format!("problem.mesh.{field}"),
                                    format!("file {} does not exist", p.display()),
                                ));
                            }
                        }
                    }
                    if m.core == 0 || m.layers == 0 || m.fine_factor < 2 {
                        return Err(config_err(
                            "problem.mesh",
                            "core and layers must be >= 1 and fine_factor >= 2",
                        ));
                    }
                }
                let c = problem.coefficients.clone().unwrap_or_default();
                positive("problem.coefficients.mu_a", c.mu_a)?;
                positive("problem.coefficients.robin_a", c.robin_a)?;
                if !(c.mu_s_prime.is_finite() && c.mu_s_prime >= 0.0) {
                    return Err(config_err(
                        "problem.coefficients.mu_s_prime",
                        "must be >= 0",
                    ));
                }
            }
            ProblemKind::Spectral => {
                let n = problem
                    .n
                    .ok_or_else(|| config_err("problem.n", "required for spectral problems"))?;
                if n < 2 {
                    return Err(config_err("problem.n", "must be >= 2"));
                }
                let hi = problem.sigma_max.unwrap_or(1.0);
                let lo = problem.sigma_min.unwrap_or(1e-6);
                positive("problem.sigma_max", hi)?;
                positive("problem.sigma_min", lo)?;
                if lo > hi {
                    return Err(config_err("problem.sigma_min", "must not exceed sigma_max"));
                }
                positive("problem.mu", problem.mu.unwrap_or(0.5))?;
            }
        }
        let solver = self.solver()?;
        for m in solver.parsed_methods()? {
            solver
                .params_for(m)
                .validate()
                .map_err(|e| config_err(&format!("solver ({m})"), e))?;
        }
        let noise = self.noise()?;
        if noise.levels.is_empty() {
            return Err(config_err("noise.levels", "list is empty"));
        }
        for (i, l) in noise.levels.iter().enumerate() {
            if !(l.is_finite() && *l >= 0.0) {
                return Err(config_err(
                    &format!("noise.levels[{i}]"),
                    format!("must be >= 0, got {l}"),
                ));
            }
        }
        positive("stopping.tau", self.stopping.tau)?;
        if self.stopping.max_iter == 0 {
            return Err(config_err("stopping.max_iter", "must be >= 1"));
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return Err(config_err("sweep.values", "list is empty"));
            }
            for (i, v) in sw.values.iter().enumerate() {
                if !v.is_finite() {
                    return Err(config_err(&format!("sweep.values[{i}]"), "must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn validate_rates(&self) -> Result<&RatesConfig> {
        let r = self
            .rates
            .as_ref()
            .ok_or_else(|| config_err("rates", "missing table"))?;
        if r.mu.is_empty() {
            return Err(config_err("rates.mu", "list is empty"));
        }
        for (i, m) in r.mu.iter().enumerate() {
            positive(&format!("rates.mu[{i}]"), *m)?;
        }
        if r.deltas.len() < 2 {
            return Err(config_err("rates.deltas", "need at least two noise levels"));
        }
        for (i, d) in r.deltas.iter().enumerate() {
            positive(&format!("rates.deltas[{i}]"), *d)?;
        }
        positive("rates.dt", r.dt)?;
        positive("rates.tau", r.tau)?;
        Ok(r)
    }
}

impl ProblemConfig {
    pub fn example(&self) -> Result<Example> {
        let name = self.example.as_deref().ok_or_else(|| {
            config_err(
                "problem.example",
                "required for blt problems; expected square or two-disks",
            )
        })?;
        name.parse().map_err(|e| config_err("problem.example", e))
    }
}
