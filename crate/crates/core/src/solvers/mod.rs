//! Iterative regularization schemes and their stopping rules.

mod coefficients;
mod residual;
mod run;
mod state;

use std::fmt;
use std::str::FromStr;

pub use coefficients::{
    arm_coefficients, euler_coefficients, msvm_coefficients, nu_coefficients, theta,
};
pub use residual::{residual_polynomial, residual_polynomial_sweep};
pub use run::{run, Admissibility, RunRecord, Solver, StopReason, StoppingRule};
pub use state::{
    landweber_step, msv_step, nesterov_step, nu_step, semi_iterative_step, sv_step, verlet_energy,
    IterationState,
};

use crate::error::{invalid, Error, Result};
use crate::linop::LinearOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Damped Störmer-Verlet discretization of the second-order flow.
    Arm,
    /// Explicit-damping variant of the Störmer-Verlet scheme.
    Msvm,
    Landweber,
    Nu,
    Nesterov,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Landweber,
        Method::Nu,
        Method::Nesterov,
        Method::Msvm,
        Method::Arm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Arm => "arm",
            Method::Msvm => "msvm",
            Method::Landweber => "landweber",
            Method::Nu => "nu",
            Method::Nesterov => "nesterov",
        }
    }

    /// Advances `state` by one iteration of this scheme.
    pub fn step(
        self,
        state: &mut IterationState,
        params: &SchemeParams,
        op: &dyn LinearOperator,
        y: &[f64],
    ) -> Result<()> {
        match self {
            Method::Arm => sv_step(state, params, op, y),
            Method::Msvm => msv_step(state, params, op, y),
            Method::Landweber => landweber_step(state, params, op, y),
            Method::Nu => nu_step(state, params, op, y),
            Method::Nesterov => nesterov_step(state, params, op, y),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown method `{s}`; expected one of arm, msvm, landweber, nu, nesterov"
                ))
            })
    }
}

/// Parameters shared by all schemes; each scheme reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    /// Damping exponent of the second-order flow.
    pub s: f64,
    /// Time step. Landweber uses it as its step length.
    pub dt: f64,
    pub nu: f64,
    pub alpha: f64,
    /// Normalization weight of the ν-method and Nesterov.
    pub omega: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            s: 1.0,
            dt: 0.1,
            nu: 0.5,
            alpha: 3.0,
            omega: 1.0,
        }
    }
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.s.is_finite() && self.s >= -0.5) {
            return Err(invalid(format!("s must be >= -1/2, got {}", self.s)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(invalid(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 3.0) {
            return Err(invalid(format!("alpha must be >= 3, got {}", self.alpha)));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(invalid(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        Ok(())
    }

    /// Checks the step-size bound of `method` against an operator norm.
    ///
    /// Verlet schemes need `Δt‖K‖ ≤ 1`, Landweber `Δt‖K‖² < 2`, and the
    /// ν-method and Nesterov `ω‖K‖² ≤ 1`.
    pub fn check_admissible(&self, method: Method, op_norm: f64) -> Result<()> {
        const SLACK: f64 = 1.0 + 1e-12;
        let n2 = op_norm * op_norm;
        let ok = match method {
            Method::Arm | Method::Msvm => self.dt * op_norm <= SLACK,
            Method::Landweber => self.dt * n2 < 2.0,
            Method::Nu | Method::Nesterov => self.omega * n2 <= SLACK,
        };
        if ok {
            Ok(())
        } else {
            let (name, value) = match method {
                Method::Nu | Method::Nesterov => ("omega", self.omega),
                _ => ("dt", self.dt),
            };
            Err(invalid(format!(
                "{name} = {value} is not admissible for {method} with ‖K‖ ≈ {op_norm:.6}"
            )))
        }
    }
}
