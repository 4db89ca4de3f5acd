use std::fmt;

use super::{IterationState, Method, SchemeParams};
use crate::error::{check_len, invalid, Result};
use crate::linop::{estimate_norm, LinearOperator};

/// Residual growth beyond this factor of the initial residual counts as
/// divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;
const NORM_ITERS: usize = 200;
const NORM_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    /// Stop after exactly `k_star` iterations.
    APriori {
        k_star: usize,
    },
    /// Stop at the first `k` with `‖y − K f^k‖ ≤ τδ`, or at `max_iter`.
    Discrepancy {
        tau: f64,
        delta: f64,
        max_iter: usize,
    },
    MaxIter {
        max_iter: usize,
    },
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::APriori { k_star: 0 } => {
                Err(invalid("a priori stopping index must be >= 1"))
            }
            StoppingRule::Discrepancy { tau, delta, .. } => {
                if !(tau.is_finite() && tau > 0.0) {
                    return Err(invalid(format!("tau must be positive, got {tau}")));
                }
                if !(delta.is_finite() && delta >= 0.0) {
                    return Err(invalid(format!("delta must be >= 0, got {delta}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn cap(&self) -> usize {
        match *self {
            StoppingRule::APriori { k_star } => k_star,
            StoppingRule::Discrepancy { max_iter, .. } | StoppingRule::MaxIter { max_iter } => {
                max_iter
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    Discrepancy,
    MaxIter,
    APriori,
    /// The initial guess already met the discrepancy level; `k* = 0`.
    InitialDiscrepancy,
    Divergence,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Discrepancy => "discrepancy",
            StopReason::MaxIter => "max_iter",
            StopReason::APriori => "a_priori",
            StopReason::InitialDiscrepancy => "initial_discrepancy",
            StopReason::Divergence => "divergence",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub params: SchemeParams,
    /// `‖y − K f^k‖` for `k = 0..=k_star`.
    pub residual_history: Vec<f64>,
    /// Relative errors `‖f^k − f†‖ / ‖f†‖`; empty without ground truth.
    pub error_history: Vec<f64>,
    pub k_star: usize,
    pub stopped_by: StopReason,
    pub solution: Vec<f64>,
    /// Every iterate, when requested.
    pub iterates: Option<Vec<Vec<f64>>>,
}

impl RunRecord {
    pub fn final_error(&self) -> Option<f64> {
        self.error_history.last().copied()
    }

    pub fn final_residual(&self) -> f64 {
        *self
            .residual_history
            .last()
            .expect("a run records at least the initial residual")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// Estimate `‖K‖` by power iteration and reject inadmissible steps.
    Enforce,
    /// Enforce against a known operator norm.
    EnforceWithNorm(f64),
    /// Run with the given parameters as they are; divergence is still caught
    /// by the residual guard.
    Unchecked,
}

/// A scheme bound to an operator, with parameters validated up front.
pub struct Solver<'a> {
    method: Method,
    params: SchemeParams,
    op: &'a dyn LinearOperator,
    keep_iterates: bool,
}

impl<'a> Solver<'a> {
    pub fn new(
        method: Method,
        params: SchemeParams,
        op: &'a dyn LinearOperator,
        admissibility: Admissibility,
    ) -> Result<Self> {
        params.validate()?;
        let norm = match admissibility {
            Admissibility::Enforce => Some(estimate_norm(op, NORM_ITERS, NORM_SEED)?),
            Admissibility::EnforceWithNorm(n) => Some(n),
            Admissibility::Unchecked => None,
        };
        if let Some(n) = norm {
            params.check_admissible(method, n)?;
        }
        Ok(Self {
            method,
            params,
            op,
            keep_iterates: false,
        })
    }

    pub fn keep_iterates(mut self, keep: bool) -> Self {
        self.keep_iterates = keep;
        self
    }

    pub fn run(
        &self,
        y: &[f64],
        f0: &[f64],
        stop: StoppingRule,
        truth: Option<&[f64]>,
    ) -> Result<RunRecord> {
        stop.validate()?;
        let op = self.op;
        if let Some(t) = truth {
            check_len("ground truth", op.source_dim(), t.len())?;
        }
        let truth_norm = truth.map(|t| op.source_metric().norm(t));
        let rel_error = |f: &[f64]| -> Option<f64> {
            let t = truth?;
            let diff: Vec<f64> = f.iter().zip(t).map(|(a, b)| a - b).collect();
            let err = op.source_metric().norm(&diff);
            Some(match truth_norm {
                Some(n) if n > 0.0 => err / n,
                _ => err,
            })
        };

        let mut state = IterationState::new(op, y, f0, self.params.dt)?;
        let initial = state.residual_norm();
        let mut residuals = Vec::new();
        let mut errors = Vec::new();
        let mut iterates = self.keep_iterates.then(Vec::new);
        let cap = stop.cap();

        let reason = loop {
            let res = state.residual_norm();
            residuals.push(res);
            if let Some(e) = rel_error(state.f()) {
                errors.push(e);
            }
            if let Some(it) = iterates.as_mut() {
                it.push(state.f().to_vec());
            }
            let k = state.k();
            if !res.is_finite() || (initial > 0.0 && res > DIVERGENCE_FACTOR * initial) {
                break StopReason::Divergence;
            }
            if let StoppingRule::Discrepancy { tau, delta, .. } = stop {
                if res <= tau * delta {
                    break if k == 0 {
                        StopReason::InitialDiscrepancy
                    } else {
                        StopReason::Discrepancy
                    };
                }
            }
            if k >= cap {
                break match stop {
                    StoppingRule::APriori { .. } => StopReason::APriori,
                    _ => StopReason::MaxIter,
                };
            }
            self.method.step(&mut state, &self.params, op, y)?;
        };

        Ok(RunRecord {
            method: self.method,
            params: self.params,
            residual_history: residuals,
            error_history: errors,
            k_star: state.k(),
            stopped_by: reason,
            solution: state.into_solution(),
            iterates,
        })
    }
}

/// Runs `method` with the step-size bound enforced.
pub fn run(
    method: Method,
    op: &dyn LinearOperator,
    y: &[f64],
    f0: &[f64],
    params: &SchemeParams,
    stop: StoppingRule,
    truth: Option<&[f64]>,
) -> Result<RunRecord> {
    Solver::new(method, *params, op, Admissibility::Enforce)?.run(y, f0, stop, truth)
}
