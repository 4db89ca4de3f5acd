//! Residual polynomials `r_k(λ)`, obtained by running a scheme on the
//! scalar problem `K = √λ`, `y = 0`, `f0 = 1`.

use super::{IterationState, Method, SchemeParams};
use crate::error::{invalid, Result};
use crate::linop::DiagonalOperator;

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    if let Some(l) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(invalid(format!(
            "spectral values must be finite and >= 0, got {l}"
        )));
    }
    Ok(())
}

/// `r_k(λ)` for one scheme.
pub fn residual_polynomial(
    method: Method,
    k: usize,
    lambda: f64,
    params: &SchemeParams,
) -> Result<f64> {
    let mut out = 1.0;
    residual_polynomial_sweep(method, k, &[lambda], params, |j, r| {
        if j == k {
            out = r[0];
        }
    })?;
    Ok(out)
}

/// Evaluates `r_j` on a grid of spectral values for `j = 0..=k_max`,
/// handing each row to `visit(j, r_j)`.
///
/// All grid points evolve together as one diagonal problem.
pub fn residual_polynomial_sweep(
    method: Method,
    k_max: usize,
    lambdas: &[f64],
    params: &SchemeParams,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<()> {
    params.validate()?;
    check_lambdas(lambdas)?;
    let op = DiagonalOperator::new_unchecked(lambdas.iter().map(|l| l.sqrt()).collect());
    let y = vec![0.0; lambdas.len()];
    let f0 = vec![1.0; lambdas.len()];
    let mut state = IterationState::new(&op, &y, &f0, params.dt)?;
    visit(0, state.f());
    for j in 1..=k_max {
        method.step(&mut state, params, &op, &y)?;
        visit(j, state.f());
    }
    Ok(())
}
