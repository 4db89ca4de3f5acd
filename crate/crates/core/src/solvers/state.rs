use std::mem;

use super::coefficients::{damping_ratio, nu_coefficients};
use super::SchemeParams;
use crate::error::{check_len, invalid, Result};
use crate::linop::LinearOperator;

/// Iterate, history and cached operator products of a running scheme.
///
/// The cached `K f^k` and `K f^{k-1}` belong to the operator and data the
/// state was created with; stepping it with a different pair gives
/// meaningless results.
#[derive(Debug, Clone)]
pub struct IterationState {
    f_curr: Vec<f64>,
    f_prev: Vec<f64>,
    q: Vec<f64>,
    k: usize,
    dt: f64,
    kf: Vec<f64>,
    kf_prev: Vec<f64>,
    residual_norm: f64,
    grad: Option<Vec<f64>>,
}

impl IterationState {
    /// `f^0 = f^{-1} = f0`, `q^0 = 0`.
    pub fn new(op: &dyn LinearOperator, y: &[f64], f0: &[f64], dt: f64) -> Result<Self> {
        check_len("initial guess", op.source_dim(), f0.len())?;
        check_len("data", op.data_dim(), y.len())?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let kf = op.apply(f0)?;
        let residual_norm = residual_norm(op, y, &kf);
        Ok(Self {
            f_curr: f0.to_vec(),
            f_prev: f0.to_vec(),
            q: vec![0.0; f0.len()],
            k: 0,
            dt,
            kf_prev: kf.clone(),
            kf,
            residual_norm,
            grad: None,
        })
    }

    pub fn f(&self) -> &[f64] {
        &self.f_curr
    }

    pub fn f_prev(&self) -> &[f64] {
        &self.f_prev
    }

    /// Velocity; stays zero for first-order and three-term schemes.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Artificial time `k Δt`.
    pub fn t(&self) -> f64 {
        self.k as f64 * self.dt
    }

    /// `K f^k`.
    pub fn kf(&self) -> &[f64] {
        &self.kf
    }

    /// `‖y - K f^k‖` in the data metric.
    pub fn residual_norm(&self) -> f64 {
        self.residual_norm
    }

    pub fn into_solution(self) -> Vec<f64> {
        self.f_curr
    }

    /// `K*(y - K f^k)`, computed once per iterate.
    fn gradient(&mut self, op: &dyn LinearOperator, y: &[f64]) -> Result<Vec<f64>> {
        match self.grad.take() {
            Some(g) => Ok(g),
            None => gradient_at(op, y, &self.kf),
        }
    }

    fn advance(&mut self, f_new: Vec<f64>, op: &dyn LinearOperator, y: &[f64]) -> Result<()> {
        self.f_prev = mem::replace(&mut self.f_curr, f_new);
        mem::swap(&mut self.kf_prev, &mut self.kf);
        op.apply_into(&self.f_curr, &mut self.kf)?;
        self.residual_norm = residual_norm(op, y, &self.kf);
        self.grad = None;
        self.k += 1;
        Ok(())
    }
}

fn residual_norm(op: &dyn LinearOperator, y: &[f64], kf: &[f64]) -> f64 {
    let r: Vec<f64> = y.iter().zip(kf).map(|(a, b)| a - b).collect();
    op.data_metric().norm(&r)
}

fn gradient_at(op: &dyn LinearOperator, y: &[f64], kf: &[f64]) -> Result<Vec<f64>> {
    let r: Vec<f64> = y.iter().zip(kf).map(|(a, b)| a - b).collect();
    op.apply_adjoint(&r)
}

/// One step of the generic three-term recurrence.
pub fn semi_iterative_step(
    state: &mut IterationState,
    a_k: f64,
    omega_k: f64,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let g = state.gradient(op, y)?;
    let f_new: Vec<f64> = state
        .f_curr
        .iter()
        .zip(&state.f_prev)
        .zip(&g)
        .map(|((f, fp), g)| f + a_k * (f - fp) + omega_k * g)
        .collect();
    state.advance(f_new, op, y)
}

/// Damped Störmer-Verlet step (implicit half-kick damping).
///
/// At `k = 0` the half kick is undamped, which reproduces
/// `f^1 = f^0 + (Δt²/2) K*(y - K f^0)`.
pub fn sv_step(
    state: &mut IterationState,
    params: &SchemeParams,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let dt = state.dt;
    let k = state.k;
    let scale = if k == 0 {
        1.0
    } else {
        1.0 / (1.0 + damping_ratio(k, params.s))
    };
    let g = state.gradient(op, y)?;
    let q_half: Vec<f64> = state
        .q
        .iter()
        .zip(&g)
        .map(|(q, g)| (q + 0.5 * dt * g) * scale)
        .collect();
    verlet_drift_kick(state, q_half, damping_ratio(k + 1, params.s), op, y)
}

/// Modified (explicit-damping) Störmer-Verlet step.
pub fn msv_step(
    state: &mut IterationState,
    params: &SchemeParams,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let dt = state.dt;
    let k = state.k;
    // q^0 = 0, so the damping factor at k = 0 never matters.
    let keep = if k == 0 {
        1.0
    } else {
        1.0 - damping_ratio(k, params.s)
    };
    let g = state.gradient(op, y)?;
    let q_half: Vec<f64> = state
        .q
        .iter()
        .zip(&g)
        .map(|(q, g)| q * keep + 0.5 * dt * g)
        .collect();
    verlet_drift_kick(state, q_half, damping_ratio(k + 1, params.s), op, y)
}

/// Drift with `q^{k+1/2}`, then the closing explicit half kick.
fn verlet_drift_kick(
    state: &mut IterationState,
    q_half: Vec<f64>,
    c_next: f64,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let dt = state.dt;
    let f_new: Vec<f64> = state
        .f_curr
        .iter()
        .zip(&q_half)
        .map(|(f, q)| f + dt * q)
        .collect();
    state.advance(f_new, op, y)?;
    let g_new = state.gradient(op, y)?;
    state.q = q_half
        .iter()
        .zip(&g_new)
        .map(|(q, g)| q * (1.0 - c_next) + 0.5 * dt * g)
        .collect();
    state.grad = Some(g_new);
    Ok(())
}

pub fn landweber_step(
    state: &mut IterationState,
    _params: &SchemeParams,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let dt = state.dt;
    semi_iterative_step(state, 0.0, dt, op, y)
}

pub fn nu_step(
    state: &mut IterationState,
    params: &SchemeParams,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let (mu, w) = nu_coefficients(state.k + 1, params.nu)?;
    semi_iterative_step(state, mu, params.omega * w, op, y)
}

/// Nesterov step with the gradient taken at the extrapolated point.
///
/// `K z` is formed from the cached `K f^k`, `K f^{k-1}`, so a step costs one
/// forward and one adjoint application like the other schemes.
pub fn nesterov_step(
    state: &mut IterationState,
    params: &SchemeParams,
    op: &dyn LinearOperator,
    y: &[f64],
) -> Result<()> {
    let k = state.k as f64;
    let beta = if state.k == 0 {
        0.0
    } else {
        (k - 1.0) / (k + params.alpha - 1.0)
    };
    let z: Vec<f64> = state
        .f_curr
        .iter()
        .zip(&state.f_prev)
        .map(|(f, fp)| f + beta * (f - fp))
        .collect();
    let residual_z: Vec<f64> = y
        .iter()
        .zip(state.kf.iter().zip(&state.kf_prev))
        .map(|(y, (kf, kfp))| y - ((1.0 + beta) * kf - beta * kfp))
        .collect();
    let g = op.apply_adjoint(&residual_z)?;
    let f_new = z
        .iter()
        .zip(&g)
        .map(|(z, g)| z + params.omega * g)
        .collect();
    state.advance(f_new, op, y)
}

/// Discrete Lyapunov function of the Störmer-Verlet iteration,
/// `½‖(f^k − f^{k−1})/Δt‖² + ½⟨K f^k − y, K f^{k−1} − y⟩`.
///
/// With `v = q^{k+1/2}` the scheme reads
/// `(1+c_k) v_k = (1−c_k) v_{k−1} + Δt K*(y − K f^k)`, and one step changes
/// this quantity by `−(c_k/2)‖v_k + v_{k−1}‖²`. It is nonincreasing for
/// `k ≥ 1`.
pub fn verlet_energy(state: &IterationState, op: &dyn LinearOperator, y: &[f64]) -> Result<f64> {
    let dt = state.dt;
    let v: Vec<f64> = state
        .f_curr
        .iter()
        .zip(&state.f_prev)
        .map(|(a, b)| (a - b) / dt)
        .collect();
    let r: Vec<f64> = state.kf.iter().zip(y).map(|(a, b)| a - b).collect();
    let r_prev: Vec<f64> = state.kf_prev.iter().zip(y).map(|(a, b)| a - b).collect();
    let kinetic = op.source_metric().inner(&v, &v);
    Ok(0.5 * kinetic + 0.5 * op.data_metric().inner(&r, &r_prev))
}
