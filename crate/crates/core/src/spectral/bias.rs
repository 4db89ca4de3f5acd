//! Bias function `r(t, λ)` of the second-order flow and its ODE oracle.

use super::bessel::BesselOrder;
use crate::error::{invalid, Result};

/// Start of the oracle integration; the equation is singular at `t = 0`.
pub const ORACLE_EPS: f64 = 1e-4;
/// Initial geometric stretch of the oracle grid ends here.
const ORACLE_GEOMETRIC_END: f64 = 0.5;
const ORACLE_GEOMETRIC_RATIO: f64 = 0.01;

fn check(s: f64, t: f64, lambda: f64) -> Result<()> {
    if !(s.is_finite() && s >= -0.5) {
        return Err(invalid(format!(
            "damping exponent must be >= -1/2, got {s}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid(format!("time must be finite and >= 0, got {t}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!(
            "spectral value must be positive, got {lambda}"
        )));
    }
    Ok(())
}

/// `r(t, λ) = 2^s Γ(s+1) J_s(√λ t) / (√λ t)^s`, with `r(0, λ) = 1`.
pub fn bias_r(s: f64, t: f64, lambda: f64) -> Result<f64> {
    check(s, t, lambda)?;
    Ok(BesselOrder::new(s)?.normalized(lambda.sqrt() * t))
}

/// `∂r/∂t = −λt/(2(s+1)) · r_{s+1}(t, λ)`.
pub fn bias_r_dot(s: f64, t: f64, lambda: f64) -> Result<f64> {
    check(s, t, lambda)?;
    let next = BesselOrder::new(s + 1.0)?;
    Ok(-lambda * t / (2.0 * (s + 1.0)) * next.normalized(lambda.sqrt() * t))
}

/// `g(t, λ) = (1 − r(t, λ)) / λ`.
pub fn filter_g(s: f64, t: f64, lambda: f64) -> Result<f64> {
    check(s, t, lambda)?;
    Ok(BesselOrder::new(s)?.one_minus_normalized(lambda.sqrt() * t) / lambda)
}

/// Integrates `r̈ + ((1+2s)/τ) ṙ + λ r = 0` with classical RK4 from
/// `τ = 1e-4`, started from the two-term series.
///
/// The grid is geometric (`h = 0.01 τ`) up to `τ = 0.5` to resolve the
/// singular damping, then `n_steps` uniform steps up to `t`.
pub fn ode_bias_oracle(s: f64, t: f64, lambda: f64, n_steps: usize) -> Result<f64> {
    check(s, t, lambda)?;
    if n_steps < 100 {
        return Err(invalid(format!(
            "oracle needs at least 100 steps, got {n_steps}"
        )));
    }
    let c = 1.0 + 2.0 * s;
    let series = |tau: f64| {
        let r = 1.0 - lambda * tau * tau / (4.0 * (s + 1.0));
        let rd = -lambda * tau / (2.0 * (s + 1.0));
        (r, rd)
    };
    if t <= ORACLE_EPS {
        return Ok(series(t).0);
    }
    let rhs = |tau: f64, r: f64, rd: f64| (rd, -c / tau * rd - lambda * r);
    let rk4 = |tau: f64, h: f64, (r, rd): (f64, f64)| {
        let (k1r, k1v) = rhs(tau, r, rd);
        let (k2r, k2v) = rhs(tau + 0.5 * h, r + 0.5 * h * k1r, rd + 0.5 * h * k1v);
        let (k3r, k3v) = rhs(tau + 0.5 * h, r + 0.5 * h * k2r, rd + 0.5 * h * k2v);
        let (k4r, k4v) = rhs(tau + h, r + h * k3r, rd + h * k3v);
        (
            r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
            rd + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    };
    let mut tau = ORACLE_EPS;
    let mut y = series(tau);
    let geometric_end = t.min(ORACLE_GEOMETRIC_END);
    while tau < geometric_end {
        let h = (ORACLE_GEOMETRIC_RATIO * tau).min(geometric_end - tau);
        y = rk4(tau, h, y);
        tau += h;
    }
    if t > tau {
        let h = (t - tau) / n_steps as f64;
        let start = tau;
        for i in 0..n_steps {
            y = rk4(start + i as f64 * h, h, y);
        }
    }
    Ok(y.0)
}
