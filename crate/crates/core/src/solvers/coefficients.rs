//! Closed-form coefficients of the three-term recurrence
//! `f^{k+1} = f^k + a_k (f^k - f^{k-1}) + ω_k K*(y - K f^k)`.

use crate::error::{invalid, Result};

fn check_common(k: usize, s: f64, dt: f64) -> Result<()> {
    if k == 0 {
        return Err(invalid(
            "coefficients are defined for k >= 1; the first step is taken by the stepper",
        ));
    }
    if !(s.is_finite() && s >= -0.5) {
        return Err(invalid(format!(
            "damping exponent s must be >= -1/2, got {s}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt}")));
    }
    Ok(())
}

/// Damping ratio `Δt(1+2s)/(2 t_k)` on the uniform grid `t_k = kΔt`,
/// clamped to 1 so that the damping never reverses the velocity.
pub(crate) fn damping_ratio(k: usize, s: f64) -> f64 {
    ((1.0 + 2.0 * s) / (2.0 * k as f64)).min(1.0)
}

/// Störmer-Verlet coefficients: `a_k = (1-c)/(1+c)`, `ω_k = Δt²/(1+c)`.
///
/// For `k > s + 1/2` this is `(2k-(1+2s))/(2k+(1+2s))` and
/// `2Δt²k/(2k+(1+2s))`. Below that the ratio is clamped, which yields
/// `a_k = 0` and `ω_k = Δt²/2`.
pub fn arm_coefficients(k: usize, s: f64, dt: f64) -> Result<(f64, f64)> {
    check_common(k, s, dt)?;
    let c = damping_ratio(k, s);
    Ok(((1.0 - c) / (1.0 + c), dt * dt / (1.0 + c)))
}

/// Coefficients of the explicit-damping (modified) Verlet scheme:
/// `a_k = (1-c_k)²`, `ω_k = (Δt²/2)(2 - c_k)` with `c_k = Δt(1+2s)/(2t_k)`.
pub fn msvm_coefficients(k: usize, s: f64, dt: f64) -> Result<(f64, f64)> {
    check_common(k, s, dt)?;
    let c = damping_ratio(k, s);
    Ok(((1.0 - c).powi(2), 0.5 * dt * dt * (2.0 - c)))
}

/// Symplectic-Euler coefficients for a possibly variable step `dt_k` at
/// time `t_k > 0`: `a_k = 1 - dt_k(1+2s)/t_k`, `ω_k = dt_k`.
pub fn euler_coefficients(t_k: f64, dt_k: f64, s: f64) -> Result<(f64, f64)> {
    if !(t_k.is_finite() && t_k > 0.0) {
        return Err(invalid(format!("time must be positive, got {t_k}")));
    }
    if !(dt_k.is_finite() && dt_k > 0.0) {
        return Err(invalid(format!("time step must be positive, got {dt_k}")));
    }
    Ok((1.0 - dt_k * (1.0 + 2.0 * s) / t_k, dt_k))
}

/// ν-method coefficients `(μ_k, ω_k)`.
pub fn nu_coefficients(k: usize, nu: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(invalid("nu-method coefficients start at k = 1"));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(invalid(format!("nu must be positive, got {nu}")));
    }
    if k == 1 {
        return Ok((0.0, (4.0 * nu + 2.0) / (4.0 * nu + 1.0)));
    }
    let k = k as f64;
    let mu = (k - 1.0) * (2.0 * k - 3.0) * (2.0 * k + 2.0 * nu - 1.0)
        / ((k + 2.0 * nu - 1.0) * (2.0 * k + 4.0 * nu - 1.0) * (2.0 * k + 2.0 * nu - 3.0));
    let omega = 4.0 * (2.0 * k + 2.0 * nu - 1.0) * (k + nu - 1.0)
        / ((k + 2.0 * nu - 1.0) * (2.0 * k + 4.0 * nu - 1.0));
    Ok((mu, omega))
}

/// `θ_k = (2s+1)/(2k+2)`.
pub fn theta(k: usize, s: f64) -> f64 {
    (2.0 * s + 1.0) / (2.0 * k as f64 + 2.0)
}
