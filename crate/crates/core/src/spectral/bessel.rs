//! Bessel functions of the first kind for real order `ν ≥ -1/2`.
//!
//! Most callers need the normalized form
//! `Λ_ν(x) = 2^ν Γ(ν+1) J_ν(x) / x^ν = Σ_m (−x²/4)^m / (m! (ν+1)_m)`,
//! which is the bias function of the second-order flow at `x = √λ t`.
//!
//! Three regimes keep the error near 1e-14 on `[0, ∞)`:
//! power series for small `x`, Miller's backward recurrence in the middle,
//! and the Hankel expansion for large `x`.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};

const SERIES_MAX_X: f64 = 8.0;
const MILLER_MAX_X: f64 = 40.0;

/// Order-dependent constants, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder {
    nu: f64,
    /// `Γ(ν + 1)`.
    gamma_nu1: f64,
}

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= -0.5) {
            return Err(invalid(format!("Bessel order must be >= -1/2, got {nu}")));
        }
        Ok(Self {
            nu,
            gamma_nu1: gamma(nu + 1.0),
        })
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// The asymptotic series only converges usefully once `x` dominates `ν²`.
    fn hankel_ok(&self, x: f64) -> bool {
        x > MILLER_MAX_X && x > self.nu * self.nu
    }

    /// `Λ_ν(x)`; equals 1 at the origin.
    pub fn normalized(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= SERIES_MAX_X {
            series(self.nu, x)
        } else if !self.hankel_ok(x) {
            miller(self.nu, x)
        } else {
            hankel(self.nu, x) * self.gamma_nu1 * (2.0 / x).powf(self.nu)
        }
    }

    /// `1 − Λ_ν(x)` without cancellation for small `x`.
    pub fn one_minus_normalized(&self, x: f64) -> f64 {
        let x = x.abs();
        if x < 1.0 {
            -series_tail(self.nu, x)
        } else {
            1.0 - self.normalized(x)
        }
    }

    /// `J_ν(x)` for `x ≥ 0`. Negative orders are infinite at the origin.
    pub fn j(&self, x: f64) -> f64 {
        if x == 0.0 {
            return if self.nu == 0.0 {
                1.0
            } else if self.nu > 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        if self.hankel_ok(x) {
            hankel(self.nu, x)
        } else {
            self.normalized(x) * (0.5 * x).powf(self.nu) / self.gamma_nu1
        }
    }
}

/// `J_ν(x)`.
pub fn bessel_j(order: f64, x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(invalid(format!(
            "Bessel argument must be finite and >= 0, got {x}"
        )));
    }
    Ok(BesselOrder::new(order)?.j(x))
}

fn series(nu: f64, x: f64) -> f64 {
    1.0 + series_tail(nu, x)
}

/// `Σ_{m≥1} (−x²/4)^m / (m! (ν+1)_m)`.
fn series_tail(nu: f64, x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut max_term = 1.0f64;
    for m in 1..500 {
        let m = m as f64;
        term *= z / (m * (nu + m));
        sum += term;
        max_term = max_term.max(term.abs());
        let total = (1.0 + sum).abs();
        if term.abs() <= 1e-18 * total || term.abs() <= 1e-20 * max_term {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by
/// `(x/2)^ν / Γ(ν+1) = J_ν + Σ_{k≥1} (ν+2k) (ν+1)_{k−1}/k! · J_{ν+2k}`.
fn miller(nu: f64, x: f64) -> f64 {
    let top = {
        let n = x.ceil() as usize + 60;
        n + n % 2
    };
    // h_k = (ν+1)_{k−1} / k!
    let mut h = vec![0.0; top / 2 + 1];
    h[1] = 1.0;
    for k in 2..h.len() {
        h[k] = h[k - 1] * (nu + k as f64 - 1.0) / k as f64;
    }
    let mut above = 0.0;
    let mut current = 1e-280;
    let mut sum = 0.0;
    for n in (1..=top).rev() {
        let order = nu + n as f64;
        if n % 2 == 0 {
            sum += order * h[n / 2] * current;
        }
        let below = 2.0 * order / x * current - above;
        above = current;
        current = below;
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            sum *= 1e-250;
        }
    }
    current / (current + sum)
}

/// Hankel asymptotic expansion of `J_ν(x)`, summed to its smallest term.
fn hankel(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        a *= (mu - odd * odd) / (8.0 * kf * x);
        if a == 0.0 || a.abs() >= prev {
            break;
        }
        prev = a.abs();
        // Signs follow (−1)^⌊k/2⌋ on alternating P and Q terms.
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn j0_at_origin() {
        assert_eq!(bessel_j(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_order_closed_form() {
        let expected = 1f64.sin() * (2.0 / PI).sqrt();
        assert!((bessel_j(0.5, 1.0).unwrap() - expected).abs() < 1e-14);
        assert!((expected - 0.671_396_707_141_803_1).abs() < 1e-15);
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel_j(0.0, 2.404_825_557_695_773).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(bessel_j(-0.6, 1.0).is_err());
        assert!(bessel_j(0.0, -1.0).is_err());
    }

    #[test]
    fn half_integer_identities_in_every_regime() {
        let minus = order(-0.5);
        let half = order(0.5);
        let three_halves = order(1.5);
        for i in 1..4000 {
            let x = i as f64 * 0.05;
            assert!((minus.normalized(x) - x.cos()).abs() < 1e-12, "x={x}");
            assert!((half.normalized(x) - x.sin() / x).abs() < 1e-12, "x={x}");
            // Λ_{3/2}(x) = 3 (sin x − x cos x) / x³
            let l32 = 3.0 * (x.sin() - x * x.cos()) / x.powi(3);
            assert!((three_halves.normalized(x) - l32).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn regimes_agree_at_seams() {
        for nu in [0.0, 0.25, 1.0, 2.3, 4.0] {
            for x in [SERIES_MAX_X, MILLER_MAX_X] {
                let m = miller(nu, x);
                let other = if x == SERIES_MAX_X {
                    series(nu, x)
                } else {
                    hankel(nu, x) * gamma(nu + 1.0) * (2.0 / x).powf(nu)
                };
                assert!((m - other).abs() < 1e-12, "nu={nu} x={x}: {m} vs {other}");
            }
        }
    }

    #[test]
    fn one_minus_is_accurate_near_zero() {
        let o = order(1.0);
        let x: f64 = 1e-6;
        let exact = x * x / 8.0 - x.powi(4) / 192.0;
        assert!((o.one_minus_normalized(x) - exact).abs() < 1e-28);
    }
}
