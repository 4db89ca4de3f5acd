use super::bessel::BesselOrder;
use crate::error::{check_len, invalid, Result};

/// Grid resolution of the first-root scan.
const SCAN_POINTS: usize = 10_000;
const BISECTION_TOL: f64 = 1e-8;

/// The continuous flow in singular coordinates: `σ_j`, `⟨f0, u_j⟩`,
/// `⟨y^δ, v_j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    sigma: Vec<f64>,
    f0_coeff: Vec<f64>,
    y_coeff: Vec<f64>,
    order: BesselOrder,
    order_next: BesselOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingTime {
    /// First root of the discrepancy function.
    Found(f64),
    /// The initial guess already satisfies the discrepancy level.
    AtStart,
    /// No sign change before `t_max`.
    NotReached,
}

impl StoppingTime {
    pub fn time(self) -> Option<f64> {
        match self {
            StoppingTime::Found(t) => Some(t),
            StoppingTime::AtStart => Some(0.0),
            StoppingTime::NotReached => None,
        }
    }
}

impl SpectralModel {
    pub fn new(sigma: Vec<f64>, f0_coeff: Vec<f64>, y_coeff: Vec<f64>, s: f64) -> Result<Self> {
        check_len("initial coefficients", sigma.len(), f0_coeff.len())?;
        check_len("data coefficients", sigma.len(), y_coeff.len())?;
        if sigma.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(invalid("singular values must be finite and positive"));
        }
        Ok(Self {
            order: BesselOrder::new(s)?,
            order_next: BesselOrder::new(s + 1.0)?,
            sigma,
            f0_coeff,
            y_coeff,
        })
    }

    pub fn s(&self) -> f64 {
        self.order.order()
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    fn check_time(t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(invalid(format!("time must be finite and >= 0, got {t}")))
        }
    }

    /// `ξ_j(t) = r f0_j + (1 − r) y_j / σ_j`.
    pub fn solution(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_time(t)?;
        Ok(self
            .sigma
            .iter()
            .zip(self.f0_coeff.iter().zip(&self.y_coeff))
            .map(|(sig, (f0, y))| {
                let x = sig * t;
                self.order.normalized(x) * f0 + self.order.one_minus_normalized(x) * y / sig
            })
            .collect())
    }

    /// `ξ̇_j(t) = ṙ (f0_j − y_j/σ_j)`.
    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        Self::check_time(t)?;
        let s = self.s();
        Ok(self
            .sigma
            .iter()
            .zip(self.f0_coeff.iter().zip(&self.y_coeff))
            .map(|(sig, (f0, y))| {
                let lambda = sig * sig;
                let rd = -lambda * t / (2.0 * (s + 1.0)) * self.order_next.normalized(sig * t);
                rd * (f0 - y / sig)
            })
            .collect())
    }

    /// `‖K f(t) − y^δ‖ = (Σ r(t, σ_j²)² (σ_j f0_j − y_j)²)^{1/2}`.
    pub fn residual_norm(&self, t: f64) -> Result<f64> {
        Self::check_time(t)?;
        Ok(self.residual_unchecked(t))
    }

    fn residual_unchecked(&self, t: f64) -> f64 {
        self.sigma
            .iter()
            .zip(self.f0_coeff.iter().zip(&self.y_coeff))
            .map(|(sig, (f0, y))| {
                let r = self.order.normalized(sig * t);
                (r * (sig * f0 - y)).powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `χ(t) = ‖K f(t) − y^δ‖ − τδ`.
    pub fn discrepancy_chi(&self, t: f64, tau: f64, delta: f64) -> Result<f64> {
        Ok(self.residual_norm(t)? - tau * delta)
    }

    /// `½‖ḟ‖² + ½‖K f − y^δ‖²`, nonincreasing along the flow.
    pub fn energy(&self, t: f64) -> Result<f64> {
        let v = self.velocity(t)?;
        let kinetic: f64 = v.iter().map(|x| x * x).sum();
        Ok(0.5 * kinetic + 0.5 * self.residual_norm(t)?.powi(2))
    }

    /// First root of `χ` on `[0, t_max]`, scanned on a uniform grid of
    /// `t_max / 10⁴` and refined by bisection to 1e-8.
    pub fn find_stopping_time(&self, tau: f64, delta: f64, t_max: f64) -> Result<StoppingTime> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(invalid(format!("t_max must be positive, got {t_max}")));
        }
        if !(tau.is_finite() && tau > 0.0 && delta.is_finite() && delta >= 0.0) {
            return Err(invalid("need tau > 0 and delta >= 0"));
        }
        let level = tau * delta;
        let chi = |t: f64| self.residual_unchecked(t) - level;
        if chi(0.0) <= 0.0 {
            return Ok(StoppingTime::AtStart);
        }
        let h = t_max / SCAN_POINTS as f64;
        let mut lo = 0.0;
        for i in 1..=SCAN_POINTS {
            let t = i as f64 * h;
            if chi(t) <= 0.0 {
                let mut hi = t;
                while hi - lo > BISECTION_TOL * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if chi(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Ok(StoppingTime::Found(hi));
            }
            lo = t;
        }
        Ok(StoppingTime::NotReached)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn consistent_start_is_stationary() {
        let m = SpectralModel::new(vec![2.0, 0.5], vec![1.0, -3.0], vec![2.0, -1.5], 1.0).unwrap();
        for t in [0.0, 0.3, 5.0, 80.0] {
            let xi = m.solution(t).unwrap();
            assert!((xi[0] - 1.0).abs() < 1e-14 && (xi[1] + 3.0).abs() < 1e-14);
            assert!(m.discrepancy_chi(t, 2.0, 0.1).unwrap() + 0.2 < 1e-14);
        }
    }

    #[test]
    fn starts_at_initial_guess() {
        let m = SpectralModel::new(vec![1.0, 0.1], vec![0.4, 0.7], vec![0.0, 1.0], 2.0).unwrap();
        assert_eq!(m.solution(0.0).unwrap(), vec![0.4, 0.7]);
        let res0 = ((0.4f64).powi(2) + (0.07f64 - 1.0).powi(2)).sqrt();
        assert!((m.discrepancy_chi(0.0, 1.0, 0.0).unwrap() - res0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_reaches_data_at_sinc_zero() {
        let m = SpectralModel::new(vec![1.0], vec![0.0], vec![1.0], 0.5).unwrap();
        assert!((m.solution(PI).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((m.discrepancy_chi(PI, 1.0, 0.3).unwrap() + 0.3).abs() < 1e-15);
    }

    #[test]
    fn sinc_half_crossing() {
        let m = SpectralModel::new(vec![1.0], vec![1.0], vec![0.0], 0.5).unwrap();
        let t = m
            .find_stopping_time(1.0, 0.5, 10.0)
            .unwrap()
            .time()
            .unwrap();
        assert!((t.sin() / t - 0.5).abs() < 1e-8);
        assert!((t - 1.895_494_267).abs() < 1e-6);
    }

    #[test]
    fn flagged_and_unreached() {
        let m = SpectralModel::new(vec![1.0], vec![1.0], vec![0.0], 0.5).unwrap();
        assert_eq!(
            m.find_stopping_time(1.0, 2.0, 10.0).unwrap(),
            StoppingTime::AtStart
        );
        let m = SpectralModel::new(vec![1.0, 0.5], vec![1.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(
            m.find_stopping_time(1.0, 0.0, 50.0).unwrap(),
            StoppingTime::NotReached
        );
    }

    #[test]
    fn velocity_matches_difference_quotient() {
        let m = SpectralModel::new(vec![1.5, 0.3], vec![0.2, -1.0], vec![0.9, 0.4], 1.0).unwrap();
        let (t, h) = (2.7, 1e-6);
        let a = m.solution(t + h).unwrap();
        let b = m.solution(t - h).unwrap();
        let v = m.velocity(t).unwrap();
        for j in 0..2 {
            assert!(((a[j] - b[j]) / (2.0 * h) - v[j]).abs() < 1e-7);
        }
    }
}
