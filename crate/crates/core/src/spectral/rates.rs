//! Empirical convergence rates under a Hölder source condition.

use super::model::{SpectralModel, StoppingTime};
use crate::error::{check_len, invalid, Result};
use crate::linop::DiagonalOperator;
use crate::solvers::{Admissibility, Method, SchemeParams, Solver, StopReason, StoppingRule};

/// `f0 − f† = (K*K)^μ v0`, i.e. `f0_j − f†_j = σ_j^{2μ} v0_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceConditionFixture {
    pub mu: f64,
    pub rho: f64,
    pub v0_coeff: Vec<f64>,
}

impl SourceConditionFixture {
    pub fn new(mu: f64, v0_coeff: Vec<f64>) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(invalid(format!(
                "source exponent must be positive, got {mu}"
            )));
        }
        let rho = v0_coeff.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Self { mu, rho, v0_coeff })
    }

    /// Unit-norm `v0` spread evenly over `n` modes.
    pub fn flat(mu: f64, n: usize) -> Result<Self> {
        Self::new(mu, vec![1.0 / (n as f64).sqrt(); n])
    }

    pub fn initial_guess(&self, sigma: &[f64], f_true: &[f64]) -> Result<Vec<f64>> {
        check_len("source element", sigma.len(), self.v0_coeff.len())?;
        check_len("ground truth", sigma.len(), f_true.len())?;
        Ok(sigma
            .iter()
            .zip(f_true.iter().zip(&self.v0_coeff))
            .map(|(s, (f, v))| f + s.powf(2.0 * self.mu) * v)
            .collect())
    }
}

/// Everything about a rate study except the source condition and δ.
#[derive(Debug, Clone, PartialEq)]
pub struct RateProblem {
    pub sigma: Vec<f64>,
    pub f_true: Vec<f64>,
    /// Unit vector along which data noise is added.
    pub noise_direction: Vec<f64>,
    pub s: f64,
    pub tau: f64,
}

impl RateProblem {
    /// `n` singular values log-spaced from `sigma_max` down to `sigma_min`,
    /// zero ground truth and noise spread evenly over all modes.
    pub fn log_spectrum(
        n: usize,
        sigma_max: f64,
        sigma_min: f64,
        s: f64,
        tau: f64,
    ) -> Result<Self> {
        if n < 2 || !(sigma_max >= sigma_min && sigma_min > 0.0) {
            return Err(invalid("need n >= 2 and sigma_max >= sigma_min > 0"));
        }
        let ratio = (sigma_min / sigma_max).ln();
        let sigma = (0..n)
            .map(|j| sigma_max * (ratio * j as f64 / (n - 1) as f64).exp())
            .collect();
        Ok(Self {
            sigma,
            f_true: vec![0.0; n],
            noise_direction: vec![1.0 / (n as f64).sqrt(); n],
            s,
            tau,
        })
    }

    fn noisy_data(&self, delta: f64) -> Vec<f64> {
        self.sigma
            .iter()
            .zip(self.f_true.iter().zip(&self.noise_direction))
            .map(|(s, (f, e))| s * f + delta * e)
            .collect()
    }

    fn error(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.f_true)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRule {
    /// Stop at `T = δ^{−1/(2μ+1)}`.
    APriori,
    Discrepancy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub delta: f64,
    /// Stopping time `T*`, or `k* Δt` for the iteration.
    pub stop: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    /// Log-log slope of the error against δ.
    pub error_slope: f64,
    /// Log-log slope of the stopping time against δ.
    pub stop_slope: f64,
    pub points: Vec<RatePoint>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len("slope samples", x.len(), y.len())?;
    if x.len() < 2 {
        return Err(invalid("at least two points are needed to fit a slope"));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("log-log fit needs finite positive samples"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("noise levels must not all coincide"));
    }
    Ok(sxy / sxx)
}

fn check_inputs(
    fixture: &SourceConditionFixture,
    problem: &RateProblem,
    deltas: &[f64],
) -> Result<()> {
    if deltas.len() < 2 {
        return Err(invalid(
            "at least two noise levels are needed to fit a slope",
        ));
    }
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(invalid("noise levels must be positive"));
    }
    let max = deltas.iter().cloned().fold(f64::MIN, f64::max);
    let min = deltas.iter().cloned().fold(f64::MAX, f64::min);
    if max / min < 100.0 {
        return Err(invalid("noise levels must span at least two decades"));
    }
    let saturation = (1.0 + 2.0 * problem.s) / 4.0;
    if fixture.mu > saturation + 1e-12 {
        return Err(invalid(format!(
            "mu = {} exceeds the saturation bound (1+2s)/4 = {saturation}",
            fixture.mu
        )));
    }
    check_len("ground truth", problem.sigma.len(), problem.f_true.len())?;
    check_len(
        "noise direction",
        problem.sigma.len(),
        problem.noise_direction.len(),
    )
}

fn fit(points: Vec<RatePoint>) -> Result<RateFit> {
    let d: Vec<f64> = points.iter().map(|p| p.delta).collect();
    let e: Vec<f64> = points.iter().map(|p| p.error).collect();
    let t: Vec<f64> = points.iter().map(|p| p.stop).collect();
    Ok(RateFit {
        error_slope: loglog_slope(&d, &e)?,
        stop_slope: loglog_slope(&d, &t)?,
        points,
    })
}

/// Rates of the continuous flow, evaluated in closed form.
pub fn rate_experiment(
    fixture: &SourceConditionFixture,
    problem: &RateProblem,
    deltas: &[f64],
    rule: RateRule,
) -> Result<RateFit> {
    check_inputs(fixture, problem, deltas)?;
    let f0 = fixture.initial_guess(&problem.sigma, &problem.f_true)?;
    let mut points = Vec::with_capacity(deltas.len());
    let mut t_max = 1.0;
    for &delta in deltas {
        let model = SpectralModel::new(
            problem.sigma.clone(),
            f0.clone(),
            problem.noisy_data(delta),
            problem.s,
        )?;
        let stop = match rule {
            RateRule::APriori => delta.powf(-1.0 / (2.0 * fixture.mu + 1.0)),
            RateRule::Discrepancy => loop {
                match model.find_stopping_time(problem.tau, delta, t_max)? {
                    StoppingTime::Found(t) => {
                        // Next level is usually smaller; start its scan near here.
                        t_max = (4.0 * t).max(1.0);
                        break t;
                    }
                    StoppingTime::AtStart => {
                        return Err(invalid(format!(
                            "initial guess already meets the discrepancy level at delta = {delta}"
                        )))
                    }
                    StoppingTime::NotReached if t_max < 1e12 => t_max *= 4.0,
                    StoppingTime::NotReached => {
                        return Err(invalid(format!(
                            "no stopping time found for delta = {delta}"
                        )))
                    }
                }
            },
        };
        let error = problem.error(&model.solution(stop)?);
        points.push(RatePoint { delta, stop, error });
    }
    fit(points)
}

/// Rates of the Störmer-Verlet iteration on the same diagonal problem.
pub fn discrete_rate_experiment(
    fixture: &SourceConditionFixture,
    problem: &RateProblem,
    deltas: &[f64],
    rule: RateRule,
    dt: f64,
    max_iter: usize,
) -> Result<RateFit> {
    check_inputs(fixture, problem, deltas)?;
    let mut sigma = problem.sigma.clone();
    sigma.sort_by(|a, b| b.total_cmp(a));
    if sigma != problem.sigma {
        return Err(invalid(
            "singular values must be sorted in nonincreasing order",
        ));
    }
    let op = DiagonalOperator::new(sigma)?;
    let f0 = fixture.initial_guess(&problem.sigma, &problem.f_true)?;
    let params = SchemeParams {
        s: problem.s,
        dt,
        ..Default::default()
    };
    let solver = Solver::new(Method::Arm, params, &op, Admissibility::Enforce)?;
    let mut points = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let y = problem.noisy_data(delta);
        let stop = match rule {
            RateRule::APriori => {
                let k = (delta.powf(-1.0 / (2.0 * fixture.mu + 1.0)) / dt).ceil() as usize;
                StoppingRule::APriori { k_star: k.max(1) }
            }
            RateRule::Discrepancy => StoppingRule::Discrepancy {
                tau: problem.tau,
                delta,
                max_iter,
            },
        };
        let rec = solver.run(&y, &f0, stop, None)?;
        match rec.stopped_by {
            StopReason::Discrepancy | StopReason::APriori => {}
            other => {
                return Err(invalid(format!(
                    "iteration stopped by {other} at delta = {delta}; raise max_iter"
                )))
            }
        }
        points.push(RatePoint {
            delta,
            stop: rec.k_star as f64 * dt,
            error: problem.error(&rec.solution),
        });
    }
    fit(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let x = [1e-1, 1e-2, 1e-3];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.4)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn single_level_is_rejected() {
        let p = RateProblem::log_spectrum(10, 1.0, 1e-3, 1.0, 2.0).unwrap();
        let fx = SourceConditionFixture::flat(0.25, 10).unwrap();
        assert!(rate_experiment(&fx, &p, &[1e-3], RateRule::Discrepancy).is_err());
        assert!(rate_experiment(&fx, &p, &[1e-3, 5e-3], RateRule::Discrepancy).is_err());
    }

    #[test]
    fn saturation_is_enforced() {
        let p = RateProblem::log_spectrum(10, 1.0, 1e-3, 1.0, 2.0).unwrap();
        let fx = SourceConditionFixture::flat(0.8, 10).unwrap();
        assert!(rate_experiment(&fx, &p, &[1e-2, 1e-4], RateRule::APriori).is_err());
    }

    #[test]
    fn fixture_respects_source_condition() {
        let fx = SourceConditionFixture::new(0.5, vec![3.0, 4.0]).unwrap();
        assert_eq!(fx.rho, 5.0);
        let f0 = fx.initial_guess(&[0.5, 0.1], &[1.0, 1.0]).unwrap();
        assert!((f0[0] - 2.5).abs() < 1e-15 && (f0[1] - 1.4).abs() < 1e-15);
    }
}
