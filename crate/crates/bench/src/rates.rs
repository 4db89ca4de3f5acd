//! Slope studies on the diagonal model problem.

use std::fmt::Write as _;

use accreg_core::spectral::{
    discrete_rate_experiment, rate_experiment, RateFit, RateProblem, RateRule,
    SourceConditionFixture,
};

use crate::config::RatesConfig;
use crate::error::Result;

/// Allowed distance of a fitted slope from its predicted value.
pub const RATE_TOLERANCE: f64 = 0.12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continuous,
    Discrete,
}

impl Flow {
    pub fn name(self) -> &'static str {
        match self {
            Flow::Continuous => "continuous",
            Flow::Discrete => "discrete",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub mu: f64,
    pub flow: Flow,
    pub fit: RateFit,
}

impl RateRow {
    pub fn error_theory(&self) -> f64 {
        2.0 * self.mu / (2.0 * self.mu + 1.0)
    }

    pub fn stop_theory(&self) -> f64 {
        -1.0 / (2.0 * self.mu + 1.0)
    }

    pub fn error_ok(&self) -> bool {
        (self.fit.error_slope - self.error_theory()).abs() <= RATE_TOLERANCE
    }

    pub fn stop_ok(&self) -> bool {
        (self.fit.stop_slope - self.stop_theory()).abs() <= RATE_TOLERANCE
    }

    pub fn passed(&self) -> bool {
        self.error_ok() && self.stop_ok()
    }
}

/// Continuous flow and Störmer-Verlet iteration for every `μ`, both
/// stopped by the discrepancy principle.
pub fn rate_report(cfg: &RatesConfig) -> Result<Vec<RateRow>> {
    let problem = RateProblem::log_spectrum(cfg.n, cfg.sigma_max, cfg.sigma_min, cfg.s, cfg.tau)?;
    let mut rows = Vec::new();
    for &mu in &cfg.mu {
        let fixture = SourceConditionFixture::flat(mu, cfg.n)?;
        let fit = rate_experiment(&fixture, &problem, &cfg.deltas, RateRule::Discrepancy)?;
        rows.push(RateRow {
            mu,
            flow: Flow::Continuous,
            fit,
        });
        let fit = discrete_rate_experiment(
            &fixture,
            &problem,
            &cfg.deltas,
            RateRule::Discrepancy,
            cfg.dt,
            cfg.max_iter,
        )?;
        rows.push(RateRow {
            mu,
            flow: Flow::Discrete,
            fit,
        });
    }
    Ok(rows)
}

pub fn format_rates_csv(rows: &[RateRow]) -> String {
    let mut s = String::from("mu,flow,error_slope,error_theory,stop_slope,stop_theory,passed\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{:.5e},{:.5e},{:.5e},{:.5e},{}",
            r.mu,
            r.flow.name(),
            r.fit.error_slope,
            r.error_theory(),
            r.fit.stop_slope,
            r.stop_theory(),
            r.passed()
        );
    }
    s
}

pub fn format_rates_table(rows: &[RateRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>5} {:<10} {:>9} {:>9} {:>9} {:>9}  within ±{RATE_TOLERANCE}",
        "μ", "flow", "E slope", "theory", "T* slope", "theory"
    );
    for r in rows {
        let mark = |ok: bool| if ok { "yes" } else { "no" };
        let _ = writeln!(
            s,
            "{:>5} {:<10} {:>9.3} {:>9.3} {:>9.3} {:>9.3}  E {} / T* {}",
            r.mu,
            r.flow.name(),
            r.fit.error_slope,
            r.error_theory(),
            r.fit.stop_slope,
            r.stop_theory(),
            mark(r.error_ok()),
            mark(r.stop_ok())
        );
        for p in &r.fit.points {
            let _ = writeln!(
                s,
                "      δ {:.1e}  stop {:.4e}  E {:.4e}",
                p.delta, p.stop, p.error
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;

    #[test]
    fn quarter_exponent_matches_theory() {
        let cfg = ExperimentConfig::parse(
            "[rates]\nmu = [0.25]\ndeltas = [1e-2, 1e-3, 1e-4]\nn = 100\nsigma_min = 1e-4\n",
        )
        .unwrap();
        let rows = rate_report(cfg.validate_rates().unwrap()).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!(r.error_ok(), "{r:?}");
        }
        let csv = format_rates_csv(&rows);
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().starts_with("0.25,discrete,"));
    }
}
