//! Opt-in trend assertions over run records.

use std::collections::BTreeMap;

use accreg_core::solvers::{Method, StopReason};

use crate::run::Record;

/// Relative slack on iteration counts.
pub const TREND_SLACK: f64 = 0.10;
/// Required speed-up of the accelerated schemes over Landweber.
pub const ACCELERATION_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Records grouped by `(method, δ′)`, in first-appearance order.
fn groups(records: &[Record]) -> Vec<(Method, f64, Vec<&Record>)> {
    let mut out: Vec<(Method, f64, Vec<&Record>)> = Vec::new();
    for r in records {
        match out
            .iter_mut()
            .find(|(m, d, _)| *m == r.method && *d == r.delta_prime)
        {
            Some(g) => g.2.push(r),
            None => out.push((r.method, r.delta_prime, vec![r])),
        }
    }
    out
}

/// `k*` is nonincreasing in `τ`, up to [`TREND_SLACK`].
pub fn tau_trend(records: &[Record]) -> Vec<CheckOutcome> {
    groups(records)
        .into_iter()
        .map(|(m, d, mut g)| {
            g.sort_by(|a, b| a.tau.total_cmp(&b.tau));
            let bad: Vec<String> = g
                .windows(2)
                .filter(|w| w[1].k_star as f64 > (1.0 + TREND_SLACK) * w[0].k_star as f64)
                .map(|w| {
                    format!(
                        "tau {} -> {}: k* {} -> {}",
                        w[0].tau, w[1].tau, w[0].k_star, w[1].k_star
                    )
                })
                .collect();
            let ks: Vec<usize> = g.iter().map(|r| r.k_star).collect();
            CheckOutcome::new(
                format!("tau trend {m} δ′={d}"),
                bad.is_empty(),
                if bad.is_empty() {
                    format!("k* = {ks:?}")
                } else {
                    bad.join("; ")
                },
            )
        })
        .collect()
}

/// `k* Δt` stays constant within [`TREND_SLACK`] between neighbouring step
/// sizes that both stop by the discrepancy principle; once the divergence
/// guard fires, every larger step must diverge too.
pub fn dt_trend(records: &[Record]) -> Vec<CheckOutcome> {
    groups(records)
        .into_iter()
        .map(|(m, d, mut g)| {
            g.sort_by(|a, b| a.step().total_cmp(&b.step()));
            let mut bad = Vec::new();
            let mut compared = 0;
            for w in g.windows(2) {
                let both = w.iter().all(|r| r.stopped_by == StopReason::Discrepancy);
                if both {
                    compared += 1;
                    let ratio =
                        (w[1].k_star as f64 * w[1].step()) / (w[0].k_star as f64 * w[0].step());
                    if !(1.0 / (1.0 + TREND_SLACK)..=1.0 + TREND_SLACK).contains(&ratio) {
                        bad.push(format!(
                            "dt {} -> {}: k* {} -> {} (k*·dt ratio {ratio:.3})",
                            w[0].step(),
                            w[1].step(),
                            w[0].k_star,
                            w[1].k_star
                        ));
                    }
                }
                if w[0].stopped_by == StopReason::Divergence
                    && w[1].stopped_by != StopReason::Divergence
                {
                    bad.push(format!(
                        "dt {} diverged but {} did not",
                        w[0].step(),
                        w[1].step()
                    ));
                }
            }
            if compared == 0 {
                bad.push("no neighbouring pair stopped by the discrepancy principle".into());
            }
            let ks: Vec<String> = g
                .iter()
                .map(|r| match r.stopped_by {
                    StopReason::Divergence => "div".to_string(),
                    _ => r.k_star.to_string(),
                })
                .collect();
            CheckOutcome::new(
                format!("dt trend {m} δ′={d}"),
                bad.is_empty(),
                if bad.is_empty() {
                    format!("k* = [{}]", ks.join(", "))
                } else {
                    bad.join("; ")
                },
            )
        })
        .collect()
}

/// ARM and the ν-method need at most a fifth of Landweber's iterations,
/// and every method's error grows from the smallest to the largest δ′.
pub fn comparison(records: &[Record]) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut by_level: BTreeMap<u64, Vec<&Record>> = BTreeMap::new();
    for r in records {
        by_level.entry(r.delta_prime.to_bits()).or_default().push(r);
    }
    for rows in by_level.values() {
        let find = |m: Method| rows.iter().find(|r| r.method == m);
        let Some(lw) = find(Method::Landweber) else {
            continue;
        };
        for m in [Method::Arm, Method::Nu] {
            if let Some(r) = find(m) {
                let ok = r.stopped_by == StopReason::Discrepancy
                    && r.k_star as f64 * ACCELERATION_FACTOR <= lw.k_star as f64;
                out.push(CheckOutcome::new(
                    format!("{m} vs landweber δ′={}", r.delta_prime),
                    ok,
                    format!("k* {} vs {}", r.k_star, lw.k_star),
                ));
            }
        }
    }
    for (m, _, _) in groups(records)
        .iter()
        .filter(|(_, d, _)| records.iter().all(|r| r.delta_prime >= *d))
    {
        let rows: Vec<&Record> = records.iter().filter(|r| r.method == *m).collect();
        let lo = rows
            .iter()
            .min_by(|a, b| a.delta_prime.total_cmp(&b.delta_prime));
        let hi = rows
            .iter()
            .max_by(|a, b| a.delta_prime.total_cmp(&b.delta_prime));
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if lo.delta_prime < hi.delta_prime {
                let (el, eh) = (
                    lo.e_kstar.unwrap_or(f64::NAN),
                    hi.e_kstar.unwrap_or(f64::NAN),
                );
                out.push(CheckOutcome::new(
                    format!("{m} error grows with noise"),
                    eh > el,
                    format!(
                        "E {el:.4e} at δ′={} vs {eh:.4e} at δ′={}",
                        lo.delta_prime, hi.delta_prime
                    ),
                ));
            }
        }
    }
    out
}

pub fn format_checks(checks: &[CheckOutcome]) -> String {
    checks
        .iter()
        .map(|c| {
            format!(
                "{} {}: {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )
        })
        .collect()
}
