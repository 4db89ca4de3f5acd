//! CSV and plain-text renderings of run records.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::run::Record;

pub const CSV_HEADER: &str = "method,delta_prime,tau,dt,s,k_star,E_kstar,stopped_by";
pub const SERIES_HEADER: &str = "run,method,delta_prime,k,E_k,residual";

/// Six significant digits in scientific notation.
pub fn sci(v: f64) -> String {
    format!("{v:.5e}")
}

fn opt_sci(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), sci)
}

/// Summary table; the `dt` column holds [`Record::step`].
pub fn format_csv(records: &[Record]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.method,
            sci(r.delta_prime),
            sci(r.tau),
            sci(r.step()),
            sci(r.params.s),
            r.k_star,
            opt_sci(r.e_kstar),
            r.stopped_by
        );
    }
    s
}

/// `E_k` and residual histories, one row per iteration of every run.
pub fn format_series(records: &[Record]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{SERIES_HEADER}");
    for (i, r) in records.iter().enumerate() {
        for (k, res) in r.residual_history.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{k},{},{}",
                r.method,
                sci(r.delta_prime),
                opt_sci(r.error_history.get(k).copied()),
                sci(*res)
            );
        }
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let io = |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

pub fn emit_csv(records: &[Record], path: &Path) -> Result<()> {
    write_text(path, &format_csv(records))
}

/// Aligned columns for the terminal.
pub fn format_table(records: &[Record]) -> String {
    let mut s = String::new();
    let sweep = records.iter().find_map(|r| r.sweep.map(|(p, _)| p.name()));
    let _ = write!(s, "{:<10} {:>8} {:>11}", "method", "δ′", "δ");
    if let Some(name) = sweep {
        let _ = write!(s, " {name:>11}");
    }
    let _ = writeln!(s, " {:>6} {:>11} {:>11}  stopped by", "k*", "E_k*", "step");
    for r in records {
        let _ = write!(
            s,
            "{:<10} {:>8} {:>11}",
            r.method.name(),
            format!("{:.3}", r.delta_prime),
            sci(r.delta)
        );
        if let Some((_, v)) = r.sweep {
            let _ = write!(s, " {:>11}", sci(v));
        }
        let _ = writeln!(
            s,
            " {:>6} {:>11} {:>11}  {}",
            r.k_star,
            opt_sci(r.e_kstar),
            sci(r.step()),
            r.stopped_by
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use accreg_core::solvers::{Method, SchemeParams, StopReason};

    fn record() -> Record {
        Record {
            method: Method::Nu,
            delta_prime: 0.01,
            delta: 3.5e-3,
            tau: 1.2,
            params: SchemeParams {
                omega: 0.005,
                ..Default::default()
            },
            sweep: None,
            k_star: 125,
            e_kstar: Some(0.0065974716708390715),
            stopped_by: StopReason::Discrepancy,
            error_history: vec![1.0, 0.5],
            residual_history: vec![2.0, 1.0],
        }
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(format_csv(&[]), format!("{CSV_HEADER}\n"));
        let text = format_csv(&[record()]);
        assert_eq!(
            text,
            format!("{CSV_HEADER}\nnu,1.00000e-2,1.20000e0,5.00000e-3,1.00000e0,125,6.59747e-3,discrepancy\n")
        );
    }

    #[test]
    fn series_has_one_row_per_iterate() {
        let text = format_series(&[record(), record()]);
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("\n1,nu,1.00000e-2,1,5.00000e-1,1.00000e0\n"));
    }
}
