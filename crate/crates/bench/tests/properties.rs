//! Parser robustness and CSV shape invariants.

use accreg_bench::config::ExperimentConfig;
use accreg_bench::output::{format_csv, CSV_HEADER};
use accreg_bench::Record;
use accreg_core::solvers::{Method, SchemeParams, StopReason};
use proptest::prelude::*;

fn record(method: usize, dp: f64, k: usize, e: Option<f64>) -> Record {
    Record {
        method: Method::ALL[method % Method::ALL.len()],
        delta_prime: dp,
        delta: dp * 0.3,
        tau: 1.2,
        params: SchemeParams::default(),
        sweep: None,
        k_star: k,
        e_kstar: e,
        stopped_by: StopReason::Discrepancy,
        error_history: vec![],
        residual_history: vec![],
    }
}

proptest! {
    #[test]
    fn config_parser_never_panics(text in "\\PC{0,400}") {
        let _ = ExperimentConfig::parse(&text);
    }

    #[test]
    fn config_parser_survives_mangled_tables(
        key in "[a-z_]{1,12}",
        value in prop_oneof![Just("1".to_string()), Just("\"x\"".to_string()), Just("[]".to_string()), Just("-1e400".to_string())],
        table in prop_oneof![Just("problem"), Just("solver"), Just("noise"), Just("stopping"), Just("sweep"), Just("rates")],
    ) {
        let text = format!("[{table}]\n{key} = {value}\n");
        if let Ok(cfg) = ExperimentConfig::parse(&text) {
            let _ = cfg.validate_run();
            let _ = cfg.validate_rates();
        }
    }

    #[test]
    fn csv_has_one_line_per_record_and_fixed_columns(
        rows in prop::collection::vec((0usize..5, 0.0f64..1.0, 0usize..10_000, prop::option::of(0.0f64..10.0)), 0..20)
    ) {
        let records: Vec<Record> = rows.iter().map(|&(m, d, k, e)| record(m, d, k, e)).collect();
        let text = format_csv(&records);
        let lines: Vec<&str> = text.lines().collect();
        prop_assert_eq!(lines.len(), records.len() + 1);
        prop_assert_eq!(lines[0], CSV_HEADER);
        for (line, r) in lines[1..].iter().zip(&records) {
            let cols: Vec<&str> = line.split(',').collect();
            prop_assert_eq!(cols.len(), 8);
            prop_assert_eq!(cols[0], r.method.name());
            prop_assert_eq!(cols[5].parse::<usize>().unwrap(), r.k_star);
            let parsed: f64 = cols[1].parse().unwrap();
            prop_assert!((parsed - r.delta_prime).abs() <= 1e-5 * r.delta_prime.abs().max(1e-300));
        }
        prop_assert_eq!(format_csv(&records), text);
    }
}
