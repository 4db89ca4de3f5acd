#![no_main]

use accreg_fem::io::{columns_to_dense, format_columns, parse_columns};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cols) = parse_columns(text) {
        let _ = columns_to_dense(&cols, cols.len());
        let (idx, val): (Vec<usize>, Vec<f64>) = cols.iter().copied().unzip();
        let again = parse_columns(&format_columns(&idx, &val).unwrap()).unwrap();
        assert_eq!(again, cols);
    }
});
