//! Holds the `acceptance` test target, which prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails. It lives in its own package so
//! that a failing criterion does not stop `cargo test --workspace` before
//! the other crates' tests have run.
