#![no_main]

use accreg_bench::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        let _ = cfg.validate_run();
        let _ = cfg.validate_rates();
        if let Ok(solver) = cfg.solver() {
            let _ = solver.parsed_methods();
        }
    }
});
