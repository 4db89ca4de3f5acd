#![no_main]

use accreg_fem::io::{format_mesh, parse_mesh};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(mesh) = parse_mesh(text) {
        // Anything accepted must survive a round trip unchanged.
        let again = parse_mesh(&format_mesh(&mesh)).expect("formatted mesh parses");
        assert_eq!(again, mesh);
    }
});
