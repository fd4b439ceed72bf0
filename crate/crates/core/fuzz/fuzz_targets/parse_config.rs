#![no_main]

use std::path::Path;

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Large grids only cost time; the parser itself is what is under test.
        if text.len() < 4096 {
            let _ = deadoil::config::parse_config_str(text, Path::new("/nonexistent"));
        }
    }
});
