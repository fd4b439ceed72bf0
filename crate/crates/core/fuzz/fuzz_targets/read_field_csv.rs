#![no_main]

use deadoil::io::{format_field_csv, read_field_csv, read_frame_csv};
use deadoil::Discretization;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let disc = Discretization::new(3, 3, 2, 1.0).unwrap();
    let _ = read_frame_csv(text, &disc);
    if let Ok(field) = read_field_csv(text, &disc) {
        let again = read_field_csv(&format_field_csv(&field), &disc).unwrap();
        for (a, b) in field.frames().iter().zip(again.frames()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
});
