#![no_main]

use deadoil::coefficients::Family;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = Family::parse(text) {
        let back = Family::parse(&f.to_string()).expect("display output parses");
        assert_eq!(f, back);
        for order in 0..=3 {
            let _ = f.eval(order, 0.25);
        }
    }
});
