#![no_main]

use deadoil::profile::Profile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = Profile::parse(text) {
        let back = Profile::parse(&p.to_string()).expect("display output parses");
        assert_eq!(p, back);
        let _ = p.eval(0.5, 0.5, 0.5);
    }
});
