#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(v) = signreg::io::parse_f64_list(text) {
        assert!(v.iter().all(|x| x.is_finite()));
    }
    let _ = signreg::io::parse_usize_list(text);
});
