#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = signreg::io::parse_index_csv(text) {
        assert_eq!(d.design.rows().len(), d.len());
        assert!(d.design.rows().iter().all(|r| r.len() == d.design.dim()));
    }
});
