#![no_main]
use libfuzzer_sys::fuzz_target;
use signreg::curves::{Curve, TestCurve};

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = std::str::from_utf8(data) else { return };
    if let Ok(c) = TestCurve::parse(spec) {
        for t in [0.0, 0.25, 0.5, 1.0] {
            let _ = c.value(t);
        }
        let _ = TestCurve::parse(&c.to_string());
    }
});
