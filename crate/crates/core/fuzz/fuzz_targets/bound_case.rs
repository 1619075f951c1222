#![no_main]
use libfuzzer_sys::fuzz_target;
use signreg::bounds::{bound_bn, BoundCase, BoundConfig, BoundInputs};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (case, inputs) = text.split_once('\n').unwrap_or((text, "{}"));
    if let Ok(c) = BoundCase::parse(case) {
        assert_eq!(BoundCase::parse(&c.name()).ok(), Some(c));
        if let Ok(inp) = serde_json::from_str::<BoundInputs>(inputs) {
            if let Ok(v) = bound_bn(c, &inp, &BoundConfig::default()) {
                assert!(!v.is_nan());
            }
        }
    }
});
