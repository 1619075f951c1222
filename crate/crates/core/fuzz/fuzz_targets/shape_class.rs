#![no_main]
use libfuzzer_sys::fuzz_target;
use signreg::ShapeClass;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(spec) = std::str::from_utf8(rest) else { return };
    let n = 1 + n as usize % 32;
    let f0: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
    if let Ok(c) = ShapeClass::parse(spec, n, Some(&f0)) {
        if !matches!(c, ShapeClass::LinearSpan1D(_)) {
            assert_eq!(ShapeClass::parse(&c.to_string(), n, Some(&f0)).ok(), Some(c));
        }
    }
});
