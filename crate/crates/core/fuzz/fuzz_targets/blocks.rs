#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(spec) = std::str::from_utf8(rest) else { return };
    let n = n as usize % 64;
    if let Ok(p) = signreg::io::parse_blocks(spec, n) {
        let covered: usize = p.blocks().iter().map(|b| b.len()).sum();
        assert_eq!(covered, n);
    }
});
