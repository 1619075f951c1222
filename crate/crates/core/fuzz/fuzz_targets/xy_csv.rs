#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = signreg::io::parse_xy_csv(text) {
        assert_eq!(table.x.len(), table.y.len());
        assert!(table.x.iter().chain(&table.y).all(|v| v.is_finite()));
        if let Ok((d, extra)) = table.into_data() {
            assert!(d.design.points().windows(2).all(|w| w[0] <= w[1]));
            assert!(extra.map_or(true, |e| e.len() == d.len()));
        }
    }
});
