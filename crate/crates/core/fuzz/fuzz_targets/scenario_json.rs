#![no_main]
use libfuzzer_sys::fuzz_target;
use signreg::sim::ScenarioSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = ScenarioSpec::from_json(text) {
        let n = match &spec {
            ScenarioSpec::HeteroSpan { .. } => Some(16),
            ScenarioSpec::Explicit { .. } => None,
        };
        if let Ok(sc) = spec.build(n) {
            assert_eq!(sc.truth.len(), sc.len());
            let _ = sc.sigma2_squared();
        }
    }
});
