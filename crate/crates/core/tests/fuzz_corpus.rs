//! Replays the checked-in fuzz seeds through the decoders so regressions in
//! any of them show up without a fuzzing toolchain.

use std::fs;
use std::path::PathBuf;

use signreg::bounds::{bound_bn, BoundCase, BoundConfig, BoundInputs};
use signreg::curves::{Curve, TestCurve};
use signreg::io::{parse_blocks, parse_f64_list, parse_index_csv, parse_usize_list, parse_xy_csv};
use signreg::sim::ScenarioSpec;
use signreg::ShapeClass;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out.into_iter().map(|p| fs::read(p).unwrap()).collect()
}

fn text(b: &[u8]) -> &str {
    std::str::from_utf8(b).expect("seeds are utf-8")
}

#[test]
fn xy_csv_seeds() {
    let mut ok = 0;
    for s in seeds("xy_csv") {
        if let Ok(t) = parse_xy_csv(text(&s)) {
            assert_eq!(t.x.len(), t.y.len());
            ok += t.into_data().is_ok() as usize;
        }
    }
    assert!(ok >= 3);
}

#[test]
fn index_csv_seeds() {
    let parsed: Vec<_> = seeds("index_csv").iter().map(|s| parse_index_csv(text(s))).collect();
    assert!(parsed.iter().filter(|p| p.is_ok()).count() >= 2);
    for d in parsed.into_iter().flatten() {
        assert!(d.design.rows().iter().all(|r| r.len() == d.design.dim()));
    }
}

#[test]
fn blocks_seeds() {
    let mut ok = 0;
    for s in seeds("blocks") {
        let (n, rest) = s.split_first().unwrap();
        if let Ok(p) = parse_blocks(text(rest), *n as usize % 64) {
            assert_eq!(p.blocks().iter().map(|b| b.len()).sum::<usize>(), *n as usize % 64);
            ok += 1;
        }
    }
    assert_eq!(ok, 2);
}

#[test]
fn list_seeds() {
    let results: Vec<_> = seeds("f64_list").iter().map(|s| parse_f64_list(text(s))).collect();
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 2);
    for s in seeds("f64_list") {
        let _ = parse_usize_list(text(&s));
    }
}

#[test]
fn shape_class_seeds() {
    let mut ok = 0;
    for s in seeds("shape_class") {
        let (n, rest) = s.split_first().unwrap();
        let n = 1 + *n as usize % 32;
        let f0: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let Ok(c) = ShapeClass::parse(text(rest), n, Some(&f0)) else { continue };
        ok += 1;
        if !matches!(c, ShapeClass::LinearSpan1D(_)) {
            assert_eq!(ShapeClass::parse(&c.to_string(), n, Some(&f0)).unwrap(), c);
        }
    }
    assert!(ok >= 5);
}

#[test]
fn curve_seeds() {
    let mut ok = 0;
    for s in seeds("test_curve") {
        if let Ok(c) = TestCurve::parse(text(&s)) {
            ok += 1;
            assert!([0.0, 0.5, 1.0].iter().all(|&t| c.value(t).is_finite()));
            assert_eq!(TestCurve::parse(&c.to_string()).unwrap(), c);
        }
    }
    assert_eq!(ok, 5);
}

#[test]
fn scenario_seeds() {
    let mut built = 0;
    for s in seeds("scenario_json") {
        let Ok(spec) = ScenarioSpec::from_json(text(&s)) else { continue };
        let n = matches!(spec, ScenarioSpec::HeteroSpan { .. }).then_some(16);
        let sc = spec.build(n).unwrap();
        assert_eq!(sc.truth.len(), sc.len());
        built += 1;
    }
    assert_eq!(built, 5);
}

#[test]
fn bound_case_seeds() {
    let mut evaluated = 0;
    for s in seeds("bound_case") {
        let t = text(&s);
        let (case, inputs) = t.split_once('\n').unwrap_or((t, "{}"));
        let Ok(c) = BoundCase::parse(case) else { continue };
        assert_eq!(BoundCase::parse(&c.name()).unwrap(), c);
        let inp: BoundInputs = serde_json::from_str(inputs).unwrap();
        if let Ok(v) = bound_bn(c, &inp, &BoundConfig::default()) {
            assert!(v.is_finite() && v > 0.0);
            evaluated += 1;
        }
    }
    assert_eq!(evaluated, 3);
}
