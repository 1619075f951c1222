use proptest::prelude::*;
use signreg::bounds::*;
use signreg::Error;

const E: f64 = std::f64::consts::E;

fn phi(l: f64) -> f64 {
    l - l.ln() - 1.0
}

fn families() -> Vec<Box<dyn Fn(f64) -> f64>> {
    vec![
        Box::new(|p| qbeta_moment(0.7, p)),
        Box::new(|_| 2.5),
        // finite up to 1.6, then infinite
        Box::new(|p| if p <= 1.6 { 1.0 + p } else { f64::INFINITY }),
        // a decreasing then increasing moment curve
        Box::new(|p| 1.0 + (p - 1.3).powi(2) * 4.0),
    ]
}

proptest! {
    #[test]
    fn rate_monotone(sigma in 0.0f64..10.0, ds in 0.0f64..5.0, d in 1usize..50, extra in 0usize..1000, p in 1.0f64..=2.0) {
        let n = (d + extra + 1) as f64;
        let d = d as f64;
        let r = rate_term(sigma, d, n, p).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert!(rate_term(sigma + ds, d, n, p).unwrap() >= r);
        if d + 1.0 <= n {
            prop_assert!(rate_term(sigma, d + 1.0, n, p).unwrap() >= r);
        }
    }

    #[test]
    fn optimum_below_grid(which in 0usize..4, d in 1usize..20, extra in 0usize..100_000) {
        let fams = families();
        let f = &fams[which];
        let n = (d + extra) as f64;
        let d = d as f64;
        let best = optimize_p(f.as_ref(), d, n).unwrap();
        prop_assert!((1.0..=2.0).contains(&best.p));
        for i in 0..=1000 {
            let p = 1.0 + i as f64 / 1000.0;
            let r = rate_term(f(p), d, n, p).unwrap();
            prop_assert!(best.value <= r * (1.0 + 1e-12), "p={} r={} best={:?}", p, r, best);
        }
    }

    #[test]
    fn ln_solves_equation(beta in 0.1f64..4.0, lr in 0.0f64..25.0, d in 1usize..10) {
        let d = d as f64;
        let n = d * (E / 2.0).powf(beta) * lr.exp();
        let l = ln_solver(beta, n, d).unwrap();
        prop_assert!(l >= 2.0);
        prop_assert!((phi(l) - (n / d).ln() / beta).abs() <= 1e-10 * l.max(1.0));
        if let Some((lo, hi)) = ln_bracket(beta, n, d).unwrap() {
            prop_assert!(lo <= l + 1e-12 && l <= hi + 1e-12, "{} {} {}", lo, l, hi);
        }
    }

    #[test]
    fn closed_form_matches_optimum(beta in 0.2f64..3.0, lr in 0.0f64..12.0) {
        let n = 10.0 * (E / 2.0).powf(beta) * lr.exp();
        let best = optimize_p(&|p| qbeta_moment(beta, p), 10.0, n).unwrap();
        let want = heavy_tail_closed_form(beta, n, 10.0).unwrap();
        prop_assert!((best.value / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bounds_monotone_in_variation(p in 1.0f64..=2.0, sigma in 0.01f64..5.0, n in 10.0f64..1e6, x in 0.0f64..100.0, dx in 0.0f64..100.0, k in 1usize..5) {
        let cfg = BoundConfig::default();
        let base = BoundInputs {
            n: Some(n), p: Some(p), sigma: Some(sigma), k: Some(k), m: Some(2),
            v: Some(1.0), w: Some(1.0), v_j: Some(1.0), v_prime: Some(1.0),
            length: Some(1.0), alpha: Some(0.5), a: Some(1.5), w0: Some(0.01),
            ..Default::default()
        };
        let pairs: Vec<(BoundCase, fn(&mut BoundInputs, f64))> = vec![
            (BoundCase::Monotone, |b, v| b.v_j = Some(v)),
            (BoundCase::ConvexConcaveEquispaced, |b, v| b.w = Some(v)),
            (BoundCase::ConvexConcaveEquispaced, |b, v| b.v = Some(v)),
            (BoundCase::DerivativeVariation, |b, v| b.v_prime = Some(v)),
            (BoundCase::PowerModulus, |b, v| b.v = Some(v)),
            (BoundCase::SingleIndex, |b, v| b.v = Some(v)),
        ];
        for (case, set) in pairs {
            let mut lo = base.clone();
            set(&mut lo, x);
            let mut hi = base.clone();
            set(&mut hi, x + dx);
            let a = bound_bn(case, &lo, &cfg).unwrap();
            let b = bound_bn(case, &hi, &cfg).unwrap();
            prop_assert!(a.is_finite() && a >= 0.0);
            prop_assert!(b >= a * (1.0 - 1e-14), "{:?}: {} > {}", case, a, b);
        }
    }

    #[test]
    fn constants_scale_linearly(c in 0.1f64..10.0, p in 1.0f64..=2.0) {
        let inp = BoundInputs {
            n: Some(500.0), p: Some(p), sigma: Some(1.3), k: Some(2), v_j: Some(4.0), dim: Some(3),
            ..Default::default()
        };
        let one = BoundConfig::default();
        let scaled = BoundConfig { kappa: c, c };
        for case in [BoundCase::Monotone, BoundCase::LinearSpace] {
            let a = bound_bn(case, &inp, &one).unwrap();
            let b = bound_bn(case, &inp, &scaled).unwrap();
            prop_assert!((b - c * a).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }
}

#[test]
fn spec_examples() {
    let z = (2.0 - 3f64.ln()).exp();
    assert!((z - 2.4630).abs() < 1e-4);
    assert!((ln_solver(1.0, z, 1.0).unwrap() - 3.0).abs() < 1e-10);
    assert!(matches!(ln_solver(2.0, 1.5, 1.0), Err(Error::Refusal(_))));
    let l = ln_solver(2.0, 1e4, 1.0).unwrap();
    let (lo, hi) = ln_bracket(2.0, 1e4, 1.0).unwrap().unwrap();
    assert!(lo <= l && l <= hi);

    let best = optimize_p(&|_| 1.7, 3.0, 300.0).unwrap();
    assert_eq!(best.p, 2.0);
    assert!((best.value - 0.17).abs() < 1e-12);
}

#[test]
fn limiting_cases() {
    let cfg = BoundConfig::default();
    let inp = BoundInputs {
        n: Some(1000.0), p: Some(1.0), sigma: Some(2.0), k: Some(2), pieces: Some(3), v_j: Some(5.0),
        v: Some(3.0), w: Some(7.0), v_prime: Some(2.0), length: Some(1.0), alpha: Some(1.0), a: Some(1.0),
        w0: Some(0.0), m: Some(2), dim: Some(4), ..Default::default()
    };
    // p = 1: every rate term reduces to a multiple of sigma
    assert_eq!(bound_bn(BoundCase::PiecewiseConstant, &inp, &cfg).unwrap(), 2.0);
    assert_eq!(bound_bn(BoundCase::Monotone, &inp, &cfg).unwrap(), 4.0);
    assert_eq!(bound_bn(BoundCase::SingleIndex, &inp, &cfg).unwrap(), 4.0);
    assert_eq!(bound_bn(BoundCase::DerivativeVariation, &inp, &cfg).unwrap(), 4.0);
    assert_eq!(bound_bn(BoundCase::PowerModulus, &inp, &cfg).unwrap(), 4.0);
    assert!((bound_bn(BoundCase::ConvexConcaveEquispaced, &inp, &cfg).unwrap() - (4.0 + 3.0 / 1000.0)).abs() < 1e-15);
    assert_eq!(bound_bn(BoundCase::LinearSpace, &inp, &cfg).unwrap(), 2.0);

    // zero variation: only the parametric term survives
    let flat = BoundInputs { p: Some(2.0), v_j: Some(0.0), ..inp.clone() };
    let b = bound_bn(BoundCase::Monotone, &flat, &cfg).unwrap();
    assert!((b - 2.0 * (5.0f64 / 1000.0).sqrt()).abs() < 1e-15);

    // alpha = 1 gives the equispaced exponent 2
    assert_eq!(modulus_exponent(1.0), 2.0);
    assert!(modulus_exponent(1e-9) > 1.0);

    let inf = BoundInputs { sigma: Some(f64::INFINITY), p: Some(2.0), ..inp.clone() };
    for case in BoundCase::ALL {
        assert_eq!(bound_bn(case, &inf, &cfg).unwrap(), f64::INFINITY, "{case:?}");
    }
    for case in BoundCase::ALL {
        let missing = BoundInputs { n: Some(10.0), p: Some(2.0), sigma: Some(1.0), ..Default::default() };
        assert!(matches!(bound_bn(case, &missing, &cfg), Err(Error::Structural(_))), "{case:?}");
        assert_eq!(BoundCase::parse(&case.name()).unwrap(), case);
    }
}
