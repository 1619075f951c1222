use proptest::prelude::*;
use signreg::estimators::{
    minimize_t, regressogram, sign_coefficient, single_index_estimate, SieveConfig, Strategy as Sieve,
};
use signreg::model::ell;
use signreg::sign::{index_contains, sup_t, sup_value_index, IndexGeometry};
use signreg::*;

fn scale(y: &[f64]) -> f64 {
    1.0 + y.iter().map(|v| v.abs()).sum::<f64>()
}

fn instance(max_n: usize) -> impl Strategy<Value = Data> {
    (1..=max_n).prop_flat_map(|n| {
        (prop::collection::vec(0u8..6, n), prop::collection::vec(-8i32..=8, n)).prop_map(|(x, y)| {
            let mut x: Vec<f64> = x.into_iter().map(f64::from).collect();
            x.sort_by(f64::total_cmp);
            Data::new(Design::new(x).unwrap(), y.into_iter().map(|v| v as f64 / 2.0).collect()).unwrap()
        })
    })
}

fn cfg(s: Sieve) -> SieveConfig {
    SieveConfig::with_strategy(s)
}

const SIEVES: [Sieve; 3] = [
    Sieve::ExactTiny,
    Sieve::RegressogramDp,
    Sieve::LocalSearch,
];

fn classes() -> Vec<ShapeClass> {
    vec![
        ShapeClass::Nondecreasing,
        ShapeClass::Nonincreasing,
        ShapeClass::MonotoneEither,
        ShapeClass::PiecewiseMonotone(2),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn results_are_members_and_certified(d in instance(5)) {
        for class in classes() {
            for s in SIEVES {
                let r = minimize_t(&class, &d, &cfg(s)).unwrap();
                prop_assert!(class.contains(&d.design, &r.fhat));
                let again = sup_t(&class, &d, &r.fhat).unwrap().value;
                prop_assert!((again - r.t_value).abs() <= 1e-9 * (1.0 + again.abs()));
                prop_assert!(r.slack_bound >= 0.0 && r.certified_slack >= r.t_value - 1e-15);
            }
        }
    }

    #[test]
    fn local_search_within_slack_of_exact_tiny(d in instance(8)) {
        let et = minimize_t(&ShapeClass::Nondecreasing, &d, &cfg(Sieve::ExactTiny)).unwrap();
        let ls = minimize_t(&ShapeClass::Nondecreasing, &d, &cfg(Sieve::LocalSearch)).unwrap();
        prop_assert!(ls.t_value <= et.t_value + 1e-9 * scale(&d.y), "{} > {}", ls.t_value, et.t_value);
    }

    #[test]
    fn budget_ladders_never_increase_t(d in instance(10)) {
        for class in classes() {
            let mut prev = f64::INFINITY;
            for m in [1, 2, 3, 5, 8, 13] {
                let c = SieveConfig { max_blocks: m, ..cfg(Sieve::RegressogramDp) };
                let t = minimize_t(&class, &d, &c).unwrap().t_value;
                prop_assert!(t <= prev + 1e-9 * scale(&d.y));
                prev = t;
            }
            let mut prev = f64::INFINITY;
            for r in [1, 2, 4, 8] {
                let c = SieveConfig { restarts: r, seed: 7, ..cfg(Sieve::LocalSearch) };
                let t = minimize_t(&class, &d, &c).unwrap().t_value;
                prop_assert!(t <= prev + 1e-9 * scale(&d.y));
                prev = t;
            }
            let mut prev = f64::INFINITY;
            for sw in [1, 2, 4] {
                let c = SieveConfig { sweeps: sw, ..cfg(Sieve::RegressogramDp) };
                let t = minimize_t(&class, &d, &c).unwrap().t_value;
                prop_assert!(t <= prev + 1e-9 * scale(&d.y));
                prev = t;
            }
        }
    }

    #[test]
    fn shifting_responses_shifts_the_fit(d in instance(5), c in -4i32..=4) {
        let c = c as f64;
        let shifted = Data::new(d.design.clone(), d.y.iter().map(|v| v + c).collect()).unwrap();
        for class in classes() {
            let a = minimize_t(&class, &d, &cfg(Sieve::ExactTiny)).unwrap();
            let b = minimize_t(&class, &shifted, &cfg(Sieve::ExactTiny)).unwrap();
            prop_assert!((a.t_value - b.t_value).abs() <= 1e-12 * scale(&shifted.y));
            let moved: Vec<f64> = a.fhat.iter().map(|v| v + c).collect();
            prop_assert_eq!(moved, b.fhat);
        }
        let part = Partition::new(d.len(), d.design.levels()).unwrap();
        let a = regressogram(&part, &d).unwrap();
        let b = regressogram(&part, &shifted).unwrap();
        for (u, v) in a.fhat.iter().zip(&b.fhat) {
            prop_assert!((u + c - v).abs() <= 1e-12 * scale(&shifted.y));
        }
    }

    #[test]
    fn closed_forms_through_minimize(d in instance(9), f0 in prop::collection::vec(-4i32..=4, 9)) {
        let part = Partition::new(d.len(), d.design.levels()).unwrap();
        let via = minimize_t(&ShapeClass::FixedPartitionConstant(part.clone()), &d, &SieveConfig::default()).unwrap();
        let direct = regressogram(&part, &d).unwrap();
        prop_assert_eq!(&via.fhat, &direct.fhat);
        prop_assert!(via.t_value.abs() <= 1e-10 * scale(&d.y));
        let f0: Vec<f64> = d.design.levels().iter().flat_map(|l| {
            let v = f0[l.start] as f64;
            l.clone().map(move |_| v)
        }).collect();
        if f0.iter().any(|v| *v != 0.0) {
            let via = minimize_t(&ShapeClass::LinearSpan1D(f0.clone()), &d, &SieveConfig::default()).unwrap();
            let a = sign_coefficient(&f0, &d.y).unwrap();
            for (u, v) in via.fhat.iter().zip(&f0) {
                prop_assert!((u - a * v).abs() <= 1e-12);
            }
            prop_assert!(via.t_value.abs() <= 1e-10 * scale(&d.y));
        }
    }
}

fn planar(n: usize) -> impl Strategy<Value = IndexData> {
    (prop::collection::vec((-3i32..=3, -3i32..=3), n), prop::collection::vec(-4i32..=4, n)).prop_map(|(x, y)| {
        let rows = x.into_iter().map(|(a, b)| vec![a as f64, b as f64]).collect();
        IndexData::new(IndexDesign::new(rows).unwrap(), y.into_iter().map(f64::from).collect()).unwrap()
    })
}

// Direct enumeration: every grid angle, every monotone grid-valued link.
fn composed_oracle(d: &IndexData, resolution: usize) -> f64 {
    let geom = IndexGeometry::new(&d.design).unwrap();
    let mut grid: Vec<f64> = d.y.clone();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mids: Vec<f64> = grid.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
    let (lo, hi) = (grid[0] - 1.0, grid[grid.len() - 1] + 1.0);
    grid.extend(mids);
    grid.push(lo);
    grid.push(hi);
    let mut best = f64::INFINITY;
    for j in 0..resolution {
        let a = std::f64::consts::PI * j as f64 / resolution as f64;
        let t: Vec<f64> = d.design.rows().iter().map(|r| r[0] * a.cos() + r[1] * a.sin()).collect();
        let mut keys: Vec<f64> = t.clone();
        keys.sort_by(f64::total_cmp);
        keys.dedup();
        let lvl: Vec<usize> = t.iter().map(|v| keys.iter().position(|k| k == v).unwrap()).collect();
        let l = keys.len();
        let mut idx = vec![0usize; l];
        loop {
            let vals: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
            let up = vals.windows(2).all(|w| w[0] <= w[1]);
            let down = vals.windows(2).all(|w| w[0] >= w[1]);
            if up || down {
                let f: Vec<f64> = lvl.iter().map(|&k| vals[k]).collect();
                best = best.min(sup_value_index(&geom, &d.y, &f));
            }
            let mut p = 0;
            while p < l && idx[p] == grid.len() - 1 {
                idx[p] = 0;
                p += 1;
            }
            if p == l {
                break;
            }
            idx[p] += 1;
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn single_index_matches_composed_oracle(d in planar(4)) {
        let c = SieveConfig { angle_grid: 12, ..cfg(Sieve::ExactTiny) };
        let r = single_index_estimate(&d, &c).unwrap();
        let geom = IndexGeometry::new(&d.design).unwrap();
        prop_assert!(index_contains(&geom, &r.fhat));
        let oracle = composed_oracle(&d, 12);
        prop_assert!((r.t_value - oracle).abs() <= 1e-9 * scale(&d.y), "{} vs {}", r.t_value, oracle);
    }
}

#[test]
fn single_index_noiseless_recovery() {
    // theta* = (1, 0) is the first grid direction
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.37 - 2.0, ((i * 7) % 5) as f64]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[0].powi(3) + r[0]).collect();
    let d = IndexData::new(IndexDesign::new(rows).unwrap(), y.clone()).unwrap();
    let r = single_index_estimate(&d, &SieveConfig::with_strategy(Sieve::AngleGrid)).unwrap();
    assert_eq!(r.t_value, 0.0);
    assert_eq!(r.theta, Some(vec![1.0, 0.0]));
    assert_eq!(ell(&r.fhat, &y), 0.0);
}

#[test]
fn single_index_constant_response() {
    let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![(i % 3) as f64, (i / 3) as f64]).collect();
    let d = IndexData::new(IndexDesign::new(rows).unwrap(), vec![2.5; 6]).unwrap();
    let r = single_index_estimate(&d, &SieveConfig::default()).unwrap();
    assert!(r.fhat.iter().all(|v| *v == 2.5));
    assert_eq!(r.t_value, 0.0);
}

#[test]
fn single_index_refuses_three_dimensions() {
    let rows = vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
    let d = IndexData::new(IndexDesign::new(rows).unwrap(), vec![0.0, 1.0]).unwrap();
    assert!(matches!(single_index_estimate(&d, &SieveConfig::default()), Err(Error::Refusal(_))));
}

#[test]
fn result_json_fields() {
    let d = Data::new(Design::equispaced(3).unwrap(), vec![1.0, 3.0, 7.0]).unwrap();
    let r = regressogram(&Partition::from_sizes(&[2, 1]).unwrap(), &d).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    for k in ["fhat", "t_value", "slack_bound", "sieve_descriptor", "seed"] {
        assert!(v.get(k).is_some(), "{k}");
    }
    assert!(v.get("theta").is_none());
}
