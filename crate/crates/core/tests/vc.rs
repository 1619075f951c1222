use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signreg::model::Partition;
use signreg::vc::{
    degree_upper_check, empirical_degree, extremal_check, integer_grid, random_linear_baseline, random_planar_points,
    random_single_index_baseline, random_step_baseline, realizable_subsets, single_index_degree_check, r_monotone_bound,
    witness, Generator, LevelSetFamily, Realizable, Side, Trend,
};

fn fam(points: Vec<Vec<f64>>, fbar: Vec<f64>, g: Generator, side: Side) -> LevelSetFamily {
    LevelSetFamily::new(points, fbar, g, side).unwrap()
}

fn up1() -> Generator {
    Generator::RMonotone { r: 1, pieces: 1, trend: Trend::Up }
}

fn mask_of(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

/// Above family of nondecreasing functions: `S` is realisable iff
/// `fbar_i < fbar_j` whenever `i < j`, `i` in `S`, `j` not in `S`.
fn monotone_oracle(fbar: &[f64]) -> Vec<u32> {
    let n = fbar.len();
    (0..1u32 << n)
        .filter(|&m| {
            (0..n).all(|i| (i + 1..n).all(|j| !(m >> i & 1 == 1 && m >> j & 1 == 0) || fbar[i] < fbar[j]))
        })
        .collect()
}

/// Above family of block-constant functions.
fn partition_oracle(fbar: &[f64], p: &Partition) -> Vec<u32> {
    let n = fbar.len();
    (0..1u32 << n)
        .filter(|&m| {
            p.blocks().iter().all(|b| {
                let hi = b.clone().filter(|&i| m >> i & 1 == 1).map(|i| fbar[i]).fold(f64::NEG_INFINITY, f64::max);
                let lo = b.clone().filter(|&i| m >> i & 1 == 0).map(|i| fbar[i]).fold(f64::INFINITY, f64::min);
                hi < lo
            })
        })
        .collect()
}

fn level_set(g: &[f64], fbar: &[f64], side: Side) -> u32 {
    (0..g.len()).fold(0, |m, i| {
        let hit = match side {
            Side::Above => g[i] > fbar[i],
            Side::Below => g[i] < fbar[i],
        };
        if hit {
            m | 1 << i
        } else {
            m
        }
    })
}

fn includes(big: &Realizable, small: &Realizable) -> bool {
    small.masks.iter().all(|m| big.masks.binary_search(m).is_ok())
}

#[test]
fn rays_and_power_set() {
    let f = fam(integer_grid(3), vec![0.0; 3], up1(), Side::Above);
    let r = realizable_subsets(&f).unwrap();
    assert_eq!(r.sets(), vec![vec![], vec![2], vec![1, 2], vec![0, 1, 2]]);
    assert!(!degree_upper_check(&f, 1).unwrap().shattered);
    let c = degree_upper_check(&f, 0).unwrap();
    assert!(c.shattered);
    let w = c.witness.unwrap();
    assert_eq!(w.members.len(), 2);
    let all = fam(integer_grid(6), vec![1.0, -2.0, 0.5, 0.5, 3.0, 0.0], Generator::All, Side::Below);
    assert_eq!(realizable_subsets(&all).unwrap().len(), 64);
    assert_eq!(empirical_degree(&all).unwrap(), 6);
}

#[test]
fn fixed_partition_unions_of_blocks() {
    let p = Partition::from_sizes(&[2, 3, 1]).unwrap();
    let fbar = vec![1.0, 1.0, -1.0, -1.0, -1.0, 4.0];
    let f = fam(integer_grid(6), fbar.clone(), Generator::FixedPartition { partition: p.clone() }, Side::Above);
    let r = realizable_subsets(&f).unwrap();
    assert_eq!(r.len(), 8);
    assert_eq!(r.masks, partition_oracle(&fbar, &p));
    assert!(!degree_upper_check(&f, 3).unwrap().shattered);
}

#[test]
fn spec_degree_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let fbar = random_step_baseline(12, 1, 2, &mut rng);
        let g = Generator::RMonotone { r: 1, pieces: 1, trend: Trend::Either };
        assert!(extremal_check(integer_grid(12), fbar, g, 3).unwrap().holds);
        let lin = random_linear_baseline(10, 1, &mut rng);
        assert!(extremal_check(integer_grid(10), lin.clone(), Generator::ConvexConcave { pieces: 1 }, 3).unwrap().holds);
        let g2 = Generator::RMonotone { r: 2, pieces: 1, trend: Trend::Either };
        assert!(extremal_check(integer_grid(10), lin, g2, 3).unwrap().holds);
    }
    assert_eq!(r_monotone_bound(1, 1, 1), 2);
    assert_eq!(r_monotone_bound(2, 1, 1), 3);
    assert_eq!(r_monotone_bound(1, 3, 2), 7);
}

#[test]
fn bounds_are_tight_on_grids() {
    // a constant reference in the monotone class reaches degree 2
    let g = Generator::RMonotone { r: 1, pieces: 1, trend: Trend::Either };
    let f = fam(integer_grid(8), vec![0.0; 8], g, Side::Above);
    assert_eq!(empirical_degree(&f).unwrap(), 2);
    // monotone members only cut rays
    let c = fam(integer_grid(8), vec![0.0; 8], Generator::ConvexConcave { pieces: 1 }, Side::Above);
    assert_eq!(empirical_degree(&c).unwrap(), 2);
    let g = Generator::RMonotone { r: 2, pieces: 1, trend: Trend::Either };
    assert_eq!(empirical_degree(&fam(integer_grid(8), vec![0.0; 8], g, Side::Above)).unwrap(), 3);
}

#[test]
fn alternating_patterns_never_realisable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in 1..=3usize {
        for _ in 0..10 {
            let mut x: Vec<f64> = (0..=r).map(|_| rand::Rng::gen_range(&mut rng, -50..50) as f64 / 4.0).collect();
            x.sort_by(f64::total_cmp);
            x.dedup();
            if x.len() != r + 1 {
                continue;
            }
            let pts: Vec<Vec<f64>> = x.iter().map(|v| vec![*v]).collect();
            let same: Vec<usize> = (0..=r).filter(|i| i % 2 == (r + 1) % 2).collect();
            let other: Vec<usize> = (0..=r).filter(|i| i % 2 != (r + 1) % 2).collect();
            let up = fam(pts.clone(), vec![0.0; r + 1], Generator::RMonotone { r, pieces: 1, trend: Trend::Up }, Side::Above);
            let ru = realizable_subsets(&up).unwrap();
            assert!(!ru.contains(&same));
            assert_eq!(ru.len(), (1 << (r + 1)) - 1);
            let down = fam(pts, vec![0.0; r + 1], Generator::RMonotone { r, pieces: 1, trend: Trend::Down }, Side::Above);
            let rd = realizable_subsets(&down).unwrap();
            assert!(!rd.contains(&other));
            assert_eq!(rd.len(), (1 << (r + 1)) - 1);
        }
    }
}

#[test]
fn single_index_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..3 {
        let pts = random_planar_points(10, &mut rng);
        let fbar = random_single_index_baseline(&pts, 1, &mut rng);
        let c = single_index_degree_check(pts, fbar, 1).unwrap();
        assert_eq!(c.claimed_degree, 3);
        assert!(c.holds);
    }
    // collinear points behave like thresholds on a line
    let line: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
    let f = fam(line, vec![1.0; 6], Generator::SingleIndex, Side::Above);
    assert!(empirical_degree(&f).unwrap() <= 2);
    let one = fam(vec![vec![0.5, 0.5]], vec![2.0], Generator::SingleIndex, Side::Above);
    assert_eq!(realizable_subsets(&one).unwrap().len(), 2);
    assert_eq!(realizable_subsets(&one.with_side(Side::Below)).unwrap().len(), 2);
    assert!(single_index_degree_check(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 1.0], 1).is_err());
}

#[test]
fn caps_refuse() {
    let e = LevelSetFamily::new(integer_grid(21), vec![0.0; 21], up1(), Side::Above).unwrap_err();
    assert!(matches!(e, signreg::Error::Refusal(_)));
    let pts: Vec<Vec<f64>> = (0..13).map(|i| vec![i as f64, (i * i) as f64]).collect();
    assert!(matches!(single_index_degree_check(pts, vec![0.0; 13], 1), Err(signreg::Error::Refusal(_))));
}

/// Random members of the 2-monotone classes: affine plus hinges.
fn random_convex(x: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    let a = rng.gen_range(-4..=4) as f64;
    let b = rng.gen_range(-4..=4) as f64 / 2.0;
    let mut g: Vec<f64> = x.iter().map(|v| a + b * v).collect();
    for _ in 0..rng.gen_range(0..3) {
        let knot = rng.gen_range(-1..=x.len() as i64) as f64 + 0.5;
        let s = rng.gen_range(0..=3) as f64 / 2.0;
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi += s * (xi - knot).max(0.0);
        }
    }
    if rng.gen_bool(0.5) {
        g.iter_mut().for_each(|v| *v = -*v);
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn monotone_family_matches_closed_form(fbar in prop::collection::vec(-3i32..=3, 1..10)) {
        let mut fbar: Vec<f64> = fbar.into_iter().map(f64::from).collect();
        fbar.sort_by(f64::total_cmp);
        let n = fbar.len();
        let f = fam(integer_grid(n), fbar.clone(), up1(), Side::Above);
        let r = realizable_subsets(&f).unwrap();
        prop_assert_eq!(&r.masks, &monotone_oracle(&fbar));
        for s in r.sets() {
            let g = witness(&f, &s).unwrap().unwrap();
            prop_assert_eq!(level_set(&g, &fbar, Side::Above), mask_of(&s));
        }
    }

    #[test]
    fn partition_family_matches_closed_form(vals in prop::collection::vec(-3i32..=3, 1..5), sizes in prop::collection::vec(1usize..4, 1..5)) {
        let p = Partition::from_sizes(&sizes).unwrap();
        let fbar: Vec<f64> = p.blocks().iter().enumerate().flat_map(|(j, b)| b.clone().map(move |_| j)).map(|j| f64::from(vals[j % vals.len()])).collect();
        let f = fam(integer_grid(fbar.len()), fbar.clone(), Generator::FixedPartition { partition: p.clone() }, Side::Above);
        prop_assert_eq!(realizable_subsets(&f).unwrap().masks, partition_oracle(&fbar, &p));
    }

    #[test]
    fn sampled_members_are_enumerated(n in 3usize..9, slope in -2i32..=2, seeds in prop::collection::vec(any::<u64>(), 40), below in any::<bool>()) {
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let fbar: Vec<f64> = x.iter().map(|v| f64::from(slope) * v).collect();
        let side = if below { Side::Below } else { Side::Above };
        let f = fam(integer_grid(n), fbar.clone(), Generator::RMonotone { r: 2, pieces: 1, trend: Trend::Either }, side);
        let r = realizable_subsets(&f).unwrap();
        for s in seeds {
            let g = random_convex(&x, s);
            prop_assert!(f.contains(&g));
            prop_assert!(r.masks.binary_search(&level_set(&g, &fbar, side)).is_ok());
        }
        for s in r.sets() {
            let g = witness(&f, &s).unwrap().unwrap();
            prop_assert!(f.contains(&g));
        }
    }

    #[test]
    fn duality(fbar in prop::collection::vec(-2i32..=2, 2..9), kind in 0usize..4) {
        let n = fbar.len();
        let fbar: Vec<f64> = fbar.into_iter().map(f64::from).collect();
        let g = match kind {
            0 => Generator::RMonotone { r: 1, pieces: 3, trend: Trend::Either },
            1 => Generator::RMonotone { r: 1, pieces: n, trend: Trend::Up },
            2 => Generator::RMonotone { r: 2, pieces: 3, trend: Trend::Up },
            _ => Generator::LinearSpan { f0: fbar.iter().map(|v| v + 0.5).collect() },
        };
        let f = LevelSetFamily::new(integer_grid(n), fbar, g, Side::Below);
        prop_assume!(f.is_ok());
        let f = f.unwrap();
        prop_assert_eq!(realizable_subsets(&f).unwrap().masks, realizable_subsets(&f.dual()).unwrap().masks);
    }

    #[test]
    fn larger_classes_realise_more(n in 2usize..9, slope in 0i32..=2, below in any::<bool>()) {
        let fbar: Vec<f64> = (0..n).map(|i| f64::from(slope) * i as f64).collect();
        let side = if below { Side::Below } else { Side::Above };
        let chain = [
            Generator::RMonotone { r: 1, pieces: 1, trend: Trend::Up },
            Generator::RMonotone { r: 1, pieces: 1, trend: Trend::Either },
            Generator::RMonotone { r: 1, pieces: 2, trend: Trend::Either },
            Generator::RMonotone { r: 1, pieces: 3, trend: Trend::Either },
            Generator::All,
        ];
        let fams: Vec<Realizable> = chain.iter().map(|g| realizable_subsets(&fam(integer_grid(n), fbar.clone(), g.clone(), side)).unwrap()).collect();
        for w in fams.windows(2) {
            prop_assert!(includes(&w[1], &w[0]));
        }
        let cc = realizable_subsets(&fam(integer_grid(n), fbar.clone(), Generator::ConvexConcave { pieces: 1 }, side)).unwrap();
        let r2 = realizable_subsets(&fam(integer_grid(n), fbar.clone(), Generator::RMonotone { r: 2, pieces: 1, trend: Trend::Either }, side)).unwrap();
        prop_assert!(includes(&r2, &cc));
        prop_assert!(includes(&fams[1], &cc));
        let coarse = Partition::from_sizes(&[n]).unwrap();
        let fine = Partition::from_sizes(&vec![1; n]).unwrap();
        let pc = realizable_subsets(&fam(integer_grid(n), vec![0.0; n], Generator::FixedPartition { partition: coarse }, side)).unwrap();
        let pf = realizable_subsets(&fam(integer_grid(n), vec![0.0; n], Generator::FixedPartition { partition: fine }, side)).unwrap();
        prop_assert!(includes(&pf, &pc));
    }

    #[test]
    fn theorem_bound_never_shattered(r in 1usize..=3, big_k in 1usize..=2, extra in 0usize..3, seed in any::<u64>()) {
        let d = r_monotone_bound(r, 1, big_k);
        let n = (d + 1 + extra).min(10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        // piecewise polynomial of degree <= r - 1 with big_k pieces
        let cut = rng.gen_range(1..n);
        let coeffs: Vec<Vec<i32>> = (0..big_k).map(|_| (0..r).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let fbar: Vec<f64> = (0..n).map(|i| {
            let c = &coeffs[if big_k == 2 && i >= cut { 1 } else { 0 }];
            c.iter().enumerate().map(|(p, a)| f64::from(*a) * (i as f64).powi(p as i32)).sum()
        }).collect();
        let g = Generator::RMonotone { r, pieces: 1, trend: Trend::Either };
        let c = extremal_check(integer_grid(n), fbar, g, d);
        prop_assume!(c.is_ok());
        prop_assert!(c.unwrap().holds);
    }
}
