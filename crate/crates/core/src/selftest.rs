//! Randomised agreement checks between the fast supremum oracles and the
//! exhaustive search.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::model::{Data, Design, Partition};
use crate::sign::{brute_force_sup_t, sup_t, ShapeClass};
use crate::sim::replication_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Nondecreasing,
    MonotoneEither,
    #[serde(rename = "piecewise-monotone-2")]
    PiecewiseMonotone2,
    FixedPartitionConstant,
    #[serde(rename = "linear-span-1d")]
    LinearSpan1D,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Nondecreasing,
        Variant::MonotoneEither,
        Variant::PiecewiseMonotone2,
        Variant::FixedPartitionConstant,
        Variant::LinearSpan1D,
    ];
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub class: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f: Vec<f64>,
    pub fast: f64,
    pub brute: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub variant: Variant,
    pub instances: usize,
    pub mismatches: usize,
    /// Instances where the fast oracle's witness did not reproduce its value.
    pub inexact_witnesses: usize,
    pub first_mismatch: Option<Mismatch>,
}

fn sorted_levels(rng: &mut ChaCha8Rng, count: usize, up: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..count).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
    v.sort_by(f64::total_cmp);
    if !up {
        v.reverse();
    }
    v
}

/// Tied integer abscissas, half-integer responses and a member `f`, so every
/// statistic is exact in floating point.
pub fn random_instance(variant: Variant, max_n: usize, rng: &mut ChaCha8Rng) -> Result<(ShapeClass, Data, Vec<f64>)> {
    let n = rng.gen_range(1..=max_n.max(1));
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(0..5) as f64).collect();
    x.sort_by(f64::total_cmp);
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-8i32..=8) as f64 / 2.0).collect();
    let design = Design::new(x)?;
    let levels = design.levels();
    let nl = levels.len();
    let spread = |lv: &[f64]| {
        let mut f = vec![0.0; n];
        for (l, v) in levels.iter().zip(lv) {
            l.clone().for_each(|i| f[i] = *v);
        }
        f
    };
    let (class, f) = match variant {
        Variant::Nondecreasing => (ShapeClass::Nondecreasing, spread(&sorted_levels(rng, nl, true))),
        Variant::MonotoneEither => {
            let up = rng.gen();
            (ShapeClass::MonotoneEither, spread(&sorted_levels(rng, nl, up)))
        }
        Variant::PiecewiseMonotone2 => {
            let cut = rng.gen_range(0..=nl);
            let (u1, u2) = (rng.gen(), rng.gen());
            let mut lv = sorted_levels(rng, cut, u1);
            lv.extend(sorted_levels(rng, nl - cut, u2));
            (ShapeClass::PiecewiseMonotone(2), spread(&lv))
        }
        Variant::FixedPartitionConstant => {
            let mut blocks = Vec::new();
            let mut start = 0;
            for (j, l) in levels.iter().enumerate() {
                if j + 1 == nl || rng.gen_bool(0.5) {
                    blocks.push(start..l.end);
                    start = l.end;
                }
            }
            let p = Partition::new(n, blocks)?;
            let mut f = vec![0.0; n];
            for b in p.blocks() {
                let v = rng.gen_range(-3i32..=3) as f64;
                b.clone().for_each(|i| f[i] = v);
            }
            (ShapeClass::FixedPartitionConstant(p), f)
        }
        Variant::LinearSpan1D => {
            let mut lv: Vec<f64> = (0..nl).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
            lv.shuffle(rng);
            let f0 = spread(&lv);
            let a = rng.gen_range(-4i32..=4) as f64 / 2.0;
            let f = f0.iter().map(|v| a * v).collect();
            (ShapeClass::LinearSpan1D(f0), f)
        }
    };
    Ok((class, Data::new(design, y)?, f))
}

/// Compares `sup_t` with `brute_force_sup_t` on `instances` random problems
/// with at most `max_n` points. Agreement is required bit for bit.
pub fn oracle_equivalence(variant: Variant, instances: usize, max_n: usize, seed: u64) -> Result<EquivalenceReport> {
    let outcomes: Vec<(Option<Mismatch>, bool)> = (0..instances as u64)
        .into_par_iter()
        .map(|i| -> Result<(Option<Mismatch>, bool)> {
            let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed ^ variant as u64, i));
            let (class, data, f) = random_instance(variant, max_n, &mut rng)?;
            let fast = sup_t(&class, &data, &f)?;
            let brute = brute_force_sup_t(&class, &data, &f)?;
            let mismatch = (fast.value != brute.value).then(|| Mismatch {
                class: class.to_string(),
                x: data.design.points().to_vec(),
                y: data.y.clone(),
                f: f.clone(),
                fast: fast.value,
                brute: brute.value,
            });
            Ok((mismatch, fast.exact))
        })
        .collect::<Result<_>>()?;
    let mismatches = outcomes.iter().filter(|o| o.0.is_some()).count();
    Ok(EquivalenceReport {
        variant,
        instances,
        mismatches,
        inexact_witnesses: outcomes.iter().filter(|o| !o.1).count(),
        first_mismatch: outcomes.into_iter().find_map(|o| o.0),
    })
}
