//! Enumeration of realisable level sets and exhaustive shattering checks.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

use super::feasible::Solver;
use super::{baseline::single_index_bound, Generator, LevelSetFamily, Side, MAX_PLANAR};

/// Subsets of the points realised as level sets, as bit masks (bit `i` is
/// point `i`), sorted.
#[derive(Debug, Clone, Serialize)]
pub struct Realizable {
    pub n: usize,
    pub masks: Vec<u32>,
}

fn to_mask(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &i| m | 1 << i)
}

fn to_set(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

impl Realizable {
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        self.masks.binary_search(&to_mask(set)).is_ok()
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        self.masks.iter().map(|m| to_set(*m, self.n)).collect()
    }

    fn shatters_mask(&self, b: u32) -> bool {
        let need = 1usize << b.count_ones();
        let mut seen = HashSet::with_capacity(need);
        for m in &self.masks {
            seen.insert(m & b);
            if seen.len() == need {
                return true;
            }
        }
        false
    }

    /// Does every subset of `b` arise as `b ∩ A` for a realisable `A`?
    pub fn shatters(&self, b: &[usize]) -> bool {
        self.shatters_mask(to_mask(b))
    }
}

/// All `size`-subsets of `0..n` as masks, in increasing order.
fn combinations(n: usize, size: usize) -> Vec<u32> {
    if size > n {
        return Vec::new();
    }
    if size == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut c: u32 = (1 << size) - 1;
    let limit: u64 = 1 << n;
    while (c as u64) < limit {
        out.push(c);
        let t = c | (c - 1);
        let next = (t as u64 + 1) | ((((!t & t.wrapping_add(1)) as u64).wrapping_sub(1)) >> (c.trailing_zeros() + 1));
        if next >= limit {
            break;
        }
        c = next as u32;
    }
    out
}

fn dfs(solver: &mut Solver<'_>, j: usize, mask: u32, n: usize, out: &mut Vec<u32>) -> Result<()> {
    if j == n {
        out.push(mask);
        return Ok(());
    }
    for m in [mask, mask | 1 << j] {
        if solver.feasible_prefix(j + 1, m)? {
            dfs(solver, j + 1, m, n, out)?;
        }
    }
    Ok(())
}

/// Every subset `S` of the points with `S = {g > fbar}` (or `{g < fbar}`)
/// for some member `g`. Prefixes are extended only while realisable, which
/// is valid because each generator restricts to a class of the same kind.
pub fn realizable_subsets(fam: &LevelSetFamily) -> Result<Realizable> {
    let n = fam.len();
    let split = n.min(5);
    let mut frontier = vec![0u32];
    let mut solver = Solver::new(fam);
    for j in 0..split {
        let mut next = Vec::new();
        for &mask in &frontier {
            for m in [mask, mask | 1 << j] {
                if solver.feasible_prefix(j + 1, m)? {
                    next.push(m);
                }
            }
        }
        frontier = next;
    }
    let parts: Vec<Result<Vec<u32>>> = frontier
        .par_iter()
        .map(|&mask| {
            let mut s = Solver::new(fam);
            let mut out = Vec::new();
            dfs(&mut s, split, mask, n, &mut out)?;
            Ok(out)
        })
        .collect();
    let mut masks = Vec::new();
    for p in parts {
        masks.extend(p?);
    }
    masks.sort_unstable();
    Ok(Realizable { n, masks })
}

/// An explicit member realising `set`, if there is one.
pub fn witness(fam: &LevelSetFamily, set: &[usize]) -> Result<Option<Vec<f64>>> {
    if set.iter().any(|&i| i >= fam.len()) {
        return Err(Error::structural("index out of range"));
    }
    Solver::new(fam).member(to_mask(set))
}

#[derive(Debug, Clone, Serialize)]
pub struct Member {
    /// The full level set of `values`.
    pub set: Vec<usize>,
    /// Its intersection with the shattered subset.
    pub trace: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShatterWitness {
    pub subset: Vec<usize>,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeCertificate {
    pub generator: String,
    pub side: Side,
    pub points: usize,
    pub claimed_degree: usize,
    /// Size of the subsets tested, `claimed_degree + 1`.
    pub tested_size: usize,
    pub shattered: bool,
    pub witness: Option<ShatterWitness>,
    pub exhaustive: bool,
    pub subsets_checked: usize,
    pub realizable_sets: usize,
    /// The certificate speaks about this point set only.
    pub scope: String,
}

/// Sets of the given size shattered by `real`.
pub fn shattered_sets(real: &Realizable, size: usize) -> Vec<Vec<usize>> {
    combinations(real.n, size)
        .into_par_iter()
        .filter(|b| real.shatters_mask(*b))
        .map(|b| to_set(b, real.n))
        .collect()
}

fn certify(fam: &LevelSetFamily, real: &Realizable, claimed: usize) -> Result<DegreeCertificate> {
    let n = fam.len();
    let cands = combinations(n, claimed + 1);
    let hit = cands.par_iter().find_first(|b| real.shatters_mask(**b)).copied();
    let witness = match hit {
        None => None,
        Some(b) => {
            let mut members = Vec::new();
            let mut done = HashSet::new();
            let mut solver = Solver::new(fam);
            for &m in &real.masks {
                if done.insert(m & b) {
                    let values = solver.member(m)?.ok_or_else(|| Error::contract("realisable set without a member"))?;
                    members.push(Member { set: to_set(m, n), trace: to_set(m & b, n), values });
                }
            }
            members.sort_by_key(|m| to_mask(&m.trace));
            Some(ShatterWitness { subset: to_set(b, n), members })
        }
    };
    Ok(DegreeCertificate {
        generator: fam.generator.describe(),
        side: fam.side,
        points: n,
        claimed_degree: claimed,
        tested_size: claimed + 1,
        shattered: witness.is_some(),
        witness,
        exhaustive: true,
        subsets_checked: cands.len(),
        realizable_sets: real.len(),
        scope: format!("relative to the given {n} points"),
    })
}

/// Checks exhaustively that no `claimed + 1` points are shattered by the
/// realisable level sets of `fam`.
pub fn degree_upper_check(fam: &LevelSetFamily, claimed: usize) -> Result<DegreeCertificate> {
    let real = realizable_subsets(fam)?;
    certify(fam, &real, claimed)
}

/// Largest size of a shattered subset (shattering is inherited by subsets,
/// so the search stops at the first size with none).
pub fn empirical_degree(fam: &LevelSetFamily) -> Result<usize> {
    let real = realizable_subsets(fam)?;
    let mut d = 0;
    while d < real.n && combinations(real.n, d + 1).par_iter().any(|b| real.shatters_mask(*b)) {
        d += 1;
    }
    Ok(d)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremalCertificate {
    pub claimed_degree: usize,
    pub above: DegreeCertificate,
    pub below: DegreeCertificate,
    /// Neither side shatters `claimed_degree + 1` points.
    pub holds: bool,
}

/// Degree check of `fbar` for both level-set families.
pub fn extremal_check(points: Vec<Vec<f64>>, fbar: Vec<f64>, generator: Generator, claimed: usize) -> Result<ExtremalCertificate> {
    let fam = LevelSetFamily::new(points, fbar, generator, Side::Above)?;
    let above = degree_upper_check(&fam, claimed)?;
    let below = degree_upper_check(&fam.with_side(Side::Below), claimed)?;
    let holds = !above.shattered && !below.shattered;
    Ok(ExtremalCertificate { claimed_degree: claimed, above, below, holds })
}

/// Checks the single-index bound `(m + 1) K` for a reference function whose
/// link takes at most `k` values.
pub fn single_index_degree_check(points: Vec<Vec<f64>>, fbar: Vec<f64>, k: usize) -> Result<ExtremalCertificate> {
    if points.len() > MAX_PLANAR {
        return Err(Error::refusal(format!("{} points exceed the planar cap of {MAX_PLANAR}", points.len())));
    }
    let mut levels = fbar.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if k == 0 || levels.len() > k {
        return Err(Error::contract(format!("fbar takes {} values, more than K = {k}", levels.len())));
    }
    let m = points.first().map_or(1, |p| p.len());
    extremal_check(points, fbar, Generator::SingleIndex, single_index_bound(m, k))
}
