//! Feasibility of order-two targets through extremal members: convex
//! sequences (also convex and monotone ones) are closed under pointwise
//! suprema, so targets are feasible iff the greatest such minorant of the
//! upper targets meets the lower ones. Strict targets carry a symbolic
//! infinitesimal `eps`, compared lexicographically.

use std::cmp::Ordering;

use num_traits::Zero;

use crate::exact::Q;

/// `a + b eps`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) struct Eps {
    pub a: Q,
    pub b: Q,
}

impl Eps {
    pub fn new(a: Q, b: Q) -> Self {
        Eps { a, b }
    }
    fn sub(&self, o: &Eps) -> Eps {
        Eps { a: &self.a - &o.a, b: &self.b - &o.b }
    }
    fn add(&self, o: &Eps) -> Eps {
        Eps { a: &self.a + &o.a, b: &self.b + &o.b }
    }
    fn scale(&self, s: &Q) -> Eps {
        Eps { a: &self.a * s, b: &self.b * s }
    }
    fn neg(&self) -> Eps {
        Eps { a: -&self.a, b: -&self.b }
    }
    fn sign(&self) -> Ordering {
        if !self.a.is_zero() {
            return self.a.cmp(&Q::zero());
        }
        self.b.cmp(&Q::zero())
    }
}

impl PartialOrd for Eps {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Eps {
    fn cmp(&self, o: &Self) -> Ordering {
        self.sub(o).sign()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Mono {
    Free,
    Up,
    Down,
}

/// Greatest convex (and `mono`) minorant of `hi` on `x`; `None` entries are
/// unconstrained and `None` in the result means unbounded above.
fn greatest_convex_minorant(x: &[Q], hi: &[Option<Eps>], mono: Mono) -> Vec<Option<Eps>> {
    let n = x.len();
    let mut u: Vec<Option<Eps>> = hi.to_vec();
    // monotone members satisfy g_i <= g_j <= u_j, so bounds propagate
    match mono {
        Mono::Up => {
            for i in (0..n.saturating_sub(1)).rev() {
                if let Some(next) = u[i + 1].clone() {
                    if u[i].as_ref().is_none_or(|v| next < *v) {
                        u[i] = Some(next);
                    }
                }
            }
        }
        Mono::Down => {
            for i in 1..n {
                if let Some(prev) = u[i - 1].clone() {
                    if u[i].as_ref().is_none_or(|v| prev < *v) {
                        u[i] = Some(prev);
                    }
                }
            }
        }
        Mono::Free => {}
    }
    let pts: Vec<usize> = (0..n).filter(|&i| u[i].is_some()).collect();
    let y = |i: usize| u[i].clone().expect("finite");
    let mut hull: Vec<usize> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop j unless it lies strictly below the chord from i to p
            let lhs = y(j).sub(&y(i)).scale(&(&x[p] - &x[i]));
            let rhs = y(p).sub(&y(i)).scale(&(&x[j] - &x[i]));
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let mut out = vec![None; n];
    if hull.is_empty() {
        return out;
    }
    let mut seg = 0;
    for i in hull[0]..=*hull.last().expect("nonempty") {
        while seg + 1 < hull.len() && hull[seg + 1] < i {
            seg += 1;
        }
        let a = hull[seg];
        out[i] = Some(if i == a || seg + 1 == hull.len() {
            y(a)
        } else {
            let b = hull[seg + 1];
            let t = (&x[i] - &x[a]) / (&x[b] - &x[a]);
            y(a).add(&y(b).sub(&y(a)).scale(&t))
        });
    }
    out
}

/// Is there a sequence on `x` that is convex (`convex`) or concave, monotone
/// as `mono` asks, with `lo_i <= g_i <= hi_i`?
pub(super) fn order_two_feasible(x: &[Q], lo: &[Option<Eps>], hi: &[Option<Eps>], convex: bool, mono: Mono) -> bool {
    let (lo, hi, mono) = if convex {
        (lo.to_vec(), hi.to_vec(), mono)
    } else {
        // g concave with lo <= g <= hi  <=>  -g convex with -hi <= -g <= -lo
        let neg = |v: &[Option<Eps>]| v.iter().map(|e| e.as_ref().map(Eps::neg)).collect::<Vec<_>>();
        let flip = match mono {
            Mono::Up => Mono::Down,
            Mono::Down => Mono::Up,
            Mono::Free => Mono::Free,
        };
        (neg(hi), neg(lo), flip)
    };
    let g = greatest_convex_minorant(x, &hi, mono);
    lo.iter().zip(&g).all(|(l, v)| match (l, v) {
        (Some(l), Some(v)) => v >= l,
        _ => true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::qi;

    fn e(v: i64) -> Option<Eps> {
        Some(Eps::new(qi(v), qi(0)))
    }

    #[test]
    fn small_cases() {
        let x: Vec<Q> = (0..3).map(qi).collect();
        // middle point above the endpoints cannot be convex
        assert!(!order_two_feasible(&x, &[None, e(1), None], &[e(0), None, e(0)], true, Mono::Free));
        assert!(order_two_feasible(&x, &[None, e(1), None], &[e(0), None, e(0)], false, Mono::Free));
        // equality allowed, strictness not
        assert!(order_two_feasible(&x, &[None, e(0), None], &[e(0), None, e(0)], true, Mono::Free));
        let strict = Some(Eps::new(qi(0), qi(1)));
        assert!(!order_two_feasible(&x, &[None, strict, None], &[e(0), None, e(0)], true, Mono::Free));
        // nondecreasing: first above, last below is impossible
        assert!(!order_two_feasible(&x, &[e(1), None, None], &[None, None, e(0)], true, Mono::Up));
        assert!(order_two_feasible(&x, &[e(1), None, None], &[None, None, e(0)], true, Mono::Down));
    }
}
