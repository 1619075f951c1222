//! Least-squares building blocks used to seed the sieve: weighted isotonic
//! regression, optimal segmentations and projection onto piecewise-monotone
//! sequences.

/// Weighted pool-adjacent-violators; nondecreasing fit when `up`.
pub fn isotonic(values: &[f64], weights: &[f64], up: bool) -> Vec<f64> {
    let n = values.len();
    let sign = if up { 1.0 } else { -1.0 };
    // blocks of (weighted mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let mut cur = (sign * values[i], weights[i], 1usize);
        while let Some(&(m, w, l)) = blocks.last() {
            if m <= cur.0 {
                break;
            }
            blocks.pop();
            let tw = w + cur.1;
            let mean = if tw > 0.0 { (m * w + cur.0 * cur.1) / tw } else { (m + cur.0) / 2.0 };
            cur = (mean, tw, l + cur.2);
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(n);
    for (m, _, l) in blocks {
        out.extend(std::iter::repeat_n(sign * m, l));
    }
    out
}

fn sse(values: &[f64], weights: &[f64], fit: &[f64]) -> f64 {
    values.iter().zip(weights).zip(fit).map(|((v, w), f)| w * (v - f) * (v - f)).sum()
}

/// Optimal weighted least-squares segmentations into `1..=kmax` blocks.
/// Entry `K - 1` holds the block boundaries (exclusive ends) for `K` blocks.
pub fn segmentations(values: &[f64], weights: &[f64], kmax: usize) -> Vec<Vec<usize>> {
    let n = values.len();
    let kmax = kmax.min(n).max(1);
    let mut sw = vec![0.0; n + 1];
    let mut swm = vec![0.0; n + 1];
    let mut swm2 = vec![0.0; n + 1];
    for i in 0..n {
        sw[i + 1] = sw[i] + weights[i];
        swm[i + 1] = swm[i] + weights[i] * values[i];
        swm2[i + 1] = swm2[i] + weights[i] * values[i] * values[i];
    }
    let cost = |a: usize, b: usize| -> f64 {
        let w = sw[b] - sw[a];
        if w <= 0.0 {
            return 0.0;
        }
        let s = swm[b] - swm[a];
        (swm2[b] - swm2[a] - s * s / w).max(0.0)
    };
    let inf = f64::INFINITY;
    let mut dp = vec![vec![inf; n + 1]; kmax + 1];
    let mut arg = vec![vec![0usize; n + 1]; kmax + 1];
    dp[0][0] = 0.0;
    for k in 1..=kmax {
        for j in k..=n {
            for i in (k - 1)..j {
                let v = dp[k - 1][i] + cost(i, j);
                if v < dp[k][j] {
                    dp[k][j] = v;
                    arg[k][j] = i;
                }
            }
        }
    }
    (1..=kmax)
        .map(|k| {
            let mut ends = Vec::with_capacity(k);
            let mut j = n;
            for kk in (1..=k).rev() {
                ends.push(j);
                j = arg[kk][j];
            }
            ends.reverse();
            ends
        })
        .collect()
}

/// Weighted block means for the given block ends.
pub fn block_means(values: &[f64], weights: &[f64], ends: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut start = 0;
    for &e in ends {
        let w: f64 = weights[start..e].iter().sum();
        let m = if w > 0.0 {
            values[start..e].iter().zip(&weights[start..e]).map(|(v, w)| v * w).sum::<f64>() / w
        } else {
            values[start..e].iter().sum::<f64>() / (e - start) as f64
        };
        out.extend(std::iter::repeat_n(m, e - start));
        start = e;
    }
    out
}

/// Least-squares projection onto sequences with at most `k` monotone runs.
pub fn project_pieces(values: &[f64], weights: &[f64], k: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut fits: Vec<Vec<(f64, Vec<f64>)>> = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..=n {
            let up = isotonic(&values[a..b], &weights[a..b], true);
            let dn = isotonic(&values[a..b], &weights[a..b], false);
            let (cu, cd) = (sse(&values[a..b], &weights[a..b], &up), sse(&values[a..b], &weights[a..b], &dn));
            fits[a].push(if cu <= cd { (cu, up) } else { (cd, dn) });
        }
    }
    let inf = f64::INFINITY;
    let mut dp = vec![vec![inf; n + 1]; k + 1];
    let mut arg = vec![vec![0usize; n + 1]; k + 1];
    for row in dp.iter_mut() {
        row[0] = 0.0;
    }
    for c in 1..=k {
        for j in 1..=n {
            for i in 0..j {
                let v = dp[c - 1][i] + fits[i][j - i - 1].0;
                if v < dp[c][j] {
                    dp[c][j] = v;
                    arg[c][j] = i;
                }
            }
        }
    }
    let mut out = vec![0.0; n];
    let mut j = n;
    let mut c = k;
    while j > 0 {
        let i = arg[c][j];
        out[i..j].copy_from_slice(&fits[i][j - i - 1].1);
        j = i;
        c -= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pava_simple() {
        let f = isotonic(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4], true);
        assert_eq!(f, vec![1.0, 2.5, 2.5, 4.0]);
        let g = isotonic(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4], false);
        assert_eq!(g, vec![2.5; 4]);
    }

    #[test]
    fn segmentation_exact_steps() {
        let v = [0.0, 0.0, 5.0, 5.0, 5.0, 1.0];
        let s = segmentations(&v, &[1.0; 6], 3);
        assert_eq!(s[2], vec![2, 5, 6]);
        assert_eq!(block_means(&v, &[1.0; 6], &s[2]), v.to_vec());
    }

    #[test]
    fn pieces_projection_is_member() {
        let v = [0.0, 2.0, 1.0, 3.0, 0.5, 4.0];
        let p = project_pieces(&v, &[1.0; 6], 2);
        assert!(crate::sign::monotone_runs(&p) <= 2);
        assert_eq!(project_pieces(&v, &[1.0; 6], 6), v.to_vec());
    }
}
