//! Rank statistics shared by the estimation and testing modules:
//! average ranks, pseudo-observations, Kendall's tau (tie-corrected, via
//! Knight's merge-sort counting), and the normal-scores correlation.

use crate::error::{FcError, Result};
use crate::normal::norm_quantile;

/// Average ranks of `x` (1-based; tied values receive the mean of the ranks
/// they occupy).
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("NaN in rank input"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for k in i..=j {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Validate a rectangular data matrix given as rows; returns `(n, d)`.
pub fn check_matrix(data: &[Vec<f64>]) -> Result<(usize, usize)> {
    let n = data.len();
    if n == 0 {
        return Err(FcError::Data("empty data matrix".into()));
    }
    let d = data[0].len();
    if d == 0 {
        return Err(FcError::Data("data matrix has no columns".into()));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != d {
            return Err(FcError::Data(format!(
                "ragged data: row {} has {} entries, expected {d}",
                i + 1,
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(FcError::Data(format!("non-finite value in data row {}", i + 1)));
        }
    }
    Ok((n, d))
}

/// Pseudo-observations: columnwise average ranks scaled by `1 / (n + 1)`.
///
/// Fails on ragged or non-finite input, fewer than two rows, or a constant
/// column (whose ranks would be non-informative).
pub fn pseudo_observations(data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let (n, d) = check_matrix(data)?;
    if n < 2 {
        return Err(FcError::Data("pseudo-observations need at least two rows".into()));
    }
    let mut out = vec![vec![0.0; d]; n];
    for j in 0..d {
        let col: Vec<f64> = data.iter().map(|row| row[j]).collect();
        if col.iter().all(|&v| v == col[0]) {
            return Err(FcError::Data(format!(
                "column {} is constant; ranks are undefined",
                j + 1
            )));
        }
        let ranks = average_ranks(&col);
        for i in 0..n {
            out[i][j] = ranks[i] / (n as f64 + 1.0);
        }
    }
    Ok(out)
}

/// Count "swaps" (discordances) in `y` by iterative merge sort.
fn merge_sort_swaps(y: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = y.len();
    let mut swaps = 0u64;
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo + width < n {
            let mid = lo + width;
            let hi = (mid + width).min(n);
            // Merge y[lo..mid] and y[mid..hi], counting inversions.
            let (mut i, mut j, mut k) = (lo, mid, lo);
            while i < mid && j < hi {
                if y[j] < y[i] {
                    swaps += (mid - i) as u64;
                    buf[k] = y[j];
                    j += 1;
                } else {
                    buf[k] = y[i];
                    i += 1;
                }
                k += 1;
            }
            while i < mid {
                buf[k] = y[i];
                i += 1;
                k += 1;
            }
            while j < hi {
                buf[k] = y[j];
                j += 1;
                k += 1;
            }
            y[lo..hi].copy_from_slice(&buf[lo..hi]);
            lo = hi;
        }
        width *= 2;
    }
    swaps
}

/// Sum of `t (t - 1) / 2` over runs of equal values in sorted order.
fn tie_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as u64;
        total += t * (t - 1) / 2;
        i = j + 1;
    }
    total
}

/// Kendall's tau (the tie-corrected `tau_b`) computed in `O(n log n)` with
/// Knight's merge-sort counting.  Without ties this coincides with the plain
/// concordance-discordance ratio.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(FcError::Data("kendall_tau inputs differ in length".into()));
    }
    if n < 2 {
        return Err(FcError::Data("kendall_tau needs at least two observations".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(FcError::Data("non-finite value in kendall_tau input".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b]).unwrap().then(y[a].partial_cmp(&y[b]).unwrap())
    });
    let pairs_x: Vec<(f64, f64)> = idx.iter().map(|&i| (x[i], y[i])).collect();
    let n0 = n as u64 * (n as u64 - 1) / 2;
    // Ties in x, and joint ties in (x, y), from the lexicographic order.
    let xs: Vec<f64> = pairs_x.iter().map(|p| p.0).collect();
    let n1 = tie_pairs(&xs);
    let n3 = tie_pairs(&pairs_x);
    // Ties in y overall.
    let mut ys: Vec<f64> = pairs_x.iter().map(|p| p.1).collect();
    let mut ys_sorted = ys.clone();
    ys_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n2 = tie_pairs(&ys_sorted);
    // Discordant pairs among those not tied in x.
    let mut buf = vec![0.0; n];
    let swaps = merge_sort_swaps(&mut ys, &mut buf);
    let concordant_minus_discordant =
        n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * swaps as i64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    if denom == 0.0 {
        return Err(FcError::Data("kendall_tau undefined for constant input".into()));
    }
    Ok(concordant_minus_discordant as f64 / denom)
}

/// Matrix of pairwise Kendall taus (unit diagonal).
pub fn kendall_tau_matrix(data: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let (_, d) = check_matrix(data)?;
    let cols: Vec<Vec<f64>> = (0..d).map(|j| data.iter().map(|r| r[j]).collect()).collect();
    let mut m = vec![vec![1.0; d]; d];
    for a in 0..d {
        for b in (a + 1)..d {
            let t = kendall_tau(&cols[a], &cols[b])?;
            m[a][b] = t;
            m[b][a] = t;
        }
    }
    Ok(m)
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(FcError::Data("pearson needs two equal-length samples".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(FcError::Data("pearson undefined for constant input".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Normal-scores (van der Waerden) correlation: the Pearson correlation of
/// the normal quantiles of the pseudo-observations.
pub fn normal_scores_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(FcError::Data("normal-scores correlation needs equal-length samples".into()));
    }
    let n = x.len() as f64;
    let zx: Vec<f64> =
        average_ranks(x).iter().map(|r| norm_quantile(r / (n + 1.0))).collect();
    let zy: Vec<f64> =
        average_ranks(y).iter().map(|r| norm_quantile(r / (n + 1.0))).collect();
    pearson(&zx, &zy)
}
