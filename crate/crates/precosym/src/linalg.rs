//! Dense real helpers: ranks, null spaces, pivot selection.

use nalgebra::{DMatrix, DVector};

use std::sync::atomic::{AtomicU64, Ordering};

/// Default relative singular-value cutoff for numerical rank.
pub const RANK_RTOL: f64 = 1e-9;

static RANK_RTOL_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695);

/// Current relative rank cutoff (process-wide).
pub fn rank_rtol() -> f64 {
    f64::from_bits(RANK_RTOL_BITS.load(Ordering::Relaxed))
}

/// Overrides the process-wide relative rank cutoff.
pub fn set_rank_rtol(tol: f64) {
    RANK_RTOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Cutoff below which a singular value counts as zero: `rank_rtol()·max(σ_max, 1)`.
pub fn rank_cutoff(s: &[f64]) -> f64 {
    rank_rtol() * s.first().copied().unwrap_or(0.0).max(1.0)
}

pub fn rank(m: &DMatrix<f64>) -> usize {
    let s = singular_values(m);
    let cut = rank_cutoff(&s);
    s.iter().filter(|&&v| v > cut).count()
}

/// Orthonormal basis (as columns) of `{x : m x = 0}`.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if c == 0 {
        return DMatrix::zeros(0, 0);
    }
    if r == 0 {
        return DMatrix::identity(c, c);
    }
    let padded = if r < c {
        let mut p = DMatrix::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = rank_rtol() * smax.max(1.0);
    let cols: Vec<DVector<f64>> = (0..vt.nrows())
        .filter(|&i| s.get(i).copied().unwrap_or(0.0) <= cut)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(c, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the column space.
pub fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let cut = rank_rtol() * smax.max(1.0);
    let cols: Vec<DVector<f64>> = (0..s.len())
        .filter(|&i| s[i] > cut)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(r, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Minimum-norm least-squares solution of `m x = b`.
pub fn lstsq(m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if m.ncols() == 0 {
        return DVector::zeros(0);
    }
    if m.nrows() == 0 {
        return DVector::zeros(m.ncols());
    }
    let svd = m.clone().svd(true, true);
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let eps = rank_rtol() * smax.max(1.0);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Greedy complete-pivoting elimination for `rank` steps. Ties resolve to
/// the smallest (row, column) index, so the choice is deterministic.
pub fn pivots(m: &DMatrix<f64>, rank: usize) -> (Vec<usize>, Vec<usize>) {
    let mut a = m.clone();
    let (nr, nc) = a.shape();
    let mut rows = Vec::with_capacity(rank);
    let mut cols = Vec::with_capacity(rank);
    let mut row_used = vec![false; nr];
    let mut col_used = vec![false; nc];
    for _ in 0..rank.min(nr).min(nc) {
        let mut best = (usize::MAX, usize::MAX, -1.0);
        for i in (0..nr).filter(|&i| !row_used[i]) {
            for j in (0..nc).filter(|&j| !col_used[j]) {
                let v = a[(i, j)].abs();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let (pi, pj, _) = best;
        if pi == usize::MAX {
            break;
        }
        row_used[pi] = true;
        col_used[pj] = true;
        rows.push(pi);
        cols.push(pj);
        let piv = a[(pi, pj)];
        if piv == 0.0 {
            continue;
        }
        for i in (0..nr).filter(|&i| !row_used[i]) {
            let f = a[(i, pj)] / piv;
            if f != 0.0 {
                for j in 0..nc {
                    let v = a[(pi, j)];
                    a[(i, j)] -= f * v;
                }
            }
        }
    }
    (rows, cols)
}

/// Symmetric principal pivots: indices `P` such that `m[P, P]` is regular,
/// chosen by greedy diagonal pivoting on an antisymmetric or symmetric matrix
/// (2×2 blocks for antisymmetric input).
pub fn antisymmetric_pivots(m: &DMatrix<f64>, candidates: &[usize], preset: &[usize]) -> Vec<usize> {
    let n = m.nrows();
    let mut chosen: Vec<usize> = preset.to_vec();
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        let schur = schur_complement(m, &chosen);
        for (ai, &i) in candidates.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            for &j in candidates.iter().skip(ai + 1) {
                if chosen.contains(&j) {
                    continue;
                }
                let v = schur[(i, j)].abs();
                if best.map_or(true, |b| v > b.2) {
                    best = Some((i, j, v));
                }
            }
        }
        match best {
            Some((i, j, v)) if v > rank_rtol() * scale => {
                chosen.push(i);
                chosen.push(j);
            }
            _ => break,
        }
        if chosen.len() >= n {
            break;
        }
    }
    chosen
}

/// Principal pivots of a symmetric matrix: `m[P, P]` regular with
/// `|P| = rank`. Largest Schur-complement diagonal first, then a 2×2 block
/// when every remaining diagonal entry has vanished.
pub fn symmetric_pivots(m: &DMatrix<f64>, rank: usize) -> Vec<usize> {
    let n = m.nrows();
    let scale = max_abs(m).max(1.0);
    let mut chosen: Vec<usize> = Vec::with_capacity(rank);
    while chosen.len() < rank {
        let s = schur_complement(m, &chosen);
        let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
        let best = free
            .iter()
            .map(|&i| (i, s[(i, i)].abs()))
            .fold(None, |b: Option<(usize, f64)>, c| match b {
                Some(b) if b.1 >= c.1 => Some(b),
                _ => Some(c),
            });
        match best {
            Some((i, v)) if v > rank_rtol() * scale => chosen.push(i),
            _ => {
                if chosen.len() + 2 > rank {
                    break;
                }
                let mut pair: Option<(usize, usize, f64)> = None;
                for (a, &i) in free.iter().enumerate() {
                    for &j in &free[a + 1..] {
                        let det = (s[(i, i)] * s[(j, j)] - s[(i, j)] * s[(j, i)]).abs();
                        if pair.map_or(true, |p| det > p.2) {
                            pair = Some((i, j, det));
                        }
                    }
                }
                match pair {
                    Some((i, j, d)) if d > rank_rtol() * scale * scale => {
                        chosen.push(i);
                        chosen.push(j);
                    }
                    _ => break,
                }
            }
        }
    }
    chosen
}

/// `m − m[:, S] m[S, S]⁻¹ m[S, :]` (full size, rows/cols of `S` zeroed).
pub fn schur_complement(m: &DMatrix<f64>, s: &[usize]) -> DMatrix<f64> {
    if s.is_empty() {
        return m.clone();
    }
    let n = m.nrows();
    let k = s.len();
    let mss = DMatrix::from_fn(k, k, |a, b| m[(s[a], s[b])]);
    let inv = match mss.try_inverse() {
        Some(i) => i,
        None => return m.clone(),
    };
    let ms = DMatrix::from_fn(n, k, |i, b| m[(i, s[b])]);
    let sm = DMatrix::from_fn(k, n, |a, j| m[(s[a], j)]);
    let mut out = m - ms * inv * sm;
    for &i in s {
        for j in 0..n {
            out[(i, j)] = 0.0;
            out[(j, i)] = 0.0;
        }
    }
    out
}

/// Reciprocal 2-norm condition number `σ_min/σ_max` (0 for empty or zero).
pub fn rcond(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if a > 0.0 => b / a,
        (None, None) => 1.0,
        _ => 0.0,
    }
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cutoff_and_symmetric_pivots() {
        assert_eq!(rank_rtol(), RANK_RTOL);
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = symmetric_pivots(&m, 2);
        assert_eq!(p, vec![0, 1]);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(symmetric_pivots(&m, 1), vec![0]);
    }
}
