//! Hyper-dual matrices and frozen-pivot frames.
//!
//! Pivot rows and columns are chosen once from real data at a seed point and
//! then reused at every evaluation point, so null vectors, left null vectors
//! and particular solutions depend smoothly on the point and can be
//! differentiated through jets.

use crate::linalg;
use crate::PrecoError;
use expr_core::Jet;
use nalgebra::DMatrix;

/// Dense row-major matrix of jets.
#[derive(Clone, Debug)]
pub struct JetMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Jet>,
}

impl JetMat {
    pub fn zeros(rows: usize, cols: usize) -> JetMat {
        JetMat {
            rows,
            cols,
            data: vec![Jet::constant(0.0); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Jet>>) -> JetMat {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let data = rows.into_iter().flatten().collect();
        JetMat { rows: r, cols: c, data }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<Jet>) -> JetMat {
        assert_eq!(data.len(), rows * cols);
        JetMat { rows, cols, data }
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.cols + j] = v;
    }

    pub fn real(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).re())
    }

    pub fn transpose(&self) -> JetMat {
        let mut t = JetMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn sub(&self, rows: &[usize], cols: &[usize]) -> JetMat {
        let mut m = JetMat::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Jet]) -> Vec<Jet> {
        (0..self.rows)
            .map(|i| {
                let mut acc = Jet::constant(0.0);
                for j in 0..self.cols {
                    acc += &(self.get(i, j) * &v[j]);
                }
                acc
            })
            .collect()
    }
}

/// Solves `a x = b` column by column with partial pivoting on real parts.
pub fn solve(a: &JetMat, b: &JetMat) -> Result<JetMat, PrecoError> {
    let n = a.rows;
    assert_eq!(a.cols, n, "square system expected");
    assert_eq!(b.rows, n);
    let mut m = a.clone();
    let mut r = b.clone();
    let scale = m
        .data
        .iter()
        .fold(0.0f64, |s, v| s.max(v.re().abs()))
        .max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if m.get(i, k).re().abs() > m.get(p, k).re().abs() {
                p = i;
            }
        }
        if m.get(p, k).re().abs() <= 1e-14 * scale {
            return Err(PrecoError::Singular);
        }
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            for j in 0..r.cols {
                r.data.swap(k * r.cols + j, p * r.cols + j);
            }
        }
        let inv = m.get(k, k).recip();
        for i in k + 1..n {
            let f = m.get(i, k) * &inv;
            if f.coeffs().iter().all(|v| *v == 0.0) {
                continue;
            }
            for j in k..n {
                let v = m.get(i, j) - &(&f * m.get(k, j));
                m.set(i, j, v);
            }
            for j in 0..r.cols {
                let v = r.get(i, j) - &(&f * r.get(k, j));
                r.set(i, j, v);
            }
        }
    }
    let mut x = JetMat::zeros(n, r.cols);
    for j in 0..r.cols {
        for i in (0..n).rev() {
            let mut acc = r.get(i, j).clone();
            for k in i + 1..n {
                acc -= &(m.get(i, k) * x.get(k, j));
            }
            x.set(i, j, &acc / m.get(i, i));
        }
    }
    Ok(x)
}

pub fn solve_vec(a: &JetMat, b: &[Jet]) -> Result<Vec<Jet>, PrecoError> {
    let bm = JetMat::from_flat(b.len(), 1, b.to_vec());
    Ok(solve(a, &bm)?.data)
}

pub fn inverse(a: &JetMat) -> Result<JetMat, PrecoError> {
    let n = a.rows;
    let mut id = JetMat::zeros(n, n);
    for i in 0..n {
        id.set(i, i, Jet::constant(1.0));
    }
    solve(a, &id)
}

/// Pivot set frozen at a seed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrozenPivots {
    pub nrows: usize,
    pub ncols: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Reciprocal condition number below which a frozen pivot block is degenerate.
pub const PIVOT_RCOND: f64 = 1e-6;

impl FrozenPivots {
    /// Numerical rank and pivots of `m` (real data at the seed).
    pub fn select(m: &DMatrix<f64>) -> FrozenPivots {
        let r = linalg::rank(m);
        let (rows, cols) = linalg::pivots(m, r);
        FrozenPivots {
            nrows: m.nrows(),
            ncols: m.ncols(),
            rows,
            cols,
        }
    }

    /// Principal pivot set (`rows = cols`) of a symmetric matrix.
    pub fn select_symmetric(m: &DMatrix<f64>) -> FrozenPivots {
        let r = linalg::rank(m);
        let p = linalg::symmetric_pivots(m, r);
        FrozenPivots {
            nrows: m.nrows(),
            ncols: m.ncols(),
            rows: p.clone(),
            cols: p,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn free_cols(&self) -> Vec<usize> {
        (0..self.ncols).filter(|j| !self.cols.contains(j)).collect()
    }

    pub fn free_rows(&self) -> Vec<usize> {
        (0..self.nrows).filter(|i| !self.rows.contains(i)).collect()
    }

    /// Conditioning of the pivot block of `m`.
    pub fn check(&self, m: &JetMat) -> Result<(), PrecoError> {
        if self.rank() == 0 {
            return Ok(());
        }
        let block = m.sub(&self.rows, &self.cols).real();
        let rc = linalg::rcond(&block);
        if rc < PIVOT_RCOND {
            return Err(PrecoError::PivotDegeneracy { rcond: rc });
        }
        Ok(())
    }

    /// One null vector per free column `f`: `v_f = 1`, `v_P = −M_RP⁻¹ M_Rf`.
    pub fn null_basis(&self, m: &JetMat) -> Result<Vec<Vec<Jet>>, PrecoError> {
        let free = self.free_cols();
        if free.is_empty() {
            return Ok(Vec::new());
        }
        let mut out = Vec::with_capacity(free.len());
        let sol = if self.rank() > 0 {
            Some(solve(&m.sub(&self.rows, &self.cols), &m.sub(&self.rows, &free))?)
        } else {
            None
        };
        for (k, &f) in free.iter().enumerate() {
            let mut v = vec![Jet::constant(0.0); self.ncols];
            v[f] = Jet::constant(1.0);
            if let Some(s) = &sol {
                for (a, &p) in self.cols.iter().enumerate() {
                    v[p] = -s.get(a, k);
                }
            }
            out.push(v);
        }
        Ok(out)
    }

    /// One left null vector per non-pivot row `g`: `λ_g = 1`,
    /// `λ_R = −M_RP⁻ᵀ M_gPᵀ`.
    pub fn left_null_basis(&self, m: &JetMat) -> Result<Vec<Vec<Jet>>, PrecoError> {
        let t = FrozenPivots {
            nrows: self.ncols,
            ncols: self.nrows,
            rows: self.cols.clone(),
            cols: self.rows.clone(),
        };
        t.null_basis(&m.transpose())
    }

    /// `x_P = M_RP⁻¹ b_R`, zero on free columns.
    pub fn particular(&self, m: &JetMat, b: &[Jet]) -> Result<Vec<Jet>, PrecoError> {
        let mut x = vec![Jet::constant(0.0); self.ncols];
        if self.rank() == 0 {
            return Ok(x);
        }
        let br: Vec<Jet> = self.rows.iter().map(|&i| b[i].clone()).collect();
        let sol = solve_vec(&m.sub(&self.rows, &self.cols), &br)?;
        for (a, &p) in self.cols.iter().enumerate() {
            x[p] = sol[a].clone();
        }
        Ok(x)
    }
}
