//! Dense LU factorization with partial pivoting and small matrix helpers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `P A = L U` with unit lower-triangular `L`, stored packed in one matrix.
#[derive(Debug, Clone)]
pub struct LuFactorization {
    lu: DMatrix<f64>,
    /// Row `i` of `P A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    min_pivot: f64,
}

impl LuFactorization {
    /// Factor `a`. Fails with `NearSingular` when a pivot falls below
    /// `pivot_tol` times the largest absolute entry of `a`.
    pub fn factor(a: &DMatrix<f64>, pivot_tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::NonSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        let scale = max_abs(a).max(f64::MIN_POSITIVE);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            min_pivot = min_pivot.min(best);
            if best <= pivot_tol * scale {
                return Err(Error::NearSingular { step: k, pivot: best });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != 0.0 {
                    for j in (k + 1)..n {
                        lu[(i, j)] -= factor * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Self {
            lu,
            perm,
            min_pivot: if n == 0 { 0.0 } else { min_pivot },
        })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Smallest absolute pivot encountered.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x = DVector::from_fn(n, |i, _| b[self.perm[i]]);
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    /// Solve `Aᵀ x = b`, i.e. the row-vector system `x A = bᵀ`.
    pub fn solve_transpose(&self, b: &DVector<f64>) -> DVector<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        // Aᵀ = Uᵀ Lᵀ P
        let mut w = b.clone();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * w[j];
            }
            w[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in (i + 1)..n {
                s -= self.lu[(j, i)] * w[j];
            }
            w[i] = s;
        }
        let mut x = DVector::zeros(n);
        for i in 0..n {
            x[self.perm[i]] = w[i];
        }
        x
    }

    /// Explicit inverse, assembled one column at a time.
    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut inv = DMatrix::zeros(n, n);
        let mut unit = DVector::zeros(n);
        for j in 0..n {
            unit[j] = 1.0;
            inv.set_column(j, &self.solve(&unit));
            unit[j] = 0.0;
        }
        inv
    }
}

/// `I - P + e r` for a square `p` and a row vector `r` stored as a column.
pub fn shifted_matrix(p: &DMatrix<f64>, r: &DVector<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - p[(i, j)] + r[j]
    })
}

/// `B + e r` for a generator `b`.
pub fn generator_shifted_matrix(b: &DMatrix<f64>, r: &DVector<f64>) -> DMatrix<f64> {
    let n = b.nrows();
    DMatrix::from_fn(n, n, |i, j| b[(i, j)] + r[j])
}

pub fn ones(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_vec(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `max(v) - min(v)`, zero for an empty vector.
pub fn spread(v: &DVector<f64>) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.max() - v.min()
}

/// Build a dense matrix from row slices; ragged input is reported as `NonSquare`
/// only when `square` is requested, otherwise as a `DimensionMismatch`.
pub(crate) fn matrix_from_rows<R: AsRef<[f64]>>(rows: &[R], square: bool) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.as_ref().len());
    for row in rows {
        let len = row.as_ref().len();
        if square && len != nrows {
            return Err(Error::NonSquare {
                rows: nrows,
                cols: len,
            });
        }
        if len != ncols {
            return Err(Error::DimensionMismatch {
                what: "matrix row",
                expected: ncols,
                found: len,
            });
        }
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i].as_ref()[j]))
}
