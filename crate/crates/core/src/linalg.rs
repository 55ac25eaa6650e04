//! Small dense linear algebra: rank by elimination, an incremental row
//! basis, and a partial-pivoting solver.

/// Default relative pivot tolerance.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Rank of a row-major matrix by Gaussian elimination with partial pivoting.
///
/// A pivot counts when its magnitude exceeds `tol` times the largest
/// absolute entry of the input.
pub fn matrix_rank<R: AsRef<[f64]>>(rows: &[R], tol: f64) -> usize {
    let Some(width) = rows.first().map(|r| r.as_ref().len()) else {
        return 0;
    };
    let mut a: Vec<Vec<f64>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
    let scale = a
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let threshold = tol * scale;

    let mut rank = 0;
    for col in 0..width {
        if rank == a.len() {
            break;
        }
        let (pivot_row, pivot_abs) =
            (rank..a.len())
                .map(|r| (r, a[r][col].abs()))
                .fold(
                    (rank, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if pivot_abs <= threshold {
            continue;
        }
        a.swap(rank, pivot_row);
        let (head, tail) = a.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail.iter_mut() {
            let factor = row[col] / pivot[col];
            if factor != 0.0 {
                for (x, p) in row[col..].iter_mut().zip(&pivot[col..]) {
                    *x -= factor * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Reduced basis of the rows seen so far, grown one row at a time.
///
/// Each stored row has a pivot column where it is 1 and every other basis
/// row is 0, so reducing a new row is a single pass over the basis.
#[derive(Debug, Clone)]
pub struct RowBasis {
    width: usize,
    tol: f64,
    scale: f64,
    rows: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    residual: Vec<f64>,
}

impl RowBasis {
    pub fn new(width: usize, tol: f64) -> Self {
        Self {
            width,
            tol,
            scale: 0.0,
            rows: Vec::with_capacity(width),
            pivots: Vec::with_capacity(width),
            residual: vec![0.0; width],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.width
    }

    pub fn clear(&mut self) {
        self.rows.clear();
        self.pivots.clear();
        self.scale = 0.0;
    }

    /// Adds `row` to the span. Returns true if the rank grew.
    ///
    /// Residuals are judged against `tol` times the largest absolute entry
    /// of any row inserted so far.
    pub fn insert(&mut self, row: &[f64]) -> bool {
        assert_eq!(row.len(), self.width, "row width mismatch");
        self.scale = row.iter().fold(self.scale, |acc, v| acc.max(v.abs()));
        if self.is_full() || self.scale == 0.0 {
            return false;
        }
        self.residual.copy_from_slice(row);
        for (basis_row, &pc) in self.rows.iter().zip(&self.pivots) {
            let factor = self.residual[pc];
            if factor != 0.0 {
                for (x, b) in self.residual.iter_mut().zip(basis_row) {
                    *x -= factor * b;
                }
            }
        }
        let (pc, mag) = self
            .residual
            .iter()
            .enumerate()
            .fold((0, -1.0f64), |best, (i, v)| {
                if v.abs() > best.1 {
                    (i, v.abs())
                } else {
                    best
                }
            });
        if mag <= self.tol * self.scale {
            return false;
        }
        let inv = 1.0 / self.residual[pc];
        let new_row: Vec<f64> = self.residual.iter().map(|v| v * inv).collect();
        for (basis_row, _) in self.rows.iter_mut().zip(&self.pivots) {
            let factor = basis_row[pc];
            if factor != 0.0 {
                for (x, b) in basis_row.iter_mut().zip(&new_row) {
                    *x -= factor * b;
                }
            }
        }
        self.rows.push(new_row);
        self.pivots.push(pc);
        true
    }
}

/// Solves the `n × n` row-major system `a · x = b` by LU with partial
/// pivoting. Returns `None` when a pivot falls below `eps` times the
/// largest absolute entry of `a`.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, eps: f64) -> Option<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "matrix must be n × n");
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot_row * n + col].abs() <= eps * scale {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for r in (col + 1)..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_examples() {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(matrix_rank(&id, DEFAULT_RANK_TOL), 3);
        assert_eq!(matrix_rank(&[[0.5, 0.5], [0.5, 0.5]], DEFAULT_RANK_TOL), 1);
        let avg = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.5, 0.0]];
        assert_eq!(matrix_rank(&avg, DEFAULT_RANK_TOL), 2);
        assert_eq!(matrix_rank(&[[0.0, 0.0]], DEFAULT_RANK_TOL), 0);
        let empty: [[f64; 2]; 0] = [];
        assert_eq!(matrix_rank(&empty, DEFAULT_RANK_TOL), 0);
    }

    #[test]
    fn rank_tolerance_is_relative() {
        let rows = [[1e6, 0.0], [0.0, 1e-6]];
        assert_eq!(matrix_rank(&rows, 1e-9), 1);
        assert_eq!(matrix_rank(&rows, 1e-13), 2);
    }

    #[test]
    fn basis_tracks_rank() {
        let mut basis = RowBasis::new(3, DEFAULT_RANK_TOL);
        assert!(basis.insert(&[1.0, 0.0, 0.0]));
        assert!(basis.insert(&[0.0, 1.0, 0.0]));
        assert!(!basis.insert(&[0.5, 0.5, 0.0]));
        assert_eq!(basis.rank(), 2);
        assert!(basis.insert(&[0.0, 0.0, 1.0]));
        assert!(basis.is_full());
        assert!(!basis.insert(&[0.2, 0.3, 0.5]));
        basis.clear();
        assert_eq!(basis.rank(), 0);
    }

    #[test]
    fn solve_small_system() {
        // columns are the votes (0.6, 0.4) and (0.2, 0.8)
        let x = solve_dense(vec![0.6, 0.2, 0.4, 0.8], vec![1.0, 0.0], 1e-12).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] + 1.0).abs() < 1e-12);
        assert!(solve_dense(vec![1.0, 1.0, 1.0, 1.0], vec![1.0, 0.0], 1e-12).is_none());
    }
}
