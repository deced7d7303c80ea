use nalgebra::DMatrix;

/// Pivots smaller than this fraction of the largest entry count as zero.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Numerical rank by row reduction with partial pivoting.
pub fn rank(m: &DMatrix<f64>) -> usize {
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let tol = RANK_REL_TOL * scale;
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        a.swap_rows(r, p);
        let pivot = a[(r, c)];
        for i in r + 1..rows {
            let f = a[(i, c)] / pivot;
            if f != 0.0 {
                for k in c..cols {
                    let v = a[(r, k)];
                    a[(i, k)] -= f * v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Rank after scaling each row to unit max-norm. Used for sampled function matrices whose
/// rows (one per function) can differ by many orders of magnitude.
pub fn rank_rows_normalized(m: &DMatrix<f64>) -> usize {
    let mut a = m.clone();
    for mut row in a.row_iter_mut() {
        let s = row.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if s > 0.0 {
            row /= s;
        }
    }
    rank(&a)
}

/// Columns given as slices, assembled into a matrix.
pub fn from_columns(rows: usize, cols: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_simple_matrices() {
        assert_eq!(rank(&DMatrix::<f64>::zeros(3, 4)), 0);
        assert_eq!(rank(&DMatrix::<f64>::identity(4, 4)), 4);
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn rank_threshold_is_relative() {
        let m = DMatrix::from_row_slice(2, 2, &[1e12, 0.0, 0.0, 1e2]);
        assert_eq!(rank(&m), 1);
        let m = DMatrix::from_row_slice(2, 2, &[1e-12, 0.0, 0.0, 1e-13]);
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn row_normalization_recovers_badly_scaled_rows() {
        let m = DMatrix::from_row_slice(2, 2, &[1e12, 2e12, 1.0, 0.0]);
        assert_eq!(rank(&m), 1);
        assert_eq!(rank_rows_normalized(&m), 2);
    }
}
