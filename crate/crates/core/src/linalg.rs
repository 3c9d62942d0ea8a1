//! Dense least-squares on small regressor sets.
//!
//! The fitters in this crate only ever solve for 4–9 coefficients, so the
//! normal equations with partial pivoting are accurate enough and keep the
//! crate dependency-free. Columns are scaled to unit norm before the solve;
//! columns whose norm (or pivot) vanishes are dropped and reported so the
//! caller can flag the matching parameters as unconstrained.

/// Result of a least-squares solve.
#[derive(Debug, Clone)]
pub struct Lstsq {
    /// Coefficients, one per regressor column (dropped columns get 0).
    pub coeffs: Vec<f64>,
    /// Indices of columns that were unidentifiable from the data.
    pub dropped: Vec<usize>,
    /// Sum of squared residuals at the solution.
    pub sse: f64,
}

/// Solves `min ||X w - y||^2` where `rows[i]` is the i-th row of `X`.
///
/// Panics if rows have inconsistent lengths; returns an all-dropped result
/// for an empty system.
pub fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> Lstsq {
    assert_eq!(rows.len(), y.len(), "row/target count mismatch");
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if n == 0 || k == 0 {
        return Lstsq {
            coeffs: vec![0.0; k],
            dropped: (0..k).collect(),
            sse: y.iter().map(|v| v * v).sum(),
        };
    }

    // Column norms for scaling; zero-norm columns are unidentifiable.
    let mut norms = vec![0.0f64; k];
    for row in rows {
        assert_eq!(row.len(), k, "ragged design matrix");
        for (j, v) in row.iter().enumerate() {
            norms[j] += v * v;
        }
    }
    for norm in &mut norms {
        *norm = norm.sqrt();
    }
    let mut dropped: Vec<usize> = norms
        .iter()
        .enumerate()
        .filter(|(_, &nm)| nm <= 1e-12)
        .map(|(j, _)| j)
        .collect();
    let keep: Vec<usize> = (0..k).filter(|j| !dropped.contains(j)).collect();

    // Normal equations on the scaled kept columns.
    let m = keep.len();
    let mut a = vec![vec![0.0f64; m]; m];
    let mut b = vec![0.0f64; m];
    for (row, &yv) in rows.iter().zip(y) {
        for (p, &jp) in keep.iter().enumerate() {
            let xp = row[jp] / norms[jp];
            b[p] += xp * yv;
            for (q, &jq) in keep.iter().enumerate().skip(p) {
                a[p][q] += xp * row[jq] / norms[jq];
            }
        }
    }
    for p in 0..m {
        for q in 0..p {
            a[p][q] = a[q][p];
        }
    }

    let (w_scaled, singular) = solve_with_pivoting(&mut a, &mut b);

    let mut coeffs = vec![0.0f64; k];
    for (p, &j) in keep.iter().enumerate() {
        if singular.contains(&p) {
            dropped.push(j);
        } else {
            coeffs[j] = w_scaled[p] / norms[j];
        }
    }
    dropped.sort_unstable();

    let mut sse = 0.0;
    for (row, &yv) in rows.iter().zip(y) {
        let pred: f64 = row.iter().zip(&coeffs).map(|(x, w)| x * w).sum();
        let r = yv - pred;
        sse += r * r;
    }

    Lstsq {
        coeffs,
        dropped,
        sse,
    }
}

/// Staircase Gaussian elimination with partial pivoting.
///
/// Rank-deficient columns are skipped (their unknowns forced to 0) and
/// reported; the remaining equations still constrain later unknowns. The
/// matrix is unit-column-scaled by the caller, so an absolute pivot
/// threshold is meaningful.
fn solve_with_pivoting(a: &mut [Vec<f64>], b: &mut [f64]) -> (Vec<f64>, Vec<usize>) {
    let m = b.len();
    let mut singular = Vec::new();
    let mut pivot_row_of = vec![usize::MAX; m];
    let mut cursor = 0usize;

    for col in 0..m {
        let Some((pivot_row, pivot_abs)) = (cursor..m)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
        else {
            singular.push(col);
            continue;
        };
        if pivot_abs <= 1e-10 {
            singular.push(col);
            continue;
        }
        if pivot_row != cursor {
            a.swap(pivot_row, cursor);
            b.swap(pivot_row, cursor);
        }
        for r in (cursor + 1)..m {
            let f = a[r][col] / a[cursor][col];
            if f == 0.0 {
                continue;
            }
            for c in col..m {
                a[r][c] -= f * a[cursor][c];
            }
            b[r] -= f * b[cursor];
        }
        pivot_row_of[col] = cursor;
        cursor += 1;
    }

    let mut x = vec![0.0f64; m];
    for col in (0..m).rev() {
        let pr = pivot_row_of[col];
        if pr == usize::MAX {
            continue; // dropped column, x stays 0
        }
        let mut acc = b[pr];
        for c in (col + 1)..m {
            acc -= a[pr][c] * x[c];
        }
        x[col] = acc / a[pr][col];
    }

    (x, singular)
}
