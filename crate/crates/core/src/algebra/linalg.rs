//! Exact dense linear algebra over Q(i).

use num_traits::{One, Zero};

use super::gaussian::GaussianRational;

pub type Row = Vec<GaussianRational>;

/// Reduced row-echelon form in place. Columns are scanned left to right;
/// returns the pivot column of each nonzero row (rows are truncated to the rank).
pub fn rref(rows: &mut Vec<Row>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pr);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for v in rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *v -= &(&f * p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

pub fn rank(rows: &[Row]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Basis of the right kernel `{ v : M v = 0 }`, one vector per free column,
/// each with a 1 in its free column.
pub fn kernel(rows: &[Row], ncols: usize) -> Vec<Row> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![GaussianRational::zero(); ncols];
        v[free] = GaussianRational::one();
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -&row[free];
        }
        out.push(v);
    }
    out
}

/// Determinant by Gaussian elimination.
pub fn det(mut m: Vec<Row>) -> GaussianRational {
    let n = m.len();
    let mut acc = GaussianRational::one();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return GaussianRational::zero();
        };
        if pr != c {
            m.swap(pr, c);
            acc = -acc;
        }
        let piv = m[c][c].clone();
        acc = &acc * &piv;
        let inv = piv.inv().expect("nonzero");
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= &t;
            }
        }
    }
    acc
}

pub fn mat_vec(rows: &[Row], v: &[GaussianRational]) -> Row {
    rows.iter()
        .map(|r| r.iter().zip(v).fold(GaussianRational::zero(), |a, (x, y)| a + x * y))
        .collect()
}
