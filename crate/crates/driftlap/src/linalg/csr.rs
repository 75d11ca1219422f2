//! Minimal compressed-sparse-row matrix, enough for assembly, matvecs,
//! diagonal edits, and symmetric rescaling.

use crate::num::Real;

#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut entries: Vec<(usize, usize, T)> = triplets.to_vec();
        entries.sort_unstable_by_key(|e| (e.0, e.1));

        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(entries.len());
        for &(i, j, v) in &entries {
            assert!(i < rows && j < cols, "triplet index out of bounds");
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }

        let mut row_ptr = vec![0usize; rows + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            rows,
            cols,
            row_ptr,
            col_idx: merged.iter().map(|e| e.1).collect(),
            values: merged.iter().map(|e| e.2).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, out) in y.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// Entry lookup by binary search within the row.
    pub fn get(&self, i: usize, j: usize) -> T {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// max_ij |a_ij - a_ji| over stored entries.
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for (i, j, v) in self.iter() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst
    }

    /// Iterate stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    /// Stored entries of one row as (col, value).
    pub fn row_iter(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col_idx[k], self.values[k]))
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// D A D with D = diag(d), in place on a copy.
    pub fn sym_scaled(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.rows);
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for k in out.row_ptr[i]..out.row_ptr[i + 1] {
                out.values[k] = d[i] * out.values[k] * d[out.col_idx[k]];
            }
        }
        out
    }

    /// Matrix plus a full diagonal; inserts diagonal entries missing from
    /// the pattern.
    pub fn add_diagonal(&self, diag: &[T]) -> Self {
        assert_eq!(diag.len(), self.rows);
        let mut triplets: Vec<(usize, usize, T)> = self.iter().collect();
        for (i, &d) in diag.iter().enumerate() {
            triplets.push((i, i, d));
        }
        CsrMatrix::from_triplets(self.rows, self.cols, &triplets)
    }

    /// Gershgorin bound on the spectral radius: max_i sum_j |a_ij|.
    pub fn gershgorin_bound(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows {
            let mut row_sum = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                row_sum += self.values[k].abs();
            }
            worst = worst.max(row_sum);
        }
        worst
    }

    pub fn to_dense_row_major(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows * self.cols];
        for (i, j, v) in self.iter() {
            out[i * self.cols + j] += v;
        }
        out
    }
}
