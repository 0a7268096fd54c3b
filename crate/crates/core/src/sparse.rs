//! Compressed sparse row matrices: just enough for operator assembly,
//! products, linear combinations and matrix-vector products.

use std::io::Write;

use nalgebra::DMatrix;

/// Square or rectangular CSR matrix with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Row-by-row builder; rows must be pushed in order.
#[derive(Debug)]
pub struct RowBuilder {
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    scratch: Vec<(usize, f64)>,
}

impl RowBuilder {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Accumulate `value` into column `col` of the current row.
    pub fn add(&mut self, col: usize, value: f64) {
        debug_assert!(col < self.ncols);
        self.scratch.push((col, value));
    }

    /// Close the current row, merging duplicate columns and dropping zeros.
    pub fn finish_row(&mut self) {
        self.scratch.sort_unstable_by_key(|e| e.0);
        let mut k = 0;
        while k < self.scratch.len() {
            let col = self.scratch[k].0;
            let mut v = 0.0;
            while k < self.scratch.len() && self.scratch[k].0 == col {
                v += self.scratch[k].1;
                k += 1;
            }
            if v != 0.0 {
                self.col_idx.push(col);
                self.values.push(v);
            }
        }
        self.scratch.clear();
        self.row_ptr.push(self.col_idx.len());
    }

    pub fn build(self) -> CsrMatrix {
        CsrMatrix {
            nrows: self.row_ptr.len() - 1,
            ncols: self.ncols,
            row_ptr: self.row_ptr,
            col_idx: self.col_idx,
            values: self.values,
        }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut b = RowBuilder::new(m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != 0.0 {
                    b.add(j, m[(i, j)]);
                }
            }
            b.finish_row();
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in sparse product");
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut cols = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        cols.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `Σ coefᵢ · Aᵢ` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> CsrMatrix {
        assert!(!terms.is_empty());
        let (nrows, ncols) = (terms[0].1.nrows, terms[0].1.ncols);
        let mut b = RowBuilder::new(ncols);
        for i in 0..nrows {
            for (c, m) in terms {
                assert_eq!((m.nrows, m.ncols), (nrows, ncols), "shape mismatch");
                for (j, v) in m.row(i) {
                    b.add(j, c * v);
                }
            }
            b.finish_row();
        }
        b.build()
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        let d = CsrMatrix::linear_combination(&[(1.0, self), (-1.0, other)]);
        d.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coordinate-format text dump, one `row col value` triple per line.
    pub fn write_coo<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                writeln!(w, "{i} {j} {v:.17e}")?;
            }
        }
        Ok(())
    }
}

/// Several matrices re-expressed on the union of their sparsity patterns, so
/// that linear combinations reduce to `axpy` on value arrays.
#[derive(Debug, Clone)]
pub struct SharedPattern {
    pattern: CsrMatrix,
    members: Vec<Vec<f64>>,
}

impl SharedPattern {
    pub fn new(mats: &[&CsrMatrix]) -> Self {
        assert!(!mats.is_empty());
        let n = mats[0].nrows;
        let ncols = mats[0].ncols;
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut cols = Vec::new();
        for i in 0..n {
            cols.clear();
            for m in mats {
                cols.extend(m.row(i).map(|(j, _)| j));
            }
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let nnz = col_idx.len();
        let pattern = CsrMatrix {
            nrows: n,
            ncols,
            row_ptr,
            col_idx,
            values: vec![0.0; nnz],
        };
        let members = mats
            .iter()
            .map(|m| {
                let mut vals = vec![0.0; nnz];
                for i in 0..n {
                    let start = pattern.row_ptr[i];
                    let row_cols = &pattern.col_idx[start..pattern.row_ptr[i + 1]];
                    for (j, v) in m.row(i) {
                        let k = row_cols.binary_search(&j).expect("column in union pattern");
                        vals[start + k] = v;
                    }
                }
                vals
            })
            .collect();
        Self { pattern, members }
    }

    pub fn pattern(&self) -> &CsrMatrix {
        &self.pattern
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Write `Σ coef[k] · member[k]` into `out` (same pattern as the union).
    pub fn combine_into(&self, coefs: &[f64], out: &mut CsrMatrix) {
        assert_eq!(coefs.len(), self.members.len());
        out.values.iter_mut().for_each(|v| *v = 0.0);
        for (c, vals) in coefs.iter().zip(&self.members) {
            if *c == 0.0 {
                continue;
            }
            for (o, v) in out.values.iter_mut().zip(vals) {
                *o += c * v;
            }
        }
    }

    pub fn combine(&self, coefs: &[f64]) -> CsrMatrix {
        let mut out = self.pattern.clone();
        self.combine_into(coefs, &mut out);
        out
    }
}
