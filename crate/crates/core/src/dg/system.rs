use nalgebra::DMatrix;

/// Square block-sparse matrix with dense blocks of uniform size; each block
/// row stores its diagonal block first.
#[derive(Debug, Clone)]
pub struct BlockSparseMatrix {
    block_size: usize,
    rows: Vec<Vec<(usize, DMatrix<f64>)>>,
}

impl BlockSparseMatrix {
    pub fn new(block_size: usize, rows: Vec<Vec<(usize, DMatrix<f64>)>>) -> Self {
        debug_assert!(rows.iter().enumerate().all(|(r, row)| row.first().map(|b| b.0) == Some(r)));
        Self { block_size, rows }
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn n_blocks(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.rows.len() * self.block_size
    }

    pub fn row(&self, r: usize) -> &[(usize, DMatrix<f64>)] {
        &self.rows[r]
    }

    pub fn diagonal(&self, r: usize) -> &DMatrix<f64> {
        &self.rows[r][0].1
    }

    pub fn block(&self, r: usize, c: usize) -> Option<&DMatrix<f64>> {
        self.rows[r].iter().find(|(col, _)| *col == c).map(|(_, b)| b)
    }

    /// Block columns coupled to block row `r`, excluding the diagonal.
    pub fn off_diagonal_columns(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[r][1..].iter().map(|(c, _)| *c)
    }

    pub fn n_stored_blocks(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.block_size;
        let mut y = vec![0.0; self.dim()];
        for (r, row) in self.rows.iter().enumerate() {
            let yr = &mut y[r * n..(r + 1) * n];
            for (c, blk) in row {
                let xc = &x[c * n..(c + 1) * n];
                for j in 0..n {
                    let xj = xc[j];
                    if xj == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        yr[i] += blk[(i, j)] * xj;
                    }
                }
            }
        }
        y
    }

    /// `wᵀ A v`.
    pub fn bilinear(&self, v: &[f64], w: &[f64]) -> f64 {
        self.matvec(v).iter().zip(w).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .map(|(_, b)| b.iter().map(|v| v * v).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let n = self.block_size;
        let mut out = Vec::with_capacity(self.n_stored_blocks() * n * n);
        for (r, row) in self.rows.iter().enumerate() {
            for (c, blk) in row {
                for j in 0..n {
                    for i in 0..n {
                        let v = blk[(i, j)];
                        if v != 0.0 {
                            out.push((r * n + i, c * n + j, v));
                        }
                    }
                }
            }
        }
        out
    }

    /// Dense copy, for tests and small problems.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }
}
