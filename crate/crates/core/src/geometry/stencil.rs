//! Linear differentiation operators stored row-wise (CSR).

#[derive(Debug, Clone)]
pub struct SparseOp {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseOp {
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut weights = Vec::new();
        indptr.push(0);
        for row in rows {
            // merge duplicate columns so the row is canonical
            let mut row = row;
            row.sort_by_key(|&(j, _)| j);
            let mut last: Option<usize> = None;
            for (j, w) in row {
                if last == Some(j) {
                    *weights.last_mut().unwrap() += w;
                } else {
                    indices.push(j);
                    weights.push(w);
                    last = Some(j);
                }
            }
            indptr.push(indices.len());
        }
        SparseOp {
            n,
            indptr,
            indices,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).map(|(j, w)| w * x[j]).sum())
            .collect()
    }

    /// `self ∘ other`, i.e. the operator `x ↦ self(other(x))`.
    pub fn compose(&self, other: &SparseOp) -> SparseOp {
        let rows = (0..self.n)
            .map(|i| {
                let mut acc = Vec::new();
                for (k, a) in self.row(i) {
                    for (j, b) in other.row(k) {
                        acc.push((j, a * b));
                    }
                }
                acc
            })
            .collect();
        SparseOp::from_rows(self.n, rows)
    }
}

/// Finite-difference weights on arbitrary nodes (Fornberg's recursion).
///
/// Returns `w[m][k]`: the weight of `x[k]` in the `m`-th derivative at `z`,
/// for `m = 0..=max_order`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
