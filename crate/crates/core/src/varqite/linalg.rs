use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::SizeMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, col: &[f64]) {
        for (i, &x) in col.iter().enumerate() {
            self[(i, j)] = x;
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Minimizes `|G x - d|^2 + ridge |x|^2` through the normal equations
/// `(G^T G + ridge I) x = G^T d` and a Cholesky factorization.
pub fn solve_step(g: &Matrix, d: &[f64], ridge: f64) -> Result<Vec<f64>> {
    if d.len() != g.rows() {
        return Err(Error::SizeMismatch {
            expected: g.rows(),
            got: d.len(),
        });
    }
    if !(ridge >= 0.0) {
        return Err(crate::error::invalid("ridge must be non-negative"));
    }
    let m = g.cols();
    let mut a = Matrix::zeros(m, m);
    let mut b = vec![0.0; m];
    for r in 0..g.rows() {
        let row = &g.data[r * m..(r + 1) * m];
        for i in 0..m {
            let gi = row[i];
            if gi == 0.0 {
                continue;
            }
            b[i] += gi * d[r];
            for j in 0..=i {
                a[(i, j)] += gi * row[j];
            }
        }
    }
    for i in 0..m {
        a[(i, i)] += ridge;
        for j in 0..i {
            a[(j, i)] = a[(i, j)];
        }
    }
    cholesky_solve(a, &b)
}

fn cholesky_solve(mut a: Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.rows();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    let tiny = scale * f64::EPSILON * n.max(1) as f64;
    // lower factor overwrites the lower triangle
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= a[(j, k)] * a[(j, k)];
        }
        if !(diag > tiny) {
            return Err(Error::Singular);
        }
        let ljj = diag.sqrt();
        a[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)];
            }
            a[(i, j)] = s / ljj;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a[(i, k)] * y[k];
        }
        y[i] /= a[(i, i)];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= a[(k, i)] * y[k];
        }
        y[i] /= a[(i, i)];
    }
    Ok(y)
}
