//! Dense complex matrices stored column by column.

use faer::{MatRef, c64};
use num_complex::Complex64;

/// Square complex matrix in column-major order; column `j` is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m[(j, j)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_column_major(dim: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), dim * dim, "column-major data must hold dim^2 entries");
        Self { dim, data }
    }

    pub fn from_columns(columns: Vec<Vec<Complex64>>) -> Self {
        let dim = columns.len();
        let mut data = Vec::with_capacity(dim * dim);
        for c in columns {
            assert_eq!(c.len(), dim);
            data.extend(c);
        }
        Self { dim, data }
    }

    pub fn from_faer(m: MatRef<'_, c64>) -> Self {
        let dim = m.nrows();
        assert_eq!(dim, m.ncols());
        let mut data = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for i in 0..dim {
                data.push(m[(i, j)]);
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_faer(&self) -> MatRef<'_, c64> {
        MatRef::from_column_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for (j, col) in self.columns().enumerate() {
            let xj = x[j];
            for (yi, a) in y.iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.dim, rhs.dim);
        let product = self.as_faer() * rhs.as_faer();
        Self::from_faer(product.as_ref())
    }

    /// `max_{jk} |(A^H A - 1)_{jk}|`.
    pub fn unitarity_defect(&self) -> f64 {
        let a = self.as_faer();
        let gram = a.adjoint() * a;
        let mut defect: f64 = 0.0;
        for j in 0..self.dim {
            for i in 0..self.dim {
                let mut g = gram[(i, j)];
                if i == j {
                    g -= Complex64::new(1.0, 0.0);
                }
                defect = defect.max(g.norm());
            }
        }
        defect
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.dim + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.dim + i]
    }
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<x|y>`, antilinear in the first argument.
pub fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
