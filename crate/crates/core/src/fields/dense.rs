//! Row-major dense matrices over a generic exact field.

use super::scalar::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<F: Field> {
    field: F,
    nrows: usize,
    ncols: usize,
    data: Vec<F::Elem>,
}

/// Reduced row echelon form with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon<F: Field> {
    pub reduced: DenseMatrix<F>,
    pub pivots: Vec<usize>,
}

impl<F: Field> DenseMatrix<F> {
    pub fn zeros(field: F, nrows: usize, ncols: usize) -> Self {
        let z = field.zero();
        DenseMatrix {
            data: vec![z; nrows * ncols],
            field,
            nrows,
            ncols,
        }
    }

    pub fn from_fn(
        field: F,
        nrows: usize,
        ncols: usize,
        mut f: impl FnMut(usize, usize) -> F::Elem,
    ) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        DenseMatrix {
            field,
            nrows,
            ncols,
            data,
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.ncols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F::Elem] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn transpose(&self) -> Self {
        DenseMatrix::from_fn(self.field.clone(), self.ncols, self.nrows, |i, j| {
            self.get(j, i).clone()
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        DenseMatrix::from_fn(self.field.clone(), self.nrows, cols.len(), |i, k| {
            self.get(i, cols[k]).clone()
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        DenseMatrix::from_fn(self.field.clone(), rows.len(), self.ncols, |k, j| {
            self.get(rows[k], j).clone()
        })
    }

    pub fn mul_vec(&self, x: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(x.len(), self.ncols, "vector length");
        let f = &self.field;
        (0..self.nrows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, b)| !f.is_zero(a) && !f.is_zero(b))
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }

    /// Gauss-Jordan elimination restricted to the first `col_limit` columns.
    fn eliminate(&mut self, col_limit: usize) -> Vec<usize> {
        let f = self.field.clone();
        let n = self.ncols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..col_limit {
            if r == self.nrows {
                break;
            }
            let Some(p) = (r..self.nrows).find(|&i| !f.is_zero(&self.data[i * n + c])) else {
                continue;
            };
            if p != r {
                for k in 0..n {
                    self.data.swap(r * n + k, p * n + k);
                }
            }
            let inv = f.inv(&self.data[r * n + c]).expect("pivot is nonzero");
            for k in c..n {
                let v = f.mul(&self.data[r * n + k], &inv);
                self.data[r * n + k] = v;
            }
            for i in 0..self.nrows {
                if i == r || f.is_zero(&self.data[i * n + c]) {
                    continue;
                }
                let factor = self.data[i * n + c].clone();
                for k in c..n {
                    if f.is_zero(&self.data[r * n + k]) {
                        continue;
                    }
                    let t = f.mul(&factor, &self.data[r * n + k]);
                    let v = f.sub(&self.data[i * n + k], &t);
                    self.data[i * n + k] = v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> Echelon<F> {
        let mut reduced = self.clone();
        let pivots = reduced.eliminate(self.ncols);
        Echelon { reduced, pivots }
    }

    pub fn rank(&self) -> usize {
        if self.nrows <= self.ncols {
            self.clone().eliminate(self.ncols).len()
        } else {
            self.transpose().eliminate(self.nrows).len()
        }
    }

    pub fn kernel(&self) -> Vec<Vec<F::Elem>> {
        let f = &self.field;
        let Echelon { reduced, pivots } = self.rref();
        let mut is_pivot = vec![false; self.ncols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        (0..self.ncols)
            .filter(|&c| !is_pivot[c])
            .map(|free| {
                let mut v = vec![f.zero(); self.ncols];
                v[free] = f.one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(reduced.get(r, free));
                }
                v
            })
            .collect()
    }

    /// Solves `self * x = y`, free variables set to zero. Returns the rank too.
    pub fn solve(&self, y: &[F::Elem]) -> Option<(Vec<F::Elem>, usize)> {
        assert_eq!(y.len(), self.nrows, "right-hand side length");
        let f = &self.field;
        let mut aug = DenseMatrix::from_fn(f.clone(), self.nrows, self.ncols + 1, |i, j| {
            if j < self.ncols {
                self.get(i, j).clone()
            } else {
                y[i].clone()
            }
        });
        let pivots = aug.eliminate(self.ncols + 1);
        if pivots.last() == Some(&self.ncols) {
            return None;
        }
        let mut x = vec![f.zero(); self.ncols];
        for (r, &c) in pivots.iter().enumerate() {
            x[c] = aug.get(r, self.ncols).clone();
        }
        Some((x, pivots.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::scalar::{PrimeField, Rationals};
    use num_rational::BigRational;

    fn rat(rows: &[&[i64]]) -> DenseMatrix<Rationals> {
        let f = Rationals;
        DenseMatrix::from_fn(f, rows.len(), rows[0].len(), |i, j| {
            BigRational::from_integer(rows[i][j].into())
        })
    }

    #[test]
    fn rational_rank_and_kernel() {
        let m = rat(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.len(), 2);
        for v in k {
            assert!(m.mul_vec(&v).iter().all(|x| x == &BigRational::from_integer(0.into())));
        }
    }

    #[test]
    fn prime_field_solve_multiplies_back() {
        let f = PrimeField::new(3).unwrap();
        let m = DenseMatrix::from_fn(f, 3, 4, |i, j| ((i * 2 + j * j + 1) % 3) as u32);
        let x = vec![1, 2, 0, 1];
        let y = m.mul_vec(&x);
        let (sol, _) = m.solve(&y).unwrap();
        assert_eq!(m.mul_vec(&sol), y);
    }

    #[test]
    fn tall_matrix_rank_uses_transpose() {
        let m = rat(&[&[1, 0], &[0, 1], &[1, 1], &[2, 3]]);
        assert_eq!(m.rank(), 2);
    }
}
