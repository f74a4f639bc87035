//! Exact integer linear algebra: Hermite normal form, lattice kernels and
//! membership tests.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{add, mul, sub, FieldScalar, IntScalar};

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Self::new(nrows, ncols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        assert!(i < self.rows && j < self.cols, "matrix index out of bounds");
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Converts every entry, e.g. `i64` to `BigInt`.
    pub fn map<U, F: FnMut(&T) -> U>(&self, f: F) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Stacks `row` below the existing rows.
    pub fn with_row(&self, row: &[T]) -> Result<Self> {
        if row.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(row);
        Ok(Self {
            rows: self.rows + 1,
            cols: self.cols,
            data,
        })
    }

    fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl<T: IntScalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        Ok(m)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Exact product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut data = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = add(&acc, &mul(self.get(i, k), other.get(k, j))?)?;
                }
                data.push(acc);
            }
        }
        Self::new(self.rows, other.cols, data)
    }

    /// Exact matrix-vector product.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).try_fold(T::zero(), |acc, (a, x)| {
                    if a.is_zero() || x.is_zero() {
                        Ok(acc)
                    } else {
                        add(&acc, &mul(a, x)?)
                    }
                })
            })
            .collect()
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Row-style Hermite normal form together with its unimodular transform.
#[derive(Clone, Debug)]
pub struct Hermite<T> {
    /// `h = u * a`.
    pub h: Matrix<T>,
    pub u: Matrix<T>,
    /// Column index of the pivot of each nonzero row of `h`, in order.
    pub pivots: Vec<usize>,
}

impl<T> Hermite<T> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Returns `(g, x, y)` with `x*a + y*b = g = gcd(a, b) >= 0`.
fn extended_gcd<T: IntScalar>(a: &T, b: &T) -> Result<(T, T, T)> {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (T::one(), T::zero());
    let (mut old_t, mut t) = (T::zero(), T::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = sub(&old_r, &mul(&q, &r)?)?;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = sub(&old_s, &mul(&q, &s)?)?;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = sub(&old_t, &mul(&q, &t)?)?;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        Ok((-old_r, -old_s, -old_t))
    } else {
        Ok((old_r, old_s, old_t))
    }
}

/// Replaces rows `p` and `q` by `(x*p + y*q, z*p + w*q)`.
fn combine_rows<T: IntScalar>(m: &mut Matrix<T>, p: usize, q: usize, (x, y, z, w): (&T, &T, &T, &T)) -> Result<()> {
    let cols = m.cols;
    for j in 0..cols {
        let a = m.data[p * cols + j].clone();
        let b = m.data[q * cols + j].clone();
        m.data[p * cols + j] = add(&mul(x, &a)?, &mul(y, &b)?)?;
        m.data[q * cols + j] = add(&mul(z, &a)?, &mul(w, &b)?)?;
    }
    Ok(())
}

/// Subtracts `factor * row[src]` from `row[dst]`.
fn sub_row_multiple<T: IntScalar>(m: &mut Matrix<T>, dst: usize, src: usize, factor: &T) -> Result<()> {
    if factor.is_zero() {
        return Ok(());
    }
    let cols = m.cols;
    for j in 0..cols {
        let s = &m.data[src * cols + j];
        if s.is_zero() {
            continue;
        }
        let v = sub(&m.data[dst * cols + j], &mul(factor, s)?)?;
        m.data[dst * cols + j] = v;
    }
    Ok(())
}

fn negate_row<T: IntScalar>(m: &mut Matrix<T>, i: usize) {
    for v in m.row_mut(i) {
        *v = -v.clone();
    }
}

/// Row-style Hermite normal form `H = U * A`.
///
/// Pivots are positive and every entry above a pivot lies in `[0, pivot)`.
/// `U` is built from elementary unimodular row operations only.
pub fn hermite_normal_form<T: IntScalar>(a: &Matrix<T>) -> Result<Hermite<T>> {
    let mut h = a.clone();
    let mut u = Matrix::identity(a.rows)?;
    let mut pivots = Vec::new();
    let mut p = 0;
    for col in 0..a.cols {
        if p == a.rows {
            break;
        }
        for i in (p + 1)..a.rows {
            let b = h.get(i, col).clone();
            if b.is_zero() {
                continue;
            }
            let a_p = h.get(p, col).clone();
            let (g, x, y) = extended_gcd(&a_p, &b)?;
            let z = -(b / g.clone());
            let w = a_p / g;
            combine_rows(&mut h, p, i, (&x, &y, &z, &w))?;
            combine_rows(&mut u, p, i, (&x, &y, &z, &w))?;
        }
        let pivot = h.get(p, col).clone();
        if pivot.is_zero() {
            continue;
        }
        if pivot.is_negative() {
            negate_row(&mut h, p);
            negate_row(&mut u, p);
        }
        let pivot = h.get(p, col).clone();
        for r in 0..p {
            let q = h.get(r, col).div_floor(&pivot);
            sub_row_multiple(&mut h, r, p, &q)?;
            sub_row_multiple(&mut u, r, p, &q)?;
        }
        pivots.push(col);
        p += 1;
    }
    Ok(Hermite { h, u, pivots })
}

/// Rank over the integers (equivalently the rationals).
pub fn rank<T: IntScalar>(a: &Matrix<T>) -> Result<usize> {
    Ok(hermite_normal_form(a)?.rank())
}

/// A basis of the integer lattice `{ v : A v = 0 }`.
///
/// Vectors are the rows of the HNF of the kernel block of the unimodular
/// transform of `Aᵀ`, so the first nonzero entry of each is positive.
pub fn lattice_kernel_basis<T: IntScalar>(a: &Matrix<T>) -> Result<Vec<Vec<T>>> {
    let hnf = hermite_normal_form(&a.transpose())?;
    let r = hnf.rank();
    let n = a.cols;
    if r == n {
        return Ok(Vec::new());
    }
    let kernel_rows: Vec<Vec<T>> = (r..n).map(|i| hnf.u.row(i).to_vec()).collect();
    let reduced = hermite_normal_form(&Matrix::from_rows(kernel_rows)?)?;
    Ok((0..reduced.rank()).map(|i| reduced.h.row(i).to_vec()).collect())
}

/// LLL reduction (δ = 0.99) of linearly independent integer vectors.
///
/// Only unimodular row operations are applied, so the result spans the same
/// lattice; Gram-Schmidt data is kept in floating point and only steers the
/// choice of operations.
pub fn lll_reduce(basis: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    const DELTA: f64 = 0.99;
    let mut b = basis.to_vec();
    let n = b.len();
    if n < 2 {
        return Ok(b);
    }
    let (mut star, mut mu) = gram_schmidt(&b);
    let mut k = 1;
    let mut budget = 100_000 * n;
    while k < n && budget > 0 {
        budget -= 1;
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let q = q as i64;
                let src = b[j].clone();
                for (x, y) in b[k].iter_mut().zip(&src) {
                    *x = sub(x, &mul(&q, y)?)?;
                }
                (star, mu) = gram_schmidt(&b);
            }
        }
        let lhs = norm2(&star[k]);
        let rhs = (DELTA - mu[k][k - 1] * mu[k][k - 1]) * norm2(&star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            (star, mu) = gram_schmidt(&b);
            k = (k - 1).max(1);
        }
    }
    Ok(b)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn gram_schmidt(b: &[Vec<i64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = b.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v: Vec<f64> = b[i].iter().map(|&x| x as f64).collect();
        for j in 0..i {
            let denom = norm2(&star[j]);
            let m = if denom > 0.0 {
                b[i].iter().zip(&star[j]).map(|(&x, y)| x as f64 * y).sum::<f64>() / denom
            } else {
                0.0
            };
            mu[i][j] = m;
            v.iter_mut().zip(&star[j]).for_each(|(x, y)| *x -= m * y);
        }
        star.push(v);
    }
    (star, mu)
}

/// Returns whether `A b = 0` exactly.
pub fn in_kernel<T: IntScalar>(a: &Matrix<T>, b: &[T]) -> Result<bool> {
    Ok(a.mul_vec(b)?.iter().all(Zero::is_zero))
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant<T: IntScalar>(a: &Matrix<T>) -> Result<T> {
    if a.rows != a.cols {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: a.cols,
        });
    }
    let n = a.rows;
    let mut m = a.clone();
    let mut sign = T::one();
    let mut prev = T::one();
    for k in 0..n.saturating_sub(1) {
        if m.get(k, k).is_zero() {
            match ((k + 1)..n).find(|&i| !m.get(i, k).is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        m.data.swap(k * n + j, i * n + j);
                    }
                    sign = -sign;
                }
                None => return Ok(T::zero()),
            }
        }
        for i in (k + 1)..n {
            for j in (k + 1)..n {
                let lhs = mul(m.get(i, j), m.get(k, k))?;
                let rhs = mul(m.get(i, k), m.get(k, j))?;
                m.data[i * n + j] = sub(&lhs, &rhs)? / prev.clone();
            }
        }
        prev = m.get(k, k).clone();
    }
    Ok(sign * m.get(n - 1, n - 1).clone())
}

/// Rank of a matrix over a field, by Gaussian elimination.
pub fn field_rank<Q: FieldScalar>(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let pivot_row = m[rank].clone();
        for row in m.iter_mut().skip(rank + 1) {
            if row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone() / pivot_row[col].clone();
            for (x, y) in row[col..ncols].iter_mut().zip(&pivot_row[col..ncols]) {
                *x = x.clone() - factor.clone() * y.clone();
            }
        }
        rank += 1;
    }
    rank
}

/// Whether `target` lies in the row span of `rows` over the field `Q`.
pub fn in_row_span<Q: FieldScalar>(rows: &[Vec<Q>], target: &[Q]) -> bool {
    let mut stacked = rows.to_vec();
    stacked.push(target.to_vec());
    field_rank(rows) == field_rank(&stacked)
}

/// Whether the all-ones vector is in the rational row span of `a`.
pub fn ones_in_row_span(a: &Matrix<i64>) -> bool {
    let rows: Vec<Vec<BigRational>> = a
        .row_vecs()
        .into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| BigRational::from_integer(BigInt::from(x)))
                .collect()
        })
        .collect();
    let ones = vec![BigRational::one(); a.cols()];
    in_row_span(&rows, &ones)
}
