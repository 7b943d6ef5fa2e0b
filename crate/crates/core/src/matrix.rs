//! Dense complex matrices stored row-major.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{cone, cre, czero, Real, C};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    /// Matrix unit `E_{i,j}` of shape `rows × cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = cone();
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| cre(T::lit(rows[i][j])))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { cre(T::lit(d[i])) } else { czero() })
    }

    pub fn column(v: &[C<T>]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    /// Rank-one `x y*`.
    pub fn outer(x: &[C<T>], y: &[C<T>]) -> Self {
        Self::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<C<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C<T>> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// `tr(self* · other)`, the Hilbert–Schmidt inner product.
    pub fn hs_inner(&self, other: &Self) -> C<T> {
        self.data
            .iter()
            .zip(&other.data)
            .fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// Sum of entrywise products, `tr(self · otherᵗ)`.
    pub fn bilinear(&self, other: &Self) -> C<T> {
        self.data
            .iter()
            .zip(&other.data)
            .fold(czero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn hermitian_deviation(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut dev = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Hermitian within `1e-10·(1 + ‖·‖_max)` scaled to the scalar's precision.
    pub fn is_hermitian(&self) -> bool {
        self.is_square() && self.hermitian_deviation() <= herm_tol(self)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                deviation: self.hermitian_deviation().as_f64(),
            })
        }
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(czero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    /// `⟨v, self v⟩ = v* · self · v`.
    pub fn quadratic_form(&self, v: &[C<T>]) -> C<T> {
        let av = self.matvec(v);
        v.iter().zip(&av).fold(czero(), |acc, (a, b)| acc + a.conj() * *b)
    }

    /// Kronecker product with the outer factor indexing blocks: block `(i,j)` is `a_{ij}·B`.
    pub fn kron(&self, b: &Self) -> Self {
        let (p, q) = (b.rows, b.cols);
        Self::from_fn(self.rows * p, self.cols * q, |r, c| {
            self[(r / p, c / q)] * b[(r % p, c % q)]
        })
    }

    pub fn sub_matrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_sub_matrix(&mut self, r0: usize, c0: usize, m: &Self) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)];
            }
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).norm()))
    }

    /// `‖self − other‖_F / max(1, ‖other‖_F)`.
    pub fn rel_frobenius_diff(&self, other: &Self) -> T {
        (self - other).frobenius() / other.frobenius().max(T::one())
    }

    pub fn cast<U: Real>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }
}

pub(crate) fn herm_tol<T: Real>(m: &Matrix<T>) -> T {
    let base = if std::mem::size_of::<T>() >= 8 {
        T::lit(1e-10)
    } else {
        T::lit(1e-5)
    };
    base * (T::one() + m.max_abs())
}

impl<T: Real> Index<(usize, usize)> for Matrix<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

macro_rules! elementwise {
    ($trait:ident, $f:ident, $op:tt) => {
        impl<T: Real> $trait<&Matrix<T>> for &Matrix<T> {
            type Output = Matrix<T>;
            fn $f(self, rhs: &Matrix<T>) -> Matrix<T> {
                assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
                Matrix {
                    rows: self.rows,
                    cols: self.cols,
                    data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a $op *b).collect(),
                }
            }
        }
        impl<T: Real> $trait<Matrix<T>> for Matrix<T> {
            type Output = Matrix<T>;
            fn $f(self, rhs: Matrix<T>) -> Matrix<T> {
                (&self).$f(&rhs)
            }
        }
    };
}

elementwise!(Add, add, +);
elementwise!(Sub, sub, -);

impl<T: Real> Mul<&Matrix<T>> for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs)
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        self.map(|z| -z)
    }
}

/// Wire form: `{"rows": r, "cols": c, "re": [[...]], "im": [[...]]}`.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    rows: usize,
    cols: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl<T: Real> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let part = |f: &dyn Fn(C<T>) -> T| -> Vec<Vec<f64>> {
            (0..self.rows)
                .map(|i| (0..self.cols).map(|j| f(self[(i, j)]).as_f64()).collect())
                .collect()
        };
        MatrixWire {
            rows: self.rows,
            cols: self.cols,
            re: part(&|z| z.re),
            im: part(&|z| z.im),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Matrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = MatrixWire::deserialize(d)?;
        let shape_ok = |parts: &Vec<Vec<f64>>| {
            parts.len() == w.rows && parts.iter().all(|row| row.len() == w.cols)
        };
        if !shape_ok(&w.re) || !shape_ok(&w.im) {
            return Err(D::Error::custom(format!(
                "re/im arrays do not match declared shape {}x{}",
                w.rows, w.cols
            )));
        }
        Ok(Matrix::from_fn(w.rows, w.cols, |i, j| {
            Complex::new(T::lit(w.re[i][j]), T::lit(w.im[i][j]))
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    #[test]
    fn kron_unit_with_identity() {
        let k = M::unit(2, 2, 0, 0).kron(&M::identity(2));
        assert_eq!(k, M::diag_real(&[1.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn kron_scalar_identity() {
        let b = M::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(M::identity(1).kron(&b), b);
    }

    #[test]
    fn adjoint_involution() {
        let a = M::from_fn(2, 3, |i, j| Complex::new(i as f64 + 0.5, j as f64 - 1.0));
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.adjoint().rows(), 3);
    }

    #[test]
    fn json_round_trip_and_shape_check() {
        let a = M::from_fn(2, 2, |i, j| Complex::new(i as f64, -(j as f64)));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":2,"re":[[0.0,0.0],[1.0,1.0]],"im":[[-0.0,-1.0],[-0.0,-1.0]]}"#);
        let back: M = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
        let bad = r#"{"rows":2,"cols":2,"re":[[0.0]],"im":[[0.0]]}"#;
        assert!(serde_json::from_str::<M>(bad).is_err());
    }

    #[test]
    fn bilinear_is_trace_with_transpose() {
        let x = M::from_fn(2, 2, |i, j| Complex::new((i + 2 * j) as f64, 1.0));
        let y = M::from_fn(2, 2, |i, j| Complex::new(1.0, (i * j) as f64));
        let direct = x.matmul(&y.transpose()).trace();
        assert!((x.bilinear(&y) - direct).norm() < 1e-14);
    }

    #[test]
    fn empty_matrix_is_legal() {
        let z = M::zeros(0, 0);
        assert!(z.is_hermitian());
        assert_eq!(z.frobenius(), 0.0);
    }
}
