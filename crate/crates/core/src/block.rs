//! Elements of `M_n(M_m)` with explicit block structure.
//!
//! The outer index is the first tensor factor: block `(i, j)` of the flat
//! `nm × nm` matrix occupies rows `i·m..(i+1)·m` and columns `j·m..(j+1)·m`,
//! so `a ⊗ v` has block `(i, j)` equal to `a_{ij}·v`.

use serde::{Deserialize, Serialize};

use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockWire<T>", bound = "T: Real")]
pub struct BlockMatrix<T: Real> {
    n: usize,
    m: usize,
    flat: Matrix<T>,
}

#[derive(Deserialize)]
#[serde(bound = "T: Real")]
struct BlockWire<T: Real> {
    n: usize,
    m: usize,
    flat: Matrix<T>,
}

impl<T: Real> TryFrom<BlockWire<T>> for BlockMatrix<T> {
    type Error = Error;
    fn try_from(w: BlockWire<T>) -> Result<Self> {
        BlockMatrix::from_flat(w.n, w.m, w.flat)
    }
}

impl<T: Real> BlockMatrix<T> {
    pub fn from_flat(n: usize, m: usize, flat: Matrix<T>) -> Result<Self> {
        if flat.rows() != n * m || flat.cols() != n * m {
            return Err(Error::ShapeMismatch(format!(
                "flat matrix is {}x{}, expected {}x{} for n={n}, m={m}",
                flat.rows(),
                flat.cols(),
                n * m,
                n * m
            )));
        }
        Ok(Self { n, m, flat })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            flat: Matrix::zeros(n * m, n * m),
        }
    }

    /// Assemble from an `n × n` grid of `m × m` blocks.
    pub fn from_blocks(blocks: &[Vec<Matrix<T>>]) -> Result<Self> {
        let n = blocks.len();
        let m = blocks.first().and_then(|r| r.first()).map_or(0, |b| b.rows());
        let mut out = Self::zeros(n, m);
        for (i, row) in blocks.iter().enumerate() {
            if row.len() != n {
                return Err(Error::ShapeMismatch("block grid is not square".into()));
            }
            for (j, b) in row.iter().enumerate() {
                if b.rows() != m || b.cols() != m {
                    return Err(Error::ShapeMismatch(format!("block ({i},{j}) is not {m}x{m}")));
                }
                out.flat.set_sub_matrix(i * m, j * m, b);
            }
        }
        Ok(out)
    }

    /// `a ⊗ v`.
    pub fn product(a: &Matrix<T>, v: &Matrix<T>) -> Self {
        Self {
            n: a.rows(),
            m: v.rows(),
            flat: a.kron(v),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn flat(&self) -> &Matrix<T> {
        &self.flat
    }

    pub fn into_flat(self) -> Matrix<T> {
        self.flat
    }

    pub fn block(&self, i: usize, j: usize) -> Matrix<T> {
        self.flat.sub_matrix(i * self.m, j * self.m, self.m, self.m)
    }

    pub fn blocks(&self) -> Vec<Vec<Matrix<T>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.block(i, j)).collect())
            .collect()
    }

    pub fn is_hermitian(&self) -> bool {
        self.flat.is_hermitian()
    }

    pub fn check_hermitian(&self) -> Result<()> {
        self.flat.check_hermitian()
    }

    /// Transpose every block in place of the block grid.
    pub fn partial_transpose(&self) -> Self {
        let m = self.m;
        Self {
            n: self.n,
            m,
            flat: Matrix::from_fn(self.n * m, self.n * m, |r, c| {
                let (i, a) = (r / m, r % m);
                let (j, b) = (c / m, c % m);
                self.flat[(i * m + b, j * m + a)]
            }),
        }
    }

    /// Reorder the tensor factors: `a ⊗ v ↦ v ⊗ a`, giving an element of `M_m(M_n)`.
    pub fn swap_factors(&self) -> Self {
        let (n, m) = (self.n, self.m);
        Self {
            n: m,
            m: n,
            flat: Matrix::from_fn(n * m, n * m, |r, c| {
                let (a, i) = (r / n, r % n);
                let (b, j) = (c / n, c % n);
                self.flat[(i * m + a, j * m + b)]
            }),
        }
    }

    /// Value of `⟨x⊗y, A (x⊗y)⟩`, real part.
    pub fn product_value(&self, x: &[crate::scalar::C<T>], y: &[crate::scalar::C<T>]) -> T {
        let xy: Vec<_> = x.iter().flat_map(|&xi| y.iter().map(move |&yj| xi * yj)).collect();
        self.flat.quadratic_form(&xy).re
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self {
            n: self.n,
            m: self.m,
            flat: self.flat.scale_real(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.n, self.m), (other.n, other.m), "block shape mismatch");
        Self {
            n: self.n,
            m: self.m,
            flat: &self.flat + &other.flat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.n, self.m), (other.n, other.m), "block shape mismatch");
        Self {
            n: self.n,
            m: self.m,
            flat: &self.flat - &other.flat,
        }
    }

    /// Unit `e_n = I_n ⊗ I_m`.
    pub fn unit(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            flat: Matrix::identity(n * m),
        }
    }

    pub fn cast<U: Real>(&self) -> BlockMatrix<U> {
        BlockMatrix {
            n: self.n,
            m: self.m,
            flat: self.flat.cast(),
        }
    }
}

/// Result of a positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck<T> {
    pub psd: bool,
    pub min_eigenvalue: T,
}

/// `λ_min(H) ≥ −tol·(1 + ‖H‖)`. Empty matrices are vacuously PSD with `λ_min = 0`.
pub fn is_psd<T: Real>(h: &Matrix<T>, tol: T) -> Result<PsdCheck<T>> {
    let spec = eig_hermitian(h)?;
    let lo = spec.min().unwrap_or(T::zero());
    let hi = spec.max().unwrap_or(T::zero());
    let norm = lo.abs().max(hi.abs());
    Ok(PsdCheck {
        psd: lo >= -tol * (T::one() + norm),
        min_eigenvalue: lo,
    })
}

/// Default PSD tolerance.
pub const PSD_TOL: f64 = 1e-9;

/// Write a hermitian `B ∈ M_n(M_m)` as `Σ a_j ⊗ v_j` with every factor hermitian.
///
/// Diagonal blocks contribute `E_{ii} ⊗ v_{ii}`. An off-diagonal pair
/// `(v_{ij}, v_{ji} = v_{ij}*)` with `i < j` is split as `v_{ij} = H_1 + i·H_2`
/// with `H_1, H_2` hermitian, and each `H_k` into positive and negative parts
/// `w_+ − w_-`. A part `w` with coefficient `λ ∈ {±1, ±i}` contributes
/// `(λ E_{ij} + λ̄ E_{ji}) ⊗ w`, so each pair yields at most four terms.
pub fn hermitian_tensor_decompose<T: Real>(
    b: &BlockMatrix<T>,
) -> Result<Vec<(Matrix<T>, Matrix<T>)>> {
    b.check_hermitian()?;
    let n = b.n();
    let mut terms = Vec::new();
    let zero_cut = T::epsilon();
    for i in 0..n {
        let v = b.block(i, i).hermitian_part();
        if v.max_abs() > zero_cut {
            terms.push((Matrix::unit(n, n, i, i), v));
        }
    }
    let half = T::lit(0.5);
    let i_unit = num_complex::Complex::new(T::zero(), T::one());
    for i in 0..n {
        for j in (i + 1)..n {
            let v = b.block(i, j);
            let va = v.adjoint();
            let h1 = (&v + &va).scale_real(half);
            let h2 = (&v - &va).scale(num_complex::Complex::new(T::zero(), -half));
            for (h, lambda) in [(h1, crate::scalar::cre(T::one())), (h2, i_unit)] {
                let (pos, neg) = positive_parts(&h)?;
                for (w, sign) in [(pos, T::one()), (neg, -T::one())] {
                    if w.max_abs() <= zero_cut {
                        continue;
                    }
                    let l = lambda * sign;
                    let mut a = Matrix::zeros(n, n);
                    a[(i, j)] = l;
                    a[(j, i)] = l.conj();
                    terms.push((a, w));
                }
            }
        }
    }
    Ok(terms)
}

/// `H = P − N` with `P, N ⪰ 0` from the spectral decomposition.
pub fn positive_parts<T: Real>(h: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let spec = eig_hermitian(h)?;
    let n = h.rows();
    let mut pos = Matrix::zeros(n, n);
    let mut neg = Matrix::zeros(n, n);
    for (k, &lambda) in spec.eigenvalues.iter().enumerate() {
        let v = spec.vector(k);
        let proj = Matrix::outer(&v, &v);
        if lambda > T::zero() {
            pos = &pos + &proj.scale_real(lambda);
        } else if lambda < T::zero() {
            neg = &neg + &proj.scale_real(-lambda);
        }
    }
    Ok((pos, neg))
}

/// Re-sum `Σ a_j ⊗ v_j`.
pub fn tensor_sum<T: Real>(n: usize, m: usize, terms: &[(Matrix<T>, Matrix<T>)]) -> BlockMatrix<T> {
    terms
        .iter()
        .fold(BlockMatrix::zeros(n, m), |acc, (a, v)| acc.add(&BlockMatrix::product(a, v)))
}
