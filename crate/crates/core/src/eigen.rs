//! Hermitian eigensolver.
//!
//! An `n × n` hermitian `H = A + iB` is embedded as the real symmetric
//! `2n × 2n` matrix `[[A, -B], [B, A]]`, which has every eigenvalue of `H`
//! with doubled multiplicity. Cyclic Jacobi rotations diagonalize the
//! embedding; complex eigenvectors `u + iv` are then recovered from the real
//! ones `(u, v)` by complex Gram–Schmidt, which discards the `i·(u + iv)`
//! twin of every pair.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{czero, Real, C};

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Columns are orthonormal eigenvectors, in eigenvalue order.
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn min(&self) -> Option<T> {
        self.eigenvalues.first().copied()
    }

    pub fn max(&self) -> Option<T> {
        self.eigenvalues.last().copied()
    }

    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        self.eigenvectors.col(k)
    }

    /// Rebuild `Σ λ_k v_k v_k*`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let n = self.eigenvalues.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.vector(k);
            out = &out + &Matrix::outer(&v, &v).scale_real(lambda);
        }
        out
    }
}

pub fn eig_hermitian<T: Real>(h: &Matrix<T>) -> Result<Spectrum<T>> {
    h.check_hermitian()?;
    let n = h.rows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let h = h.hermitian_part();
    let dim = 2 * n;
    let mut a = vec![T::zero(); dim * dim];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            a[i * dim + j] = z.re;
            a[(i + n) * dim + (j + n)] = z.re;
            a[i * dim + (j + n)] = -z.im;
            a[(i + n) * dim + j] = z.im;
        }
    }
    let (vals, vecs) = jacobi_symmetric(&mut a, dim)?;

    // Pivoted complex Gram–Schmidt: repeatedly take the candidate with the
    // largest residual and deflate it from the rest.
    let mut cands: Vec<(T, Vec<C<T>>)> = (0..dim)
        .map(|k| {
            let z = (0..n)
                .map(|i| Complex::new(vecs[i * dim + k], vecs[(i + n) * dim + k]))
                .collect();
            (vals[k], z)
        })
        .collect();
    let mut chosen: Vec<(T, Vec<C<T>>)> = Vec::with_capacity(n);
    while chosen.len() < n {
        let (best, best_norm) = cands
            .iter()
            .enumerate()
            .map(|(idx, (_, z))| (idx, norm2(z)))
            .fold((usize::MAX, T::zero()), |acc, (idx, nz)| {
                if nz > acc.1 {
                    (idx, nz)
                } else {
                    acc
                }
            });
        if best == usize::MAX || best_norm < T::lit(0.1) {
            return Err(Error::NoConvergence { residual: f64::NAN });
        }
        let (lambda, mut q) = cands.swap_remove(best);
        for qi in &mut q {
            *qi /= best_norm;
        }
        for (_, z) in &mut cands {
            let proj = inner(&q, z);
            for (zi, qi) in z.iter_mut().zip(&q) {
                *zi -= *qi * proj;
            }
        }
        chosen.push((lambda, q));
    }
    chosen.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));

    let mut eigenvectors = Matrix::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (k, (lambda, mut v)) in chosen.into_iter().enumerate() {
        fix_phase(&mut v);
        for i in 0..n {
            eigenvectors[(i, k)] = v[i];
        }
        eigenvalues.push(lambda);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Make the first coordinate with non-negligible modulus real and positive.
pub(crate) fn fix_phase<T: Real>(v: &mut [C<T>]) {
    let cutoff = T::lit(1e-8);
    if let Some(z) = v.iter().copied().find(|z| z.norm() > cutoff) {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

pub(crate) fn inner<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |acc, (x, y)| acc + x.conj() * *y)
}

pub(crate) fn norm2<T: Real>(a: &[C<T>]) -> T {
    a.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
}

/// Cyclic Jacobi on a dense row-major real symmetric matrix. Returns the
/// (unsorted) diagonal and the accumulated rotation with eigenvectors in columns.
fn jacobi_symmetric<T: Real>(a: &mut [T], n: usize) -> Result<(Vec<T>, Vec<T>)> {
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let scale = a.iter().fold(T::zero(), |acc, x| acc + *x * *x).sqrt();
    let target = (T::eig_tol() * T::lit(1e-3)).max(T::epsilon() * T::lit(8.0))
        * scale.max(T::min_positive_value());
    let off = |a: &[T]| {
        let mut s = T::zero();
        for i in 0..n {
            for j in (i + 1)..n {
                s += a[i * n + j] * a[i * n + j];
            }
        }
        (s + s).sqrt()
    };
    let two = T::lit(2.0);
    for _ in 0..MAX_SWEEPS {
        if off(a) <= target {
            return Ok(((0..n).map(|i| a[i * n + i]).collect(), v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= T::min_positive_value() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let residual = off(a);
    if residual <= T::eig_tol() * scale.max(T::one()) {
        Ok(((0..n).map(|i| a[i * n + i]).collect(), v))
    } else {
        Err(Error::NoConvergence {
            residual: residual.as_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = Matrix<f64>;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn identity_spectrum() {
        let s = eig_hermitian(&M::identity(3)).unwrap();
        assert!(close(&s.eigenvalues, &[1.0, 1.0, 1.0]));
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let s = eig_hermitian(&M::diag_real(&[1.0, -2.0])).unwrap();
        assert!(close(&s.eigenvalues, &[-2.0, 1.0]));
    }

    #[test]
    fn pauli_x() {
        let x = M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = eig_hermitian(&x).unwrap();
        assert!(close(&s.eigenvalues, &[-1.0, 1.0]));
    }

    #[test]
    fn pauli_y_complex_eigenvectors() {
        let y = M::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex::new(0.0, -1.0),
            (1, 0) => Complex::new(0.0, 1.0),
            _ => czero(),
        });
        let s = eig_hermitian(&y).unwrap();
        assert!(close(&s.eigenvalues, &[-1.0, 1.0]));
        assert!(s.reconstruct().max_abs_diff(&y) < 1e-12);
        // phase convention: first coordinate real positive
        assert!(s.vector(0)[0].im.abs() < 1e-14 && s.vector(0)[0].re > 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(eig_hermitian(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn empty_is_fine() {
        let s = eig_hermitian(&M::zeros(0, 0)).unwrap();
        assert!(s.eigenvalues.is_empty());
    }

    #[test]
    fn single_precision_works() {
        let x = Matrix::<f32>::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let s = eig_hermitian(&x).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-5);
        assert!((s.eigenvalues[1] - 3.0).abs() < 1e-5);
    }
}
