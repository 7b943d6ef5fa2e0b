//! Alternating eigenvector search for extremal product-vector values
//! `⟨x⊗y, A (x⊗y)⟩` over unit `x ∈ ℂ^n`, `y ∈ ℂ^m`.

use serde::{Deserialize, Serialize};

use crate::block::BlockMatrix;
use crate::eigen::eig_hermitian;
use crate::error::Result;
use crate::matrix::Matrix;
use crate::random::{rng, unit_vector};
use crate::scalar::{cone, czero, C};

const MAX_SWEEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductSearch {
    pub x: Vec<C<f64>>,
    pub y: Vec<C<f64>>,
    pub value: f64,
    /// Restart that produced the reported optimum.
    pub restart: usize,
    pub restarts_used: usize,
}

/// `Σ_{ij} x̄_i x_j A_{ij}`, the `m × m` compression onto `x`.
pub fn compress_outer(a: &BlockMatrix<f64>, x: &[C<f64>]) -> Matrix<f64> {
    let (n, m) = (a.n(), a.m());
    let flat = a.flat();
    Matrix::from_fn(m, m, |p, q| {
        let mut s = czero();
        for i in 0..n {
            for j in 0..n {
                s += x[i].conj() * x[j] * flat[(i * m + p, j * m + q)];
            }
        }
        s
    })
}

/// `(y* A_{ij} y)_{ij}`, the `n × n` compression onto `y`.
pub fn compress_inner(a: &BlockMatrix<f64>, y: &[C<f64>]) -> Matrix<f64> {
    let (n, m) = (a.n(), a.m());
    let flat = a.flat();
    Matrix::from_fn(n, n, |i, j| {
        let mut s = czero();
        for p in 0..m {
            for q in 0..m {
                s += y[p].conj() * y[q] * flat[(i * m + p, j * m + q)];
            }
        }
        s
    })
}

fn extreme_vector(h: &Matrix<f64>, which: Extremum) -> Result<(f64, Vec<C<f64>>)> {
    let spec = eig_hermitian(&h.hermitian_part())?;
    let k = match which {
        Extremum::Min => 0,
        Extremum::Max => spec.eigenvalues.len() - 1,
    };
    Ok((spec.eigenvalues[k], spec.vector(k)))
}

fn basis(d: usize, k: usize) -> Vec<C<f64>> {
    let mut v = vec![czero(); d];
    v[k] = cone();
    v
}

fn better(which: Extremum, cand: f64, best: f64) -> bool {
    match which {
        Extremum::Min => cand < best,
        Extremum::Max => cand > best,
    }
}

/// One see-saw run from a starting `y` (or `x` when `start_with_x`).
pub(crate) fn run(
    a: &BlockMatrix<f64>,
    which: Extremum,
    mut x: Vec<C<f64>>,
    mut y: Vec<C<f64>>,
    start_with_x: bool,
    max_sweeps: usize,
) -> Result<(Vec<C<f64>>, Vec<C<f64>>, f64)> {
    let scale = 1.0 + a.flat().max_abs();
    let mut value = if start_with_x {
        let (v, yy) = extreme_vector(&compress_outer(a, &x), which)?;
        y = yy;
        v
    } else {
        f64::NAN
    };
    for _ in 0..max_sweeps {
        let (_, xx) = extreme_vector(&compress_inner(a, &y), which)?;
        x = xx;
        let (v, yy) = extreme_vector(&compress_outer(a, &x), which)?;
        y = yy;
        let converged = !value.is_nan() && (v - value).abs() <= 1e-15 * scale;
        value = v;
        if converged {
            break;
        }
    }
    Ok((x, y, value))
}

/// Best product value over `restarts` runs. The first `m` runs start from
/// basis vectors `y = e_k`, the next `n` from `x = e_k`, the rest from
/// Haar-random `y` drawn from stream `(seed, restart)`. Ties go to the lower
/// restart index.
pub fn product_extremum(
    a: &BlockMatrix<f64>,
    which: Extremum,
    restarts: usize,
    seed: u64,
) -> Result<ProductSearch> {
    let (n, m) = (a.n(), a.m());
    let mut best: Option<ProductSearch> = None;
    let restarts = restarts.max(1);
    for r in 0..restarts {
        let (x0, y0, with_x) = if r < m {
            (vec![czero(); n], basis(m, r), false)
        } else if r < m + n {
            (basis(n, r - m), vec![czero(); m], true)
        } else {
            let mut g = rng(seed, r as u64);
            (vec![czero(); n], unit_vector(&mut g, m), false)
        };
        let (x, y, value) = run(a, which, x0, y0, with_x, MAX_SWEEPS)?;
        let take = match &best {
            None => true,
            Some(b) => better(which, value, b.value),
        };
        if take {
            best = Some(ProductSearch {
                x,
                y,
                value,
                restart: r,
                restarts_used: restarts,
            });
        }
    }
    let mut out = best.expect("at least one restart");
    // Recompute from the vectors so the stored value is exactly reproducible.
    out.value = a.product_value(&out.x, &out.y);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::tensor_sum;

    type M = Matrix<f64>;

    #[test]
    fn finds_negative_corner() {
        let a = BlockMatrix::product(&M::unit(2, 2, 0, 0), &M::unit(2, 2, 0, 0)).scale_real(-1.0);
        let s = product_extremum(&a, Extremum::Min, 8, 0).unwrap();
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!((s.x[0].norm() - 1.0).abs() < 1e-12 && (s.y[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_is_nonnegative_on_products() {
        let mut terms = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                terms.push((M::unit(2, 2, i, j), M::unit(2, 2, j, i)));
            }
        }
        let swap = tensor_sum(2, 2, &terms);
        let s = product_extremum(&swap, Extremum::Min, 16, 3).unwrap();
        assert!(s.value > -1e-12 && s.value < 1e-9);
        let t = product_extremum(&swap, Extremum::Max, 16, 3).unwrap();
        assert!((t.value - 1.0).abs() < 1e-10);
    }
}
