//! Order norm, minimal norm (numerical radius) and decomposition norm on `M_n`.

use serde::{Deserialize, Serialize};

use crate::block::BlockMatrix;
use crate::cones::{max_cone_test, ConeBudget, ConeStatus};
use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::C;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    Spectral,
    NumericalRadius,
    Bisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub method: NormMethod,
    pub iterations: usize,
    pub bracket: (f64, f64),
    /// Cone tests that returned Undetermined during bisection.
    #[serde(default)]
    pub undetermined: usize,
}

impl NormReport {
    fn exact(value: f64, method: NormMethod) -> Self {
        Self {
            value,
            method,
            iterations: 0,
            bracket: (value, value),
            undetermined: 0,
        }
    }
}

/// `inf{t : −tI ≤ h ≤ tI} = max |λ|`.
pub fn order_norm(h: &Matrix<f64>) -> Result<NormReport> {
    h.check_hermitian()?;
    let spec = eig_hermitian(h)?;
    let v = match (spec.min(), spec.max()) {
        (Some(lo), Some(hi)) => lo.abs().max(hi.abs()),
        _ => 0.0,
    };
    Ok(NormReport::exact(v, NormMethod::Spectral))
}

/// Largest singular value.
pub fn operator_norm(v: &Matrix<f64>) -> Result<f64> {
    let g = v.adjoint().matmul(v).hermitian_part();
    Ok(eig_hermitian(&g)?.max().unwrap_or(0.0).max(0.0).sqrt())
}

fn require_square(v: &Matrix<f64>) -> Result<()> {
    if v.is_square() {
        Ok(())
    } else {
        Err(Error::ShapeMismatch(format!("expected a square matrix, got {}x{}", v.rows(), v.cols())))
    }
}

/// Support function `h(θ) = λ_max(Re(e^{iθ} v))` of the numerical range.
fn support(v: &Matrix<f64>, theta: f64) -> Result<(f64, f64)> {
    let r = v.scale(C::from_polar(1.0, theta)).hermitian_part();
    let s = eig_hermitian(&r)?;
    Ok((s.max().unwrap_or(0.0), -s.min().unwrap_or(0.0)))
}

/// Bound on `max h` over the arc `[t1, t2]` from the two supporting lines.
fn arc_bound(t1: f64, h1: f64, t2: f64, h2: f64) -> f64 {
    // vertex p = a + ib with a cos t − b sin t = h at both ends
    let det = (t1 - t2).sin();
    let a = (-h1 * t2.sin() + h2 * t1.sin()) / det;
    let b = (h2 * t1.cos() - h1 * t2.cos()) / det;
    let r = a.hypot(b);
    let peak = (-b.atan2(a)).rem_euclid(std::f64::consts::TAU);
    let inside = peak >= t1 && peak <= t2;
    if inside {
        r.max(h1).max(h2)
    } else {
        h1.max(h2)
    }
}

const GRID: usize = 256;
const MAX_SPLITS: usize = 200_000;

#[derive(Debug, Clone, Copy)]
struct Arc {
    bound: f64,
    t1: f64,
    h1: f64,
    t2: f64,
    h2: f64,
}

impl Arc {
    fn new(t1: f64, h1: f64, t2: f64, h2: f64) -> Self {
        Self {
            bound: arc_bound(t1, h1, t2, h2),
            t1,
            h1,
            t2,
            h2,
        }
    }
}

impl PartialEq for Arc {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Arc {}

impl PartialOrd for Arc {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Arc {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // larger bound first, then smaller angle
        self.bound.total_cmp(&other.bound).then(other.t1.total_cmp(&self.t1))
    }
}

/// `sup{|tr(ρv)| : ρ a density matrix}`, the numerical radius.
///
/// The support function is sampled at 512 directions; each arc between
/// neighbouring directions is bounded above through the vertex of its two
/// supporting lines, and the worst arc is bisected until the bracket closes.
/// When the numerical range is close to a disk every arc has to be refined,
/// so very small tolerances cost proportionally more evaluations.
pub fn min_norm(v: &Matrix<f64>, tol: f64) -> Result<NormReport> {
    require_square(v)?;
    if v.rows() == 0 || v.max_abs() == 0.0 {
        return Ok(NormReport::exact(0.0, NormMethod::NumericalRadius));
    }
    let tol = tol.max(1e-14 * v.max_abs());
    let pi = std::f64::consts::PI;
    let mut pts: Vec<(f64, f64)> = vec![(0.0, 0.0); 2 * GRID];
    for k in 0..GRID {
        let t = pi * k as f64 / GRID as f64;
        let (hp, hm) = support(v, t)?;
        pts[k] = (t, hp);
        pts[k + GRID] = (t + pi, hm);
    }
    let mut lower = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let mut heap = std::collections::BinaryHeap::with_capacity(4 * GRID);
    for k in 0..pts.len() {
        let (t1, h1) = pts[k];
        let (t2, h2) = if k + 1 == pts.len() {
            (std::f64::consts::TAU, pts[0].1)
        } else {
            pts[k + 1]
        };
        heap.push(Arc::new(t1, h1, t2, h2));
    }
    let mut iterations = 0;
    while iterations < MAX_SPLITS {
        let top = *heap.peek().expect("non-empty");
        if top.bound - lower <= tol {
            break;
        }
        heap.pop();
        let mid = 0.5 * (top.t1 + top.t2);
        let h = support(v, mid)?.0;
        lower = lower.max(h);
        heap.push(Arc::new(top.t1, top.h1, mid, h));
        heap.push(Arc::new(mid, h, top.t2, top.h2));
        iterations += 1;
    }
    let upper = heap.peek().map_or(lower, |a| a.bound).max(lower);
    Ok(NormReport {
        value: lower,
        method: NormMethod::NumericalRadius,
        iterations,
        bracket: (lower, upper),
        undetermined: 0,
    })
}

/// `[[I, w], [w*, I]] ∈ M_2(M_n)`.
pub fn corner_element(w: &Matrix<f64>) -> BlockMatrix<f64> {
    let id = Matrix::identity(w.rows());
    BlockMatrix::from_blocks(&[vec![id.clone(), w.clone()], vec![w.adjoint(), id]]).expect("square blocks")
}

/// `‖v‖_dec ≤ t` iff `[[I, v/t], [v*/t, I]]` is in the maximal cone; bisect on `t`
/// inside `[‖v‖_m, 2‖v‖_m]`. An Undetermined cone verdict stops the bisection and
/// the current bracket is returned.
pub fn dec_norm(v: &Matrix<f64>, tol: f64, budget: &ConeBudget) -> Result<NormReport> {
    require_square(v)?;
    let m = min_norm(v, tol * 0.1)?;
    if m.value == 0.0 {
        return Ok(NormReport::exact(0.0, NormMethod::Bisection));
    }
    let budget = ConeBudget {
        tol: budget.tol.min(1e-12),
        search_when_sufficient: false,
        ..*budget
    };
    let mut lo = m.bracket.0;
    let mut hi = 2.0 * m.bracket.1;
    let mut iterations = 0;
    let mut undetermined = 0;
    let test = |t: f64| -> Result<ConeStatus> {
        let el = corner_element(&v.scale_real(1.0 / t));
        Ok(max_cone_test(&el, &budget)?.status)
    };
    while hi - lo > tol && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        match test(mid)? {
            ConeStatus::Member => hi = mid,
            ConeStatus::NotMember => lo = mid,
            ConeStatus::Undetermined => {
                undetermined += 1;
                break;
            }
        }
    }
    Ok(NormReport {
        value: 0.5 * (lo + hi),
        method: NormMethod::Bisection,
        iterations,
        bracket: (lo, hi),
        undetermined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre, hermitian, rng};

    type M = Matrix<f64>;

    #[test]
    fn order_norm_examples() {
        assert_eq!(order_norm(&M::diag_real(&[3.0, -1.0])).unwrap().value, 3.0);
        assert!((order_norm(&M::identity(4)).unwrap().value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn numerical_radius_of_nilpotent() {
        let r = min_norm(&M::unit(2, 2, 0, 1), 1e-9).unwrap();
        assert!((r.value - 0.5).abs() < 1e-9);
        assert!(r.bracket.0 <= r.value && r.value <= r.bracket.1);
        assert!(r.bracket.1 - r.bracket.0 <= 1e-9);
    }

    #[test]
    fn numerical_radius_matches_spectral_for_hermitian() {
        let h = hermitian(&mut rng(3, 0), 3);
        let a = min_norm(&h, 1e-10).unwrap().value;
        let b = order_norm(&h).unwrap().value;
        assert!((a - b).abs() < 1e-9);
        let z = M::identity(3).scale(C::new(0.0, -2.5));
        assert!((min_norm(&z, 1e-10).unwrap().value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn numerical_radius_brute_force() {
        let v = ginibre(&mut rng(4, 0), 2, 2);
        let r = min_norm(&v, 1e-10).unwrap().value;
        let mut best = 0.0f64;
        for a in 0..400 {
            for b in 0..100 {
                let th = std::f64::consts::FRAC_PI_2 * a as f64 / 399.0;
                let ph = std::f64::consts::TAU * b as f64 / 100.0;
                let x = [C::new(th.cos(), 0.0), C::from_polar(th.sin(), ph)];
                best = best.max(v.quadratic_form(&x).norm());
            }
        }
        assert!(best <= r + 1e-12 && r - best < 1e-3);
    }

    #[test]
    fn corner_layout() {
        let w = M::unit(2, 2, 0, 1);
        let el = corner_element(&w);
        assert_eq!((el.n(), el.m()), (2, 2));
        assert_eq!(el.block(0, 0), M::identity(2));
        assert_eq!(el.block(0, 1), w);
        assert_eq!(el.block(1, 0), w.adjoint());
    }

    #[test]
    fn dec_norm_examples() {
        let b = ConeBudget::default();
        let p = M::diag_real(&[0.7, 0.2]);
        assert!((dec_norm(&p, 1e-10, &b).unwrap().value - 0.7).abs() < 1e-9);
        let e = dec_norm(&M::unit(2, 2, 0, 1), 1e-10, &b).unwrap();
        assert!(e.value >= 0.5 - 1e-9 && e.value <= 1.0 + 1e-9);
        assert!((e.value - 1.0).abs() < 1e-8);
    }
}
