//! The identification `γ` of `M_n` with its dual, the functional/element
//! pairing, linear maps `M_k → M_m` in Choi, Kraus and Holevo form, and the
//! flat adjoint.
//!
//! A functional on `M_n` is stored as the matrix `Y` with `f(X) = tr(X·Yᵗ)`,
//! so `f(E_ij) = Y_ij`. A block of functionals on `M_n(M_m)` is a
//! [`BlockMatrix`] of such matrices.

use serde::{Deserialize, Serialize};

use crate::block::{is_psd, BlockMatrix};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::random::{rng, wishart};
use crate::scalar::{czero, C};
use crate::separable::sample_dmax;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionalMatrix {
    pub y: Matrix<f64>,
}

impl FunctionalMatrix {
    pub fn apply(&self, x: &Matrix<f64>) -> C<f64> {
        x.bilinear(&self.y)
    }

    pub fn dim(&self) -> usize {
        self.y.rows()
    }

    /// Positive functionals are exactly those with PSD matrix.
    pub fn is_positive(&self, tol: f64) -> Result<bool> {
        Ok(is_psd(&self.y, tol)?.psd)
    }
}

pub fn gamma(y: &Matrix<f64>) -> Result<FunctionalMatrix> {
    if !y.is_square() {
        return Err(Error::ShapeMismatch(format!("gamma needs a square matrix, got {}x{}", y.rows(), y.cols())));
    }
    Ok(FunctionalMatrix { y: y.clone() })
}

/// Recovers `Y` from the functional's values on matrix units.
pub fn gamma_inv(f: &FunctionalMatrix) -> Matrix<f64> {
    let n = f.dim();
    Matrix::from_fn(n, n, |i, j| f.apply(&Matrix::unit(n, n, i, j)))
}

/// `Σ_{ij} tr(A_ij·Y_ijᵗ)` for a block of functional matrices `F = (Y_ij)`.
pub fn pair(f: &BlockMatrix<f64>, a: &BlockMatrix<f64>) -> Result<C<f64>> {
    if f.n() != a.n() || f.m() != a.m() {
        return Err(Error::ShapeMismatch(format!(
            "pairing shapes ({}, {}) and ({}, {})",
            f.n(),
            f.m(),
            a.n(),
            a.m()
        )));
    }
    Ok(a.flat().bilinear(f.flat()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolevoTerm {
    /// Positive functional on `M_k`, stored through `γ`.
    pub s: Matrix<f64>,
    #[serde(rename = "P")]
    pub p: Matrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum Presentation {
    Choi(BlockMatrix<f64>),
    /// `X ↦ Σ A_l* X A_l` with `A_l` of shape `k × m`.
    Kraus(Vec<Matrix<f64>>),
    /// `X ↦ Σ s_l(X) P_l`.
    Holevo(Vec<HolevoTerm>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapWire", into = "MapWire")]
pub struct MatrixMap {
    k: usize,
    m: usize,
    presentation: Presentation,
}

#[derive(Serialize, Deserialize)]
struct MapWire {
    k: usize,
    m: usize,
    #[serde(flatten)]
    presentation: Presentation,
}

impl TryFrom<MapWire> for MatrixMap {
    type Error = Error;
    fn try_from(w: MapWire) -> Result<Self> {
        MatrixMap::new(w.k, w.m, w.presentation)
    }
}

impl From<MatrixMap> for MapWire {
    fn from(p: MatrixMap) -> Self {
        MapWire {
            k: p.k,
            m: p.m,
            presentation: p.presentation,
        }
    }
}

fn shape(what: &str, mat: &Matrix<f64>, rows: usize, cols: usize) -> Result<()> {
    if mat.rows() != rows || mat.cols() != cols {
        return Err(Error::ShapeMismatch(format!(
            "{what}: expected {rows}x{cols}, got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    Ok(())
}

impl MatrixMap {
    pub fn new(k: usize, m: usize, presentation: Presentation) -> Result<Self> {
        match &presentation {
            Presentation::Choi(c) => {
                if c.n() != k || c.m() != m {
                    return Err(Error::ShapeMismatch(format!(
                        "choi: expected ({k}, {m}) blocks, got ({}, {})",
                        c.n(),
                        c.m()
                    )));
                }
            }
            Presentation::Kraus(ops) => {
                for a in ops {
                    shape("kraus operator", a, k, m)?;
                }
            }
            Presentation::Holevo(terms) => {
                for t in terms {
                    shape("holevo s", &t.s, k, k)?;
                    shape("holevo P", &t.p, m, m)?;
                }
            }
        }
        Ok(Self { k, m, presentation })
    }

    pub fn from_choi(c: BlockMatrix<f64>) -> Self {
        Self {
            k: c.n(),
            m: c.m(),
            presentation: Presentation::Choi(c),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    pub fn kind(&self) -> &'static str {
        match self.presentation {
            Presentation::Choi(_) => "choi",
            Presentation::Kraus(_) => "kraus",
            Presentation::Holevo(_) => "holevo",
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::new(d, d, Presentation::Kraus(vec![Matrix::identity(d)])).expect("square")
    }

    pub fn transpose_map(d: usize) -> Self {
        Self::from_choi(BlockMatrix::from_flat(d, d, swap_operator(d)).expect("square"))
    }

    /// `X ↦ tr(X)·I_m/m`.
    pub fn depolarizing(k: usize, m: usize) -> Self {
        let p = Matrix::identity(m).scale_real(1.0 / m as f64);
        Self::new(k, m, Presentation::Holevo(vec![HolevoTerm { s: Matrix::identity(k), p }])).expect("shapes")
    }

    /// `X ↦ Σ_i x_ii E_ii`.
    pub fn dephasing(d: usize) -> Self {
        let terms = (0..d)
            .map(|i| HolevoTerm {
                s: Matrix::unit(d, d, i, i),
                p: Matrix::unit(d, d, i, i),
            })
            .collect();
        Self::new(d, d, Presentation::Holevo(terms)).expect("shapes")
    }

    /// `X ↦ A·X·B` with `A: m×k`, `B: k×m`.
    pub fn sandwich(a: &Matrix<f64>, b: &Matrix<f64>) -> Result<Self> {
        let (m, k) = (a.rows(), a.cols());
        shape("right factor", b, k, m)?;
        let mut c = BlockMatrix::zeros(k, m).into_flat();
        for i in 0..k {
            for j in 0..k {
                let img = a.matmul(&Matrix::unit(k, k, i, j)).matmul(b);
                c.set_sub_matrix(i * m, j * m, &img);
            }
        }
        Ok(Self::from_choi(BlockMatrix::from_flat(k, m, c)?))
    }

    pub fn evaluate(&self, x: &Matrix<f64>) -> Result<Matrix<f64>> {
        shape("map argument", x, self.k, self.k)?;
        let (k, m) = (self.k, self.m);
        Ok(match &self.presentation {
            Presentation::Choi(c) => {
                let flat = c.flat();
                Matrix::from_fn(m, m, |p, q| {
                    let mut s = czero();
                    for i in 0..k {
                        for j in 0..k {
                            s += x[(i, j)] * flat[(i * m + p, j * m + q)];
                        }
                    }
                    s
                })
            }
            Presentation::Kraus(ops) => {
                let mut out = Matrix::zeros(m, m);
                for a in ops {
                    out = &out + &a.adjoint().matmul(x).matmul(a);
                }
                out
            }
            Presentation::Holevo(terms) => {
                let mut out = Matrix::zeros(m, m);
                for t in terms {
                    out = &out + &t.p.scale(x.bilinear(&t.s));
                }
                out
            }
        })
    }

    /// `Σ E_ij ⊗ φ(E_ij)`.
    pub fn choi(&self) -> BlockMatrix<f64> {
        if let Presentation::Choi(c) = &self.presentation {
            return c.clone();
        }
        let (k, m) = (self.k, self.m);
        let mut flat = Matrix::zeros(k * m, k * m);
        for i in 0..k {
            for j in 0..k {
                let img = self.evaluate(&Matrix::unit(k, k, i, j)).expect("shape checked");
                flat.set_sub_matrix(i * m, j * m, &img);
            }
        }
        BlockMatrix::from_flat(k, m, flat).expect("shape")
    }

    pub fn to_choi(&self) -> Self {
        Self::from_choi(self.choi())
    }

    /// `φ_n : M_n(M_k) → M_n(M_m)`, applied blockwise.
    pub fn ampliate(&self, x: &BlockMatrix<f64>) -> Result<BlockMatrix<f64>> {
        if x.m() != self.k {
            return Err(Error::ShapeMismatch(format!("ampliation: inner size {} vs domain {}", x.m(), self.k)));
        }
        let n = x.n();
        let mut flat = Matrix::zeros(n * self.m, n * self.m);
        for i in 0..n {
            for j in 0..n {
                flat.set_sub_matrix(i * self.m, j * self.m, &self.evaluate(&x.block(i, j))?);
            }
        }
        BlockMatrix::from_flat(n, self.m, flat)
    }

    /// Largest entrywise deviation between the two maps on the matrix units.
    pub fn basis_deviation(&self, other: &Self) -> Result<f64> {
        if self.k != other.k || self.m != other.m {
            return Err(Error::ShapeMismatch("maps of different shape".into()));
        }
        Ok(self.choi().flat().max_abs_diff(other.choi().flat()))
    }
}

pub fn map_from_choi(c: &BlockMatrix<f64>) -> MatrixMap {
    MatrixMap::from_choi(c.clone())
}

/// `φ^♭ : M_m → M_k`, built entrywise as `φ^♭(E_ij) = γ⁻¹(f_ij)` where
/// `f_ij(X) = φ(X)_ij`.
pub fn flat_adjoint(phi: &MatrixMap) -> MatrixMap {
    let (k, m) = (phi.k, phi.m);
    let images: Vec<Matrix<f64>> = (0..k * k)
        .map(|r| phi.evaluate(&Matrix::unit(k, k, r / k, r % k)).expect("shape"))
        .collect();
    let mut flat = Matrix::zeros(m * k, m * k);
    for i in 0..m {
        for j in 0..m {
            // γ⁻¹(f_ij)_ab = f_ij(E_ab) = φ(E_ab)_ij
            let y = Matrix::from_fn(k, k, |a, b| images[a * k + b][(i, j)]);
            flat.set_sub_matrix(i * k, j * k, &y);
        }
    }
    MatrixMap::from_choi(BlockMatrix::from_flat(m, k, flat).expect("shape"))
}

/// Hilbert–Schmidt adjoint `φ†` (`tr(φ(X)* Y) = tr(X* φ†(Y))`). This is the
/// conjugated variant and is NOT the flat adjoint `φ^♭`.
pub fn hilbert_schmidt_adjoint(phi: &MatrixMap) -> MatrixMap {
    let flat = flat_adjoint(phi);
    MatrixMap::from_choi(BlockMatrix::from_flat(flat.k, flat.m, flat.choi().flat().conj()).expect("shape"))
}

/// Swap operator on `ℂ^d ⊗ ℂ^d`: `Σ E_ij ⊗ E_ji`.
pub fn swap_operator(d: usize) -> Matrix<f64> {
    let mut s = Matrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(i * d + j, j * d + i)] = crate::scalar::cone();
        }
    }
    s
}

/// Unnormalized maximally entangled `Σ E_ij ⊗ E_ij`.
pub fn max_entangled(d: usize) -> BlockMatrix<f64> {
    MatrixMap::identity(d).choi()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingViolation {
    pub sample: usize,
    pub test: String,
    pub value: f64,
    pub functional: BlockMatrix<f64>,
    pub element: BlockMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub n: usize,
    pub m: usize,
    pub samples: usize,
    /// Smallest pairing of a separable functional with a block-positive element.
    pub min_separable_vs_block_positive: Option<f64>,
    /// Smallest pairing of a block-positive functional with a separable element.
    pub min_block_positive_vs_separable: Option<f64>,
    /// Smallest eigenvalue of `(f_ij(v))` over block-positive `F`, PSD `v`.
    pub min_matrix_evaluation: Option<f64>,
    pub violations: Vec<PairingViolation>,
}

/// Random decomposable (hence block-positive) element `P + Qᴳ`.
pub fn sample_block_positive(n: usize, m: usize, seed: u64, stream: u64) -> BlockMatrix<f64> {
    let mut g = rng(seed, stream);
    let d = n * m;
    let rp = 1 + (crate::random::gaussian(&mut g).abs() * d as f64) as usize % d;
    let rq = 1 + (crate::random::gaussian(&mut g).abs() * d as f64) as usize % d;
    let wp: f64 = crate::random::gaussian(&mut g).abs() * 0.5;
    let p = wishart(&mut g, d, rp).scale_real(wp);
    let q = wishart(&mut g, d, rq);
    let qb = BlockMatrix::from_flat(n, m, q).expect("shape");
    BlockMatrix::from_flat(n, m, p).expect("shape").add(&qb.partial_transpose())
}

/// Sampling check of the two duality statements: separable functionals are
/// non-negative on block-positive elements, and block-positive functionals are
/// non-negative on separable elements (with PSD matrix-valued evaluations).
pub fn dual_cone_check(n: usize, m: usize, samples: usize, seed: u64) -> Result<DualReport> {
    let tol = 1e-9;
    let mut report = DualReport {
        n,
        m,
        samples,
        min_separable_vs_block_positive: None,
        min_block_positive_vs_separable: None,
        min_matrix_evaluation: None,
        violations: Vec::new(),
    };
    let lower = |slot: &mut Option<f64>, v: f64| *slot = Some(slot.map_or(v, |s: f64| s.min(v)));
    for s in 0..samples {
        let base = 4 * s as u64;
        let terms = 1 + s % 4;
        let (sep_f, _) = sample_dmax(n, m, terms, seed.wrapping_add(base));
        let bp = sample_block_positive(n, m, seed, base + 1);
        let v1 = pair(&sep_f, &bp)?.re / (1.0 + sep_f.flat().frobenius() * bp.flat().frobenius());
        lower(&mut report.min_separable_vs_block_positive, v1);
        if v1 < -tol {
            report.violations.push(PairingViolation {
                sample: s,
                test: "separable functional vs block-positive element".into(),
                value: v1,
                functional: sep_f.clone(),
                element: bp.clone(),
            });
        }
        let bp_f = sample_block_positive(n, m, seed, base + 2);
        let (sep, _) = sample_dmax(n, m, terms, seed.wrapping_add(base + 3));
        let v2 = pair(&bp_f, &sep)?.re / (1.0 + bp_f.flat().frobenius() * sep.flat().frobenius());
        lower(&mut report.min_block_positive_vs_separable, v2);
        if v2 < -tol {
            report.violations.push(PairingViolation {
                sample: s,
                test: "block-positive functional vs separable element".into(),
                value: v2,
                functional: bp_f.clone(),
                element: sep.clone(),
            });
        }
        let mut g = rng(seed, base + 3 + (1 << 40));
        let v = wishart(&mut g, m, 1 + s % m.max(1));
        let eval = Matrix::from_fn(n, n, |i, j| v.bilinear(&bp_f.block(i, j)));
        let lam = is_psd(&eval.hermitian_part(), tol)?.min_eigenvalue / (1.0 + eval.max_abs());
        lower(&mut report.min_matrix_evaluation, lam);
        if lam < -tol {
            report.violations.push(PairingViolation {
                sample: s,
                test: "matrix-valued evaluation on a PSD element".into(),
                value: lam,
                functional: bp_f,
                element: BlockMatrix::product(&Matrix::identity(n), &v),
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre, rng};

    type M = Matrix<f64>;

    #[test]
    fn gamma_of_identity_is_trace() {
        let mut g = rng(5, 0);
        let x = ginibre(&mut g, 2, 2);
        let f = gamma(&M::identity(2)).unwrap();
        assert!((f.apply(&x) - x.trace()).norm() < 1e-14);
    }

    #[test]
    fn gamma_picks_entries() {
        let f = gamma(&M::unit(2, 2, 0, 1)).unwrap();
        assert_eq!(f.apply(&M::unit(2, 2, 0, 1)).re, 1.0);
        assert_eq!(f.apply(&M::unit(2, 2, 1, 0)).re, 0.0);
        let y = ginibre(&mut rng(1, 1), 3, 3);
        assert_eq!(gamma_inv(&gamma(&y).unwrap()), y);
    }

    #[test]
    fn pair_on_matrix_units() {
        let e = BlockMatrix::product(&M::unit(2, 2, 0, 0), &M::unit(2, 2, 0, 0));
        assert_eq!(pair(&e, &e).unwrap().re, 1.0);
        assert!(pair(&e, &BlockMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn choi_examples() {
        let me = max_entangled(2);
        assert_eq!(me.flat()[(0, 3)].re, 1.0);
        let dep = MatrixMap::depolarizing(2, 3).choi();
        assert!(dep.flat().max_abs_diff(&M::identity(6).scale_real(1.0 / 3.0)) < 1e-15);
        let k = MatrixMap::new(2, 3, Presentation::Kraus(vec![ginibre(&mut rng(2, 0), 2, 3)])).unwrap();
        assert!(map_from_choi(&k.choi()).basis_deviation(&k).unwrap() < 1e-13);
    }

    #[test]
    fn flat_adjoint_of_sandwich() {
        let mut g = rng(9, 0);
        let a = ginibre(&mut g, 3, 2);
        let b = ginibre(&mut g, 2, 3);
        let phi = MatrixMap::sandwich(&a, &b).unwrap();
        let expect = MatrixMap::sandwich(&a.transpose(), &b.transpose()).unwrap();
        let flat = flat_adjoint(&phi);
        assert_eq!((flat.k(), flat.m()), (3, 2));
        assert!(flat.basis_deviation(&expect).unwrap() < 1e-12);
        assert!(flat_adjoint(&flat).basis_deviation(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn dagger_differs_from_flat() {
        let mut g = rng(10, 0);
        let a = ginibre(&mut g, 2, 2);
        let b = ginibre(&mut g, 2, 2);
        let phi = MatrixMap::sandwich(&a, &b).unwrap();
        let dag = hilbert_schmidt_adjoint(&phi);
        let expect = MatrixMap::sandwich(&a.adjoint(), &b.adjoint()).unwrap();
        assert!(dag.basis_deviation(&expect).unwrap() < 1e-12);
        assert!(dag.basis_deviation(&flat_adjoint(&phi)).unwrap() > 1e-3);
    }

    #[test]
    fn map_json_round_trip() {
        let phi = MatrixMap::dephasing(2);
        let s = serde_json::to_string(&phi).unwrap();
        assert!(s.contains("\"kind\":\"holevo\"") && s.contains("\"P\""));
        let back: MatrixMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
        let bad = s.replace("\"k\":2", "\"k\":3");
        assert!(serde_json::from_str::<MatrixMap>(&bad).is_err());
    }

    #[test]
    fn empty_dual_report() {
        let r = dual_cone_check(2, 2, 0, 0).unwrap();
        assert!(r.violations.is_empty() && r.min_separable_vs_block_positive.is_none());
    }

    #[test]
    fn dual_sampling_has_no_violations() {
        let r = dual_cone_check(2, 3, 40, 1).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations.first().map(|v| v.value));
    }
}
