//! Membership in the minimal cone `C_n^min(M_m)` (block-positive elements)
//! and the maximal cone `D_n^max(M_m) = C_n^max(M_m)` (separable elements).
//!
//! Both tests are three-valued. `Member` and `NotMember` always carry a
//! certificate that [`verify_verdict`] re-checks by direct evaluation only.

use serde::{Deserialize, Serialize};

use crate::block::{is_psd, positive_parts, BlockMatrix, PSD_TOL};
use crate::eigen::eig_hermitian;
use crate::error::Result;
use crate::matrix::Matrix;
use crate::scalar::C;
use crate::seesaw::{product_extremum, Extremum};
use crate::separable::{
    decompose_separable, DecompOptions, DecompOutcome, SeparableDecomposition, SeparableTerm,
};

/// Largest `n·m` for which PSD + PPT implies separability.
pub const PPT_EXACT_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeBudget {
    pub restarts: usize,
    pub iterations: usize,
    /// Relative tolerance for sign decisions.
    pub tol: f64,
    /// Relative squared residual at which a decomposition search stops.
    pub decomp_tol: f64,
    pub seed: u64,
    /// Run the decomposition search even when PPT already decides membership.
    pub search_when_sufficient: bool,
}

impl Default for ConeBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            iterations: 10_000,
            tol: PSD_TOL,
            decomp_tol: 1e-18,
            seed: 0,
            search_when_sufficient: true,
        }
    }
}

impl ConeBudget {
    pub fn decomp_options(&self) -> DecompOptions {
        DecompOptions {
            iterations: self.iterations,
            tol: self.decomp_tol,
            restarts: self.restarts,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeStatus {
    Member,
    NotMember,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductWitness {
    pub x: Vec<C<f64>>,
    pub y: Vec<C<f64>>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// `A = Σ a_l ⊗ v_l` with PSD factors.
    SeparableDecomposition {
        decomposition: SeparableDecomposition,
        residual: f64,
    },
    /// `⟨x⊗y, A (x⊗y)⟩ < 0`.
    ProductWitness(ProductWitness),
    /// `A` itself is PSD, hence block-positive.
    PsdSufficiency { min_eigenvalue: f64 },
    /// `A = P + Qᴳ` with `P, Q` PSD (`ᴳ` the partial transpose), hence block-positive.
    Decomposable {
        p: Matrix<f64>,
        q: Matrix<f64>,
        min_eigenvalue_p: f64,
        min_eigenvalue_q: f64,
    },
    /// PSD and PPT at `n·m ≤ 6`. Separability from PPT in these dimensions is an
    /// external theorem (Peres–Horodecki), not re-derived here.
    PptSufficiency {
        min_eigenvalue: f64,
        min_pt_eigenvalue: f64,
        source: String,
    },
    /// `⟨v, Aᴳ v⟩ < 0` for a unit `v`.
    PptViolation {
        eigenvalue: f64,
        eigenvector: Vec<C<f64>>,
    },
    /// Functional `F` (pairing `Σ_{ij} tr(A_ij F_ijᵗ)`) that is non-negative on
    /// the separable cone, with negative value on `A`. `proof` certifies `F`
    /// block-positive.
    WitnessFunctional {
        functional: BlockMatrix<f64>,
        pairing: f64,
        proof: Box<Certificate>,
    },
    BudgetReport {
        best_value: Option<f64>,
        restarts_used: usize,
        residual: Option<f64>,
        iterations: usize,
    },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::SeparableDecomposition { .. } => "separable-decomposition",
            Certificate::ProductWitness(_) => "product-witness",
            Certificate::PsdSufficiency { .. } => "psd-sufficiency",
            Certificate::Decomposable { .. } => "decomposable",
            Certificate::PptSufficiency { .. } => "ppt-sufficiency",
            Certificate::PptViolation { .. } => "ppt-violation",
            Certificate::WitnessFunctional { .. } => "witness-functional",
            Certificate::BudgetReport { .. } => "budget-report",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub status: ConeStatus,
    pub certificate: Certificate,
    /// Signed distance estimate: negative outside, non-negative inside.
    pub margin: f64,
    /// Membership was decided by an exact criterion for this dimension.
    pub exact_sufficiency: bool,
}

impl ConeVerdict {
    fn new(status: ConeStatus, certificate: Certificate, margin: f64) -> Self {
        Self {
            status,
            certificate,
            margin,
            exact_sufficiency: false,
        }
    }

    pub fn is_member(&self) -> bool {
        self.status == ConeStatus::Member
    }

    pub fn decomposition(&self) -> Option<&SeparableDecomposition> {
        match &self.certificate {
            Certificate::SeparableDecomposition { decomposition, .. } => Some(decomposition),
            _ => None,
        }
    }
}

fn scale(a: &BlockMatrix<f64>) -> f64 {
    1.0 + a.flat().max_abs() * a.flat().rows().max(1) as f64
}

/// Block-positivity test: is `⟨x⊗y, A (x⊗y)⟩ ≥ 0` for all `x, y`?
pub fn min_cone_test(a: &BlockMatrix<f64>, budget: &ConeBudget) -> Result<ConeVerdict> {
    a.check_hermitian()?;
    let thresh = budget.tol * scale(a);
    let search = if a.n() * a.m() == 0 {
        None
    } else {
        Some(product_extremum(a, Extremum::Min, budget.restarts, budget.seed)?)
    };
    if let Some(s) = &search {
        if s.value < -thresh {
            return Ok(ConeVerdict::new(
                ConeStatus::NotMember,
                Certificate::ProductWitness(ProductWitness {
                    x: s.x.clone(),
                    y: s.y.clone(),
                    value: s.value,
                }),
                s.value,
            ));
        }
    }
    let best = search.as_ref().map(|s| s.value);
    let flat = is_psd(a.flat(), budget.tol)?;
    if flat.psd {
        let mut v = ConeVerdict::new(
            ConeStatus::Member,
            Certificate::PsdSufficiency {
                min_eigenvalue: flat.min_eigenvalue,
            },
            best.unwrap_or(0.0).max(0.0),
        );
        v.exact_sufficiency = true;
        return Ok(v);
    }
    if let Some(cert) = find_decomposable(a, budget)? {
        let mut v = ConeVerdict::new(ConeStatus::Member, cert, best.unwrap_or(0.0).max(0.0));
        v.exact_sufficiency = true;
        return Ok(v);
    }
    Ok(ConeVerdict::new(
        ConeStatus::Undetermined,
        Certificate::BudgetReport {
            best_value: best,
            restarts_used: budget.restarts,
            residual: None,
            iterations: 0,
        },
        best.unwrap_or(0.0),
    ))
}

/// Search for `A = P + Qᴳ` with `P, Q ⪰ 0` by alternating projections between
/// `{Q ⪰ 0}` and `{Q : A − Qᴳ ⪰ 0}`.
fn find_decomposable(a: &BlockMatrix<f64>, budget: &ConeBudget) -> Result<Option<Certificate>> {
    let (n, m) = (a.n(), a.m());
    let accept = |q: &Matrix<f64>| -> Result<Option<Certificate>> {
        let qb = BlockMatrix::from_flat(n, m, q.clone())?;
        let p = a.sub(&qb.partial_transpose()).into_flat().hermitian_part();
        let cp = is_psd(&p, budget.tol)?;
        let cq = is_psd(q, budget.tol)?;
        if cp.psd && cq.psd {
            Ok(Some(Certificate::Decomposable {
                p,
                q: q.clone(),
                min_eigenvalue_p: cp.min_eigenvalue,
                min_eigenvalue_q: cq.min_eigenvalue,
            }))
        } else {
            Ok(None)
        }
    };
    // Qᴳ = A, P = 0.
    let mut q = a.partial_transpose().into_flat().hermitian_part();
    if let Some(c) = accept(&q)? {
        return Ok(Some(c));
    }
    let max_iter = budget.iterations.clamp(1, 5_000);
    for _ in 0..max_iter {
        q = positive_parts(&q)?.0;
        if let Some(c) = accept(&q)? {
            return Ok(Some(c));
        }
        let qb = BlockMatrix::from_flat(n, m, q.clone())?;
        let p = a.sub(&qb.partial_transpose()).into_flat().hermitian_part();
        let p_plus = positive_parts(&p)?.0;
        let p_plus = BlockMatrix::from_flat(n, m, p_plus)?;
        q = a.sub(&p_plus).partial_transpose().into_flat().hermitian_part();
    }
    Ok(None)
}

/// Exact decomposition when every block is diagonal:
/// `A = Σ_t A(t) ⊗ E_tt` with `A(t)_{ij} = (A_ij)_{tt}`.
fn diagonal_block_decomposition(a: &BlockMatrix<f64>) -> Result<Option<SeparableDecomposition>> {
    let (n, m) = (a.n(), a.m());
    let flat = a.flat();
    for r in 0..n * m {
        for c in 0..n * m {
            if r % m != c % m && flat[(r, c)].norm() > 0.0 {
                return Ok(None);
            }
        }
    }
    let mut terms = Vec::new();
    for t in 0..m {
        let slot = Matrix::from_fn(n, n, |i, j| flat[(i * m + t, j * m + t)]);
        let spec = eig_hermitian(&slot)?;
        if spec.min().unwrap_or(0.0) < -PSD_TOL * (1.0 + slot.max_abs()) {
            return Ok(None);
        }
        let pos = positive_parts(&slot)?.0;
        if pos.max_abs() > 0.0 {
            terms.push(SeparableTerm {
                a: pos,
                v: Matrix::unit(m, m, t, t),
            });
        }
    }
    Ok(Some(SeparableDecomposition::new(n, m, terms)))
}

/// Separability test: is `A = Σ a_l ⊗ v_l` with PSD factors?
pub fn max_cone_test(a: &BlockMatrix<f64>, budget: &ConeBudget) -> Result<ConeVerdict> {
    a.check_hermitian()?;
    let (n, m) = (a.n(), a.m());
    let thresh = budget.tol * scale(a);
    let spec = eig_hermitian(a.flat())?;
    let lam = spec.min().unwrap_or(0.0);
    if lam < -thresh {
        // Functional F = conj(v) conj(v)ᵗ pairs to v* A v; F is PSD, hence block-positive.
        let v = spec.vector(0);
        let w: Vec<C<f64>> = v.iter().map(|z| z.conj()).collect();
        let f = BlockMatrix::from_flat(n, m, Matrix::outer(&w, &w))?;
        let pairing = crate::duality::pair(&f, a)?.re;
        let proof = Certificate::PsdSufficiency {
            min_eigenvalue: is_psd(f.flat(), budget.tol)?.min_eigenvalue,
        };
        return Ok(ConeVerdict::new(
            ConeStatus::NotMember,
            Certificate::WitnessFunctional {
                functional: f,
                pairing,
                proof: Box::new(proof),
            },
            lam,
        ));
    }
    let pt_spec = eig_hermitian(a.partial_transpose().flat())?;
    let pt_lam = pt_spec.min().unwrap_or(0.0);
    if pt_lam < -thresh {
        return Ok(ConeVerdict::new(
            ConeStatus::NotMember,
            Certificate::PptViolation {
                eigenvalue: pt_lam,
                eigenvector: pt_spec.vector(0),
            },
            pt_lam,
        ));
    }
    let margin = lam.min(pt_lam).max(0.0);
    let exact = n * m <= PPT_EXACT_DIM;
    let sufficiency = || Certificate::PptSufficiency {
        min_eigenvalue: lam,
        min_pt_eigenvalue: pt_lam,
        source: "PSD and PPT imply separable for n*m <= 6 (Peres-Horodecki; external)".into(),
    };
    if let Some(dec) = diagonal_block_decomposition(a)? {
        let residual = dec.residual(a);
        let mut v = ConeVerdict::new(
            ConeStatus::Member,
            Certificate::SeparableDecomposition {
                decomposition: dec,
                residual,
            },
            margin,
        );
        v.exact_sufficiency = exact;
        return Ok(v);
    }
    if exact && !budget.search_when_sufficient {
        let mut v = ConeVerdict::new(ConeStatus::Member, sufficiency(), margin);
        v.exact_sufficiency = true;
        return Ok(v);
    }
    match decompose_separable(a, &budget.decomp_options())? {
        DecompOutcome::Found {
            decomposition,
            residual,
            ..
        } if residual < 1e-8 => {
            let mut v = ConeVerdict::new(
                ConeStatus::Member,
                Certificate::SeparableDecomposition {
                    decomposition,
                    residual,
                },
                margin,
            );
            v.exact_sufficiency = exact;
            Ok(v)
        }
        DecompOutcome::Found {
            residual,
            iterations,
            ..
        }
        | DecompOutcome::NotFound {
            residual,
            iterations,
            ..
        } => {
            if exact {
                let mut v = ConeVerdict::new(ConeStatus::Member, sufficiency(), margin);
                v.exact_sufficiency = true;
                Ok(v)
            } else {
                Ok(ConeVerdict::new(
                    ConeStatus::Undetermined,
                    Certificate::BudgetReport {
                        best_value: None,
                        restarts_used: budget.restarts,
                        residual: Some(residual),
                        iterations,
                    },
                    -residual,
                ))
            }
        }
    }
}

/// Outcome of re-checking a certificate by direct evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub kind: String,
    /// Largest discrepancy observed (re-summation error, value mismatch, …).
    pub deviation: f64,
    pub detail: String,
}

impl VerifyReport {
    fn new(kind: &str, ok: bool, deviation: f64, detail: impl Into<String>) -> Self {
        Self {
            ok,
            kind: kind.into(),
            deviation,
            detail: detail.into(),
        }
    }
}

/// Re-check a verdict's certificate against `a` without running any search.
pub fn verify_verdict(a: &BlockMatrix<f64>, cone: ConeKind, verdict: &ConeVerdict) -> Result<VerifyReport> {
    let cert = &verdict.certificate;
    let kind = cert.kind();
    let fits = match (cone, verdict.status, cert) {
        (_, ConeStatus::Undetermined, Certificate::BudgetReport { .. }) => true,
        (ConeKind::Min, ConeStatus::Member, Certificate::PsdSufficiency { .. })
        | (ConeKind::Min, ConeStatus::Member, Certificate::Decomposable { .. })
        | (ConeKind::Min, ConeStatus::NotMember, Certificate::ProductWitness(_))
        | (ConeKind::Max, ConeStatus::Member, Certificate::SeparableDecomposition { .. })
        | (ConeKind::Max, ConeStatus::Member, Certificate::PptSufficiency { .. })
        | (ConeKind::Max, ConeStatus::NotMember, Certificate::PptViolation { .. })
        | (ConeKind::Max, ConeStatus::NotMember, Certificate::WitnessFunctional { .. }) => true,
        _ => false,
    };
    if !fits {
        return Ok(VerifyReport::new(kind, false, f64::INFINITY, "certificate kind does not fit status"));
    }
    verify_certificate(a, cert)
}

pub fn verify_certificate(a: &BlockMatrix<f64>, cert: &Certificate) -> Result<VerifyReport> {
    let kind = cert.kind();
    let thresh = PSD_TOL * scale(a);
    Ok(match cert {
        Certificate::SeparableDecomposition { decomposition, .. } => {
            let dev = decomposition.residual(a);
            let psd = decomposition.factors_psd();
            VerifyReport::new(kind, psd && dev < 1e-8, dev, format!("{} terms, factors PSD: {psd}", decomposition.terms.len()))
        }
        Certificate::ProductWitness(w) => {
            let nx: f64 = w.x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let ny: f64 = w.y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if w.x.len() != a.n() || w.y.len() != a.m() {
                return Ok(VerifyReport::new(kind, false, f64::INFINITY, "witness vector length mismatch"));
            }
            let value = a.product_value(&w.x, &w.y);
            let dev = (value - w.value).abs().max((nx - 1.0).abs()).max((ny - 1.0).abs());
            VerifyReport::new(kind, dev < 1e-10 && value < -thresh, dev, format!("value {value:e}"))
        }
        Certificate::PsdSufficiency { .. } => {
            let c = is_psd(a.flat(), PSD_TOL)?;
            VerifyReport::new(kind, c.psd, 0.0, format!("min eigenvalue {:e}", c.min_eigenvalue))
        }
        Certificate::Decomposable { p, q, .. } => {
            let qb = BlockMatrix::from_flat(a.n(), a.m(), q.clone())?;
            let pb = BlockMatrix::from_flat(a.n(), a.m(), p.clone())?;
            let dev = pb.add(&qb.partial_transpose()).flat().rel_frobenius_diff(a.flat());
            let ok = dev < 1e-8 && is_psd(p, PSD_TOL)?.psd && is_psd(q, PSD_TOL)?.psd;
            VerifyReport::new(kind, ok, dev, "A = P + Q^pt")
        }
        Certificate::PptSufficiency { .. } => {
            let c = is_psd(a.flat(), PSD_TOL)?;
            let pt = is_psd(a.partial_transpose().flat(), PSD_TOL)?;
            let ok = c.psd && pt.psd && a.n() * a.m() <= PPT_EXACT_DIM;
            VerifyReport::new(kind, ok, 0.0, "PSD, PPT, n*m <= 6 (external sufficiency)")
        }
        Certificate::PptViolation { eigenvalue, eigenvector } => {
            if eigenvector.len() != a.n() * a.m() {
                return Ok(VerifyReport::new(kind, false, f64::INFINITY, "eigenvector length mismatch"));
            }
            let norm: f64 = eigenvector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let value = a.partial_transpose().flat().quadratic_form(eigenvector).re;
            let dev = (value - eigenvalue).abs().max((norm - 1.0).abs());
            VerifyReport::new(kind, dev < 1e-10 && value < -thresh, dev, format!("<v, A^pt v> = {value:e}"))
        }
        Certificate::WitnessFunctional { functional, proof, .. } => {
            let pairing = crate::duality::pair(functional, a)?.re;
            let inner = verify_certificate(functional, proof)?;
            let proof_ok = inner.ok
                && matches!(**proof, Certificate::PsdSufficiency { .. } | Certificate::Decomposable { .. });
            VerifyReport::new(
                kind,
                proof_ok && pairing < -thresh,
                inner.deviation,
                format!("pairing {pairing:e}, functional block-positive via {}", proof.kind()),
            )
        }
        Certificate::BudgetReport { .. } => VerifyReport::new(kind, true, 0.0, "no claim"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::tensor_sum;
    use crate::separable::sample_dmax;

    type M = Matrix<f64>;

    fn max_entangled(d: usize) -> BlockMatrix<f64> {
        let mut terms = Vec::new();
        for i in 0..d {
            for j in 0..d {
                terms.push((M::unit(d, d, i, j), M::unit(d, d, i, j)));
            }
        }
        tensor_sum(d, d, &terms)
    }

    fn budget() -> ConeBudget {
        ConeBudget {
            restarts: 16,
            ..Default::default()
        }
    }

    #[test]
    fn swap_is_block_positive_via_decomposability() {
        let swap = max_entangled(2).partial_transpose();
        let v = min_cone_test(&swap, &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::Member);
        assert_eq!(v.certificate.kind(), "decomposable");
        assert!(verify_verdict(&swap, ConeKind::Min, &v).unwrap().ok);
    }

    #[test]
    fn negative_corner_is_not_block_positive() {
        let a = BlockMatrix::product(&M::unit(2, 2, 0, 0), &M::unit(2, 2, 0, 0)).scale_real(-1.0);
        let v = min_cone_test(&a, &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::NotMember);
        match &v.certificate {
            Certificate::ProductWitness(w) => {
                assert!((w.value + 1.0).abs() < 1e-12);
                assert!((w.x[0].norm() - 1.0).abs() < 1e-12);
                assert!((w.y[0].norm() - 1.0).abs() < 1e-12);
            }
            c => panic!("{c:?}"),
        }
        assert!(verify_verdict(&a, ConeKind::Min, &v).unwrap().ok);
    }

    #[test]
    fn max_entangled_is_psd_hence_block_positive() {
        let v = min_cone_test(&max_entangled(2), &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::Member);
        assert_eq!(v.certificate.kind(), "psd-sufficiency");
    }

    #[test]
    fn identity_is_separable() {
        let a = BlockMatrix::unit(2, 3);
        let v = max_cone_test(&a, &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::Member);
        let d = v.decomposition().unwrap();
        assert!(d.residual(&a) < 1e-12);
        assert!(verify_verdict(&a, ConeKind::Max, &v).unwrap().ok);
    }

    #[test]
    fn max_entangled_violates_ppt() {
        let a = max_entangled(2);
        let v = max_cone_test(&a, &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::NotMember);
        match &v.certificate {
            Certificate::PptViolation { eigenvalue, .. } => assert!((eigenvalue + 1.0).abs() < 1e-9),
            c => panic!("{c:?}"),
        }
        assert!(verify_verdict(&a, ConeKind::Max, &v).unwrap().ok);
    }

    #[test]
    fn non_psd_gets_witness_functional() {
        let a = BlockMatrix::product(&M::identity(2), &M::diag_real(&[1.0, -0.5]));
        let v = max_cone_test(&a, &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::NotMember);
        assert_eq!(v.certificate.kind(), "witness-functional");
        assert!(verify_verdict(&a, ConeKind::Max, &v).unwrap().ok);
    }

    #[test]
    fn sampled_separable_is_member() {
        let (a, _) = sample_dmax(3, 3, 5, 11);
        let v = max_cone_test(&a, &budget()).unwrap();
        assert_eq!(v.status, ConeStatus::Member);
        assert!(v.decomposition().unwrap().residual(&a) < 1e-8);
        assert!(!v.exact_sufficiency);
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let a = max_entangled(2);
        let mut v = max_cone_test(&a, &budget()).unwrap();
        if let Certificate::PptViolation { eigenvalue, .. } = &mut v.certificate {
            *eigenvalue = -2.0;
        }
        assert!(!verify_verdict(&a, ConeKind::Max, &v).unwrap().ok);
        let wrong_kind = ConeVerdict {
            status: ConeStatus::Member,
            ..v
        };
        assert!(!verify_verdict(&a, ConeKind::Max, &wrong_kind).unwrap().ok);
    }
}
