//! Entanglement-breaking classification of maps `M_k → M_m`, with conversion
//! among the separable-Choi, Holevo and rank-one Kraus certificate forms.

use serde::{Deserialize, Serialize};

use crate::block::{is_psd, BlockMatrix, PSD_TOL};
use crate::cones::{max_cone_test, Certificate, ConeBudget, ConeStatus};
use crate::duality::{flat_adjoint, sample_block_positive, HolevoTerm, MatrixMap, Presentation};
use crate::eigen::eig_hermitian;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::C;
use crate::separable::{rank_one_refine, SeparableDecomposition};

/// Basis-evaluation agreement required of every certificate conversion.
pub const ROUND_TRIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EbStatus {
    #[serde(rename = "NotCP")]
    NotCp,
    #[serde(rename = "CPNotEB")]
    CpNotEb,
    #[serde(rename = "EB")]
    Eb,
    Undetermined,
}

impl EbStatus {
    /// `Some(true)` for EB, `Some(false)` for a definite non-EB verdict.
    pub fn is_eb(self) -> Option<bool> {
        match self {
            EbStatus::Eb => Some(true),
            EbStatus::NotCp | EbStatus::CpNotEb => Some(false),
            EbStatus::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EbCertificate {
    /// Smallest eigenvalue of the flat Choi matrix; the eigenvector is given when negative.
    ChoiPsd {
        psd: bool,
        min_eigenvalue: f64,
        eigenvector: Option<Vec<C<f64>>>,
    },
    PptViolation {
        eigenvalue: f64,
        eigenvector: Vec<C<f64>>,
    },
    SeparableChoi {
        decomposition: SeparableDecomposition,
        residual: f64,
    },
    Holevo {
        terms: Vec<HolevoTerm>,
    },
    RankOneKraus {
        operators: Vec<Matrix<f64>>,
    },
    WitnessFunctional {
        functional: BlockMatrix<f64>,
        pairing: f64,
        proof: Box<Certificate>,
    },
}

impl EbCertificate {
    pub fn kind(&self) -> &'static str {
        match self {
            EbCertificate::ChoiPsd { .. } => "choi-psd",
            EbCertificate::PptViolation { .. } => "ppt-violation",
            EbCertificate::SeparableChoi { .. } => "separable-choi",
            EbCertificate::Holevo { .. } => "holevo",
            EbCertificate::RankOneKraus { .. } => "rank-one-kraus",
            EbCertificate::WitnessFunctional { .. } => "witness-functional",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub forms: String,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbVerdict {
    pub status: EbStatus,
    pub certificates: Vec<EbCertificate>,
    pub cross_checks: Vec<CrossCheck>,
    pub notes: Vec<String>,
}

impl EbVerdict {
    pub fn certificate(&self, kind: &str) -> Option<&EbCertificate> {
        self.certificates.iter().find(|c| c.kind() == kind)
    }

    pub fn holevo(&self) -> Option<&[HolevoTerm]> {
        self.certificates.iter().find_map(|c| match c {
            EbCertificate::Holevo { terms } => Some(terms.as_slice()),
            _ => None,
        })
    }

    pub fn kraus(&self) -> Option<&[Matrix<f64>]> {
        self.certificates.iter().find_map(|c| match c {
            EbCertificate::RankOneKraus { operators } => Some(operators.as_slice()),
            _ => None,
        })
    }

    pub fn separable(&self) -> Option<&SeparableDecomposition> {
        self.certificates.iter().find_map(|c| match c {
            EbCertificate::SeparableChoi { decomposition, .. } => Some(decomposition),
            _ => None,
        })
    }

    pub fn max_cross_deviation(&self) -> f64 {
        self.cross_checks.iter().map(|c| c.max_deviation).fold(0.0, f64::max)
    }
}

fn choi_psd(choi: &BlockMatrix<f64>) -> Result<EbCertificate> {
    let spec = eig_hermitian(&choi.flat().hermitian_part())?;
    let lam = spec.min().unwrap_or(0.0);
    let psd = lam >= -PSD_TOL * (1.0 + choi.flat().max_abs() * choi.flat().rows().max(1) as f64);
    Ok(EbCertificate::ChoiPsd {
        psd,
        min_eigenvalue: lam,
        eigenvector: if psd || spec.eigenvalues.is_empty() { None } else { Some(spec.vector(0)) },
    })
}

fn holevo_map(k: usize, m: usize, terms: &[HolevoTerm]) -> Result<MatrixMap> {
    MatrixMap::new(k, m, Presentation::Holevo(terms.to_vec()))
}

fn kraus_map(k: usize, m: usize, ops: &[Matrix<f64>]) -> Result<MatrixMap> {
    MatrixMap::new(k, m, Presentation::Kraus(ops.to_vec()))
}

/// `φ` is entanglement breaking iff its Choi matrix is separable.
pub fn classify(phi: &MatrixMap, budget: &ConeBudget) -> Result<EbVerdict> {
    let choi = phi.choi();
    let (k, m) = (phi.k(), phi.m());
    let psd = choi_psd(&choi)?;
    let mut verdict = EbVerdict {
        status: EbStatus::Undetermined,
        certificates: Vec::new(),
        cross_checks: Vec::new(),
        notes: Vec::new(),
    };
    let is_cp = matches!(psd, EbCertificate::ChoiPsd { psd: true, .. });
    verdict.certificates.push(psd);
    if !is_cp {
        verdict.status = EbStatus::NotCp;
        return Ok(verdict);
    }
    let cone = max_cone_test(&choi, budget)?;
    match (cone.status, cone.certificate) {
        (ConeStatus::NotMember, Certificate::PptViolation { eigenvalue, eigenvector }) => {
            verdict.status = EbStatus::CpNotEb;
            verdict.certificates.push(EbCertificate::PptViolation { eigenvalue, eigenvector });
        }
        (
            ConeStatus::NotMember,
            Certificate::WitnessFunctional {
                functional,
                pairing,
                proof,
            },
        ) => {
            verdict.status = EbStatus::CpNotEb;
            verdict.certificates.push(EbCertificate::WitnessFunctional {
                functional,
                pairing,
                proof,
            });
        }
        (ConeStatus::Member, Certificate::SeparableDecomposition { decomposition, residual }) => {
            let holevo = holevo_from_separable(phi, &decomposition)?;
            let kraus = kraus_from_holevo(k, m, &holevo)?;
            let hmap = holevo_map(k, m, &holevo)?;
            let kmap = kraus_map(k, m, &kraus)?;
            let back = holevo_from_kraus(k, m, &kraus)?;
            let scale = 1.0 + choi.flat().max_abs();
            let sep_map = MatrixMap::from_choi(decomposition.resum());
            verdict.cross_checks = vec![
                CrossCheck {
                    forms: "separable-choi/choi".into(),
                    max_deviation: sep_map.basis_deviation(phi)? / scale,
                },
                CrossCheck {
                    forms: "holevo/choi".into(),
                    max_deviation: hmap.basis_deviation(phi)? / scale,
                },
                CrossCheck {
                    forms: "rank-one-kraus/choi".into(),
                    max_deviation: kmap.basis_deviation(phi)? / scale,
                },
                CrossCheck {
                    forms: "rank-one-kraus/holevo".into(),
                    max_deviation: kmap.basis_deviation(&hmap)? / scale,
                },
                CrossCheck {
                    forms: "holevo(kraus)/holevo".into(),
                    max_deviation: holevo_map(k, m, &back)?.basis_deviation(&hmap)? / scale,
                },
            ];
            verdict.certificates.push(EbCertificate::SeparableChoi { decomposition, residual });
            verdict.certificates.push(EbCertificate::Holevo { terms: holevo });
            verdict.certificates.push(EbCertificate::RankOneKraus { operators: kraus });
            if verdict.max_cross_deviation() <= 1e-8 {
                verdict.status = EbStatus::Eb;
            } else {
                verdict.notes.push("certificate forms disagree beyond 1e-8".into());
            }
        }
        (ConeStatus::Member, Certificate::PptSufficiency { .. }) => {
            verdict.notes.push(
                "Choi matrix is PSD and PPT with k*m <= 6, so the map is EB by an external \
                 theorem, but no decomposition was found within budget; no Holevo or Kraus \
                 certificate can be emitted"
                    .into(),
            );
        }
        (_, Certificate::BudgetReport { residual, iterations, .. }) => {
            verdict.notes.push(format!(
                "decomposition search exhausted after {iterations} iterations, residual {:e}",
                residual.unwrap_or(f64::NAN)
            ));
        }
        (status, cert) => {
            verdict.notes.push(format!("unexpected cone verdict {status:?} with {}", cert.kind()));
        }
    }
    Ok(verdict)
}

/// Holevo form from a separable Choi decomposition: each `a_l` is refined into
/// rank-one `λ w w*`, giving the vector state `s(X) = V* X V` with `V = √λ·w̄`,
/// paired with `P = v_l`.
pub fn holevo_from_separable(phi: &MatrixMap, dec: &SeparableDecomposition) -> Result<Vec<HolevoTerm>> {
    let choi = phi.choi();
    let residual = dec.residual(&choi);
    if !(residual < 1e-8) {
        return Err(Error::CertificateMismatch { deviation: residual });
    }
    let mut terms = Vec::new();
    for t in &dec.terms {
        for (w, _) in rank_one_refine(&t.a)? {
            terms.push(HolevoTerm {
                s: Matrix::outer(&w, &w),
                p: t.v.clone(),
            });
        }
    }
    let scale = 1.0 + choi.flat().max_abs();
    let dev = holevo_map(phi.k(), phi.m(), &terms)?.basis_deviation(phi)? / scale;
    if dev > ROUND_TRIP_TOL {
        return Err(Error::CertificateMismatch { deviation: dev });
    }
    Ok(terms)
}

/// Rank-one Kraus operators `A = V·W` (`k × m`) from Holevo terms, where
/// `s(X) = V* X V` and `P = Σ W* W` after rank-one refinement of both factors.
pub fn kraus_from_holevo(k: usize, m: usize, terms: &[HolevoTerm]) -> Result<Vec<Matrix<f64>>> {
    let mut ops = Vec::new();
    for t in terms {
        if t.s.rows() != k || t.p.rows() != m {
            return Err(Error::ShapeMismatch("holevo term shape".into()));
        }
        for (w, _) in rank_one_refine(&t.s.hermitian_part())? {
            // s-matrix w w* is the vector state of V = w̄
            let v: Vec<C<f64>> = w.iter().map(|z| z.conj()).collect();
            for (u, _) in rank_one_refine(&t.p.hermitian_part())? {
                // W = u* as a row, so W* W = u u*
                ops.push(Matrix::from_fn(k, m, |i, j| v[i] * u[j].conj()));
            }
        }
    }
    Ok(ops)
}

/// Top right singular vector of `a` and the relative tail `‖A − A·uu*‖_F / ‖Au‖`,
/// an upper bound on `σ₂/σ₁` that stays accurate near rank one. `None` for `A = 0`.
pub(crate) fn rank_one_split(a: &Matrix<f64>) -> Result<Option<(Vec<C<f64>>, f64)>> {
    let spec = eig_hermitian(&a.adjoint().matmul(a).hermitian_part())?;
    let n = spec.eigenvalues.len();
    if n == 0 || spec.eigenvalues[n - 1] <= 0.0 {
        return Ok(None);
    }
    let u = spec.vector(n - 1);
    let au = a.matvec(&u);
    let top = au.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if top == 0.0 {
        return Ok(None);
    }
    let tail = Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] - au[i] * u[j].conj()).frobenius();
    Ok(Some((u, tail / top)))
}

/// Holevo terms from rank-one Kraus operators; fails with `NotRankOne` when the
/// relative tail beyond the top singular value exceeds `1e-8`.
pub fn holevo_from_kraus(k: usize, m: usize, ops: &[Matrix<f64>]) -> Result<Vec<HolevoTerm>> {
    let mut terms = Vec::new();
    for a in ops {
        if a.rows() != k || a.cols() != m {
            return Err(Error::ShapeMismatch("kraus operator shape".into()));
        }
        let Some((right, ratio)) = rank_one_split(a)? else {
            continue;
        };
        if ratio > 1e-8 {
            return Err(Error::NotRankOne { ratio });
        }
        let v = a.matvec(&right);
        let vbar: Vec<C<f64>> = v.iter().map(|z| z.conj()).collect();
        terms.push(HolevoTerm {
            s: Matrix::outer(&vbar, &vbar),
            p: Matrix::outer(&right, &right),
        });
    }
    Ok(terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub sample: usize,
    pub element: BlockMatrix<f64>,
    pub image_min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalsifyReport {
    pub n: usize,
    pub samples_tried: usize,
    pub not_cp_short_circuit: bool,
    pub counterexample: Option<Counterexample>,
    pub classify_status: EbStatus,
    /// A counterexample exists only for maps not classified EB.
    pub consistent: bool,
}

/// Push block-positive elements of `M_n(M_k)` through `φ_n` and look for a
/// non-PSD image, which rules out entanglement breaking directly.
pub fn cp_omin_falsify(
    phi: &MatrixMap,
    n: usize,
    samples: usize,
    seed: u64,
    budget: &ConeBudget,
) -> Result<FalsifyReport> {
    let classify_status = classify(phi, budget)?.status;
    let choi = phi.choi();
    let mut report = FalsifyReport {
        n,
        samples_tried: 0,
        not_cp_short_circuit: false,
        counterexample: None,
        classify_status,
        consistent: true,
    };
    if !matches!(choi_psd(&choi)?, EbCertificate::ChoiPsd { psd: true, .. }) {
        report.not_cp_short_circuit = true;
        report.consistent = classify_status == EbStatus::NotCp;
        return Ok(report);
    }
    let k = phi.k();
    for s in 0..samples {
        let element = if s == 0 {
            // partial transpose of a maximally entangled PSD element
            let d = n.min(k);
            let mut flat = Matrix::zeros(n * k, n * k);
            for i in 0..d {
                for j in 0..d {
                    flat[(i * k + j, j * k + i)] = crate::scalar::cone();
                }
            }
            BlockMatrix::from_flat(n, k, flat)?
        } else {
            sample_block_positive(n, k, seed, s as u64)
        };
        report.samples_tried = s + 1;
        let image = phi.ampliate(&element)?;
        let c = is_psd(&image.flat().hermitian_part(), PSD_TOL)?;
        if !c.psd {
            report.counterexample = Some(Counterexample {
                sample: s,
                element,
                image_min_eigenvalue: c.min_eigenvalue,
            });
            break;
        }
    }
    report.consistent = !(report.counterexample.is_some() && classify_status == EbStatus::Eb);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoEbReport {
    pub map: EbStatus,
    pub flat_adjoint: EbStatus,
    pub consistent: bool,
}

/// `φ` is EB iff `φ^♭` is EB.
pub fn co_eb_check(phi: &MatrixMap, budget: &ConeBudget) -> Result<CoEbReport> {
    let a = classify(phi, budget)?.status;
    let b = classify(&flat_adjoint(phi), budget)?.status;
    let consistent = match (a.is_eb(), b.is_eb()) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    };
    Ok(CoEbReport {
        map: a,
        flat_adjoint: b,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{ginibre, rng, unit_vector};

    type M = Matrix<f64>;

    fn budget() -> ConeBudget {
        ConeBudget {
            restarts: 16,
            ..Default::default()
        }
    }

    #[test]
    fn identity_is_cp_not_eb() {
        let v = classify(&MatrixMap::identity(2), &budget()).unwrap();
        assert_eq!(v.status, EbStatus::CpNotEb);
        match v.certificate("ppt-violation").unwrap() {
            EbCertificate::PptViolation { eigenvalue, .. } => assert!((eigenvalue + 1.0).abs() < 1e-9),
            _ => unreachable!(),
        }
    }

    #[test]
    fn transpose_is_not_cp() {
        let v = classify(&MatrixMap::transpose_map(2), &budget()).unwrap();
        assert_eq!(v.status, EbStatus::NotCp);
        match &v.certificates[0] {
            EbCertificate::ChoiPsd { min_eigenvalue, eigenvector, .. } => {
                assert!((min_eigenvalue + 1.0).abs() < 1e-9);
                assert!(eigenvector.is_some());
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn depolarizing_and_dephasing_are_eb() {
        for phi in [MatrixMap::depolarizing(2, 2), MatrixMap::dephasing(2)] {
            let v = classify(&phi, &budget()).unwrap();
            assert_eq!(v.status, EbStatus::Eb, "{:?}", v.notes);
            assert!(v.holevo().is_some() && v.kraus().is_some() && v.separable().is_some());
            assert!(v.max_cross_deviation() < 1e-8);
        }
    }

    #[test]
    fn kraus_holevo_round_trip() {
        let a = M::unit(2, 3, 0, 0);
        let terms = holevo_from_kraus(2, 3, std::slice::from_ref(&a)).unwrap();
        let phi = MatrixMap::new(2, 3, Presentation::Holevo(terms.clone())).unwrap();
        let x = ginibre(&mut rng(1, 0), 2, 2);
        let y = phi.evaluate(&x).unwrap();
        assert!(y.max_abs_diff(&M::unit(3, 3, 0, 0).scale(x[(0, 0)])) < 1e-14);
        let ops = kraus_from_holevo(2, 3, &terms).unwrap();
        let back = MatrixMap::new(2, 3, Presentation::Kraus(ops)).unwrap();
        assert!(back.basis_deviation(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn rank_two_kraus_is_rejected() {
        assert!(matches!(
            holevo_from_kraus(2, 2, &[M::identity(2)]),
            Err(Error::NotRankOne { .. })
        ));
    }

    #[test]
    fn random_rank_one_kraus_round_trip() {
        let mut g = rng(4, 0);
        let ops: Vec<M> = (0..3)
            .map(|_| {
                let v = unit_vector(&mut g, 3);
                let w = unit_vector(&mut g, 2);
                M::outer(&v, &w)
            })
            .collect();
        let phi = MatrixMap::new(3, 2, Presentation::Kraus(ops.clone())).unwrap();
        let h = holevo_from_kraus(3, 2, &ops).unwrap();
        let again = kraus_from_holevo(3, 2, &h).unwrap();
        let back = MatrixMap::new(3, 2, Presentation::Kraus(again)).unwrap();
        assert!(back.basis_deviation(&phi).unwrap() < 1e-12);
    }

    #[test]
    fn falsify_identity_and_transpose() {
        let r = cp_omin_falsify(&MatrixMap::identity(2), 2, 10, 0, &budget()).unwrap();
        assert_eq!(r.counterexample.as_ref().map(|c| c.sample), Some(0));
        assert!(r.consistent);
        let t = cp_omin_falsify(&MatrixMap::transpose_map(2), 2, 10, 0, &budget()).unwrap();
        assert!(t.not_cp_short_circuit && t.counterexample.is_none() && t.consistent);
    }

    #[test]
    fn co_eb_agrees() {
        let r = co_eb_check(&MatrixMap::identity(2), &budget()).unwrap();
        assert_eq!((r.map, r.flat_adjoint), (EbStatus::CpNotEb, EbStatus::CpNotEb));
        let d = co_eb_check(&MatrixMap::depolarizing(2, 2), &budget()).unwrap();
        assert_eq!((d.map, d.flat_adjoint), (EbStatus::Eb, EbStatus::Eb));
    }
}
