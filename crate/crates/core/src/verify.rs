//! Re-verification of emitted certificates by direct evaluation only:
//! eigensolves, pairings and re-summations. No search is ever re-run.

use serde::{Deserialize, Serialize};

use crate::block::{is_psd, BlockMatrix, PSD_TOL};
use crate::cones::{verify_certificate, verify_verdict, ConeKind, ConeVerdict, VerifyReport};
use crate::duality::{HolevoTerm, MatrixMap, Presentation};
use crate::ebclass::{rank_one_split, EbCertificate, EbStatus, EbVerdict};
use crate::eigen::eig_hermitian;
use crate::error::Result;
use crate::matrix::Matrix;

/// Agreement required between a certificate's re-evaluation and the input.
pub const CERT_TOL: f64 = 1e-8;

/// A verdict together with the input it was issued for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "bundle", rename_all = "kebab-case")]
pub enum CertificateBundle {
    ConeTest {
        cone: ConeKind,
        element: BlockMatrix<f64>,
        verdict: ConeVerdict,
    },
    Classification {
        map: MatrixMap,
        verdict: EbVerdict,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleReport {
    pub ok: bool,
    pub status: String,
    pub checks: Vec<VerifyReport>,
}

pub fn verify_bundle(bundle: &CertificateBundle) -> Result<BundleReport> {
    match bundle {
        CertificateBundle::ConeTest { cone, element, verdict } => {
            let r = verify_verdict(element, *cone, verdict)?;
            Ok(BundleReport {
                ok: r.ok,
                status: serde_json::to_value(verdict.status)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                checks: vec![r],
            })
        }
        CertificateBundle::Classification { map, verdict } => verify_classification(map, verdict),
    }
}

fn report(kind: &str, ok: bool, deviation: f64, detail: impl Into<String>) -> VerifyReport {
    VerifyReport {
        ok,
        kind: kind.into(),
        deviation,
        detail: detail.into(),
    }
}

/// Upper bound on the ratio of the two largest singular values.
fn rank_one_ratio(a: &Matrix<f64>) -> Result<f64> {
    Ok(rank_one_split(a)?.map_or(0.0, |(_, r)| r))
}

fn holevo_terms_psd(terms: &[HolevoTerm]) -> Result<bool> {
    for t in terms {
        if !is_psd(&t.s, PSD_TOL)?.psd || !is_psd(&t.p, PSD_TOL)?.psd {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_certificate(map: &MatrixMap, choi: &BlockMatrix<f64>, cert: &EbCertificate) -> Result<VerifyReport> {
    let kind = cert.kind();
    let scale = 1.0 + choi.flat().max_abs();
    let thresh = PSD_TOL * (1.0 + choi.flat().max_abs() * choi.flat().rows().max(1) as f64);
    let (k, m) = (map.k(), map.m());
    Ok(match cert {
        EbCertificate::ChoiPsd {
            psd,
            min_eigenvalue,
            eigenvector,
        } => {
            let lam = eig_hermitian(&choi.flat().hermitian_part())?.min().unwrap_or(0.0);
            let claim_ok = *psd == (lam >= -thresh);
            let mut dev = (lam - min_eigenvalue).abs();
            let mut ok = claim_ok && dev < 1e-10 * scale;
            if let Some(v) = eigenvector {
                let value = choi.flat().quadratic_form(v).re;
                dev = dev.max((value - min_eigenvalue).abs());
                ok &= v.len() == choi.flat().rows() && value < -thresh;
            } else {
                ok &= *psd;
            }
            report(kind, ok, dev, format!("min eigenvalue {lam:e}"))
        }
        EbCertificate::PptViolation { eigenvalue, eigenvector } => {
            verify_certificate(
                choi,
                &crate::cones::Certificate::PptViolation {
                    eigenvalue: *eigenvalue,
                    eigenvector: eigenvector.clone(),
                },
            )?
        }
        EbCertificate::WitnessFunctional {
            functional,
            pairing,
            proof,
        } => verify_certificate(
            choi,
            &crate::cones::Certificate::WitnessFunctional {
                functional: functional.clone(),
                pairing: *pairing,
                proof: proof.clone(),
            },
        )?,
        EbCertificate::SeparableChoi { decomposition, .. } => {
            let dev = decomposition.residual(choi);
            let psd = decomposition.factors_psd();
            report(kind, psd && dev < CERT_TOL, dev, format!("{} terms", decomposition.terms.len()))
        }
        EbCertificate::Holevo { terms } => {
            let psd = holevo_terms_psd(terms)?;
            let dev = MatrixMap::new(k, m, Presentation::Holevo(terms.clone()))?.basis_deviation(map)? / scale;
            report(kind, psd && dev < CERT_TOL, dev, format!("{} terms, factors PSD: {psd}", terms.len()))
        }
        EbCertificate::RankOneKraus { operators } => {
            let mut worst: f64 = 0.0;
            for a in operators {
                worst = worst.max(rank_one_ratio(a)?);
            }
            let dev = MatrixMap::new(k, m, Presentation::Kraus(operators.clone()))?.basis_deviation(map)? / scale;
            report(
                kind,
                worst <= CERT_TOL && dev < CERT_TOL,
                dev,
                format!("{} operators, worst singular-value ratio {worst:e}", operators.len()),
            )
        }
    })
}

fn verify_classification(map: &MatrixMap, verdict: &EbVerdict) -> Result<BundleReport> {
    let choi = map.choi();
    let mut checks = Vec::with_capacity(verdict.certificates.len() + 1);
    for cert in &verdict.certificates {
        checks.push(check_certificate(map, &choi, cert)?);
    }
    let has = |k: &str| verdict.certificate(k).is_some();
    let fits = match verdict.status {
        EbStatus::NotCp => matches!(verdict.certificate("choi-psd"), Some(EbCertificate::ChoiPsd { psd: false, .. })),
        EbStatus::CpNotEb => has("ppt-violation") || has("witness-functional"),
        EbStatus::Eb => has("separable-choi") || has("holevo") || has("rank-one-kraus"),
        EbStatus::Undetermined => true,
    };
    checks.push(report("status", fits, 0.0, "certificates support the status"));
    let status = serde_json::to_value(verdict.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    Ok(BundleReport {
        ok: checks.iter().all(|c| c.ok),
        status,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{max_cone_test, ConeBudget};
    use crate::duality::max_entangled;
    use crate::ebclass::classify;

    #[test]
    fn classification_bundles_verify() {
        let b = ConeBudget::default();
        for map in [MatrixMap::depolarizing(2, 2), MatrixMap::identity(2), MatrixMap::transpose_map(2)] {
            let verdict = classify(&map, &b).unwrap();
            let bundle = CertificateBundle::Classification { map, verdict };
            let r = verify_bundle(&bundle).unwrap();
            assert!(r.ok, "{r:?}");
        }
    }

    #[test]
    fn tampered_bundle_fails() {
        let map = MatrixMap::depolarizing(2, 2);
        let mut verdict = classify(&map, &ConeBudget::default()).unwrap();
        for c in verdict.certificates.iter_mut() {
            if let EbCertificate::Holevo { terms } = c {
                terms[0].p = terms[0].p.scale_real(2.0);
            }
        }
        let r = verify_bundle(&CertificateBundle::Classification { map, verdict }).unwrap();
        assert!(!r.ok);
    }

    #[test]
    fn cone_bundle_round_trips_through_json() {
        let a = max_entangled(2);
        let verdict = max_cone_test(&a, &ConeBudget::default()).unwrap();
        let bundle = CertificateBundle::ConeTest {
            cone: ConeKind::Max,
            element: a,
            verdict,
        };
        let s = serde_json::to_string(&bundle).unwrap();
        let back: CertificateBundle = serde_json::from_str(&s).unwrap();
        let r = verify_bundle(&back).unwrap();
        assert!(r.ok && r.status == "NotMember", "{r:?}");
    }
}
