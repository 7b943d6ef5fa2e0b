use omaxcones::block::tensor_sum;
use omaxcones::cones::{max_cone_test, min_cone_test, verify_verdict, ConeBudget, ConeKind, ConeStatus};
use omaxcones::duality::max_entangled;
use omaxcones::norms::order_norm;
use omaxcones::random::{hermitian, rng, wishart};
use omaxcones::separable::{sample_dmax, AlphaDiag};
use omaxcones::{BlockMatrix, Matrix};
use proptest::prelude::*;
use rand::Rng;

fn budget() -> ConeBudget {
    ConeBudget {
        restarts: 16,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every NotMember verdict carries a certificate that re-verifies by direct evaluation.
    #[test]
    fn not_member_certificates_reverify(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, shift in -1.0f64..2.0) {
        let h = hermitian(&mut rng(seed, 0), n * m);
        let h = Matrix::from_fn(n * m, n * m, |i, j| h[(i, j)] + if i == j { shift } else { 0.0 });
        let a = BlockMatrix::from_flat(n, m, h).unwrap();
        for (kind, v) in [(ConeKind::Min, min_cone_test(&a, &budget()).unwrap()), (ConeKind::Max, max_cone_test(&a, &budget()).unwrap())] {
            let r = verify_verdict(&a, kind, &v).unwrap();
            prop_assert!(r.ok, "{:?} {:?}", kind, r);
            if v.status == ConeStatus::NotMember && v.certificate.kind() != "witness-functional" {
                prop_assert!(r.deviation <= 1e-10, "{:?}", r);
            }
        }
    }

    /// α·diag(v_1, …, v_q)·α* is in the maximal cone, and decompositions convert to and from that form.
    #[test]
    fn alpha_diag_form(seed in any::<u64>(), n in 1usize..4, m in 1usize..4, q in 1usize..4) {
        let mut g = rng(seed, 0);
        let alpha = omaxcones::random::ginibre(&mut g, n, q);
        let diag: Vec<Matrix<f64>> = (0..q).map(|_| wishart(&mut g, m, m)).collect();
        let ad = AlphaDiag { n, m, alpha, diag };
        let a = ad.evaluate();
        prop_assert_eq!(max_cone_test(&a, &budget()).unwrap().status, ConeStatus::Member);
        let dec = ad.to_decomposition();
        prop_assert!(dec.resum().flat().rel_frobenius_diff(a.flat()) < 1e-12);
        let back = dec.to_alpha_diag().unwrap();
        prop_assert!(back.evaluate().flat().rel_frobenius_diff(a.flat()) < 1e-12);
    }

    /// `4rs·e − a⊗v` is in the maximal cone when `‖a‖ ≤ r` and `−s·e ≤ v ≤ s·e`.
    #[test]
    fn order_unit_bound(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut g = rng(seed, 0);
        let a = hermitian(&mut g, n);
        let v = hermitian(&mut g, m);
        let r = order_norm(&a).unwrap().value;
        let s = order_norm(&v).unwrap().value;
        let w = BlockMatrix::product(&a, &v);
        let x = BlockMatrix::unit(n, m).scale_real(4.0 * r * s).sub(&w);
        prop_assert_eq!(max_cone_test(&x, &budget()).unwrap().status, ConeStatus::Member);
    }
}

/// The separable cone sits inside the block-positive cone.
#[test]
fn containment_chain() {
    let b = budget();
    for s in 0..500u64 {
        let mut g = rng(11, s);
        let n = g.random_range(1..=3);
        let m = g.random_range(1..=3);
        let (a, _) = sample_dmax(n, m, g.random_range(1..=4), s);
        assert_ne!(min_cone_test(&a, &b).unwrap().status, ConeStatus::NotMember, "sample {s}");
    }
}

#[test]
fn maximally_entangled_is_rejected_by_ppt() {
    let me = max_entangled(2);
    let v = max_cone_test(&me, &budget()).unwrap();
    assert_eq!(v.status, ConeStatus::NotMember);
    assert_eq!(v.certificate.kind(), "ppt-violation");
    // but it is block-positive: it is PSD
    assert_eq!(min_cone_test(&me, &budget()).unwrap().status, ConeStatus::Member);
}

#[test]
fn product_of_psd_factors_is_member_of_both_cones() {
    let a = tensor_sum(2, 2, &[(Matrix::diag_real(&[1.0, 0.0]), Matrix::identity(2))]);
    assert_eq!(max_cone_test(&a, &budget()).unwrap().status, ConeStatus::Member);
    assert_eq!(min_cone_test(&a, &budget()).unwrap().status, ConeStatus::Member);
}

#[test]
fn verdict_json_has_kind_discriminator() {
    let v = max_cone_test(&max_entangled(2), &budget()).unwrap();
    let j = serde_json::to_value(&v).unwrap();
    assert_eq!(j["status"], "NotMember");
    assert_eq!(j["certificate"]["kind"], "ppt-violation");
}
