use omaxcones::arch::{
    arch_closure_test, archimedeanize, compute_n, default_schedule, level_check, Builtin, GeneratedCone,
};
use omaxcones::random::rng;
use proptest::prelude::*;
use rand::Rng;

/// `{(a, b, c) : a ≥ |c|}` with `b` free, so `N = span{(0, 1, 0)}`.
fn slab() -> GeneratedCone {
    GeneratedCone::generators(
        3,
        vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, -1.0, 0.0], vec![1.0, 0.0, 1.0], vec![1.0, 0.0, -1.0]],
        vec![1.0, 0.0, 0.0],
    )
    .unwrap()
}

fn spaces() -> Vec<(&'static str, GeneratedCone, usize)> {
    vec![
        ("ray1", GeneratedCone::oracle(Builtin::Ray1), 0),
        ("lexicographic2", GeneratedCone::oracle(Builtin::Lexicographic2), 1),
        ("psd2", GeneratedCone::oracle(Builtin::Psd2), 0),
        ("slab", slab(), 1),
    ]
}

/// `dim N_n = n²·dim N` and `M_n(N)` is annihilated by every sampled level-`n` state.
#[test]
fn null_space_dimension_count() {
    for (name, c, dim_n) in spaces() {
        let samples = 16 * c.dim;
        let base = compute_n(&c, samples, 1).unwrap();
        assert_eq!(base.basis.len(), dim_n, "{name}");
        assert!(base.max_annihilation <= 1e-9, "{name}: {base:?}");
        for n in 1..=2 {
            let r = level_check(&c, n, &base, samples, 1).unwrap();
            assert_eq!(r.dim_n, n * n * dim_n, "{name} level {n}");
            assert!(r.matches, "{name}: {r:?}");
        }
    }
}

/// Unital positive maps into `M_2` factor through the quotient.
#[test]
fn universal_property() {
    for (name, c, dim_n) in spaces() {
        let r = archimedeanize(&c, 16 * c.dim, 2).unwrap();
        assert_eq!(r.unchanged, dim_n == 0, "{name}");
        assert_eq!(r.quotient_dim, c.dim - dim_n, "{name}");
        assert!(r.universal_property_deviation < 1e-9, "{name}: {}", r.universal_property_deviation);
    }
}

/// Finitely generated cones are closed: the quotient of the slab is the
/// closed cone `{(a, c) : a ≥ |c|}`, compared against membership by sampling.
#[test]
fn finitely_generated_quotient_is_closed() {
    let r = archimedeanize(&slab(), 48, 3).unwrap();
    let q = &r.quotient_cone;
    let mut g = rng(3, 0);
    for _ in 0..500 {
        let x: Vec<f64> = (0..q.dim).map(|_| g.random_range(-1.0..1.0)).collect();
        let closure = arch_closure_test(&x, q, &default_schedule()).passed;
        assert_eq!(q.contains(&x), closure, "{x:?}");
    }
}

#[test]
fn cone_json_formats() {
    let c: GeneratedCone =
        serde_json::from_str(r#"{"dim":2,"oracle":"builtin:lexicographic2","unit":[0,1]}"#).unwrap();
    assert_eq!(c, GeneratedCone::oracle(Builtin::Lexicographic2));
    let g: GeneratedCone = serde_json::from_str(r#"{"dim":1,"generators":[[1]],"unit":[1]}"#).unwrap();
    assert!(g.contains(&[2.0]) && !g.contains(&[-1.0]));
    let back: GeneratedCone = serde_json::from_str(&serde_json::to_string(&slab()).unwrap()).unwrap();
    assert_eq!(back, slab());
    assert!(serde_json::from_str::<GeneratedCone>(r#"{"dim":2,"oracle":"builtin:nope","unit":[0,1]}"#).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// If `A` passes the closure test then so does `A + t·e` for `t ≥ 0`.
    #[test]
    fn closure_test_is_monotone_along_the_unit(which in 0usize..3, x in prop::collection::vec(-1.0f64..1.0, 4), t in 0.0f64..2.0) {
        let c = [GeneratedCone::oracle(Builtin::Lexicographic2), GeneratedCone::oracle(Builtin::Psd2), slab()][which].clone();
        let a = &x[..c.dim];
        let shifted: Vec<f64> = a.iter().zip(&c.unit).map(|(v, e)| v + t * e).collect();
        let s = default_schedule();
        if arch_closure_test(a, &c, &s).passed {
            prop_assert!(arch_closure_test(&shifted, &c, &s).passed);
        }
    }
}

/// The closure of the lexicographic cone is the closed half-plane `y ≥ 0`,
/// which the schedule sees on the negative `x`-axis.
#[test]
fn lexicographic_closure() {
    let c = GeneratedCone::oracle(Builtin::Lexicographic2);
    let s = default_schedule();
    assert!(!c.contains(&[-1.0, 0.0]));
    assert!(arch_closure_test(&[-1.0, 0.0], &c, &s).passed);
    assert!(!arch_closure_test(&[0.0, -1e-3], &c, &s).passed);
}
