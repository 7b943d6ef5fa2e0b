use omaxcones::cones::ConeBudget;
use omaxcones::norms::{dec_norm, min_norm, operator_norm, order_norm};
use omaxcones::random::{density, ginibre, hermitian, rng, SeededRng};
use omaxcones::{eig_hermitian, Complex64, Matrix};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-10;

fn budget() -> ConeBudget {
    ConeBudget {
        restarts: 16,
        ..Default::default()
    }
}

fn add(a: &Matrix<f64>, b: &Matrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + b[(i, j)])
}

/// Unital positive `X ↦ Σ_l s_l(X)·P_l` with density functionals `s_l` and a
/// POVM `P_l` assembled from two random orthonormal bases.
fn unital_holevo(g: &mut SeededRng, n: usize, m: usize) -> impl Fn(&Matrix<f64>) -> Matrix<f64> {
    let mut terms = Vec::new();
    for _ in 0..2 {
        let basis = eig_hermitian(&hermitian(g, m)).unwrap();
        for l in 0..m {
            let u = basis.vector(l);
            terms.push((density(g, n), Matrix::outer(&u, &u).scale_real(0.5)));
        }
    }
    move |x: &Matrix<f64>| {
        terms.iter().fold(Matrix::zeros(m, m), |acc, (s, p)| {
            add(&acc, &p.scale(x.bilinear(s)))
        })
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn homogeneity(seed in any::<u64>(), n in 2usize..4, t in -3.0f64..3.0) {
        let v = ginibre(&mut rng(seed, 0), n, n);
        let tv = v.scale_real(t);
        let a = min_norm(&v, TOL).unwrap().value;
        prop_assert!((min_norm(&tv, TOL).unwrap().value - t.abs() * a).abs() <= 1e-8 * (1.0 + a));
        let d = dec_norm(&v, 1e-9, &budget()).unwrap().value;
        prop_assert!((dec_norm(&tv, 1e-9, &budget()).unwrap().value - t.abs() * d).abs() <= 1e-8 * (1.0 + d));
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>(), n in 2usize..4) {
        let mut g = rng(seed, 0);
        let (u, v) = (ginibre(&mut g, n, n), ginibre(&mut g, n, n));
        let w = add(&u, &v);
        let m = |x: &Matrix<f64>| min_norm(x, TOL).unwrap().value;
        prop_assert!(m(&w) <= m(&u) + m(&v) + 1e-8);
        let d = |x: &Matrix<f64>| dec_norm(x, 1e-9, &budget()).unwrap().value;
        prop_assert!(d(&w) <= d(&u) + d(&v) + 1e-8);
    }

    #[test]
    fn unital_positive_maps_are_dec_contractive(seed in any::<u64>(), n in 2usize..4, m in 1usize..4) {
        let mut g = rng(seed, 0);
        let v = ginibre(&mut g, n, n);
        let phi = unital_holevo(&mut g, n, m);
        prop_assert!((operator_norm(&phi(&Matrix::identity(n))).unwrap() - 1.0).abs() < 1e-10);
        let d = dec_norm(&v, 1e-9, &budget()).unwrap();
        prop_assert!(operator_norm(&phi(&v)).unwrap() <= d.value + 1e-6, "{:?}", d);
    }
}

/// Diagonal elements live in a commutative algebra where both structures coincide.
#[test]
fn diagonal_collapse() {
    let mut g = rng(5, 0);
    for _ in 0..40 {
        let n = g.random_range(1..=4);
        let v = Matrix::from_fn(n, n, |i, j| if i == j { Complex64::new(g.random_range(-2.0..2.0), g.random_range(-2.0..2.0)) } else { Complex64::new(0.0, 0.0) });
        let want = v.max_abs();
        assert!((min_norm(&v, TOL).unwrap().value - want).abs() <= 1e-8);
        assert!((dec_norm(&v, 1e-9, &budget()).unwrap().value - want).abs() <= 1e-8);
    }
}

#[test]
fn hermitian_elements_use_the_order_norm() {
    let mut g = rng(6, 0);
    for _ in 0..10 {
        let h = hermitian(&mut g, 3);
        let o = order_norm(&h).unwrap().value;
        assert!((o - operator_norm(&h).unwrap()).abs() <= 1e-10);
        assert!((min_norm(&h, TOL).unwrap().value - o).abs() <= 1e-8);
        assert!((dec_norm(&h, 1e-9, &budget()).unwrap().value - o).abs() <= 1e-8);
    }
}

/// Regression baseline for the nilpotent matrix unit: ‖E12‖_m = 1/2 while the
/// computed decomposition norm sits at the top of its range, ‖E12‖_dec = 1.
#[test]
fn nilpotent_unit_baseline() {
    let e = Matrix::unit(2, 2, 0, 1);
    assert!((min_norm(&e, 1e-12).unwrap().value - 0.5).abs() <= 1e-9);
    let d = dec_norm(&e, 1e-9, &budget()).unwrap();
    assert_eq!(d.undetermined, 0);
    assert!(d.bracket.0 >= 0.5 - 1e-9 && d.bracket.1 <= 1.0 + 1e-9);
    assert!((d.value - 1.0).abs() <= 1e-8, "{d:?}");
}
