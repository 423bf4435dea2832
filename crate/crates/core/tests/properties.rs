use std::f64::consts::PI;

use nentire_core::debranges::{kernel_formula, HermiteBiehler};
use nentire_core::jet::Jet;
use nentire_core::nentire::{h_beta, threshold_n};
use nentire_core::ode::engine::wronskian_at;
use nentire_core::ode::Engine;
use nentire_core::quadrature::tail_sum;
use nentire_core::spectral::Spectrum;
use nentire_core::{BoundaryCondition, PotentialSpec, SturmLiouvilleProblem, C64};
use proptest::prelude::*;

fn complex(re: std::ops::Range<f64>, im: std::ops::Range<f64>) -> impl Strategy<Value = C64> {
    (re, im).prop_map(|(a, b)| C64::new(a, b))
}

fn jet(order: usize) -> impl Strategy<Value = Jet> {
    prop::collection::vec(complex(-2.0..2.0, -2.0..2.0), order + 1).prop_map(Jet)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_reciprocal_inverts(mut a in jet(4)) {
        a.0[0] += C64::new(3.0, 0.0);
        let one = &a * &a.recip();
        prop_assert!((one.value() - 1.0).norm() < 1e-12);
        for j in 1..=4 {
            prop_assert!(one.coeff(j).norm() < 1e-11);
        }
    }

    #[test]
    fn jet_product_is_commutative_and_distributive(a in jet(3), b in jet(3), c in jet(3)) {
        let ab = &a * &b;
        let ba = &b * &a;
        let lhs = &a * &(&b + &c);
        let rhs = &ab + &(&a * &c);
        for j in 0..=3 {
            prop_assert!((ab.coeff(j) - ba.coeff(j)).norm() < 1e-12);
            prop_assert!((lhs.coeff(j) - rhs.coeff(j)).norm() < 1e-11);
        }
    }

    #[test]
    fn threshold_is_least_admissible_order(l in -0.5f64..6.0) {
        let n = threshold_n(l);
        let f = (l + 2.5).floor() as usize;
        prop_assert!(2 * n >= f);
        prop_assert!(n == 0 || 2 * (n - 1) < f);
        prop_assert!(threshold_n(l + 1.0) >= n);
    }

    #[test]
    fn tail_sum_matches_power_law(p in 1.5f64..4.0, n in 20usize..200) {
        let exact: f64 = ((n + 1)..2_000_000).map(|k| (k as f64).powf(-p)).sum::<f64>()
            + (2_000_000f64 - 0.5).powf(1.0 - p) / (p - 1.0);
        let got = tail_sum(|k| C64::new(k.powf(-p), 0.0), n).re;
        prop_assert!((got - exact).abs() <= 1e-6 * exact, "{got} vs {exact}");
    }

    #[test]
    fn free_product_is_conjugation_symmetric(z in complex(-5.0..40.0, 0.1..5.0)) {
        let s = Spectrum::from_atoms((1..=400).map(|k| (k * k) as f64).collect(), (1..=400).map(|k| 2.0 * (k * k) as f64 / PI).collect());
        let a = h_beta(&s, z).unwrap();
        let b = h_beta(&s, z.conj()).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
        let r = z.sqrt() * PI;
        let closed = r.sin() / r;
        prop_assert!((a - closed).norm() <= 1e-6 * closed.norm().max(1e-3));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn wronskian_is_one_across_l(l in -0.5f64..3.5, q1 in -3.0f64..3.0, z in complex(-20.0..80.0, -4.0..4.0)) {
        let q = PotentialSpec::Polynomial { coefficients: vec![q1], lowest_power: 1 };
        let p = SturmLiouvilleProblem::new(l, 1.0, q, BoundaryCondition::dirichlet()).unwrap();
        let e = Engine::with_defaults(&p);
        let (phi, theta) = e.fundamental_system(z, 0).unwrap();
        for &x in &phi.grid.points {
            prop_assert!((wronskian_at(&theta, &phi, x).unwrap() - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn kernel_is_hermitian_and_positive_on_diagonal(w in complex(-5.0..30.0, -3.0..3.0), z in complex(-5.0..30.0, -3.0..3.0), beta in 0.0f64..3.0) {
        let p = SturmLiouvilleProblem::new(1.0, 1.0, PotentialSpec::Free, BoundaryCondition { beta }).unwrap();
        let e = Engine::with_defaults(&p);
        let hb = HermiteBiehler::new(&e, 0.0).unwrap();
        let kwz = kernel_formula(&hb, w, z).unwrap();
        let kzw = kernel_formula(&hb, z, w).unwrap();
        prop_assert!((kwz - kzw.conj()).norm() <= 1e-9 * kwz.norm().max(1e-12));
        let kww = kernel_formula(&hb, w, w).unwrap();
        prop_assert!(kww.re > 0.0 && kww.im.abs() <= 1e-9 * kww.re);
    }

    #[test]
    fn hermite_biehler_margin_positive(z in complex(-10.0..10.0, 0.05..10.0), l in 0.0f64..3.0) {
        let p = SturmLiouvilleProblem::bessel(l, 1.0).unwrap();
        let e = Engine::with_defaults(&p);
        let hb = HermiteBiehler::new(&e, 0.0).unwrap();
        prop_assert!(hb.eval(z).unwrap().norm() > hb.eval(z.conj()).unwrap().norm());
    }
}
