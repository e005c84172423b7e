use num_complex::Complex64;
use num_traits::Zero;
use proptest::prelude::*;

use ellax::charclass::characteristic_class;
use ellax::elliptic::EllipticContext;
use ellax::lie::RootSystem;
use ellax::rat::{rvec_add, rvec_scale, Rat};

const LABELS: &[&str] = &["A1", "A2", "A3", "B2", "B3", "C3", "D4"];

fn algebra() -> impl Strategy<Value = RootSystem> {
    (0..LABELS.len()).prop_map(|i| RootSystem::from_label(LABELS[i]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflection_is_an_involution_and_negates_its_root(
        rs in algebra(),
        i in 0usize..48,
        j in 0usize..48,
    ) {
        let i = i % rs.num_roots();
        let j = j % rs.num_roots();
        let once = rs.reflect_root(i, j);
        prop_assert_eq!(rs.reflect_root(i, once), j);
        prop_assert_eq!(rs.reflect_root(i, i), rs.neg(i));
    }

    #[test]
    fn root_coroot_pairings_are_integers(
        rs in algebra(),
        i in 0usize..48,
        j in 0usize..48,
    ) {
        let i = i % rs.num_roots();
        let j = j % rs.num_roots();
        let pairing = rs.pair_root(&rs.root_vec(i), j) * Rat::from_integer(2) / rs.root_sq(j);
        prop_assert!(pairing.is_integer());
        prop_assert!(pairing.to_integer().abs() <= 3);
    }

    #[test]
    fn coroot_lattice_shifts_do_not_change_the_class(
        rs in algebra(),
        node in 1usize..8,
        shifts in proptest::collection::vec(-3i64..=3, 8),
    ) {
        let node = (node - 1) % rs.rank + 1;
        let gamma = rs.coweights[node - 1].clone();
        let mut shifted = gamma.clone();
        for (k, &m) in shifts.iter().take(rs.rank).enumerate() {
            let mut cor = vec![Rat::zero(); rs.rank];
            // alpha_k^vee in root coordinates: alpha_k / (|alpha_k|^2 / 2)
            let sq = {
                let mut e = vec![0i64; rs.rank];
                e[k] = 1;
                rs.root_sq(rs.root_index(&e).unwrap())
            };
            cor[k] = Rat::from_integer(2) / sq * Rat::from_integer(m);
            shifted = rvec_add(&shifted, &cor);
        }
        let a = characteristic_class(&rs, &gamma).unwrap();
        let b = characteristic_class(&rs, &shifted).unwrap();
        prop_assert_eq!(a.gamma, b.gamma);
        prop_assert_eq!(a.phases, b.phases);
    }

    #[test]
    fn class_phases_scale_with_the_generator(
        rs in algebra(),
        node in 1usize..8,
        m in 0i64..6,
    ) {
        let node = (node - 1) % rs.rank + 1;
        let gamma = rvec_scale(&rs.coweights[node - 1], Rat::from_integer(m));
        let single = characteristic_class(&rs, &rs.coweights[node - 1]).unwrap();
        let scaled = characteristic_class(&rs, &gamma).unwrap();
        for (p, q) in single.phases.iter().zip(&scaled.phases) {
            let want = *p * Rat::from_integer(m);
            let want = want - want.floor();
            prop_assert_eq!(want, *q);
        }
    }

    #[test]
    fn theta_satisfies_lattice_quasi_periodicity(
        re in -0.45f64..0.45,
        im in -0.7f64..0.7,
        m in -2i64..=2,
        n in -2i64..=2,
    ) {
        let ell = EllipticContext::new(Complex64::new(0.21, 1.13)).unwrap();
        let z = Complex64::new(re, im);
        prop_assume!(ell.lattice_distance(z) > 1e-3);
        let shifted = z + m as f64 + n as f64 * ell.tau;
        let lhs = ell.theta(shifted);
        // theta(z + m + n tau) = (-1)^{m+n} e(-n z - n^2 tau / 2) theta(z)
        let phase = (if (m + n).rem_euclid(2) == 0 { 1.0 } else { -1.0 })
            * (Complex64::i()
                * 2.0
                * std::f64::consts::PI
                * (-(n as f64) * z - (n * n) as f64 * ell.tau / 2.0))
                .exp();
        let rhs = phase * ell.theta(z);
        prop_assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm().max(1.0));
    }
}
