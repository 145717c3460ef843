use isopair::bcl::random::{conjugate, random_triple, random_zero_triple};
use isopair::cli::parse_complex;
use isopair::defect::{defect_report, verify_projection_identities};
use isopair::io::{parse_matrix, MatrixFile};
use isopair::koszul::{hausdorff, joint_spectrum_finite, koszul_finite, RANK_TOL};
use isopair::linops::checks::{commutation_deviation, isometry_deviation};
use isopair::linops::dense::{self, CMat};
use isopair::linops::C64;
use isopair::models::{self, direct_sum};
use isopair::spaces::window;
use isopair::verify::random_commuting_pair;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn multiplier_pairs_are_commuting_isometries(seed in any::<u64>(), d in 1usize..5) {
        let m = models::from_triple("t", &random_triple(d, &mut rng(seed)));
        let w = window(m.scheme(), 4);
        prop_assert!(isometry_deviation(&m.v1, &w) <= 1e-12);
        prop_assert!(isometry_deviation(&m.v2, &w) <= 1e-12);
        prop_assert!(commutation_deviation(&m.v1, &m.v2, &w) <= 1e-12);
    }

    #[test]
    fn defect_forms_agree(seed in any::<u64>(), d in 1usize..6) {
        let m = models::from_triple("t", &random_triple(d, &mut rng(seed)));
        let r = verify_projection_identities(&m, 5);
        prop_assert!(r.max_deviation() <= 1e-12, "{:?}", r);
    }

    #[test]
    fn class_is_unitarily_invariant(seed in any::<u64>(), d in 1usize..5) {
        let mut g = rng(seed);
        let t = random_triple(d, &mut g);
        let c = conjugate(&t, &mut g);
        prop_assert_eq!(t.classify(4).class, c.classify(4).class);
    }

    #[test]
    fn defect_spectrum_lies_in_unit_interval(seed in any::<u64>(), d in 1usize..5) {
        let m = models::from_triple("t", &random_triple(d, &mut rng(seed)));
        let r = defect_report(&m, 4);
        prop_assert!(r.eigenvalues.iter().all(|x| x.abs() <= 1.0 + 1e-12));
        prop_assert!(dense::hermitian_deviation(&r.matrix) <= 1e-13);
    }

    #[test]
    fn sums_of_zero_pairs_stay_zero(seed in any::<u64>(), d in 1usize..3, e in 1usize..3) {
        let mut g = rng(seed);
        let a = models::from_triple("a", &random_zero_triple(d, &mut g));
        let b = models::from_triple("b", &random_zero_triple(e, &mut g));
        let s = direct_sum(&a, &b);
        prop_assert_eq!(defect_report(&s, 3).class, isopair::bcl::DefectClass::Zero);
    }

    #[test]
    fn koszul_report_relations(seed in any::<u64>(), d in 1usize..6, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (a, b) = random_commuting_pair(d, &mut rng(seed));
        let l = C64::new(re, im);
        let r = koszul_finite(&a, &b, l, l * 0.5, RANK_TOL).unwrap();
        prop_assert!(r.ranks[0] <= d && r.ranks[1] <= d);
        prop_assert_eq!(r.exact[0], r.ranks[0] == d);
        prop_assert_eq!(r.exact[2], r.ranks[1] == d);
        // rank d2 + rank d1 <= 2d since d2 d1 = 0
        prop_assert!(r.ranks[0] + r.ranks[1] <= 2 * d);
        let stages: Vec<u8> = (0..3).filter(|&k| !r.exact[k]).map(|k| k as u8 + 1).collect();
        prop_assert_eq!(&r.break_stages, &stages);
    }

    #[test]
    fn joint_points_are_singular(seed in any::<u64>(), d in 1usize..6) {
        let (a, b) = random_commuting_pair(d, &mut rng(seed));
        let js = joint_spectrum_finite(&a, &b, RANK_TOL).unwrap();
        prop_assert!(!js.is_empty() && js.len() <= d);
        for p in &js {
            prop_assert!(koszul_finite(&a, &b, p[0], p[1], RANK_TOL).unwrap().is_singular());
        }
    }

    #[test]
    fn hausdorff_is_a_symmetric_distance(xs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
                                         ys in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6)) {
        let pts = |v: &[(f64, f64)]| v.iter().map(|&(a, b)| [C64::new(a, b), C64::new(b, -a)]).collect::<Vec<_>>();
        let (a, b) = (pts(&xs), pts(&ys));
        prop_assert_eq!(hausdorff(&a, &a), 0.0);
        prop_assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
    }

    #[test]
    fn complex_arguments_round_trip(re in -10.0f64..10.0, im in -10.0f64..10.0) {
        let s = format!("{re}{im:+}i");
        prop_assert_eq!(parse_complex(&s).unwrap(), C64::new(re, im));
    }

    #[test]
    fn matrix_files_round_trip(seed in any::<u64>(), d in 1usize..5) {
        let m = isopair::bcl::random::gaussian(d, d, &mut rng(seed));
        let text = serde_json::to_string(&MatrixFile::from_matrix(&m)).unwrap();
        let back: CMat = parse_matrix(&text).unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn purely_imaginary_arguments() {
    assert_eq!(parse_complex("0.5i").unwrap(), C64::new(0.0, 0.5));
    assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
    assert!(parse_complex("half").is_err());
}
