mod common;

use std::f64::consts::PI;

use common::{gamma_ref, normalization_ref, rel, sphere_area_ref};
use poisson_sharp::constants::{c1, directional_constant, i1, i2, scale_to_height, sharp_constant};
use poisson_sharp::poisson::{random_gaussian_mixture, sharpness_ratio};
use poisson_sharp::serde_ext::format_f64;
use poisson_sharp::specfun::{gamma, normalization, sphere_area};
use poisson_sharp::{Direction, HalfSpacePoint, ProblemParams, QuadratureConfig};
use proptest::prelude::*;

#[test]
fn reference_values() {
    assert!(rel(gamma_ref(0.5), PI.sqrt()) < 1e-14);
    assert!(rel(gamma_ref(5.0), 24.0) < 1e-14);
    assert!(rel(gamma_ref(-0.5), -2.0 * PI.sqrt()) < 1e-13);
    assert!(rel(sphere_area_ref(3), 4.0 * PI) < 1e-15);
    assert!(rel(sphere_area_ref(4), 2.0 * PI * PI) < 1e-15);
}

proptest! {
    #[test]
    fn gamma_matches_stirling(x in 0.05f64..40.0) {
        prop_assert!(rel(gamma(x).unwrap(), gamma_ref(x)) < 1e-12);
    }

    #[test]
    fn gamma_reflection_branch(x in -6.0f64..0.45) {
        prop_assume!((x - x.round()).abs() > 1e-3);
        prop_assert!(rel(gamma(x).unwrap(), gamma_ref(x)) < 1e-11);
    }

    #[test]
    fn sphere_area_matches_recursion(m in 1u32..30) {
        prop_assert!(rel(sphere_area(m).unwrap(), sphere_area_ref(m)) < 1e-13);
    }

    #[test]
    fn c1_is_k_times_n_up_to_alpha_n(n in 2u32..12, u in 0.02f64..1.0) {
        let nf = n as f64;
        let alpha = -nf + 2.0 * nf * u;
        prop_assume!((alpha / 2.0 - (alpha / 2.0).round()).abs() > 1e-6);
        let r = c1(&ProblemParams::new(n, alpha, 1.0).unwrap()).unwrap();
        prop_assert!(rel(r.value, normalization_ref(n, alpha).abs() * nf) < 1e-10);
        prop_assert_eq!(r.t_star, Some(1.0));
    }

    #[test]
    fn normalization_matches_reference(n in 1u32..10, alpha in 0.05f64..8.0) {
        prop_assert!(rel(normalization(n, alpha).unwrap(), normalization_ref(n, alpha)) < 1e-11);
    }

    #[test]
    fn gamma_direction_round_trip(n in 2u32..6, g in 0.0f64..1e3) {
        let z = Direction::from_gamma(n, g).unwrap();
        let norm: f64 = z.components().iter().map(|c| c * c).sum();
        prop_assert!((norm - 1.0).abs() < 1e-14);
        prop_assert!(rel(z.gamma(), g) < 1e-12 || (g < 1e-12 && z.gamma() < 1e-12));
    }

    #[test]
    fn floats_round_trip_through_text(x in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn height_scaling(n in 2u32..5, alpha in 0.2f64..3.0, p in 1.0f64..5.0, h in 0.01f64..100.0) {
        let params = ProblemParams::new(n, alpha, p).unwrap();
        let c = 0.7;
        let ratio = scale_to_height(c, &params, h) / scale_to_height(c, &params, 1.0);
        prop_assert!(rel(ratio, h.powf(-(n as f64 + p) / p)) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratio_identity_random(n in 2u32..7, u in 0.05f64..1.0) {
        let nf = n as f64;
        let alpha = -0.45 * nf + 6.0 * u;
        let p = ProblemParams::new(n, alpha, 2.0).unwrap();
        let cfg = QuadratureConfig::default();
        let ratio = i1(&p, &cfg).unwrap().value / i2(&p, &cfg).unwrap().value;
        prop_assert!(rel(ratio, nf * (nf + 2.0) / (nf + 2.0 * alpha)) < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn directional_constant_below_sharp(alpha in 0.3f64..3.0, p in 1.2f64..4.0, g in 0.0f64..10.0) {
        let params = ProblemParams::new(2, alpha, p).unwrap();
        let cfg = QuadratureConfig::default();
        let full = sharp_constant(&params, &cfg).unwrap().value;
        let dir = directional_constant(&params, &Direction::from_gamma(2, g).unwrap(), &cfg).unwrap().value;
        prop_assert!(dir <= full * (1.0 + 1e-9));
    }

    #[test]
    fn random_mixtures_respect_the_bound(alpha in 0.3f64..3.0, p in 1.0f64..4.0, g in 0.0f64..5.0, seed in 0u64..1000) {
        let params = ProblemParams::new(2, alpha, p).unwrap();
        let cfg = QuadratureConfig::default();
        let x = HalfSpacePoint::new(vec![0.3, -0.2], 0.6).unwrap();
        let f = random_gaussian_mixture(&x, seed).unwrap();
        let z = Direction::from_gamma(2, g).unwrap();
        let r = sharpness_ratio(&params, &x, &z, &f, &cfg).unwrap();
        prop_assert!(r.ratio <= 1.0 + 1e-5);
    }
}
