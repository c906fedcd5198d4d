use proptest::prelude::*;

use bsdkit::autgroups::{act, random_automorphism, random_isotropy_params};
use bsdkit::domains::{classify_point, sample_point, sample_point_with, DomainSpec, Region, BOUNDARY_TOL};
use bsdkit::invariants::{invariant_spectrum, spectral_distance};
use bsdkit::linalg::{det, gaussian_matrix, pfaffian};
use bsdkit::polymaps::{catalog, conjugate, homogeneous_parts, CatalogId, CatalogParams, PolyMap, PolyMapJson};
use bsdkit::rng;
use bsdkit::verify::{check_fu_lemma, check_properness};

fn specs() -> impl Strategy<Value = DomainSpec> {
    prop_oneof![
        (1usize..=3, 0usize..=2).prop_map(|(r, extra)| DomainSpec::type_i(r, r + extra).unwrap()),
        (2usize..=5).prop_map(|n| DomainSpec::type_ii(n).unwrap()),
        (1usize..=3).prop_map(|n| DomainSpec::type_iii(n).unwrap()),
        (1usize..=5).prop_map(|n| DomainSpec::type_iv(n).unwrap()),
    ]
}

fn family_member() -> impl Strategy<Value = PolyMap> {
    (0usize..4, 0.0f64..=1.0).prop_map(|(k, t)| {
        let id = [CatalogId::FamilyF, CatalogId::FamilyG, CatalogId::FamilyH, CatalogId::GenWhitney][k];
        let params = if id == CatalogId::GenWhitney { CatalogParams::with_dims(&[2, 2]) } else { CatalogParams::with_t(t) };
        catalog(id, &params).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn interior_samples_have_positive_margin(spec in specs(), seed in any::<u64>()) {
        let z = sample_point(spec, Region::Interior, seed).unwrap();
        let c = classify_point(&z, BOUNDARY_TOL).unwrap();
        prop_assert_eq!(c.region, Region::Interior);
        prop_assert!(c.margin > 0.0);
    }

    #[test]
    fn action_is_a_right_action(spec in specs(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let m = random_automorphism(spec, 0, &mut r).unwrap();
        let n = random_automorphism(spec, 1, &mut r).unwrap();
        let z = sample_point_with(spec, Region::Interior, &mut r).unwrap();
        let lhs = act(&m.product(&n).unwrap(), &z).unwrap();
        let rhs = act(&n, &act(&m, &z).unwrap()).unwrap();
        prop_assert!((lhs.value() - rhs.value()).max_abs() < 1e-9);
    }

    #[test]
    fn automorphisms_preserve_the_domain(spec in specs(), seed in any::<u64>(), variant in 0usize..4) {
        let mut r = rng::seeded(seed);
        let e = random_automorphism(spec, variant, &mut r).unwrap();
        let z = sample_point_with(spec, Region::Interior, &mut r).unwrap();
        let c = classify_point(&act(&e, &z).unwrap(), BOUNDARY_TOL).unwrap();
        prop_assert_eq!(c.region, Region::Interior);
    }

    #[test]
    fn spectra_are_isotropy_invariant(f in family_member(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let pre = random_isotropy_params(f.source(), &mut r);
        let post = random_isotropy_params(f.target(), &mut r);
        let g = conjugate(&f, &pre, &post).unwrap();
        let d = spectral_distance(&invariant_spectrum(&f).unwrap(), &invariant_spectrum(&g).unwrap());
        prop_assert!(d < 1e-10, "distance {}", d);
    }

    #[test]
    fn polymap_json_round_trip(f in family_member()) {
        let text = serde_json::to_string(&PolyMapJson::from(&f)).unwrap();
        let back: PolyMapJson = serde_json::from_str(&text).unwrap();
        let g = PolyMap::try_from(back).unwrap();
        prop_assert_eq!(f.max_deviation(&g).unwrap(), 0.0);
    }

    #[test]
    fn homogeneous_parts_sum_to_map(f in family_member(), seed in any::<u64>()) {
        let z = sample_point(f.source(), Region::Interior, seed).unwrap();
        let whole = f.eval(&z).unwrap();
        let mut total = whole.value().scale(0.0.into());
        for (_, part) in homogeneous_parts(&f) {
            total = &total + part.eval(&z).unwrap().value();
        }
        prop_assert!((whole.value() - &total).max_abs() < 1e-14);
    }

    #[test]
    fn pfaffian_squares_to_determinant(n in 1usize..=4, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let g = gaussian_matrix(2 * n, 2 * n, &mut r);
        let a = &g - &g.transpose();
        let p = pfaffian(&a).unwrap();
        let d = det(&a).unwrap();
        prop_assert!((p * p - d).norm() <= 1e-9 * d.norm().max(1.0));
    }

    #[test]
    fn reports_depend_only_on_seed(seed in any::<u64>()) {
        let spec = DomainSpec::type_iii(2).unwrap();
        let a = check_fu_lemma(spec, 10, 1e-9, seed).unwrap();
        let b = check_fu_lemma(spec, 10, 1e-9, seed).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let f = catalog(CatalogId::FamilyH, &CatalogParams::with_t(0.4)).unwrap();
        let p = check_properness(&f, 10, 1e-7, seed).unwrap();
        let q = check_properness(&f, 10, 1e-7, seed).unwrap();
        prop_assert_eq!(p.max_residual.to_bits(), q.max_residual.to_bits());
    }
}
