//! Checks against independent routes: cofactor expansion, matching sums,
//! hand-expanded identities, finite differences, and direct SVDs of
//! hand-assembled coefficient matrices.

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;

use bsdkit::autgroups::{act, lambda_iv, lie_exponential, random_automorphism, AutElement};
use bsdkit::domains::{
    generic_norm, norm_polynomial, polarized_norm, sample_point, sample_point_with, DomainSpec, Point, Region,
};
use bsdkit::invariants::invariant_spectrum;
use bsdkit::linalg::{det, gaussian_matrix, pfaffian, singular_values, ComplexMatrix};
use bsdkit::polymaps::{catalog, compose, point_from_variables, CatalogId, CatalogParams};
use bsdkit::verify::{check_factorization, check_fu_lemma};
use bsdkit::{rng, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cofactor_det(m: &[Vec<C64>]) -> C64 {
    let n = m.len();
    if n == 0 {
        return c(1.0, 0.0);
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<C64>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v).collect())
                .collect();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            m[0][j] * cofactor_det(&minor) * sign
        })
        .sum()
}

/// Sum over perfect matchings pairing index 0 with each `j`.
fn matching_pfaffian(a: &[Vec<C64>], idx: &[usize]) -> C64 {
    if idx.is_empty() {
        return c(1.0, 0.0);
    }
    let first = idx[0];
    let mut total = c(0.0, 0.0);
    for k in 1..idx.len() {
        let rest: Vec<usize> = idx.iter().enumerate().filter(|(p, _)| *p != 0 && *p != k).map(|(_, v)| *v).collect();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += a[first][idx[k]] * matching_pfaffian(a, &rest) * sign;
    }
    total
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i)).collect()
}

#[test]
fn determinant_matches_cofactor_expansion() {
    let mut r = rng::seeded(11);
    for n in 1..=5 {
        let m = gaussian_matrix(n, n, &mut r);
        let d = det(&m).unwrap();
        let oracle = cofactor_det(&rows(&m));
        assert!((d - oracle).norm() < 1e-12 * oracle.norm().max(1.0), "n={n}");
    }
}

#[test]
fn pfaffian_matches_matching_sum() {
    let mut r = rng::seeded(12);
    for n in [2, 4, 6] {
        let g = gaussian_matrix(n, n, &mut r);
        let a = &g - &g.transpose();
        let oracle = matching_pfaffian(&rows(&a), &(0..n).collect::<Vec<_>>());
        assert!((pfaffian(&a).unwrap() - oracle).norm() < 1e-12 * oracle.norm().max(1.0), "n={n}");
    }
    let mut a = ComplexMatrix::zeros(2, 2);
    a[(0, 1)] = c(1.0, 0.0);
    a[(1, 0)] = c(-1.0, 0.0);
    assert_eq!(pfaffian(&a).unwrap(), c(1.0, 0.0));
}

#[test]
fn singular_values_match_gram_invariants() {
    let mut r = rng::seeded(13);
    for n in 1..=4 {
        let m = gaussian_matrix(n, n, &mut r);
        let s = singular_values(&m).unwrap();
        let sum_sq: f64 = s.iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(sum_sq, m.frobenius_norm().powi(2), epsilon = 1e-10);
        let prod: f64 = s.iter().product();
        assert_abs_diff_eq!(prod, cofactor_det(&rows(&m)).norm(), epsilon = 1e-10);
    }
}

#[test]
fn type_iv_boundary_samples_solve_the_quadratic() {
    for n in [1, 3, 5] {
        let spec = DomainSpec::type_iv(n).unwrap();
        for seed in 0..20 {
            let z = sample_point(spec, Region::Boundary, seed).unwrap();
            let x = z.coords();
            let zz: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let zzt: C64 = x.iter().map(|v| v * v).sum();
            let s = 1.0 - 2.0 * zz + zzt.norm_sqr();
            assert!(s.abs() <= 1e-10, "n={n} seed={seed}: {s}");
            assert!(zz <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn type_iv_identity_lambda() {
    let spec = DomainSpec::type_iv(3).unwrap();
    let z = sample_point(spec, Region::Interior, 5).unwrap();
    let e = AutElement::identity(spec);
    assert_eq!(lambda_iv(&e, &z).unwrap(), c(0.0, 2.0));
    assert!((act(&e, &z).unwrap().value() - z.value()).max_abs() < 1e-15);
}

/// With `λ(identity) = 2i` the norm picks up `|λ|² = 4` at the identity, and
/// the same constant holds along noncompact elements.
#[test]
fn type_iv_transformation_constant() {
    let spec = DomainSpec::type_iv(4).unwrap();
    let mut r = rng::seeded(14);
    for _ in 0..20 {
        let e = lie_exponential(spec, 1.0, &mut r).unwrap();
        let z = sample_point_with(spec, Region::Interior, &mut r).unwrap();
        let lhs = norm_polynomial(&act(&e, &z).unwrap()).unwrap() * lambda_iv(&e, &z).unwrap().norm_sqr();
        assert_abs_diff_eq!(lhs / norm_polynomial(&z).unwrap(), 4.0, epsilon = 1e-9);
    }
    let report = check_fu_lemma(spec, 40, 1e-9, 42).unwrap();
    assert!(!report.pass);
    assert!(report.notes.iter().any(|n| n.starts_with("empirical constant 4.0000")));
}

#[test]
fn type_i_automorphy_identity_by_determinants() {
    let spec = DomainSpec::type_i(2, 3).unwrap();
    let mut r = rng::seeded(15);
    for k in 0..30 {
        let e = random_automorphism(spec, k, &mut r).unwrap();
        let z = sample_point_with(spec, Region::Interior, &mut r).unwrap();
        let w = sample_point_with(spec, Region::Interior, &mut r).unwrap();
        let (a, _, cc, _) = e.blocks();
        let gz = act(&e, &z).unwrap();
        let gw = act(&e, &w).unwrap();
        let image = cofactor_det(&rows(&(&ComplexMatrix::identity(2) - &(gz.value() * &gw.value().adjoint()))));
        let base = cofactor_det(&rows(&(&ComplexMatrix::identity(2) - &(z.value() * &w.value().adjoint()))));
        let da = cofactor_det(&rows(&(&a + &(z.value() * &cc))));
        let db = cofactor_det(&rows(&(&a + &(w.value() * &cc))));
        assert!((image * da * db.conj() - base).norm() < 1e-10 * base.norm().max(1.0));
    }
}

#[test]
fn whitney_norm_factors_by_hand() {
    let f = catalog(CatalogId::WhitneyBall, &CatalogParams::with_dims(&[2])).unwrap();
    let mut r = rng::seeded(16);
    for _ in 0..50 {
        let z = sample_point_with(f.source(), Region::Interior, &mut r).unwrap();
        let w = sample_point_with(f.source(), Region::Interior, &mut r).unwrap();
        let (z1, z2) = (z.value()[(0, 0)], z.value()[(0, 1)]);
        let (w1, w2) = (w.value()[(0, 0)], w.value()[(0, 1)]);
        let expanded = c(1.0, 0.0) - z1 * w1.conj() - z1 * z2 * (w1 * w2).conj() - z2 * z2 * (w2 * w2).conj();
        let factored = (c(1.0, 0.0) - z1 * w1.conj() - z2 * w2.conj()) * (c(1.0, 0.0) + z2 * w2.conj());
        assert!((expanded - factored).norm() < 1e-14);
        let image = polarized_norm(&f.eval(&z).unwrap(), &f.eval(&w).unwrap()).unwrap().value;
        assert!((image - expanded).norm() < 1e-14);
    }
}

#[test]
fn f_sec4_factor_is_a_quartic() {
    let f = catalog(CatalogId::FSec4, &CatalogParams::default()).unwrap();
    let (report, fit) = check_factorization(&f, 4, 1600, 1e-7, 42).unwrap();
    assert!(report.pass, "{report:?}");
    assert!((fit.coefficient(&[0; 4], &[0; 4]) - c(1.0, 0.0)).norm() < 1e-8);
    let top = fit.coefficients.iter().filter(|t| t.value.norm() > 1e-8).map(|t| t.z.iter().chain(&t.wbar).sum::<u32>()).max();
    assert_eq!(top, Some(4));
}

/// Degree-1 coefficient matrix of `f_t` assembled from its displayed linear
/// part, one row per target entry and one column per variable.
fn ft_linear_matrix(t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(16, 4);
    let q = (t / (2.0 - t)).sqrt();
    m[(3, 1)] = t.sqrt();
    m[(7, 3)] = q;
    m[(12, 2)] = t.sqrt();
    m[(13, 3)] = q;
    m
}

#[test]
fn f_family_linear_spectrum_by_direct_svd() {
    for t in [0.05, 0.3, 0.77, 1.0] {
        let f = catalog(CatalogId::FamilyF, &CatalogParams::with_t(t)).unwrap();
        let got = invariant_spectrum(&f).unwrap();
        let mut oracle: Vec<f64> = ft_linear_matrix(t).singular_values().iter().copied().collect();
        oracle.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (a, b) in got.degree(1).iter().zip(&oracle) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-12);
        }
    }
}

#[test]
fn standard_embedding_linear_spectrum_is_ones() {
    let f = catalog(CatalogId::Standard, &CatalogParams::with_dims(&[2, 2, 3, 3])).unwrap();
    let s = invariant_spectrum(&f).unwrap();
    assert_eq!(s.degrees.len(), 1);
    for v in s.degree(1) {
        assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-14);
    }
}

/// Fourth (second) central difference of the norm polynomial in `Re z_ij`
/// equals `4!` (`2!`) times its leading coefficient.
#[test]
fn coefficient_lemma_by_finite_differences() {
    let cases = [("I:2,3", (1, 2), 2usize), ("III:3", (0, 2), 4), ("III:3", (1, 1), 2), ("II:4", (0, 3), 4)];
    for (text, (i, j), k) in cases {
        let spec: DomainSpec = text.parse().unwrap();
        let z = sample_point(spec, Region::Interior, 3).unwrap();
        let mut e = ComplexMatrix::zeros(z.value().nrows(), z.value().ncols());
        e[(i, j)] = c(1.0, 0.0);
        if i != j {
            match spec {
                DomainSpec::TypeII { .. } => e[(j, i)] = c(-1.0, 0.0),
                DomainSpec::TypeIII { .. } => e[(j, i)] = c(1.0, 0.0),
                _ => {}
            }
        }
        let h = 0.5;
        let value = |s: f64| {
            let m = z.value() + &e.scale(c(s, 0.0));
            cofactor_det(&rows(&(&ComplexMatrix::identity(m.nrows()) - &(&m * &m.adjoint())))).re
        };
        let weights: &[f64] = if k == 2 { &[1.0, -2.0, 1.0] } else { &[1.0, -4.0, 6.0, -4.0, 1.0] };
        let half = (weights.len() / 2) as f64;
        let diff: f64 = weights.iter().enumerate().map(|(m, w)| w * value((m as f64 - half) * h)).sum();
        let lead = diff / (h.powi(k as i32) * (1..=k).product::<usize>() as f64);
        let keep: Vec<usize> = if k == 4 { vec![i, j] } else { vec![i] };
        let minor = z.value().remove(&keep, &if k == 4 { vec![i, j] } else { vec![j] });
        let minor_det = if minor.nrows() == 0 {
            1.0
        } else {
            cofactor_det(&rows(&(&ComplexMatrix::identity(minor.nrows()) - &(&minor * &minor.adjoint())))).re
        };
        let expected = if k == 4 { minor_det } else { -minor_det };
        assert_abs_diff_eq!(lead, expected, epsilon = 1e-9);
    }
}

#[test]
fn composition_of_ball_maps_by_substitution() {
    let g = catalog(CatalogId::WhitneyBall, &CatalogParams::with_dims(&[2])).unwrap();
    let f = catalog(CatalogId::Standard, &CatalogParams::with_dims(&[1, 3, 1, 5])).unwrap();
    let h = compose(&f, &g).unwrap();
    let z = point_from_variables(g.source(), &[c(0.2, 0.1), c(-0.3, 0.4)]).unwrap();
    let (z1, z2) = (c(0.2, 0.1), c(-0.3, 0.4));
    let expected = [z1, z1 * z2, z2 * z2, c(0.0, 0.0), c(0.0, 0.0)];
    let got = h.eval(&z).unwrap().into_value().to_row_major();
    for (a, b) in got.iter().zip(expected) {
        assert!((a - b).norm() < 1e-15);
    }
}

#[test]
fn type_ii_generic_norm_is_pfaffian_of_block_matrix() {
    let spec = DomainSpec::type_ii(4).unwrap();
    let mut r = rng::seeded(17);
    for _ in 0..10 {
        let z: Point = sample_point_with(spec, Region::Interior, &mut r).unwrap();
        let d = cofactor_det(&rows(&(&ComplexMatrix::identity(4) - &(z.value() * &z.value().adjoint())))).re;
        assert_abs_diff_eq!(generic_norm(&z).unwrap(), d.sqrt(), epsilon = 1e-12);
    }
}
