//! Numerical verification harness.
//!
//! Each check samples from per-sample random streams keyed by
//! `(seed, check, index)`, so reports do not depend on the degree of
//! parallelism.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autgroups::{act, lambda_iv, random_automorphism, random_isotropy_params};
use crate::domains::{
    classify_point, norm_polynomial, polarized_norm, sample_point_with, DomainKind, DomainSpec, Point, Region,
};
use crate::error::{Error, Result};
use crate::invariants::{compare_spectra, distinguish, invariant_spectrum, spectral_distance, Verdict};
use crate::linalg::{self, det, pfaffian, ComplexMatrix, C64, ONE, ZERO};
use crate::polymaps::{
    catalog, compose, conjugate, homogeneous_parts, point_variables, variable_name, CatalogId, CatalogParams, Monomial,
    PolyMap, Polynomial,
};
use crate::rng::{stream, Stream};

const RETRIES: usize = 64;

/// Outcome of one check; `pass` holds exactly when `max_residual ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub specs: Vec<DomainSpec>,
    pub samples: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(
        check_id: impl Into<String>,
        specs: Vec<DomainSpec>,
        samples: usize,
        seed: u64,
        max_residual: f64,
        tolerance: f64,
        notes: Vec<String>,
    ) -> Self {
        Self {
            check_id: check_id.into(),
            specs,
            samples,
            seed,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            notes,
        }
    }

    fn failed(check_id: impl Into<String>, specs: Vec<DomainSpec>, seed: u64, tolerance: f64, err: &Error) -> Self {
        Self::new(check_id, specs, 1, seed, f64::INFINITY, tolerance, vec![format!("error: {err}")])
    }
}

fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Configuration("sample count must be positive".into()));
    }
    Ok(())
}

fn require_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Configuration(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

#[cfg(feature = "parallel")]
fn per_sample<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn per_sample<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).map(f).collect()
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

/// Interior pair with `|S(Z, W)| ≥ threshold`.
fn interior_pair(spec: DomainSpec, threshold: f64, rng: &mut Stream) -> Result<(Point, Point, C64)> {
    for _ in 0..RETRIES {
        let z = sample_point_with(spec, Region::Interior, rng)?;
        let w = sample_point_with(spec, Region::Interior, rng)?;
        let s = polarized_norm(&z, &w)?.value;
        if s.norm() >= threshold {
            return Ok((z, w, s));
        }
    }
    Err(Error::Sampling(format!("no {spec} pair with |S| >= {threshold} after {RETRIES} draws")))
}

// ---------------------------------------------------------------------------
// Properness

/// Boundary points must map to boundary points.
///
/// Per sample the residual is `max(|S(f(Z))|, |margin|/10)` where `margin`
/// is the classifier's signed quantity, so the report passes exactly when
/// every image has `|S| ≤ tol` and is classified boundary at `10·tol`. Type
/// II targets use the square root of `det(I − YY*)`.
pub fn check_properness(f: &PolyMap, n_samples: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    require_samples(n_samples)?;
    require_tol(tol)?;
    let residuals = per_sample(n_samples, |i| {
        let mut rng = stream(seed, "properness", i as u64);
        let z = sample_point_with(f.source(), Region::Boundary, &mut rng)?;
        let y = f.eval(&z)?;
        let det = norm_polynomial(&y)?;
        let s = if f.target().kind() == DomainKind::II { det.abs().sqrt() } else { det.abs() };
        let class = classify_point(&y, 10.0 * tol)?;
        Ok(if class.region == Region::Boundary { s.max(class.margin.abs() / 10.0) } else { f64::INFINITY })
    })?;
    let worst = max_of(residuals.iter().copied());
    let exterior = residuals.iter().filter(|r| r.is_infinite()).count();
    let mut notes = vec![format!("origin preserved: {}", f.preserves_origin())];
    if exterior > 0 {
        notes.push(format!("{exterior} images not classified boundary"));
    }
    Ok(VerificationReport::new("properness", vec![f.source(), f.target()], n_samples, seed, worst, tol, notes))
}

// ---------------------------------------------------------------------------
// Factorization

/// One fitted coefficient of `F(Z, W̄)`: exponents of the source variables of
/// `Z` and of the conjugated variables of `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitCoefficient {
    pub z: Vec<u32>,
    pub wbar: Vec<u32>,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTerm {
    pub z: BTreeMap<String, u32>,
    pub wbar: BTreeMap<String, u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    pub source: DomainSpec,
    pub degree_bound: u32,
    pub coefficients: Vec<FitCoefficient>,
}

impl FactorFit {
    pub fn coefficient(&self, z: &[u32], wbar: &[u32]) -> C64 {
        self.coefficients
            .iter()
            .find(|c| c.z == z && c.wbar == wbar)
            .map_or(ZERO, |c| c.value)
    }

    /// Coefficients of magnitude above `threshold`, with named variables.
    pub fn terms(&self, threshold: f64) -> Vec<FitTerm> {
        let named = |e: &[u32]| -> BTreeMap<String, u32> {
            e.iter()
                .enumerate()
                .filter(|(_, &p)| p > 0)
                .map(|(k, &p)| (variable_name(self.source, k), p))
                .collect()
        };
        self.coefficients
            .iter()
            .filter(|c| c.value.norm() > threshold)
            .map(|c| FitTerm { z: named(&c.z), wbar: named(&c.wbar), re: c.value.re, im: c.value.im })
            .collect()
    }
}

/// Magnitude above which fitted coefficients are reported.
pub const FIT_REPORT_THRESHOLD: f64 = 1e-9;

fn basis_row(basis: &[(Monomial, Monomial)], x: &[C64], y: &[C64], scale: C64) -> Vec<C64> {
    let powers = |v: &[C64], top: u32| -> Vec<Vec<C64>> {
        v.iter()
            .map(|&a| {
                let mut p = vec![ONE];
                for k in 0..top as usize {
                    p.push(p[k] * a);
                }
                p
            })
            .collect()
    };
    let top = basis.iter().map(|(a, b)| a.degree().max(b.degree())).max().unwrap_or(0);
    let (px, py) = (powers(x, top), powers(y, top));
    basis.iter().map(|(a, b)| scale * a.eval(&px) * b.eval(&py)).collect()
}

/// Least squares by Householder QR after column equilibration.
fn least_squares(mut a: DMatrix<C64>, b: DVector<C64>) -> Result<DVector<C64>> {
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    if norms.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::Configuration("fit basis has a column that vanishes on every sample".into()));
    }
    for (mut col, &n) in a.column_iter_mut().zip(&norms) {
        col.unscale_mut(n);
    }
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    let diag: Vec<f64> = r.diagonal().iter().map(|v| v.norm()).collect();
    let top = diag.iter().copied().fold(0.0, f64::max);
    let low = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(low > 1e-11 * top) {
        return Err(Error::Configuration(format!("rank-deficient fit (pivot ratio {:.1e}); add samples", low / top)));
    }
    let rhs = q.adjoint() * b;
    let mut x = r
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::Configuration("rank-deficient fit".into()))?;
    for (v, &n) in x.iter_mut().zip(&norms) {
        *v /= n;
    }
    Ok(x)
}

/// Fits `F` in `S₂(f(Z), f(W)) = S₁(Z, W)·F(Z, W̄)` by least squares over
/// polynomials of total degree at most `degree_bound` in the variables of `Z`
/// and the conjugated variables of `W`, then validates the fit on a held-out
/// set. `grid_size` fit pairs have `|S₁| ≥ 0.1`; held-out pairs (a third as
/// many) have `|S₁| ≥ 0.01`. Type II norms enter squared.
pub fn check_factorization(
    f: &PolyMap,
    degree_bound: u32,
    grid_size: usize,
    tol: f64,
    seed: u64,
) -> Result<(VerificationReport, FactorFit)> {
    require_tol(tol)?;
    let nv = f.nvars();
    let mut basis = Vec::new();
    for d in 0..=degree_bound {
        for m in Monomial::all_of_degree(2 * nv, d) {
            let (a, b) = m.exponents().split_at(nv);
            basis.push((Monomial::from_exponents(a.to_vec()), Monomial::from_exponents(b.to_vec())));
        }
    }
    if grid_size < basis.len() {
        return Err(Error::Configuration(format!(
            "grid of {grid_size} pairs cannot determine {} coefficients",
            basis.len()
        )));
    }
    let held_out = (grid_size / 3).max(1);
    let rows = per_sample(grid_size + held_out, |i| {
        let threshold = if i < grid_size { 0.1 } else { 0.01 };
        let mut rng = stream(seed, "factorization", i as u64);
        let (z, w, s1) = interior_pair(f.source(), threshold, &mut rng)?;
        let s2 = polarized_norm(&f.eval(&z)?, &f.eval(&w)?)?.value;
        let y: Vec<C64> = point_variables(&w).iter().map(|v| v.conj()).collect();
        Ok((basis_row(&basis, &point_variables(&z), &y, s1), s2))
    })?;
    let a = DMatrix::from_fn(grid_size, basis.len(), |i, j| rows[i].0[j]);
    let b = DVector::from_fn(grid_size, |i, _| rows[i].1);
    let x = least_squares(a, b)?;
    let residual = max_of(rows.iter().map(|(row, s2)| {
        let fit: C64 = row.iter().zip(x.iter()).map(|(r, c)| r * c).sum();
        (fit - s2).norm() / s2.norm().max(1.0)
    }));
    let fit = FactorFit {
        source: f.source(),
        degree_bound,
        coefficients: basis
            .iter()
            .zip(x.iter())
            .map(|((a, b), v)| FitCoefficient { z: a.exponents().to_vec(), wbar: b.exponents().to_vec(), value: *v })
            .collect(),
    };
    let mut notes = vec![
        format!("{} unknowns, {grid_size} fit pairs, {held_out} held-out pairs", basis.len()),
        format!("{} coefficients above {:.0e}", fit.terms(FIT_REPORT_THRESHOLD).len(), FIT_REPORT_THRESHOLD),
    ];
    if f.source().kind() == DomainKind::II || f.target().kind() == DomainKind::II {
        notes.push("type II norms enter squared".into());
    }
    let report = VerificationReport::new(
        "factorization",
        vec![f.source(), f.target()],
        grid_size + held_out,
        seed,
        residual,
        tol,
        notes,
    );
    Ok((report, fit))
}

// ---------------------------------------------------------------------------
// Automorphy factor

/// Transformation rule of the polarized norm under random automorphisms.
///
/// Types I–III verify `S(gZ, gW)·det(A+ZC)·conj det(A+WC) = S(Z, W)` (type II
/// with the squared norm). Type IV tests `S(gZ, gW)·λ(Z)·conj λ(W) = c·S(Z, W)`
/// for each candidate constant and passes only if exactly one candidate fits.
/// Residuals are relative to `max(1, |lhs|, |S(Z, W)|)`.
pub fn check_fu_lemma(spec: DomainSpec, n_samples: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    require_samples(n_samples)?;
    require_tol(tol)?;
    let tag = format!("fu:{spec}");
    let samples = per_sample(n_samples, |i| {
        let mut rng = stream(seed, &tag, i as u64);
        let e = random_automorphism(spec, i, &mut rng)?;
        let point = |rng: &mut Stream| {
            let region = if rng.random_bool(0.25) { Region::Boundary } else { Region::Interior };
            sample_point_with(spec, region, rng)
        };
        let z = point(&mut rng)?;
        let w = point(&mut rng)?;
        let s = polarized_norm(&z, &w)?.value;
        let s_image = polarized_norm(&act(&e, &z)?, &act(&e, &w)?)?.value;
        let den = match spec.kind() {
            DomainKind::IV => lambda_iv(&e, &z)? * lambda_iv(&e, &w)?.conj(),
            _ => {
                let (a, _, c, _) = e.blocks();
                det(&(&a + &(z.value() * &c)))? * det(&(&a + &(w.value() * &c)))?.conj()
            }
        };
        Ok((s_image * den, s))
    })?;
    let relative = |c: f64| {
        max_of(samples.iter().map(|(lhs, s)| (lhs - s * c).norm() / 1f64.max(lhs.norm()).max(s.norm())))
    };
    let specs = vec![spec];
    if spec.kind() != DomainKind::IV {
        let mut notes = Vec::new();
        if spec.kind() == DomainKind::II {
            notes.push("squared identity: polarized det(I - ZW*) on both sides".into());
        }
        return Ok(VerificationReport::new("fu", specs, n_samples, seed, relative(1.0), tol, notes));
    }
    let fits: Vec<(f64, f64)> = crate::autgroups::TYPE_IV_CANDIDATES.iter().map(|&c| (c, relative(c))).collect();
    let ratios: Vec<f64> = samples.iter().filter(|(_, s)| s.norm() >= 0.1).map(|(lhs, s)| (lhs / s).re).collect();
    let mut notes: Vec<String> = fits.iter().map(|(c, r)| format!("candidate c = {c}: max residual {}", sci(*r))).collect();
    if !ratios.is_empty() {
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = max_of(ratios.iter().map(|r| (r - mean).abs()));
        notes.push(format!("empirical constant {mean:.9} (spread {})", sci(spread)));
    }
    let fitting: Vec<&(f64, f64)> = fits.iter().filter(|(_, r)| *r <= tol).collect();
    let max_residual = match fitting.as_slice() {
        [(c, r)] => {
            notes.push(format!("adjudicated constant c = {c}"));
            *r
        }
        [] => {
            notes.push("no candidate constant fits".into());
            fits.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min)
        }
        _ => {
            notes.push("more than one candidate constant fits".into());
            f64::INFINITY
        }
    };
    Ok(VerificationReport::new("fu", specs, n_samples, seed, max_residual, tol, notes))
}

/// `Pf(A)² = det(A)` on random antisymmetric matrices of sizes 2 to 9.
pub fn check_pfaffian(n_samples: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    require_samples(n_samples)?;
    require_tol(tol)?;
    let residuals = per_sample(n_samples, |i| {
        let mut rng = stream(seed, "pfaffian", i as u64);
        let n = 2 + i % 8;
        let g = linalg::gaussian_matrix(n, n, &mut rng);
        let a = &g - &g.transpose();
        let pf = pfaffian(&a)?;
        let d = det(&a)?;
        Ok((pf * pf - d).norm() / d.norm().max(1.0))
    })?;
    Ok(VerificationReport::new("pfaffian", Vec::new(), n_samples, seed, max_of(residuals), tol, Vec::new()))
}

/// Samples the sphere `ZZ* = 1` of a type IV domain, including the points
/// `e^{iθ}x` with `x` real, and records where `S^IV ≥ 0` there.
///
/// The residual is `max(0, S^IV)` over the samples.
pub fn check_iv_sphere(spec: DomainSpec, n_samples: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    require_samples(n_samples)?;
    require_tol(tol)?;
    let DomainSpec::TypeIV { n } = spec else {
        return Err(Error::Parameter(format!("{spec} is not a type IV domain")));
    };
    let values = per_sample(n_samples, |i| {
        let mut rng = stream(seed, "iv-sphere", i as u64);
        let mut v = linalg::gaussian_matrix(1, n, &mut rng);
        if i % 4 == 0 {
            let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            v = v.map(|x| phase * x.re);
        }
        let v = v.scale(C64::new(1.0 / v.frobenius_norm(), 0.0));
        norm_polynomial(&Point::new(spec, v)?)
    })?;
    let nonnegative = values.iter().filter(|s| **s >= -1e-12).count();
    let notes = vec![
        format!("{nonnegative} of {n_samples} points with ZZ* = 1 have S >= 0 within 1e-12"),
        format!("largest S on the sphere {}", sci(max_of(values.iter().copied()).max(f64::MIN))),
    ];
    let residual = values.iter().copied().fold(0.0, f64::max);
    Ok(VerificationReport::new("iv-sphere", vec![spec], n_samples, seed, residual, tol, notes))
}

// ---------------------------------------------------------------------------
// Composition rule

/// `F_{f∘g}(Z, W) = F_g(Z, W)·F_f(g(Z), g(W))` with each factor computed as a
/// ratio of polarized norms; `f∘g` is formed symbolically.
pub fn check_composition_rule(
    f: &PolyMap,
    g: &PolyMap,
    n_samples: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    require_samples(n_samples)?;
    require_tol(tol)?;
    let h = compose(f, g)?;
    let residuals = per_sample(n_samples, |i| {
        let mut rng = stream(seed, "composition", i as u64);
        for _ in 0..RETRIES {
            let (z, w, s1) = interior_pair(g.source(), 0.1, &mut rng)?;
            let (gz, gw) = (g.eval(&z)?, g.eval(&w)?);
            let s2 = polarized_norm(&gz, &gw)?.value;
            if s2.norm() < 0.01 {
                continue;
            }
            let s3 = polarized_norm(&f.eval(&gz)?, &f.eval(&gw)?)?.value;
            let s3h = polarized_norm(&h.eval(&z)?, &h.eval(&w)?)?.value;
            let fh = s3h / s1;
            let product = (s2 / s1) * (s3 / s2);
            return Ok((fh - product).norm() / fh.norm().max(1.0));
        }
        Err(Error::Sampling("no pair with |S2(g(Z), g(W))| >= 0.01".into()))
    })?;
    Ok(VerificationReport::new(
        "composition",
        vec![g.source(), g.target(), f.target()],
        n_samples,
        seed,
        max_of(residuals),
        tol,
        Vec::new(),
    ))
}

// ---------------------------------------------------------------------------
// Coefficient lemma

/// Which coefficient the lemma predicts for entry `(i, j)`.
fn lemma_shape(spec: DomainSpec, i: usize, j: usize) -> Result<(usize, Vec<usize>, Vec<usize>, f64)> {
    let bad = || Error::Parameter(format!("index ({}, {}) is not an independent entry of {spec}", i + 1, j + 1));
    match spec {
        DomainSpec::TypeI { r, s } if i < r && j < s => Ok((2, vec![i], vec![j], -1.0)),
        DomainSpec::TypeII { n } if i < j && j < n => Ok((4, vec![i, j], vec![i, j], 1.0)),
        DomainSpec::TypeIII { n } if i < j && j < n => Ok((4, vec![i, j], vec![i, j], 1.0)),
        DomainSpec::TypeIII { n } if i == j && i < n => Ok((2, vec![i], vec![i], -1.0)),
        DomainSpec::TypeIV { .. } => Err(Error::Parameter("the coefficient lemma concerns types I–III".into())),
        _ => Err(bad()),
    }
}

fn minor_norm(z: &ComplexMatrix, rows: &[usize], cols: &[usize]) -> Result<f64> {
    let m = z.remove(rows, cols);
    if m.nrows() == 0 {
        return Ok(1.0);
    }
    Ok(det(&(&ComplexMatrix::identity(m.nrows()) - &(&m * &m.adjoint())))?.re)
}

/// Leading coefficient of `t ↦ det(I − Z(t)Z(t)*)` where `Z(t)` moves
/// `Re z_ij` (and its mirror) by `t`, fitted on Chebyshev nodes.
fn leading_coefficient(spec: DomainSpec, z: &ComplexMatrix, i: usize, j: usize, degree: usize) -> Result<(f64, f64)> {
    let mut e = ComplexMatrix::zeros(z.nrows(), z.ncols());
    e[(i, j)] = ONE;
    match spec.kind() {
        DomainKind::II => e[(j, i)] = -ONE,
        DomainKind::III => e[(j, i)] = ONE,
        _ => {}
    }
    let nodes = 3 * (degree + 1);
    let ts: Vec<f64> = (0..nodes)
        .map(|m| (std::f64::consts::PI * (m as f64 + 0.5) / nodes as f64).cos())
        .collect();
    let values = ts
        .iter()
        .map(|&t| {
            let zt = z + &e.scale(C64::new(t, 0.0));
            Ok(det(&(&ComplexMatrix::identity(z.nrows()) - &(&zt * &zt.adjoint())))?.re)
        })
        .collect::<Result<Vec<f64>>>()?;
    let v = DMatrix::from_fn(nodes, degree + 1, |r, c| ts[r].powi(c as i32));
    let b = DVector::from_vec(values);
    let coef = v
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    let fit_residual = (&v * &coef - &b).amax();
    Ok((coef[degree], fit_residual))
}

/// Leading coefficient in `Re z_ij` of the norm polynomial (type II: the
/// squared generic norm) against the minor determinant, relative error,
/// over `n_bases` interior base points. Indices are zero-based.
pub fn check_coefficient_lemma(
    spec: DomainSpec,
    i: usize,
    j: usize,
    n_bases: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let mut report = coefficient_lemma_entries(spec, &[(i, j)], n_bases, tol, seed)?;
    report.check_id = format!("coeff({},{})", i + 1, j + 1);
    Ok(report)
}

/// [`check_coefficient_lemma`] over every independent entry of `spec`.
pub fn check_coefficient_lemma_all(spec: DomainSpec, n_bases: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    let entries = crate::polymaps::variables(spec);
    coefficient_lemma_entries(spec, &entries, n_bases, tol, seed)
}

fn coefficient_lemma_entries(
    spec: DomainSpec,
    entries: &[(usize, usize)],
    n_bases: usize,
    tol: f64,
    seed: u64,
) -> Result<VerificationReport> {
    require_samples(n_bases)?;
    require_tol(tol)?;
    let shapes = entries
        .iter()
        .map(|&(i, j)| lemma_shape(spec, i, j))
        .collect::<Result<Vec<_>>>()?;
    let tag = format!("coeff:{spec}");
    let total = entries.len() * n_bases;
    let results = per_sample(total, |k| {
        let (i, j) = entries[k / n_bases];
        let (degree, rows, cols, sign) = &shapes[k / n_bases];
        let mut rng = stream(seed, &tag, k as u64);
        for attempt in 0..RETRIES {
            let z = sample_point_with(spec, Region::Interior, &mut rng)?;
            let oracle = sign * minor_norm(z.value(), rows, cols)?;
            if oracle.abs() < 1e-3 {
                continue;
            }
            let (lead, fit) = leading_coefficient(spec, z.value(), i, j, *degree)?;
            return Ok(((lead - oracle).abs() / oracle.abs(), fit, attempt));
        }
        Err(Error::Sampling("every base point had a degenerate minor".into()))
    })?;
    let resampled: usize = results.iter().map(|r| r.2).sum();
    let notes = vec![
        format!("{} entries x {n_bases} bases", entries.len()),
        format!("largest polynomial fit residual {}", sci(max_of(results.iter().map(|r| r.1)))),
        format!("{resampled} degenerate bases resampled"),
    ];
    Ok(VerificationReport::new("coeff", vec![spec], total, seed, max_of(results.iter().map(|r| r.0)), tol, notes))
}

// ---------------------------------------------------------------------------
// Invariants

/// Spectra of `f` and of `n_trials` random isotropy conjugates agree.
pub fn check_isotropy_consistency(f: &PolyMap, n_trials: usize, tol: f64, seed: u64) -> Result<VerificationReport> {
    require_samples(n_trials)?;
    require_tol(tol)?;
    let base = invariant_spectrum(f)?;
    let results = per_sample(n_trials, |i| {
        let mut rng = stream(seed, "isotropy", i as u64);
        let pre = random_isotropy_params(f.source(), &mut rng);
        let post = random_isotropy_params(f.target(), &mut rng);
        let g = conjugate(f, &pre, &post)?;
        let d = compare_spectra(&base, &invariant_spectrum(&g)?, tol)?;
        Ok(if d.verdict == Verdict::IndistinguishableByInvariants { d.max_distance } else { f64::INFINITY })
    })?;
    Ok(VerificationReport::new(
        "isotropy",
        vec![f.source(), f.target()],
        n_trials,
        seed,
        max_of(results),
        tol,
        Vec::new(),
    ))
}

/// Grid `lo, lo + step, …, hi`; the last point is snapped to `hi`.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || hi < lo || !(step > 0.0) {
        return Err(Error::Parameter(format!("invalid grid {lo}:{hi}:{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=count).map(|k| lo + k as f64 * step).collect();
    if let Some(last) = out.last_mut() {
        if (*last - hi).abs() < 1e-9 * step.max(1.0) {
            *last = hi;
        }
    }
    Ok(out)
}

fn family_id(family: CatalogId) -> Result<CatalogId> {
    if family.is_family() {
        Ok(family)
    } else {
        Err(Error::Parameter(format!("`{family}` is not a one-parameter family")))
    }
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Parameter("empty parameter grid".into()));
    }
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::Parameter("grid must lie in [0, 1]".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("grid must be strictly increasing".into()));
    }
    Ok(())
}

pub fn family_member(family: CatalogId, t: f64, dims: &[usize]) -> Result<PolyMap> {
    catalog(family_id(family)?, &CatalogParams { t: Some(t), theta: None, dims: dims.to_vec() })
}

fn describe_entry(f: &PolyMap, p: &Polynomial) -> String {
    let mut parts = Vec::new();
    for (m, c) in p.terms() {
        let mut factors = Vec::new();
        for (k, &e) in m.exponents().iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(variable_name(f.source(), k)),
                _ => factors.push(format!("{}^{e}", variable_name(f.source(), k))),
            }
        }
        let mono = if factors.is_empty() { "1".into() } else { factors.join("*") };
        parts.push(format!("({:.6}{:+.6}i)*{mono}", c.re, c.im));
    }
    parts.join(" + ")
}

/// Entries where two maps differ by more than `1e-12`, with the difference.
pub fn discrepancies(f: &PolyMap, g: &PolyMap) -> Result<Vec<String>> {
    f.max_deviation(g)?;
    let (rows, cols) = f.target().point_shape();
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let diff = f.entry(i, j).add(&g.entry(i, j).scale(C64::new(-1.0, 0.0)));
            if diff.terms().any(|(_, c)| c.norm() > 1e-12) {
                out.push(format!("({},{}): {}", i + 1, j + 1, describe_entry(f, &diff)));
            }
        }
    }
    Ok(out)
}

fn spectrum_note(label: &str, f: &PolyMap) -> Result<String> {
    let s = invariant_spectrum(f)?;
    let body: Vec<String> = s
        .degrees
        .iter()
        .map(|(d, v)| format!("{d}: [{}]", v.iter().map(|x| format!("{x:.9}")).collect::<Vec<_>>().join(", ")))
        .collect();
    Ok(format!("{label} spectra {{{}}}", body.join("; ")))
}

/// Adjacent members of a family differ coefficient-wise by at most
/// `tol·√Δt`. For `f_t`, endpoints are compared with the padded `g-sec4` at
/// `t = 0` and with `f-sec4` (rows and columns 1, 2, 4) at `t = 1`; the
/// comparisons are reported in the notes, not judged.
pub fn check_family_continuity(
    family: CatalogId,
    t_grid: &[f64],
    dims: &[usize],
    tol: f64,
) -> Result<VerificationReport> {
    require_tol(tol)?;
    validate_grid(t_grid)?;
    let maps = t_grid.iter().map(|&t| family_member(family, t, dims)).collect::<Result<Vec<_>>>()?;
    let mut residual = 0.0f64;
    for (w, pair) in t_grid.windows(2).zip(maps.windows(2)) {
        residual = residual.max(pair[0].max_deviation(&pair[1])? / (w[1] - w[0]).sqrt());
    }
    let mut notes = Vec::new();
    if matches!(maps[0].target().kind(), DomainKind::II | DomainKind::III) {
        notes.push(format!("target symmetry validated at {} grid points", maps.len()));
    }
    if family == CatalogId::FamilyF {
        let four = DomainSpec::type_i(4, 4)?;
        for (t, f) in t_grid.iter().zip(&maps) {
            if *t == 0.0 {
                let g = catalog(CatalogId::GSec4, &CatalogParams::default())?.pad(four)?;
                notes.push(format!("t=0 vs padded g-sec4: max coefficient deviation {}", sci(f.max_deviation(&g)?)));
            }
            if *t == 1.0 {
                let e = catalog(CatalogId::FSec4, &CatalogParams::default())?.embed(four, &[0, 1, 3], &[0, 1, 3])?;
                let diffs = discrepancies(f, &e)?;
                notes.push(format!("t=1 vs embedded f-sec4: {} discrepant entries", diffs.len()));
                notes.extend(diffs.into_iter().map(|d| format!("t=1 discrepancy {d}")));
                notes.push(spectrum_note("t=1", f)?);
                notes.push(spectrum_note("embedded f-sec4", &e)?);
            }
        }
    }
    let specs = vec![maps[0].source(), maps[0].target()];
    Ok(VerificationReport::new(format!("continuity:{family}"), specs, t_grid.len(), 0, residual, tol, notes))
}

/// Pairwise spectral distances over a parameter grid (largest per-degree
/// zero-padded sup-distance).
pub fn sweep(family: CatalogId, t_grid: &[f64], dims: &[usize]) -> Result<Vec<Vec<f64>>> {
    validate_grid(t_grid)?;
    let spectra = per_sample(t_grid.len(), |k| invariant_spectrum(&family_member(family, t_grid[k], dims)?))?;
    Ok(spectra.iter().map(|a| spectra.iter().map(|b| spectral_distance(a, b)).collect()).collect())
}

/// Every pair of distinct grid members is declared inequivalent at `tol`
/// with degree-1 spectral distance at least `min_gap`. The residual is the shortfall
/// `max(0, min_gap − smallest distance)`, so the tolerance is zero.
pub fn check_family_separation(
    family: CatalogId,
    t_grid: &[f64],
    dims: &[usize],
    min_gap: f64,
    tol: f64,
) -> Result<VerificationReport> {
    validate_grid(t_grid)?;
    let maps = t_grid.iter().map(|&t| family_member(family, t, dims)).collect::<Result<Vec<_>>>()?;
    let mut smallest = f64::INFINITY;
    let mut indistinguishable = 0usize;
    for a in 0..maps.len() {
        for b in a + 1..maps.len() {
            let d = distinguish(&maps[a], &maps[b], tol)?;
            if d.verdict != Verdict::Inequivalent {
                indistinguishable += 1;
            }
            let linear = d.distances.iter().find(|x| x.degree == 1).map_or(0.0, |x| x.distance);
            smallest = smallest.min(linear);
        }
    }
    let mut residual = if smallest.is_finite() { (min_gap - smallest).max(0.0) } else { 0.0 };
    if indistinguishable > 0 {
        residual = f64::INFINITY;
    }
    let notes = vec![
        format!("smallest off-diagonal degree-1 distance {smallest:.9}, required {min_gap}"),
        format!("{indistinguishable} pairs indistinguishable at {}", sci(tol)),
    ];
    let specs = vec![maps[0].source(), maps[0].target()];
    Ok(VerificationReport::new(format!("separation:{family}"), specs, t_grid.len(), 0, residual, 0.0, notes))
}

/// Degree-1 spectrum of `f_t` against `{√(2t/(2−t)), √t, √t, 0}`.
pub fn check_ft_linear_spectrum(t_grid: &[f64], tol: f64) -> Result<VerificationReport> {
    require_tol(tol)?;
    validate_grid(t_grid)?;
    let mut residual = 0.0f64;
    for &t in t_grid {
        let f = family_member(CatalogId::FamilyF, t, &[])?;
        let linear = homogeneous_parts(&f).into_iter().find(|(d, _)| *d == 1).map(|(_, p)| p);
        let got = match linear {
            Some(p) => invariant_spectrum(&p)?.degree(1).to_vec(),
            None => vec![0.0; 4],
        };
        let expected = [(2.0 * t / (2.0 - t)).sqrt(), t.sqrt(), t.sqrt(), 0.0];
        if got.len() != expected.len() {
            residual = f64::INFINITY;
            continue;
        }
        residual = residual.max(got.iter().zip(expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let specs = vec![DomainSpec::type_i(2, 2)?, DomainSpec::type_i(4, 4)?];
    Ok(VerificationReport::new("spectrum:f_t", specs, t_grid.len(), 0, residual, tol, Vec::new()))
}

// ---------------------------------------------------------------------------
// Suite

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub reports: Vec<VerificationReport>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn from_reports(reports: Vec<VerificationReport>) -> Self {
        let passed = reports.iter().filter(|r| r.pass).count();
        let summary = Summary { total: reports.len(), passed, failed: reports.len() - passed };
        Self { reports, summary }
    }
}

fn spec(text: &str) -> DomainSpec {
    text.parse().expect("suite specs are valid")
}

fn map(id: CatalogId, t: Option<f64>, theta: Option<f64>, dims: &[usize]) -> Result<PolyMap> {
    catalog(id, &CatalogParams { t, theta, dims: dims.to_vec() })
}

/// Catalog maps at the dimensions exercised by the suite.
pub fn desk_maps() -> Result<Vec<(String, PolyMap)>> {
    use CatalogId::*;
    let quarter = std::f64::consts::FRAC_PI_4;
    let mut out = vec![
        ("standard I:2,2->I:3,3".to_string(), map(Standard, None, None, &[2, 2, 3, 3])?),
        ("f-sec4".to_string(), map(FSec4, None, None, &[])?),
        ("g-sec4".to_string(), map(GSec4, None, None, &[])?),
    ];
    for n in 2..=4 {
        out.push((format!("whitney-ball n={n}"), map(WhitneyBall, None, None, &[n])?));
        out.push((format!("dangelo n={n} theta=pi/4"), map(Dangelo, None, Some(quarter), &[n])?));
    }
    for dims in [[2, 2], [2, 3], [3, 3]] {
        out.push((format!("gen-whitney {dims:?}"), map(GenWhitney, None, None, &dims)?));
        out.push((format!("G_t {dims:?} t=0.5"), map(FamilyBigG, Some(0.5), None, &dims)?));
    }
    for t in [0.0, 0.3, 0.7, 1.0] {
        out.push((format!("f_t t={t}"), map(FamilyF, Some(t), None, &[])?));
        out.push((format!("g_t t={t}"), map(FamilyG, Some(t), None, &[])?));
        out.push((format!("h_t t={t}"), map(FamilyH, Some(t), None, &[])?));
    }
    Ok(out)
}

fn labelled(mut r: VerificationReport, label: &str) -> VerificationReport {
    r.check_id = format!("{}:{label}", r.check_id);
    r
}

fn guarded(
    id: &str,
    specs: Vec<DomainSpec>,
    seed: u64,
    tol: f64,
    run: impl FnOnce() -> Result<VerificationReport>,
) -> VerificationReport {
    run().unwrap_or_else(|e| VerificationReport::failed(id, specs, seed, tol, &e))
}

/// Pairs `(f, g)` used by the composition check.
pub fn composition_pairs() -> Result<Vec<(String, PolyMap, PolyMap)>> {
    use CatalogId::*;
    Ok(vec![
        (
            "standard(1,3->1,5) o whitney-ball(2)".into(),
            map(Standard, None, None, &[1, 3, 1, 5])?,
            map(WhitneyBall, None, None, &[2])?,
        ),
        (
            "gen-whitney(3,3) o f-sec4".into(),
            map(GenWhitney, None, None, &[3, 3])?,
            map(FSec4, None, None, &[])?,
        ),
        (
            "f-sec4 o standard(1,2->2,2)".into(),
            map(FSec4, None, None, &[])?,
            map(Standard, None, None, &[1, 2, 2, 2])?,
        ),
    ])
}

/// Full deterministic suite.
pub fn run_suite(seed: u64) -> SuiteReport {
    let mut reports = Vec::new();
    for text in ["I:2,2", "I:2,3", "III:2", "III:3", "II:3", "II:4", "II:5", "IV:3", "IV:4"] {
        let s = spec(text);
        reports.push(guarded("fu", vec![s], seed, 1e-9, || check_fu_lemma(s, 200, 1e-9, seed)));
    }
    reports.push(guarded("pfaffian", Vec::new(), seed, 1e-10, || check_pfaffian(100, 1e-10, seed)));
    for text in ["IV:3", "IV:4"] {
        let s = spec(text);
        reports.push(guarded("iv-sphere", vec![s], seed, 1e-12, || check_iv_sphere(s, 200, 1e-12, seed)));
    }
    for text in ["I:2,2", "I:2,3", "I:3,3", "II:4", "II:5", "III:2", "III:3"] {
        let s = spec(text);
        reports.push(guarded("coeff", vec![s], seed, 1e-6, || check_coefficient_lemma_all(s, 20, 1e-6, seed)));
    }
    match composition_pairs() {
        Ok(pairs) => {
            for (label, f, g) in pairs {
                let specs = vec![g.source(), f.target()];
                reports.push(guarded("composition", specs, seed, 1e-8, || {
                    check_composition_rule(&f, &g, 100, 1e-8, seed).map(|r| labelled(r, &label))
                }));
            }
        }
        Err(e) => reports.push(VerificationReport::failed("composition", Vec::new(), seed, 1e-8, &e)),
    }
    match desk_maps() {
        Ok(maps) => {
            for (label, f) in maps {
                let specs = vec![f.source(), f.target()];
                reports.push(guarded("properness", specs, seed, 1e-7, || {
                    check_properness(&f, 500, 1e-7, seed).map(|r| labelled(r, &label))
                }));
            }
        }
        Err(e) => reports.push(VerificationReport::failed("properness", Vec::new(), seed, 1e-7, &e)),
    }
    let factorizations: [(&str, CatalogId, &[usize], u32, f64); 3] = [
        ("whitney-ball(2)", CatalogId::WhitneyBall, &[2], 2, 1e-8),
        ("standard(2,2->3,3)", CatalogId::Standard, &[2, 2, 3, 3], 2, 1e-8),
        ("f-sec4", CatalogId::FSec4, &[], 4, 1e-7),
    ];
    for (label, id, dims, degree, tol) in factorizations {
        reports.push(guarded("factorization", Vec::new(), seed, tol, || {
            let f = map(id, None, None, dims)?;
            let unknowns = Monomial::all_of_degree(2 * f.nvars() + 1, degree).len();
            check_factorization(&f, degree, 3 * unknowns, tol, seed).map(|(r, _)| labelled(r, label))
        }));
    }
    let isotropy_maps: [(&str, CatalogId, Option<f64>, &[usize]); 3] = [
        ("f_t t=0.3", CatalogId::FamilyF, Some(0.3), &[]),
        ("gen-whitney [2, 2]", CatalogId::GenWhitney, None, &[2, 2]),
        ("h_t t=0.5", CatalogId::FamilyH, Some(0.5), &[]),
    ];
    for (label, id, t, dims) in isotropy_maps {
        reports.push(guarded("isotropy", Vec::new(), seed, 1e-10, || {
            check_isotropy_consistency(&map(id, t, None, dims)?, 100, 1e-10, seed).map(|r| labelled(r, label))
        }));
    }
    let fine = grid(0.0, 1.0, 0.01).expect("static grid");
    let coarse = grid(0.0, 1.0, 0.1).expect("static grid");
    let families: [(CatalogId, &[usize]); 4] = [
        (CatalogId::FamilyF, &[]),
        (CatalogId::FamilyG, &[]),
        (CatalogId::FamilyBigG, &[2, 2]),
        (CatalogId::FamilyH, &[]),
    ];
    for (family, dims) in families {
        reports.push(guarded("continuity", Vec::new(), 0, CONTINUITY_TOL, || {
            check_family_continuity(family, &fine, dims, CONTINUITY_TOL)
        }));
    }
    for (family, dims) in families {
        reports.push(guarded("separation", Vec::new(), 0, 0.0, || {
            check_family_separation(family, &coarse, dims, SEPARATION_GAP, crate::invariants::DEFAULT_TOL)
        }));
    }
    reports.push(guarded("spectrum:f_t", Vec::new(), 0, 1e-12, || check_ft_linear_spectrum(&coarse, 1e-12)));
    SuiteReport::from_reports(reports)
}

/// Default Hölder constant for [`check_family_continuity`].
pub const CONTINUITY_TOL: f64 = 4.0;

/// Required degree-1 gap on the coarse `t` grid.
pub const SEPARATION_GAP: f64 = 0.015;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_pass_matches_residual() {
        let r = VerificationReport::new("x", Vec::new(), 1, 0, 1e-9, 1e-9, Vec::new());
        assert!(r.pass);
        let r = VerificationReport::new("x", Vec::new(), 1, 0, f64::NAN, 1e-9, Vec::new());
        assert!(!r.pass);
    }

    #[test]
    fn grid_endpoints() {
        let g = grid(0.0, 1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 1.0);
        assert_eq!(grid(0.5, 0.5, 0.1).unwrap(), vec![0.5]);
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn fu_type_i_passes() {
        let r = check_fu_lemma(spec("I:2,2"), 60, 1e-9, 42).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn fu_reports_are_deterministic() {
        let a = check_fu_lemma(spec("III:2"), 30, 1e-9, 7).unwrap();
        let b = check_fu_lemma(spec("III:2"), 30, 1e-9, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn type_iv_fu_names_candidates() {
        let r = check_fu_lemma(spec("IV:3"), 40, 1e-9, 42).unwrap();
        assert!(r.notes.iter().any(|n| n.starts_with("candidate c = 1")));
        assert!(r.notes.iter().any(|n| n.starts_with("empirical constant")));
    }

    #[test]
    fn coefficient_lemma_trivial_disc() {
        let r = check_coefficient_lemma(spec("I:1,1"), 0, 0, 5, 1e-9, 1).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(matches!(check_coefficient_lemma(spec("II:3"), 1, 1, 5, 1e-6, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn properness_of_standard_embedding() {
        let f = map(CatalogId::Standard, None, None, &[2, 2, 3, 3]).unwrap();
        let r = check_properness(&f, 50, 1e-12, 3).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn non_proper_map_fails_properness() {
        let s = spec("I:1,2");
        let half = |k| Polynomial::variable(2, k).scale(C64::new(0.5, 0.0));
        let f = PolyMap::new(s, s, vec![half(0), half(1)]).unwrap();
        assert!(!check_properness(&f, 20, 1e-7, 3).unwrap().pass);
    }

    #[test]
    fn whitney_factor() {
        let f = map(CatalogId::WhitneyBall, None, None, &[2]).unwrap();
        let (r, fit) = check_factorization(&f, 2, 60, 1e-8, 5).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((fit.coefficient(&[0, 0], &[0, 0]) - ONE).norm() < 1e-8);
        assert!((fit.coefficient(&[0, 1], &[0, 1]) - ONE).norm() < 1e-8);
        assert_eq!(fit.terms(FIT_REPORT_THRESHOLD).len(), 2);
    }

    #[test]
    fn factorization_rejects_small_grid() {
        let f = map(CatalogId::WhitneyBall, None, None, &[2]).unwrap();
        assert!(matches!(check_factorization(&f, 2, 10, 1e-8, 5), Err(Error::Configuration(_))));
    }

    #[test]
    fn f_family_endpoint_discrepancy() {
        let r = check_family_continuity(CatalogId::FamilyF, &[0.0, 0.5, 1.0], &[], CONTINUITY_TOL).unwrap();
        let listed: Vec<&String> = r.notes.iter().filter(|n| n.starts_with("t=1 discrepancy")).collect();
        assert_eq!(listed.len(), 1);
        assert!(listed[0].contains("(3,3)") && listed[0].contains("z22^2"), "{listed:?}");
        assert!(r.notes.iter().any(|n| n.starts_with("t=0 vs padded g-sec4") && n.ends_with("0.000e0")));
    }

    #[test]
    fn sweep_single_point() {
        assert_eq!(sweep(CatalogId::FamilyF, &[0.4], &[]).unwrap(), vec![vec![0.0]]);
        assert!(matches!(sweep(CatalogId::FamilyF, &[], &[]), Err(Error::Parameter(_))));
    }
}
