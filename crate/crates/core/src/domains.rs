//! The classical domains of types I–IV.
//!
//! | kind | points | defining condition |
//! |------|--------|--------------------|
//! | I    | `r x s`, `r ≤ s` | `I − ZZ* > 0` |
//! | II   | `n x n`, `Zᵗ = −Z` | `I − ZZ* > 0` |
//! | III  | `n x n`, `Zᵗ = Z` | `I − ZZ* > 0` |
//! | IV   | row vector of length `n` | `ZZ* < 1`, `1 − 2ZZ* + |ZZᵗ|² > 0` |
//!
//! Specs are written `I:r,s`, `II:n`, `III:n`, `IV:n`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, det, hermitian_spectrum, singular_values, tol_scale, ComplexMatrix, C64, I, ONE};

/// Default classification tolerance.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DomainKind {
    I,
    II,
    III,
    IV,
}

/// One classical domain with its dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainSpec {
    TypeI { r: usize, s: usize },
    TypeII { n: usize },
    TypeIII { n: usize },
    TypeIV { n: usize },
}

impl DomainSpec {
    pub fn type_i(r: usize, s: usize) -> Result<Self> {
        if r == 0 || r > s {
            return Err(Error::Parameter(format!("type I needs 1 <= r <= s, got r={r}, s={s}")));
        }
        Ok(Self::TypeI { r, s })
    }

    pub fn type_ii(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("type II needs n >= 2, got {n}")));
        }
        Ok(Self::TypeII { n })
    }

    pub fn type_iii(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("type III needs n >= 1".into()));
        }
        Ok(Self::TypeIII { n })
    }

    /// `n = 1, 2` are accepted although those domains are reducible.
    pub fn type_iv(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("type IV needs n >= 1".into()));
        }
        Ok(Self::TypeIV { n })
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            Self::TypeI { .. } => DomainKind::I,
            Self::TypeII { .. } => DomainKind::II,
            Self::TypeIII { .. } => DomainKind::III,
            Self::TypeIV { .. } => DomainKind::IV,
        }
    }

    /// Shape of a point matrix.
    pub fn point_shape(&self) -> (usize, usize) {
        match *self {
            Self::TypeI { r, s } => (r, s),
            Self::TypeII { n } | Self::TypeIII { n } => (n, n),
            Self::TypeIV { n } => (1, n),
        }
    }

    /// Size of the square matrices representing automorphisms.
    pub fn group_dim(&self) -> usize {
        match *self {
            Self::TypeI { r, s } => r + s,
            Self::TypeII { n } | Self::TypeIII { n } => 2 * n,
            Self::TypeIV { n } => n + 2,
        }
    }

    /// Row count of the `A` block in the `[[A, B], [C, D]]` split.
    pub fn block_split(&self) -> usize {
        match *self {
            Self::TypeI { r, .. } => r,
            Self::TypeII { n } | Self::TypeIII { n } | Self::TypeIV { n } => n,
        }
    }

    /// True for the two reducible type IV cases, which are flagged in reports.
    pub fn is_reducible(&self) -> bool {
        matches!(self, Self::TypeIV { n } if *n <= 2)
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TypeI { r, s } => write!(f, "I:{r},{s}"),
            Self::TypeII { n } => write!(f, "II:{n}"),
            Self::TypeIII { n } => write!(f, "III:{n}"),
            Self::TypeIV { n } => write!(f, "IV:{n}"),
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed domain spec `{text}` (expected I:r,s | II:n | III:n | IV:n)"));
        let (kind, dims) = text.trim().split_once(':').ok_or_else(bad)?;
        let dims: Vec<usize> = dims
            .split(',')
            .map(|d| d.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (kind.trim(), dims.as_slice()) {
            ("I", [r, s]) => Self::type_i(*r, *s),
            ("II", [n]) => Self::type_ii(*n),
            ("III", [n]) => Self::type_iii(*n),
            ("IV", [n]) => Self::type_iv(*n),
            _ => Err(bad()),
        }
    }
}

impl Serialize for DomainSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DomainSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// A point of (the ambient space of) a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    spec: DomainSpec,
    value: ComplexMatrix,
}

impl Point {
    /// Validates shape and, for types II/III, (anti)symmetry within `1e-12`.
    pub fn new(spec: DomainSpec, value: ComplexMatrix) -> Result<Self> {
        if value.shape() != spec.point_shape() {
            let (r, c) = spec.point_shape();
            return Err(Error::Shape(format!(
                "{spec} points are {r}x{c}, got {}x{}",
                value.nrows(),
                value.ncols()
            )));
        }
        if !value.is_finite() {
            return Err(Error::Numeric("point has non-finite entries".into()));
        }
        let limit = 1e-12 * tol_scale(value.max_abs());
        match spec.kind() {
            DomainKind::II if value.transpose_defect(-1.0) > limit => {
                Err(Error::Shape("type II points must be antisymmetric".into()))
            }
            DomainKind::III if value.transpose_defect(1.0) > limit => {
                Err(Error::Shape("type III points must be symmetric".into()))
            }
            _ => Ok(Self { spec, value }),
        }
    }

    /// Projects onto the (anti)symmetric part after checking the defect is
    /// below `tol`; used for outputs of floating-point group actions.
    pub fn new_projected(spec: DomainSpec, value: ComplexMatrix, tol: f64) -> Result<Self> {
        if value.shape() != spec.point_shape() {
            return Self::new(spec, value);
        }
        let value = match spec.kind() {
            DomainKind::II | DomainKind::III => {
                let sign = if spec.kind() == DomainKind::II { -1.0 } else { 1.0 };
                if value.transpose_defect(sign) > tol * tol_scale(value.max_abs()) {
                    return Err(Error::Shape(format!("{spec} symmetry lost beyond {tol:e}")));
                }
                let t = value.transpose().scale(C64::new(sign, 0.0));
                (&value + &t).scale(C64::new(0.5, 0.0))
            }
            _ => value,
        };
        Self::new(spec, value)
    }

    pub fn origin(spec: DomainSpec) -> Self {
        let (r, c) = spec.point_shape();
        Self { spec, value: ComplexMatrix::zeros(r, c) }
    }

    pub fn spec(&self) -> DomainSpec {
        self.spec
    }

    pub fn value(&self) -> &ComplexMatrix {
        &self.value
    }

    pub fn into_value(self) -> ComplexMatrix {
        self.value
    }

    /// `c * Z`.
    pub fn scaled(&self, c: f64) -> Self {
        Self { spec: self.spec, value: self.value.scale(C64::new(c, 0.0)) }
    }

    /// Coordinates of a type IV point.
    pub fn coords(&self) -> Vec<C64> {
        self.value.to_row_major()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Interior,
    Boundary,
    Exterior,
}

impl FromStr for Region {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interior" => Ok(Self::Interior),
            "boundary" => Ok(Self::Boundary),
            "exterior" => Ok(Self::Exterior),
            _ => Err(Error::Parse(format!("unknown region `{s}`"))),
        }
    }
}

/// Region together with the governing signed quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub region: Region,
    pub margin: f64,
}

fn gram_defect(z: &ComplexMatrix) -> ComplexMatrix {
    &ComplexMatrix::identity(z.nrows()) - &(z * &z.adjoint())
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn hermitian_dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// `1 − 2ZZ*` and `S^IV(Z)` for a type IV coordinate vector.
fn iv_quantities(z: &[C64]) -> (f64, f64) {
    let zz = hermitian_dot(z, z).re;
    let zzt = dot(z, z).norm_sqr();
    (1.0 - zz, 1.0 - 2.0 * zz + zzt)
}

/// Interior / boundary / exterior with signed margin.
///
/// Types I–III use the smallest eigenvalue of `I − ZZ*`; type IV uses both
/// `1 − ZZ*` and the generic norm.
pub fn classify_point(z: &Point, tol: f64) -> Result<Classification> {
    match z.spec.kind() {
        DomainKind::IV => {
            let (ball, norm) = iv_quantities(&z.coords());
            let margin = ball.min(norm);
            let region = if ball > tol && norm > tol {
                Region::Interior
            } else if margin.abs() <= tol && ball.max(norm) >= -tol {
                Region::Boundary
            } else {
                Region::Exterior
            };
            Ok(Classification { region, margin })
        }
        _ => {
            let h = gram_defect(&z.value);
            let h = hermitize(&h);
            let mu = hermitian_spectrum(&h)?[0];
            let region = if mu > tol {
                Region::Interior
            } else if mu.abs() <= tol {
                Region::Boundary
            } else {
                Region::Exterior
            };
            Ok(Classification { region, margin: mu })
        }
    }
}

fn hermitize(h: &ComplexMatrix) -> ComplexMatrix {
    (h + &h.adjoint()).scale(C64::new(0.5, 0.0))
}

/// `det(I − Z W*)`, the polarized determinant shared by types I–III.
pub fn polarized_det(z: &ComplexMatrix, w: &ComplexMatrix) -> Result<C64> {
    det(&(&ComplexMatrix::identity(z.nrows()) - &(z * &w.adjoint())))
}

/// Generic norm `S(Z)`.
///
/// Type II returns the nonnegative square root of `det(I − ZZ*)` and refuses
/// points outside the closed domain, where that branch is undefined.
pub fn generic_norm(z: &Point) -> Result<f64> {
    match z.spec.kind() {
        DomainKind::IV => Ok(iv_quantities(&z.coords()).1),
        kind => {
            let d = polarized_det(&z.value, &z.value)?;
            if d.im.abs() > 1e-10 * tol_scale(d.norm()) {
                return Err(Error::Numeric(format!("det(I - ZZ*) has imaginary part {:.3e}", d.im)));
            }
            if kind == DomainKind::II {
                if classify_point(z, 1e-8)?.region == Region::Exterior {
                    return Err(Error::Domain("type II generic norm is undefined outside the closed domain".into()));
                }
                Ok(d.re.max(0.0).sqrt())
            } else {
                Ok(d.re)
            }
        }
    }
}

/// The polynomial whose zero set is the boundary: `det(I − ZZ*)` for types
/// I–III (the square of the generic norm for type II) and `S^IV` for type IV.
pub fn norm_polynomial(z: &Point) -> Result<f64> {
    match z.spec.kind() {
        DomainKind::IV => Ok(iv_quantities(&z.coords()).1),
        _ => Ok(polarized_det(&z.value, &z.value)?.re),
    }
}

/// Polarized generic norm. For type II the value is the polarization of the
/// square, `det(I − ZW*)`, and `squared` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizedNorm {
    pub value: C64,
    pub squared: bool,
}

pub fn polarized_norm(z: &Point, w: &Point) -> Result<PolarizedNorm> {
    if z.spec != w.spec {
        return Err(Error::Shape(format!("polarization of {} with {}", z.spec, w.spec)));
    }
    match z.spec.kind() {
        DomainKind::IV => {
            let (zc, wc) = (z.coords(), w.coords());
            let value = ONE - hermitian_dot(&zc, &wc) * 2.0 + dot(&zc, &zc) * dot(&wc, &wc).conj();
            Ok(PolarizedNorm { value, squared: false })
        }
        kind => Ok(PolarizedNorm {
            value: polarized_det(&z.value, &w.value)?,
            squared: kind == DomainKind::II,
        }),
    }
}

fn project_shape(spec: DomainSpec, g: ComplexMatrix) -> ComplexMatrix {
    match spec.kind() {
        DomainKind::II => (&g - &g.transpose()).scale(C64::new(0.5, 0.0)),
        DomainKind::III => (&g + &g.transpose()).scale(C64::new(0.5, 0.0)),
        _ => g,
    }
}

const SAMPLE_RETRIES: usize = 64;

/// Draws a boundary point for types I–III, or `None` for a degenerate draw.
fn boundary_matrix<R: Rng + ?Sized>(spec: DomainSpec, rng: &mut R) -> Result<Option<ComplexMatrix>> {
    let (rows, cols) = spec.point_shape();
    let g = project_shape(spec, linalg::gaussian_matrix(rows, cols, rng));
    let top = singular_values(&g)?.first().copied().unwrap_or(0.0);
    if top < 1e-8 {
        return Ok(None);
    }
    Ok(Some(g.scale(C64::new(1.0 / top, 0.0))))
}

/// Boundary point of a type IV domain along a random direction: the radial
/// scale is the smallest root of `1 − 2u·DD* + u²|DDᵗ|²` in `u = λ²`.
fn boundary_iv<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Option<ComplexMatrix> {
    let d = linalg::gaussian_matrix(1, n, rng).to_row_major();
    let a = hermitian_dot(&d, &d).re;
    let b = dot(&d, &d).norm();
    if a < 1e-8 {
        return None;
    }
    let u = 1.0 / (a + (a * a - b * b).max(0.0).sqrt());
    if !(u.is_finite() && u > 0.0 && u * a <= 1.0 + 1e-12) {
        return None;
    }
    let lambda = u.sqrt();
    Some(ComplexMatrix::row_vector(&d).scale(C64::new(lambda, 0.0)))
}

/// Random point in the requested region drawn from `rng`.
///
/// Interior points are boundary points pulled in by a uniform radius in
/// `(0, 1)`; the result always classifies as requested at `1e-9`.
pub fn sample_point_with<R: Rng + ?Sized>(spec: DomainSpec, region: Region, rng: &mut R) -> Result<Point> {
    if region == Region::Exterior {
        return Err(Error::Parameter("only interior and boundary samples are supported".into()));
    }
    for _ in 0..SAMPLE_RETRIES {
        let edge = match spec.kind() {
            DomainKind::IV => {
                let DomainSpec::TypeIV { n } = spec else { unreachable!() };
                boundary_iv(n, rng)
            }
            _ => boundary_matrix(spec, rng)?,
        };
        let Some(edge) = edge else { continue };
        let value = match region {
            Region::Boundary => edge,
            _ => {
                let rho: f64 = rng.random_range(0.0..1.0);
                edge.scale(C64::new(rho, 0.0))
            }
        };
        let point = Point::new_projected(spec, value, 1e-12)?;
        if classify_point(&point, BOUNDARY_TOL)?.region == region {
            return Ok(point);
        }
    }
    Err(Error::Sampling(format!("no {region:?} sample for {spec} after {SAMPLE_RETRIES} draws")))
}

/// Deterministic sample for `seed`.
pub fn sample_point(spec: DomainSpec, region: Region, seed: u64) -> Result<Point> {
    sample_point_with(spec, region, &mut crate::rng::seeded(seed))
}

/// Lift `(−2iZ, 1 + ZZᵗ, i(1 − ZZᵗ))` of a type IV point to `C^{n+2}`.
pub fn borel_lift_iv(z: &Point) -> Result<Vec<C64>> {
    if z.spec.kind() != DomainKind::IV {
        return Err(Error::Shape(format!("lift needs a type IV point, got {}", z.spec)));
    }
    let coords = z.coords();
    let zzt = dot(&coords, &coords);
    let mut out: Vec<C64> = coords.iter().map(|c| C64::new(0.0, -2.0) * c).collect();
    out.push(ONE + zzt);
    out.push(I * (ONE - zzt));
    Ok(out)
}

/// `Σ x_k²`, which vanishes on the image of the lift.
pub fn quadric_residual(x: &[C64]) -> C64 {
    dot(x, x)
}

/// `Σ_{k≤n} |x_k|² − |x_{n+1}|² − |x_{n+2}|²`.
pub fn hermitian_form_iv(x: &[C64]) -> f64 {
    let n = x.len() - 2;
    x.iter()
        .enumerate()
        .map(|(k, v)| if k < n { v.norm_sqr() } else { -v.norm_sqr() })
        .sum()
}

/// Point built from row-major entries; convenience for tests and the CLI.
pub fn point_from_entries(spec: DomainSpec, entries: Vec<C64>) -> Result<Point> {
    let (r, c) = spec.point_shape();
    Point::new(spec, ComplexMatrix::from_row_major(r, c, entries)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn all_specs() -> Vec<DomainSpec> {
        ["I:1,1", "I:2,3", "II:2", "II:3", "III:2", "IV:1", "IV:3"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    #[test]
    fn spec_syntax_round_trips() {
        for text in ["I:2,3", "II:4", "III:1", "IV:5"] {
            let spec: DomainSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        for bad in ["I:3,2", "II:1", "V:2", "I:2", "III:0", "I:a,b", "IV"] {
            assert!(bad.parse::<DomainSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn origin_is_interior_with_unit_norm() {
        for spec in all_specs() {
            let o = Point::origin(spec);
            let cl = classify_point(&o, BOUNDARY_TOL).unwrap();
            assert_eq!(cl.region, Region::Interior);
            assert!((cl.margin - 1.0).abs() < 1e-15);
            assert!((generic_norm(&o).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn type_ii_norm_closed_forms() {
        let spec = DomainSpec::type_ii(3).unwrap();
        let (a, b, cc) = (c(0.2, 0.1), c(-0.3, 0.25), c(0.1, -0.4));
        let z = point_from_entries(spec, vec![ZERO, a, b, -a, ZERO, cc, -b, -cc, ZERO]).unwrap();
        let expected = 1.0 - a.norm_sqr() - b.norm_sqr() - cc.norm_sqr();
        assert!((generic_norm(&z).unwrap() - expected).abs() < 1e-14);

        let spec2 = DomainSpec::type_ii(2).unwrap();
        let z2 = point_from_entries(spec2, vec![ZERO, a, -a, ZERO]).unwrap();
        assert!((generic_norm(&z2).unwrap() - (1.0 - a.norm_sqr())).abs() < 1e-15);
    }

    #[test]
    fn type_ii_exterior_is_rejected() {
        let spec = DomainSpec::type_ii(2).unwrap();
        let z = point_from_entries(spec, vec![ZERO, c(1.5, 0.0), c(-1.5, 0.0), ZERO]).unwrap();
        assert!(matches!(generic_norm(&z), Err(Error::Domain(_))));
    }

    #[test]
    fn type_iv_real_axis_boundary() {
        let spec = DomainSpec::type_iv(2).unwrap();
        for (x, region) in [(0.5, Region::Interior), (1.0, Region::Boundary), (1.2, Region::Exterior)] {
            let z = point_from_entries(spec, vec![c(x, 0.0), ZERO]).unwrap();
            let s = generic_norm(&z).unwrap();
            assert!((s - (1.0 - x * x).powi(2)).abs() < 1e-14);
            assert_eq!(classify_point(&z, 1e-9).unwrap().region, region, "x = {x}");
        }
    }

    #[test]
    fn unit_top_singular_value_is_boundary() {
        let spec = DomainSpec::type_i(2, 2).unwrap();
        let z = point_from_entries(spec, vec![c(1.0, 0.0), ZERO, ZERO, c(0.3, 0.0)]).unwrap();
        assert_eq!(classify_point(&z, 1e-9).unwrap().region, Region::Boundary);
    }

    #[test]
    fn shape_violations() {
        let spec = DomainSpec::type_iii(2).unwrap();
        let bad = ComplexMatrix::from_row_major(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(Point::new(spec, bad), Err(Error::Shape(_))));
        let wrong = ComplexMatrix::zeros(2, 3);
        assert!(matches!(Point::new(spec, wrong), Err(Error::Shape(_))));
    }

    #[test]
    fn polarization_with_origin_and_diagonal() {
        for spec in all_specs() {
            let z = sample_point(spec, Region::Interior, 5).unwrap();
            let p = polarized_norm(&z, &Point::origin(spec)).unwrap();
            assert!((p.value - ONE).norm() < 1e-15);
            let diag = polarized_norm(&z, &z).unwrap();
            let s = generic_norm(&z).unwrap();
            let expected = if diag.squared { s * s } else { s };
            assert!((diag.value - c(expected, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn samples_land_in_requested_region() {
        for spec in all_specs() {
            for seed in 0..20 {
                for region in [Region::Interior, Region::Boundary] {
                    let z = sample_point(spec, region, seed).unwrap();
                    assert_eq!(classify_point(&z, 1e-9).unwrap().region, region);
                    assert_eq!(sample_point(spec, region, seed).unwrap(), z);
                }
            }
        }
    }

    #[test]
    fn boundary_samples_are_tight() {
        let spec = DomainSpec::type_i(2, 3).unwrap();
        let z = sample_point(spec, Region::Boundary, 9).unwrap();
        let top = singular_values(z.value()).unwrap()[0];
        assert!((top - 1.0).abs() < 1e-12);
        let iv = DomainSpec::type_iv(4).unwrap();
        for seed in 0..50 {
            let z = sample_point(iv, Region::Boundary, seed).unwrap();
            assert!(generic_norm(&z).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn lift_of_origin() {
        let spec = DomainSpec::type_iv(3).unwrap();
        let lift = borel_lift_iv(&Point::origin(spec)).unwrap();
        assert_eq!(lift, vec![ZERO, ZERO, ZERO, ONE, I]);
        assert!(matches!(borel_lift_iv(&Point::origin(DomainSpec::type_iii(2).unwrap())), Err(Error::Shape(_))));
    }
}
