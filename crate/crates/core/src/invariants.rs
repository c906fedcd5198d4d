//! Fischer coefficient operators and their singular spectra.
//!
//! Rows of the degree-`d` operator are the independent target entries,
//! columns the degree-`d` monomials in the independent source entries. Both
//! sides are expressed in coordinates orthonormal for the Frobenius inner
//! product on the matrix space (off-diagonal entries of symmetric and
//! antisymmetric matrices carry a factor `√2`), and columns carry the Fischer
//! weight `√α!`. Isotropy substitutions then act unitarily on rows and
//! columns, so the singular values are invariants of isotropic equivalence.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domains::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, ComplexMatrix};
use crate::polymaps::{homogeneous_parts, variables, Monomial, PolyMap};

/// Default sup-distance below which spectra count as equal.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Independent target positions with their Frobenius weights.
fn target_rows(spec: DomainSpec) -> Vec<((usize, usize), f64)> {
    variables(spec)
        .into_iter()
        .map(|(i, j)| {
            let w = match spec.kind() {
                DomainKind::II | DomainKind::III if i != j => std::f64::consts::SQRT_2,
                _ => 1.0,
            };
            ((i, j), w)
        })
        .collect()
}

/// Column weight `√α!` times `2^{-k/2}`, `k` the degree in off-diagonal
/// entries of a symmetric or antisymmetric source.
fn column_weight(spec: DomainSpec, m: &Monomial) -> f64 {
    let vars = variables(spec);
    let off: u32 = match spec.kind() {
        DomainKind::II | DomainKind::III => m
            .exponents()
            .iter()
            .zip(&vars)
            .filter(|(_, (i, j))| i != j)
            .map(|(e, _)| *e)
            .sum(),
        _ => 0,
    };
    m.factorial().sqrt() * 2f64.powf(-f64::from(off) / 2.0)
}

fn require_supported(f: &PolyMap) -> Result<()> {
    if f.source().kind() == DomainKind::IV || f.target().kind() == DomainKind::IV {
        return Err(Error::Unsupported("invariants are defined for types I–III".into()));
    }
    Ok(())
}

/// Coefficient operator of the homogeneous degree-`degree` map `f`.
pub fn coefficient_operator_of_degree(f: &PolyMap, degree: u32) -> Result<ComplexMatrix> {
    require_supported(f)?;
    if f.degrees().iter().any(|&d| d != degree) {
        return Err(Error::Shape(format!("map is not homogeneous of degree {degree} (degrees {:?})", f.degrees())));
    }
    let rows = target_rows(f.target());
    let columns = Monomial::all_of_degree(f.nvars(), degree);
    let weights: Vec<f64> = columns.iter().map(|m| column_weight(f.source(), m)).collect();
    Ok(ComplexMatrix::from_fn(rows.len(), columns.len(), |r, c| {
        let ((i, j), w) = rows[r];
        f.entry(i, j).coefficient(&columns[c]) * (w * weights[c])
    }))
}

/// Coefficient operator of a homogeneous map; the zero map is treated as
/// degree 0.
pub fn coefficient_operator(f: &PolyMap) -> Result<ComplexMatrix> {
    match f.degrees().as_slice() {
        [] => coefficient_operator_of_degree(f, 0),
        [d] => coefficient_operator_of_degree(f, *d),
        many => Err(Error::Shape(format!("map is not homogeneous (degrees {many:?})"))),
    }
}

/// Descending singular values of each homogeneous part.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InvariantSpectrum {
    pub degrees: BTreeMap<u32, Vec<f64>>,
}

impl InvariantSpectrum {
    pub fn degree(&self, d: u32) -> &[f64] {
        self.degrees.get(&d).map_or(&[], Vec::as_slice)
    }
}

pub fn invariant_spectrum(f: &PolyMap) -> Result<InvariantSpectrum> {
    require_supported(f)?;
    let mut degrees = BTreeMap::new();
    for (d, part) in homogeneous_parts(f) {
        degrees.insert(d, singular_values(&coefficient_operator_of_degree(&part, d)?)?);
    }
    Ok(InvariantSpectrum { degrees })
}

/// Sup-distance of two descending lists, the shorter padded with zeros.
pub fn padded_distance(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Inequivalent,
    IndistinguishableByInvariants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistance {
    pub degree: u32,
    /// Zero-padded sup-distance of the two spectra.
    pub distance: f64,
    /// One map has a nonzero part in this degree and the other does not.
    pub length_mismatch: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinction {
    pub verdict: Verdict,
    pub distances: Vec<DegreeDistance>,
    pub max_distance: f64,
    pub tolerance: f64,
    /// `tolerance − max_distance`; negative when separated by distance.
    pub margin: f64,
}

/// Compares per-degree spectra of two origin-preserving maps.
///
/// `Inequivalent` is conclusive; `IndistinguishableByInvariants` only says
/// that no spectrum separates the maps.
pub fn distinguish(f: &PolyMap, g: &PolyMap, tol: f64) -> Result<Distinction> {
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Error::Precondition(format!(
            "maps {}→{} and {}→{} have different domains",
            f.source(),
            f.target(),
            g.source(),
            g.target()
        )));
    }
    if !f.preserves_origin() || !g.preserves_origin() {
        return Err(Error::Precondition("maps must fix the origin".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be nonnegative")));
    }
    compare_spectra(&invariant_spectrum(f)?, &invariant_spectrum(g)?, tol)
}

pub fn compare_spectra(a: &InvariantSpectrum, b: &InvariantSpectrum, tol: f64) -> Result<Distinction> {
    let degrees: std::collections::BTreeSet<u32> = a.degrees.keys().chain(b.degrees.keys()).copied().collect();
    let distances: Vec<DegreeDistance> = degrees
        .into_iter()
        .map(|d| {
            let (x, y) = (a.degree(d), b.degree(d));
            DegreeDistance { degree: d, distance: padded_distance(x, y), length_mismatch: x.len() != y.len() }
        })
        .collect();
    let max_distance = distances.iter().map(|d| d.distance).fold(0.0, f64::max);
    let separated = distances.iter().any(|d| d.length_mismatch) || max_distance > tol;
    Ok(Distinction {
        verdict: if separated { Verdict::Inequivalent } else { Verdict::IndistinguishableByInvariants },
        distances,
        max_distance,
        tolerance: tol,
        margin: tol - max_distance,
    })
}

/// Largest per-degree distance, used as the entry of sweep matrices.
pub fn spectral_distance(a: &InvariantSpectrum, b: &InvariantSpectrum) -> f64 {
    a.degrees
        .keys()
        .chain(b.degrees.keys())
        .map(|&d| padded_distance(a.degree(d), b.degree(d)))
        .fold(0.0, f64::max)
}
