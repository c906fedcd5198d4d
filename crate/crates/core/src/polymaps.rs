//! Sparse holomorphic polynomial maps between classical domains.
//!
//! A map stores one polynomial per target entry. Polynomials are in the
//! independent entries of the source point: all `r·s` entries for type I,
//! the strict upper triangle for type II, the upper triangle with diagonal
//! for type III, and the `n` coordinates for type IV. Dependent entries of
//! the source are reconstructed at evaluation; symmetric and antisymmetric
//! targets store mirrored entries explicitly and are validated on
//! construction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autgroups::{act, isotropy, AutElement, IsotropyParams};
use crate::domains::{DomainKind, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};

/// Coefficient tolerance used for map equality.
pub const COEFF_TOL: f64 = 1e-12;

/// Dense exponent vector over the source variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn variable(nvars: usize, k: usize) -> Self {
        let mut e = vec![0; nvars];
        e[k] = 1;
        Self(e)
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Multi-index factorial `α!`.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e).map(f64::from).product::<f64>())
            .product()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, powers: &[Vec<C64>]) -> C64 {
        self.0
            .iter()
            .enumerate()
            .fold(ONE, |acc, (k, &e)| if e == 0 { acc } else { acc * powers[k][e as usize] })
    }

    /// All monomials of total degree `d` in `nvars` variables, lexicographic.
    pub fn all_of_degree(nvars: usize, d: u32) -> Vec<Self> {
        fn rec(prefix: &mut Vec<u32>, left: usize, d: u32, out: &mut Vec<Monomial>) {
            if left == 1 {
                prefix.push(d);
                out.push(Monomial(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=d).rev() {
                prefix.push(e);
                rec(prefix, left - 1, d - e, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if nvars == 0 {
            if d == 0 {
                out.push(Self(Vec::new()));
            }
            return out;
        }
        rec(&mut Vec::with_capacity(nvars), nvars, d, &mut out);
        out
    }
}

/// Polynomial with complex coefficients; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn variable(nvars: usize, k: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::variable(nvars, k), ONE);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        debug_assert_eq!(m.0.len(), self.nvars);
        let entry = self.terms.entry(m).or_insert(ZERO);
        *entry += c;
        if *entry == ZERO {
            let key = self.terms.iter().find(|(_, v)| **v == ZERO).map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.nvars);
        if c != ZERO {
            for (m, v) in &self.terms {
                out.add_term(m.clone(), v * c);
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    fn powers(&self, x: &[C64]) -> Vec<Vec<C64>> {
        let mut top = vec![0u32; self.nvars];
        for m in self.terms.keys() {
            for (t, &e) in top.iter_mut().zip(&m.0) {
                *t = (*t).max(e);
            }
        }
        x.iter()
            .zip(&top)
            .map(|(&v, &e)| {
                let mut p = Vec::with_capacity(e as usize + 1);
                p.push(ONE);
                for k in 0..e as usize {
                    p.push(p[k] * v);
                }
                p
            })
            .collect()
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        let powers = self.powers(x);
        self.terms.iter().map(|(m, c)| c * m.eval(&powers)).sum()
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(Monomial::degree).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn homogeneous_part(&self, d: u32) -> Self {
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// `p(q_1, …, q_n)`, substituting a polynomial for each variable.
    pub fn substitute(&self, subs: &[Polynomial]) -> Result<Self> {
        if subs.len() != self.nvars {
            return Err(Error::Dimension(format!(
                "substitution supplies {} polynomials for {} variables",
                subs.len(),
                self.nvars
            )));
        }
        let nvars = subs.first().map_or(0, |p| p.nvars);
        if subs.iter().any(|p| p.nvars != nvars) {
            return Err(Error::Dimension("substituted polynomials disagree on variables".into()));
        }
        let mut cache: Vec<Vec<Polynomial>> = subs.iter().map(|p| vec![Polynomial::constant(nvars, ONE), p.clone()]).collect();
        let mut out = Polynomial::zero(nvars);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(nvars, *c);
            for (k, &e) in m.0.iter().enumerate() {
                while cache[k].len() <= e as usize {
                    let next = cache[k].last().unwrap().mul(&subs[k]);
                    cache[k].push(next);
                }
                if e > 0 {
                    term = term.mul(&cache[k][e as usize]);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Largest coefficient difference after aligning monomials.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for (m, c) in &self.terms {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }
}

/// Positions `(row, col)` of the independent entries of a point.
pub fn variables(spec: DomainSpec) -> Vec<(usize, usize)> {
    let (rows, cols) = spec.point_shape();
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let keep = match spec.kind() {
                DomainKind::II => i < j,
                DomainKind::III => i <= j,
                DomainKind::I | DomainKind::IV => true,
            };
            if keep {
                out.push((i, j));
            }
        }
    }
    out
}

/// Name of a source variable: `z11`, `z12`, … (`z1_12` beyond nine), or
/// `z1`, … for type IV.
pub fn variable_name(spec: DomainSpec, k: usize) -> String {
    let (i, j) = variables(spec)[k];
    if spec.kind() == DomainKind::IV {
        format!("z{}", j + 1)
    } else if i < 9 && j < 9 {
        format!("z{}{}", i + 1, j + 1)
    } else {
        format!("z{}_{}", i + 1, j + 1)
    }
}

fn parse_variable(spec: DomainSpec, name: &str) -> Result<usize> {
    let bad = || Error::Parse(format!("unknown variable `{name}` for {spec}"));
    let body = name.strip_prefix('z').ok_or_else(bad)?;
    let pos = if spec.kind() == DomainKind::IV {
        let k: usize = body.parse().map_err(|_| bad())?;
        (0, k.checked_sub(1).ok_or_else(bad)?)
    } else if let Some((a, b)) = body.split_once('_') {
        let i: usize = a.parse().map_err(|_| bad())?;
        let j: usize = b.parse().map_err(|_| bad())?;
        (i.checked_sub(1).ok_or_else(bad)?, j.checked_sub(1).ok_or_else(bad)?)
    } else {
        let digits: Vec<u32> = body.chars().map(|c| c.to_digit(10)).collect::<Option<_>>().ok_or_else(bad)?;
        let [i, j] = digits.as_slice() else { return Err(bad()) };
        ((*i as usize).checked_sub(1).ok_or_else(bad)?, (*j as usize).checked_sub(1).ok_or_else(bad)?)
    };
    variables(spec).iter().position(|&p| p == pos).ok_or_else(bad)
}

/// Values of the independent entries of `z`.
pub fn point_variables(z: &Point) -> Vec<C64> {
    variables(z.spec()).iter().map(|&(i, j)| z.value()[(i, j)]).collect()
}

/// The point whose independent entries are `vars` (dependent entries filled
/// by symmetry).
pub fn point_from_variables(spec: DomainSpec, vars: &[C64]) -> Result<Point> {
    let (rows, cols) = spec.point_shape();
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (&(i, j), &v) in variables(spec).iter().zip(vars) {
        m[(i, j)] = v;
        match spec.kind() {
            DomainKind::II => m[(j, i)] = -v,
            DomainKind::III => m[(j, i)] = v,
            _ => {}
        }
    }
    Point::new(spec, m)
}

/// Holomorphic polynomial map between two domains.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    source: DomainSpec,
    target: DomainSpec,
    entries: Vec<Polynomial>,
}

impl PolyMap {
    /// Validates entry count, variable count, and target (anti)symmetry.
    pub fn new(source: DomainSpec, target: DomainSpec, entries: Vec<Polynomial>) -> Result<Self> {
        let (rows, cols) = target.point_shape();
        if entries.len() != rows * cols {
            return Err(Error::Shape(format!("{target} maps need {} entries, got {}", rows * cols, entries.len())));
        }
        let nvars = variables(source).len();
        if entries.iter().any(|p| p.nvars != nvars) {
            return Err(Error::Shape(format!("entries must be polynomials in the {nvars} variables of {source}")));
        }
        if entries.iter().any(|p| p.terms.values().any(|c| !c.is_finite())) {
            return Err(Error::Numeric("non-finite coefficient".into()));
        }
        let map = Self { source, target, entries };
        let sign = match target.kind() {
            DomainKind::II => Some(-1.0),
            DomainKind::III => Some(1.0),
            _ => None,
        };
        if let Some(sign) = sign {
            for i in 0..rows {
                for j in i..cols {
                    let mirrored = map.entry(j, i).scale(C64::new(sign, 0.0));
                    if map.entry(i, j).max_deviation(&mirrored) > COEFF_TOL {
                        return Err(Error::Shape(format!("target {target} symmetry broken at ({}, {})", i + 1, j + 1)));
                    }
                }
            }
        }
        Ok(map)
    }

    pub fn source(&self) -> DomainSpec {
        self.source
    }

    pub fn target(&self) -> DomainSpec {
        self.target
    }

    pub fn nvars(&self) -> usize {
        variables(self.source).len()
    }

    /// Polynomial at target position `(i, j)`, zero-based.
    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.target.point_shape().1 + j]
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.entries.iter().flat_map(Polynomial::degrees).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    /// `f(0) = 0`, read off the coefficients.
    pub fn preserves_origin(&self) -> bool {
        let one = Monomial::one(self.nvars());
        self.entries.iter().all(|p| p.coefficient(&one) == ZERO)
    }

    pub fn eval(&self, z: &Point) -> Result<Point> {
        if z.spec() != self.source {
            return Err(Error::Shape(format!("map from {} evaluated at a {} point", self.source, z.spec())));
        }
        let x = point_variables(z);
        let (rows, cols) = self.target.point_shape();
        let values: Vec<C64> = self.entries.iter().map(|p| p.eval(&x)).collect();
        Point::new(self.target, ComplexMatrix::from_row_major(rows, cols, values)?)
    }

    /// Coefficient-wise distance after monomial alignment.
    pub fn max_deviation(&self, other: &Self) -> Result<f64> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Shape("maps between different domains".into()));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.max_deviation(b))
            .fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_deviation(other).is_ok_and(|d| d <= tol)
    }

    /// Places entry `(i, j)` at `(rows[i], cols[j])` of a larger target.
    pub fn embed(&self, target: DomainSpec, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let (tr, tc) = target.point_shape();
        let (sr, sc) = self.target.point_shape();
        if rows.len() != sr || cols.len() != sc || rows.iter().any(|&r| r >= tr) || cols.iter().any(|&c| c >= tc) {
            return Err(Error::Shape(format!("cannot place a {} map inside {target}", self.target)));
        }
        let mut entries = vec![Polynomial::zero(self.nvars()); tr * tc];
        for i in 0..sr {
            for j in 0..sc {
                entries[rows[i] * tc + cols[j]] = self.entry(i, j).clone();
            }
        }
        Self::new(self.source, target, entries)
    }

    /// Top-left embedding `Z ↦ [[f(Z), 0], [0, 0]]`.
    pub fn pad(&self, target: DomainSpec) -> Result<Self> {
        let (sr, sc) = self.target.point_shape();
        self.embed(target, &(0..sr).collect::<Vec<_>>(), &(0..sc).collect::<Vec<_>>())
    }

    fn map_entries(&self, f: impl Fn(&Polynomial) -> Result<Polynomial>) -> Result<Vec<Polynomial>> {
        self.entries.iter().map(f).collect()
    }
}

/// Homogeneous components keyed by degree; components sum to `f`.
pub fn homogeneous_parts(f: &PolyMap) -> Vec<(u32, PolyMap)> {
    f.degrees()
        .into_iter()
        .map(|d| {
            let entries = f.entries.iter().map(|p| p.homogeneous_part(d)).collect();
            (d, PolyMap { source: f.source, target: f.target, entries })
        })
        .collect()
}

/// Symbolic composition `f ∘ g`.
pub fn compose(f: &PolyMap, g: &PolyMap) -> Result<PolyMap> {
    if g.target != f.source {
        return Err(Error::Shape(format!("cannot compose {}→{} after {}→{}", f.source, f.target, g.source, g.target)));
    }
    let subs: Vec<Polynomial> = variables(f.source).iter().map(|&(i, j)| g.entry(i, j).clone()).collect();
    let entries = f.map_entries(|p| p.substitute(&subs))?;
    PolyMap::new(g.source, f.target, entries)
}

/// Coordinates of a linear map on points, as linear polynomials in the
/// independent source entries.
fn linear_forms(spec: DomainSpec, nvars_out: usize, apply: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> Result<Vec<Polynomial>> {
    let vars = variables(spec);
    let mut forms = vec![Polynomial::zero(nvars_out); vars.len()];
    for k in 0..vars.len() {
        let mut unit = vec![ZERO; vars.len()];
        unit[k] = ONE;
        let image = apply(point_from_variables(spec, &unit)?.value());
        for (m, &(i, j)) in vars.iter().enumerate() {
            let c = image[(i, j)];
            if c != ZERO {
                forms[m].add_term(Monomial::variable(nvars_out, k), c);
            }
        }
    }
    Ok(forms)
}

/// `Z ↦ τ(f(σ(Z)))` where `σ`, `τ` are the linear isotropy actions on the
/// source and target.
pub fn conjugate(f: &PolyMap, pre: &IsotropyParams, post: &IsotropyParams) -> Result<PolyMap> {
    if f.source.kind() == DomainKind::IV || f.target.kind() == DomainKind::IV {
        return Err(Error::Unsupported("conjugation is implemented for types I–III".into()));
    }
    isotropy(f.source, pre)?;
    isotropy(f.target, post)?;
    let nvars = f.nvars();
    let subs = linear_forms(f.source, nvars, |z| pre.apply_linear(z))?;
    let inner = f.map_entries(|p| p.substitute(&subs))?;

    let (rows, cols) = f.target.point_shape();
    let mut entries = vec![Polynomial::zero(nvars); rows * cols];
    for p in 0..rows {
        for q in 0..cols {
            let mirrored = match f.target.kind() {
                DomainKind::II | DomainKind::III => q < p,
                _ => false,
            };
            if mirrored {
                continue;
            }
            let mut acc = Polynomial::zero(nvars);
            for i in 0..rows {
                for j in 0..cols {
                    let src = &inner[i * cols + j];
                    if src.is_zero() {
                        continue;
                    }
                    let mut unit = ComplexMatrix::zeros(rows, cols);
                    unit[(i, j)] = ONE;
                    let w = post.apply_linear(&unit)[(p, q)];
                    if w != ZERO {
                        acc = acc.add(&src.scale(w));
                    }
                }
            }
            entries[p * cols + q] = acc;
        }
    }
    if let Some(sign) = match f.target.kind() {
        DomainKind::II => Some(-1.0),
        DomainKind::III => Some(1.0),
        _ => None,
    } {
        for p in 0..rows {
            for q in 0..p {
                entries[p * cols + q] = entries[q * cols + p].scale(C64::new(sign, 0.0));
            }
        }
    }
    PolyMap::new(f.source, f.target, entries)
}

/// Pointwise evaluator of `post ∘ f ∘ pre`; the composite is rational in
/// general so no polynomial is formed.
#[derive(Debug, Clone)]
pub struct PointwiseComposite {
    pre: AutElement,
    map: PolyMap,
    post: AutElement,
}

impl PointwiseComposite {
    pub fn eval(&self, z: &Point) -> Result<Point> {
        act(&self.post, &self.map.eval(&act(&self.pre, z)?)?)
    }
}

pub fn compose_pointwise(f: &PolyMap, pre: &AutElement, post: &AutElement) -> Result<PointwiseComposite> {
    if pre.spec() != f.source || post.spec() != f.target {
        return Err(Error::Shape("automorphisms do not match the map's domains".into()));
    }
    for e in [pre, post] {
        let rep = e.membership(crate::autgroups::USER_TOL);
        if !rep.pass {
            return Err(Error::Parameter(format!("element fails membership (residual {:.3e})", rep.max_residual)));
        }
    }
    Ok(PointwiseComposite { pre: pre.clone(), map: f.clone(), post: post.clone() })
}

// ---------------------------------------------------------------------------
// Catalog

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogId {
    Standard,
    WhitneyBall,
    Dangelo,
    GenWhitney,
    FSec4,
    GSec4,
    FamilyF,
    FamilyG,
    FamilyBigG,
    FamilyH,
}

impl CatalogId {
    pub const ALL: [CatalogId; 10] = [
        Self::Standard,
        Self::WhitneyBall,
        Self::Dangelo,
        Self::GenWhitney,
        Self::FSec4,
        Self::GSec4,
        Self::FamilyF,
        Self::FamilyG,
        Self::FamilyBigG,
        Self::FamilyH,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Standard => "standard",
            Self::WhitneyBall => "whitney-ball",
            Self::Dangelo => "dangelo",
            Self::GenWhitney => "gen-whitney",
            Self::FSec4 => "f-sec4",
            Self::GSec4 => "g-sec4",
            Self::FamilyF => "f_t",
            Self::FamilyG => "g_t",
            Self::FamilyBigG => "G_t",
            Self::FamilyH => "h_t",
        }
    }

    /// Families carrying the parameter `t`.
    pub fn is_family(&self) -> bool {
        matches!(self, Self::FamilyF | Self::FamilyG | Self::FamilyBigG | Self::FamilyH)
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CatalogId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown map id `{s}`")))
    }
}

/// Parameters for [`catalog`]; unset dimensions fall back to the smallest
/// instance of each family.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatalogParams {
    pub t: Option<f64>,
    pub theta: Option<f64>,
    pub dims: Vec<usize>,
}

impl CatalogParams {
    pub fn with_t(t: f64) -> Self {
        Self { t: Some(t), ..Self::default() }
    }

    pub fn with_dims(dims: &[usize]) -> Self {
        Self { dims: dims.to_vec(), ..Self::default() }
    }
}

struct Builder {
    source: DomainSpec,
    target: DomainSpec,
    nvars: usize,
    entries: Vec<Polynomial>,
}

impl Builder {
    fn new(source: DomainSpec, target: DomainSpec) -> Self {
        let nvars = variables(source).len();
        let (r, c) = target.point_shape();
        Self { source, target, nvars, entries: vec![Polynomial::zero(nvars); r * c] }
    }

    /// Source variable at zero-based position `(i, j)`.
    fn z(&self, i: usize, j: usize) -> Polynomial {
        let (i, j) = match self.source.kind() {
            DomainKind::II | DomainKind::III if j < i => (j, i),
            _ => (i, j),
        };
        let k = variables(self.source)
            .iter()
            .position(|&p| p == (i, j))
            .expect("catalog uses independent source entries");
        Polynomial::variable(self.nvars, k)
    }

    /// Sets target entry `(i, j)`, mirroring for symmetric targets.
    fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        let cols = self.target.point_shape().1;
        match self.target.kind() {
            DomainKind::III => self.entries[j * cols + i] = p.clone(),
            DomainKind::II => self.entries[j * cols + i] = p.scale(C64::new(-1.0, 0.0)),
            _ => {}
        }
        self.entries[i * cols + j] = p;
    }

    fn finish(self) -> Result<PolyMap> {
        PolyMap::new(self.source, self.target, self.entries)
    }
}

fn real(c: f64) -> C64 {
    C64::new(c, 0.0)
}

fn dims_or<const N: usize>(params: &CatalogParams, default: [usize; N]) -> Result<[usize; N]> {
    if params.dims.is_empty() {
        return Ok(default);
    }
    params
        .dims
        .as_slice()
        .try_into()
        .map_err(|_| Error::Parameter(format!("expected {N} dimensions, got {}", params.dims.len())))
}

fn unit_t(params: &CatalogParams) -> Result<f64> {
    let t = params.t.ok_or_else(|| Error::Parameter("family needs a parameter t".into()))?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Parameter(format!("t = {t} is outside [0, 1]")));
    }
    Ok(t)
}

/// Named maps: embeddings, Whitney-type maps, and the one-parameter families.
pub fn catalog(id: CatalogId, params: &CatalogParams) -> Result<PolyMap> {
    match id {
        CatalogId::Standard => {
            let [r, s, r2, s2] = dims_or(params, [2, 2, 3, 3])?;
            if r2 < r || s2 < s {
                return Err(Error::Parameter(format!("cannot embed I:{r},{s} into I:{r2},{s2}")));
            }
            let mut b = Builder::new(DomainSpec::type_i(r, s)?, DomainSpec::type_i(r2, s2)?);
            for i in 0..r {
                for j in 0..s {
                    let z = b.z(i, j);
                    b.set(i, j, z);
                }
            }
            b.finish()
        }
        CatalogId::WhitneyBall => {
            let [n] = dims_or(params, [2])?;
            if n < 2 {
                return Err(Error::Parameter("Whitney map needs n >= 2".into()));
            }
            let mut b = Builder::new(DomainSpec::type_i(1, n)?, DomainSpec::type_i(1, 2 * n - 1)?);
            for k in 0..n - 1 {
                let z = b.z(0, k);
                b.set(0, k, z);
            }
            let last = b.z(0, n - 1);
            for k in 0..n {
                let p = last.mul(&b.z(0, k));
                b.set(0, n - 1 + k, p);
            }
            b.finish()
        }
        CatalogId::Dangelo => {
            let [n] = dims_or(params, [2])?;
            let theta = params.theta.ok_or_else(|| Error::Parameter("dangelo needs θ".into()))?;
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
                return Err(Error::Parameter(format!("θ = {theta} is outside [0, π/2]")));
            }
            if n < 1 {
                return Err(Error::Parameter("dangelo needs n >= 1".into()));
            }
            let (sn, cs) = theta.sin_cos();
            let mut b = Builder::new(DomainSpec::type_i(1, n)?, DomainSpec::type_i(1, 2 * n)?);
            for k in 0..n - 1 {
                let z = b.z(0, k);
                b.set(0, k, z);
            }
            let last = b.z(0, n - 1);
            b.set(0, n - 1, last.scale(real(cs)));
            for k in 0..n {
                let p = b.z(0, k).mul(&last).scale(real(sn));
                b.set(0, n + k, p);
            }
            b.finish()
        }
        CatalogId::GenWhitney => {
            let [r, s] = dims_or(params, [2, 2])?;
            let mut b = Builder::new(DomainSpec::type_i(r, s)?, DomainSpec::type_i(2 * r - 1, 2 * s - 1)?);
            let corner = b.z(0, 0);
            for i in 0..r {
                for j in 0..s {
                    let p = b.z(i, 0).mul(&b.z(0, j));
                    b.set(i, j, p);
                }
                for k in 1..s {
                    let z = b.z(i, k);
                    b.set(i, s + k - 1, z);
                }
            }
            for k in 1..r {
                for j in 0..s {
                    let z = b.z(k, j);
                    b.set(r + k - 1, j, z);
                }
            }
            let _ = corner;
            b.finish()
        }
        CatalogId::FSec4 => catalog(CatalogId::GenWhitney, &CatalogParams::with_dims(&[2, 2])),
        CatalogId::GSec4 => {
            let two = DomainSpec::type_i(2, 2)?;
            let mut b = Builder::new(two, DomainSpec::type_i(3, 3)?);
            let (z1, z2, z3, z4) = (b.z(0, 0), b.z(0, 1), b.z(1, 0), b.z(1, 1));
            let r2 = real(2f64.sqrt());
            b.set(0, 0, z1.mul(&z1));
            b.set(0, 1, z1.mul(&z2).scale(r2));
            b.set(0, 2, z2.mul(&z2));
            b.set(1, 0, z1.mul(&z3).scale(r2));
            b.set(1, 1, z1.mul(&z4).add(&z2.mul(&z3)));
            b.set(1, 2, z2.mul(&z4).scale(r2));
            b.set(2, 0, z3.mul(&z3));
            b.set(2, 1, z3.mul(&z4).scale(r2));
            b.set(2, 2, z4.mul(&z4));
            b.finish()
        }
        CatalogId::FamilyF => {
            let t = unit_t(params)?;
            let mut b = Builder::new(DomainSpec::type_i(2, 2)?, DomainSpec::type_i(4, 4)?);
            let (z1, z2, z3, z4) = (b.z(0, 0), b.z(0, 1), b.z(1, 0), b.z(1, 1));
            fill_f_family(&mut b, t, [&z1, &z2, &z3, &z4], [&z2, &z3]);
            b.finish()
        }
        CatalogId::FamilyH => {
            let t = unit_t(params)?;
            let mut b = Builder::new(DomainSpec::type_iii(2)?, DomainSpec::type_iii(4)?);
            let (z1, z2, z3) = (b.z(0, 0), b.z(0, 1), b.z(1, 1));
            fill_f_family(&mut b, t, [&z1, &z2, &z2, &z3], [&z2, &z2]);
            b.finish()
        }
        CatalogId::FamilyG => {
            let t = unit_t(params)?;
            catalog(CatalogId::FamilyBigG, &CatalogParams { t: Some(t), theta: None, dims: vec![2, 2] })
        }
        CatalogId::FamilyBigG => {
            let t = unit_t(params)?;
            let [r, s] = dims_or(params, [2, 2])?;
            let mut b = Builder::new(DomainSpec::type_i(r, s)?, DomainSpec::type_i(2 * r - 1, 2 * s)?);
            let (st, sc) = (real(t.sqrt()), real((1.0 - t).sqrt()));
            for i in 0..r {
                for j in 0..s {
                    let p = b.z(i, 0).mul(&b.z(0, j)).scale(st);
                    b.set(i, j, p);
                }
                let p = b.z(i, 0).scale(sc);
                b.set(i, s, p);
                for k in 1..s {
                    let z = b.z(i, k);
                    b.set(i, s + k, z);
                }
            }
            for k in 1..r {
                for j in 0..s {
                    let z = b.z(k, j);
                    b.set(r + k - 1, j, z);
                }
            }
            b.finish()
        }
    }
}

/// The 4x4 family shared by `f_t` (on `z1..z4`) and its type III restriction
/// `h_t`; `cross` holds the two factors of the `z2·z3` term of entry (2,2).
fn fill_f_family(b: &mut Builder, t: f64, z: [&Polynomial; 4], cross: [&Polynomial; 2]) {
    let [z1, z2, z3, z4] = z;
    let a = real((2.0 - t).sqrt());
    let c = real((1.0 - t).sqrt());
    let st = real(t.sqrt());
    let q = real((t / (2.0 - t)).sqrt());
    let m = real(2.0 * ((1.0 - t) / (2.0 - t)).sqrt());
    let w = real(2.0 * (1.0 - t) / (2.0 - t));
    let upper_only = b.target.kind() == DomainKind::III;
    b.set(0, 0, z1.mul(z1));
    b.set(0, 1, z1.mul(z2).scale(a));
    b.set(0, 2, z2.mul(z2).scale(c));
    b.set(0, 3, z2.scale(st));
    b.set(1, 1, z1.mul(z4).scale(w).add(&cross[0].mul(cross[1])));
    b.set(1, 2, z2.mul(z4).scale(m));
    b.set(1, 3, z4.scale(q));
    b.set(2, 2, z4.mul(z4));
    if !upper_only {
        b.set(1, 0, z1.mul(z3).scale(a));
        b.set(2, 0, z3.mul(z3).scale(c));
        b.set(2, 1, z3.mul(z4).scale(m));
        b.set(3, 0, z3.scale(st));
        b.set(3, 1, z4.scale(q));
    }
}

/// Parses `name[:param]`; the parameter is `t` for families and `θ` for
/// `dangelo`.
pub fn parse_selector(selector: &str, base: &CatalogParams) -> Result<PolyMap> {
    let (name, param) = match selector.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (selector, None),
    };
    let id: CatalogId = name.parse()?;
    let mut params = base.clone();
    if let Some(p) = param {
        let v: f64 = p.parse().map_err(|_| Error::Parameter(format!("bad map parameter `{p}`")))?;
        match id {
            CatalogId::Dangelo => params.theta = Some(v),
            id if id.is_family() => params.t = Some(v),
            _ => return Err(Error::Parameter(format!("`{name}` takes no parameter"))),
        }
    }
    catalog(id, &params)
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub exps: BTreeMap<String, u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub row: usize,
    pub col: usize,
    pub terms: Vec<TermJson>,
}

/// `{"source": "I:2,2", "target": "I:4,4", "entries": [...]}` with 1-based
/// rows and columns; only nonzero entries are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMapJson {
    pub source: DomainSpec,
    pub target: DomainSpec,
    pub entries: Vec<EntryJson>,
}

impl From<&PolyMap> for PolyMapJson {
    fn from(f: &PolyMap) -> Self {
        let cols = f.target.point_shape().1;
        let entries = f
            .entries
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_zero())
            .map(|(idx, p)| EntryJson {
                row: idx / cols + 1,
                col: idx % cols + 1,
                terms: p
                    .terms()
                    .map(|(m, c)| TermJson {
                        exps: m
                            .exponents()
                            .iter()
                            .enumerate()
                            .filter(|(_, &e)| e > 0)
                            .map(|(k, &e)| (variable_name(f.source, k), e))
                            .collect(),
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            })
            .collect();
        Self { source: f.source, target: f.target, entries }
    }
}

impl TryFrom<PolyMapJson> for PolyMap {
    type Error = Error;
    fn try_from(json: PolyMapJson) -> Result<Self> {
        let nvars = variables(json.source).len();
        let (rows, cols) = json.target.point_shape();
        let mut entries = vec![Polynomial::zero(nvars); rows * cols];
        let mut given = vec![false; rows * cols];
        for e in &json.entries {
            if e.row == 0 || e.col == 0 || e.row > rows || e.col > cols {
                return Err(Error::Shape(format!("entry ({}, {}) outside {}", e.row, e.col, json.target)));
            }
            let idx = (e.row - 1) * cols + (e.col - 1);
            let mut p = Polynomial::zero(nvars);
            for term in &e.terms {
                let mut exps = vec![0u32; nvars];
                for (name, &power) in &term.exps {
                    exps[parse_variable(json.source, name)?] += power;
                }
                p.add_term(Monomial(exps), C64::new(term.re, term.im));
            }
            entries[idx] = p;
            given[idx] = true;
        }
        let sign = match json.target.kind() {
            DomainKind::II => Some(-1.0),
            DomainKind::III => Some(1.0),
            _ => None,
        };
        if let Some(sign) = sign {
            for i in 0..rows {
                for j in 0..cols {
                    if !given[i * cols + j] && given[j * cols + i] {
                        entries[i * cols + j] = entries[j * cols + i].scale(C64::new(sign, 0.0));
                    }
                }
            }
        }
        PolyMap::new(json.source, json.target, entries)
    }
}

impl Serialize for PolyMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolyMapJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolyMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        PolyMap::try_from(PolyMapJson::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}
