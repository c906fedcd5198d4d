//! Automorphism groups of the classical domains.
//!
//! Elements are square matrices `M = [[A, B], [C, D]]` acting on the right of
//! row vectors (`[X] ↦ [XM]`). For types I–III the induced map on points is
//! `Z ↦ (A + ZC)⁻¹(B + ZD)`; for type IV it is
//! `Z ↦ (2iZA − Z'C) / λ(Z)` with `Z' = (1 + ZZᵗ, i − iZZᵗ)` and
//! `λ(Z) = (−2iZB + Z'D)(i, 1)ᵗ`. Because of the row convention,
//! `act(MN, Z) = act(N, act(M, Z))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{classify_point, DomainKind, DomainSpec, Point, Region};
use crate::error::{Error, Result};
use crate::linalg::{
    self, det, psd_sqrt, tol_scale, unitarity_defect, ComplexMatrix, C64, I, ONE, ZERO,
};

/// Membership tolerance for elements produced by this module's constructors.
pub const CONSTRUCTED_TOL: f64 = 1e-10;
/// Membership tolerance for user-supplied elements.
pub const USER_TOL: f64 = 1e-8;

/// Candidate constants for the type IV automorphy factor `c / (λ(Z)·conj λ(W))`.
pub const TYPE_IV_CANDIDATES: [f64; 2] = [1.0, -0.5];

#[derive(Debug, Clone, PartialEq)]
pub struct AutElement {
    spec: DomainSpec,
    matrix: ComplexMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationResidual {
    pub relation: String,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub relations: Vec<RelationResidual>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn signature(p: usize, q: usize) -> ComplexMatrix {
    let mut d = vec![C64::new(-1.0, 0.0); p];
    d.extend(std::iter::repeat_n(ONE, q));
    ComplexMatrix::diag(&d)
}

fn swap_form(n: usize, lower: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            ONE
        } else if i == j + n {
            C64::new(lower, 0.0)
        } else {
            ZERO
        }
    })
}

impl AutElement {
    /// Wraps a matrix of the right size; membership is not checked here.
    pub fn new(spec: DomainSpec, matrix: ComplexMatrix) -> Result<Self> {
        let m = spec.group_dim();
        if matrix.shape() != (m, m) {
            return Err(Error::Shape(format!(
                "{spec} automorphisms are {m}x{m}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::Numeric("automorphism has non-finite entries".into()));
        }
        Ok(Self { spec, matrix })
    }

    pub fn identity(spec: DomainSpec) -> Self {
        Self { spec, matrix: ComplexMatrix::identity(spec.group_dim()) }
    }

    pub fn spec(&self) -> DomainSpec {
        self.spec
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `(A, B, C, D)`.
    pub fn blocks(&self) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let m = self.spec.group_dim();
        let k = self.spec.block_split();
        let l = m - k;
        (
            self.matrix.block(0, 0, k, k),
            self.matrix.block(0, k, k, l),
            self.matrix.block(k, 0, l, k),
            self.matrix.block(k, k, l, l),
        )
    }

    /// Matrix product `self · other`, which acts as `other ∘ self`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.spec != other.spec {
            return Err(Error::Shape(format!("product of {} and {} elements", self.spec, other.spec)));
        }
        Self::new(self.spec, &self.matrix * &other.matrix)
    }

    pub fn membership(&self, tol: f64) -> MembershipReport {
        let m = &self.matrix;
        let scale = tol_scale(m.max_abs().powi(2));
        let defect = |lhs: ComplexMatrix, rhs: &ComplexMatrix| (&lhs - rhs).max_abs() / scale;
        let mut relations = Vec::new();
        let (p, q) = match self.spec {
            DomainSpec::TypeI { r, s } => (r, s),
            DomainSpec::TypeII { n } | DomainSpec::TypeIII { n } => (n, n),
            DomainSpec::TypeIV { n } => (n, 2),
        };
        let j = signature(p, q);
        relations.push(RelationResidual {
            relation: "M J M* = J".into(),
            residual: defect(&(m * &j) * &m.adjoint(), &j),
        });
        match self.spec.kind() {
            DomainKind::II | DomainKind::III => {
                let n = self.spec.block_split();
                let lower = if self.spec.kind() == DomainKind::II { 1.0 } else { -1.0 };
                let k = swap_form(n, lower);
                relations.push(RelationResidual {
                    relation: "Mt K M = K".into(),
                    residual: defect(&(&m.transpose() * &k) * m, &k),
                });
            }
            DomainKind::IV => {
                let id = ComplexMatrix::identity(m.nrows());
                relations.push(RelationResidual {
                    relation: "Mt M = I".into(),
                    residual: defect(&m.transpose() * m, &id),
                });
            }
            DomainKind::I => {}
        }
        let max_residual = relations.iter().map(|r| r.residual).fold(0.0, f64::max);
        MembershipReport { relations, max_residual, tolerance: tol, pass: max_residual <= tol }
    }
}

/// Residuals of every defining relation of the element's group.
pub fn check_membership(e: &AutElement, tol: f64) -> Result<MembershipReport> {
    AutElement::new(e.spec, e.matrix.clone())?;
    Ok(e.membership(tol))
}

fn require_member(e: &AutElement) -> Result<()> {
    let report = e.membership(USER_TOL);
    if report.pass {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "element is not in Aut({}) (residual {:.3e})",
            e.spec, report.max_residual
        )))
    }
}

fn iv_prime(z: &[C64]) -> [C64; 2] {
    let zzt: C64 = z.iter().map(|x| x * x).sum();
    [ONE + zzt, I - I * zzt]
}

/// `λ(Z) = (−2iZB + Z'D)(i, 1)ᵗ` for a type IV element.
pub fn lambda_iv(e: &AutElement, z: &Point) -> Result<C64> {
    if e.spec.kind() != DomainKind::IV || z.spec() != e.spec {
        return Err(Error::Shape("λ is defined for type IV elements and points".into()));
    }
    let (_, b, _, d) = e.blocks();
    let coords = z.coords();
    let zp = iv_prime(&coords);
    let row = |k: usize| -> C64 {
        let mut acc = ZERO;
        for (i, zi) in coords.iter().enumerate() {
            acc += C64::new(0.0, -2.0) * zi * b[(i, k)];
        }
        acc + zp[0] * d[(0, k)] + zp[1] * d[(1, k)]
    };
    Ok(row(0) * I + row(1))
}

/// Image of `z` under the automorphism.
pub fn act(e: &AutElement, z: &Point) -> Result<Point> {
    if z.spec() != e.spec {
        return Err(Error::Shape(format!("{} element applied to a {} point", e.spec, z.spec())));
    }
    require_member(e)?;
    let (a, b, c, d) = e.blocks();
    match e.spec.kind() {
        DomainKind::IV => {
            let lambda = lambda_iv(e, z)?;
            if !(lambda.norm() > 1e-300) || !lambda.is_finite() {
                return Err(Error::ActionSingularity("λ(Z) vanishes".into()));
            }
            let coords = z.coords();
            let zp = iv_prime(&coords);
            let n = coords.len();
            let out: Vec<C64> = (0..n)
                .map(|k| {
                    let mut acc = ZERO;
                    for (i, zi) in coords.iter().enumerate() {
                        acc += C64::new(0.0, 2.0) * zi * a[(i, k)];
                    }
                    (acc - zp[0] * c[(0, k)] - zp[1] * c[(1, k)]) / lambda
                })
                .collect();
            Point::new(e.spec, ComplexMatrix::row_vector(&out))
        }
        _ => {
            let zv = z.value();
            let den = &a + &(zv * &c);
            let num = &b + &(zv * &d);
            let image = den
                .solve(&num)
                .map_err(|_| Error::ActionSingularity("A + ZC is singular".into()))?;
            Point::new_projected(e.spec, image, 1e-8)
        }
    }
}

/// Parameters of an origin-fixing automorphism.
#[derive(Debug, Clone, PartialEq)]
pub enum IsotropyParams {
    /// `diag(U, V)` with `U ∈ U(r)`, `V ∈ U(s)`.
    TypeI { u: ComplexMatrix, v: ComplexMatrix },
    /// `diag(A, conj A)` with `A ∈ U(n)`, types II and III.
    Unitary { a: ComplexMatrix },
    /// `diag(P, R_θ)` with `P ∈ O(n)` real and `R_θ` a plane rotation.
    TypeIV { p: ComplexMatrix, theta: f64 },
}

impl IsotropyParams {
    pub fn identity(spec: DomainSpec) -> Self {
        match spec {
            DomainSpec::TypeI { r, s } => Self::TypeI {
                u: ComplexMatrix::identity(r),
                v: ComplexMatrix::identity(s),
            },
            DomainSpec::TypeII { n } | DomainSpec::TypeIII { n } => {
                Self::Unitary { a: ComplexMatrix::identity(n) }
            }
            DomainSpec::TypeIV { n } => Self::TypeIV { p: ComplexMatrix::identity(n), theta: 0.0 },
        }
    }

    /// The linear map the isotropy induces on points:
    /// `U*ZV` (I), `A*Z conj(A)` (II, III), `e^{−iθ} Z P` (IV).
    pub fn apply_linear(&self, z: &ComplexMatrix) -> ComplexMatrix {
        match self {
            Self::TypeI { u, v } => &(&u.adjoint() * z) * v,
            Self::Unitary { a } => &(&a.adjoint() * z) * &a.conj(),
            Self::TypeIV { p, theta } => (z * p).scale(C64::from_polar(1.0, -theta)),
        }
    }
}

/// Random isotropy parameters for `spec`.
pub fn random_isotropy_params<R: Rng + ?Sized>(spec: DomainSpec, rng: &mut R) -> IsotropyParams {
    match spec {
        DomainSpec::TypeI { r, s } => IsotropyParams::TypeI {
            u: linalg::random_unitary_with(r, rng),
            v: linalg::random_unitary_with(s, rng),
        },
        DomainSpec::TypeII { n } | DomainSpec::TypeIII { n } => {
            IsotropyParams::Unitary { a: linalg::random_unitary_with(n, rng) }
        }
        DomainSpec::TypeIV { n } => IsotropyParams::TypeIV {
            p: linalg::random_orthogonal_with(n, rng),
            theta: rng.random_range(0.0..std::f64::consts::TAU),
        },
    }
}

fn require_unitary(m: &ComplexMatrix, n: usize, what: &str) -> Result<()> {
    if m.shape() != (n, n) {
        return Err(Error::Parameter(format!("{what} must be {n}x{n}")));
    }
    if unitarity_defect(m) > 1e-10 {
        return Err(Error::Parameter(format!("{what} is not unitary")));
    }
    Ok(())
}

/// Origin-fixing automorphism from its parameters.
pub fn isotropy(spec: DomainSpec, params: &IsotropyParams) -> Result<AutElement> {
    let matrix = match (spec, params) {
        (DomainSpec::TypeI { r, s }, IsotropyParams::TypeI { u, v }) => {
            require_unitary(u, r, "U")?;
            require_unitary(v, s, "V")?;
            ComplexMatrix::from_blocks(u, &ComplexMatrix::zeros(r, s), &ComplexMatrix::zeros(s, r), v)?
        }
        (DomainSpec::TypeII { n } | DomainSpec::TypeIII { n }, IsotropyParams::Unitary { a }) => {
            require_unitary(a, n, "A")?;
            let z = ComplexMatrix::zeros(n, n);
            ComplexMatrix::from_blocks(a, &z, &z, &a.conj())?
        }
        (DomainSpec::TypeIV { n }, IsotropyParams::TypeIV { p, theta }) => {
            require_unitary(p, n, "P")?;
            if p.to_row_major().iter().any(|x| x.im.abs() > 1e-10) {
                return Err(Error::Parameter("P must be real orthogonal".into()));
            }
            let (sn, cs) = theta.sin_cos();
            let rot = ComplexMatrix::from_real(2, 2, &[cs, -sn, sn, cs]);
            ComplexMatrix::from_blocks(p, &ComplexMatrix::zeros(n, 2), &ComplexMatrix::zeros(2, n), &rot)?
        }
        _ => return Err(Error::Parameter(format!("isotropy parameters do not match {spec}"))),
    };
    AutElement::new(spec, matrix)
}

/// Type I automorphism moving the origin to the interior point `z0`.
pub fn transvection_type1(z0: &Point) -> Result<AutElement> {
    let spec = z0.spec();
    let DomainSpec::TypeI { r, s } = spec else {
        return Err(Error::Unsupported(format!("transvections are provided for type I only, got {spec}")));
    };
    let cl = classify_point(z0, 1e-8)?;
    if cl.region != Region::Interior {
        return Err(Error::Domain("transvection centre must be interior".into()));
    }
    let z = z0.value();
    let left = psd_sqrt(&(&ComplexMatrix::identity(r) - &(z * &z.adjoint())))?.inverse()?;
    let right = psd_sqrt(&(&ComplexMatrix::identity(s) - &(&z.adjoint() * z)))?.inverse()?;
    let matrix = ComplexMatrix::from_blocks(&left, &(&left * z), &(&right * &z.adjoint()), &right)?;
    AutElement::new(spec, matrix)
}

fn skew_hermitian<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = linalg::gaussian_matrix(n, n, rng);
    (&g - &g.adjoint()).scale(C64::new(0.5 * scale, 0.0))
}

fn real_antisymmetric<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = linalg::gaussian_matrix(n, n, rng).map(|z| C64::new(z.re, 0.0));
    (&g - &g.transpose()).scale(C64::new(0.5 * scale, 0.0))
}

fn with_spectral_norm(m: ComplexMatrix, target: f64) -> Result<ComplexMatrix> {
    let top = linalg::singular_values(&m)?.first().copied().unwrap_or(0.0);
    if top < 1e-12 {
        return Ok(m);
    }
    Ok(m.scale(C64::new(target / top, 0.0)))
}

/// Exponential of a random element of the Lie algebra of `Aut(spec)`.
///
/// The noncompact block has spectral norm `reach · u` with `u` uniform in
/// `(0, 1)`, so the image of the origin has norm at most `tanh(reach)`.
pub fn lie_exponential<R: Rng + ?Sized>(spec: DomainSpec, reach: f64, rng: &mut R) -> Result<AutElement> {
    let radius = reach * rng.random_range(0.0..1.0);
    let x = match spec {
        DomainSpec::TypeI { r, s } => {
            let b = with_spectral_norm(linalg::gaussian_matrix(r, s, rng), radius)?;
            ComplexMatrix::from_blocks(
                &skew_hermitian(r, 1.0, rng),
                &b,
                &b.adjoint(),
                &skew_hermitian(s, 1.0, rng),
            )?
        }
        DomainSpec::TypeII { n } | DomainSpec::TypeIII { n } => {
            let g = linalg::gaussian_matrix(n, n, rng);
            let sign = if spec.kind() == DomainKind::II { -1.0 } else { 1.0 };
            let b = (&g + &g.transpose().scale(C64::new(sign, 0.0))).scale(C64::new(0.5, 0.0));
            let b = with_spectral_norm(b, radius)?;
            let a = skew_hermitian(n, 1.0, rng);
            ComplexMatrix::from_blocks(&a, &b, &b.adjoint(), &a.conj())?
        }
        DomainSpec::TypeIV { n } => {
            let r = linalg::gaussian_matrix(n, 2, rng).map(|z| C64::new(z.re, 0.0));
            let r = with_spectral_norm(r, radius)?;
            ComplexMatrix::from_blocks(
                &real_antisymmetric(n, 1.0, rng),
                &r.scale(I),
                &r.transpose().scale(-I),
                &real_antisymmetric(2, 1.0, rng),
            )?
        }
    };
    AutElement::new(spec, x.exp()?)
}

/// Random automorphism; `variant` cycles through isotropies, noncompact
/// elements (transvections for type I, Lie exponentials otherwise), and
/// products `iso · noncompact · iso`.
pub fn random_automorphism<R: Rng + ?Sized>(spec: DomainSpec, variant: usize, rng: &mut R) -> Result<AutElement> {
    let noncompact = |rng: &mut R| -> Result<AutElement> {
        if spec.kind() == DomainKind::I {
            let centre = crate::domains::sample_point_with(spec, Region::Interior, rng)?;
            transvection_type1(&centre.scaled(0.9))
        } else {
            lie_exponential(spec, 1.2, rng)
        }
    };
    match variant % 3 {
        0 => isotropy(spec, &random_isotropy_params(spec, rng)),
        1 => noncompact(rng),
        _ => {
            let left = isotropy(spec, &random_isotropy_params(spec, rng))?;
            let mid = noncompact(rng)?;
            let right = isotropy(spec, &random_isotropy_params(spec, rng))?;
            left.product(&mid)?.product(&right)
        }
    }
}

/// Automorphy factor `F_U(Z, W)` in the form appropriate to the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AutomorphyFactor {
    /// Types I and III: `1 / (det(A + ZC)·conj det(A + WC))`.
    Direct(C64),
    /// Type II: the square `F_U²`, which has the same closed form.
    Squared(C64),
    /// Type IV: `c / (λ(Z)·conj λ(W))` for each candidate constant `c`.
    Candidates(Vec<(f64, C64)>),
}

pub fn automorphy_factor(e: &AutElement, z: &Point, w: &Point) -> Result<AutomorphyFactor> {
    if z.spec() != e.spec || w.spec() != e.spec {
        return Err(Error::Shape("automorphy factor needs points of the element's domain".into()));
    }
    let den = match e.spec.kind() {
        DomainKind::IV => lambda_iv(e, z)? * lambda_iv(e, w)?.conj(),
        _ => {
            let (a, _, c, _) = e.blocks();
            det(&(&a + &(z.value() * &c)))? * det(&(&a + &(w.value() * &c)))?.conj()
        }
    };
    if !(den.norm() > 1e-300) || !den.is_finite() {
        return Err(Error::ActionSingularity("automorphy denominator vanishes".into()));
    }
    let inv = den.inv();
    Ok(match e.spec.kind() {
        DomainKind::I | DomainKind::III => AutomorphyFactor::Direct(inv),
        DomainKind::II => AutomorphyFactor::Squared(inv),
        DomainKind::IV => AutomorphyFactor::Candidates(
            TYPE_IV_CANDIDATES.iter().map(|&c| (c, inv * c)).collect(),
        ),
    })
}

/// Serialized form `{"spec": "I:2,2", "matrix": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutElementJson {
    pub spec: DomainSpec,
    pub matrix: Vec<[f64; 2]>,
}

impl From<&AutElement> for AutElementJson {
    fn from(e: &AutElement) -> Self {
        Self {
            spec: e.spec,
            matrix: e.matrix.to_row_major().iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl TryFrom<AutElementJson> for AutElement {
    type Error = Error;
    fn try_from(json: AutElementJson) -> Result<Self> {
        let m = json.spec.group_dim();
        let entries = json.matrix.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        AutElement::new(json.spec, ComplexMatrix::from_row_major(m, m, entries)?)
    }
}

impl Serialize for AutElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AutElementJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AutElement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let json = AutElementJson::deserialize(deserializer)?;
        AutElement::try_from(json).map_err(serde::de::Error::custom)
    }
}
