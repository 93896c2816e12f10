//! Classical bounded symmetric domains of types I–IV: membership margins,
//! generic norms, the explicit block embeddings of Δ×𝔹ⁿ, and the composite
//! norm-identity residuals.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::germ::{DiskIsometry, GermError};
use crate::{c64, C64};

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid domain parameters: {0}")]
    InvalidParams(String),
    #[error("point shape does not match the domain: {0}")]
    ShapeMismatch(String),
    #[error("point is not a member of the domain (margin {0})")]
    NotMember(f64),
    #[error("source dimension {got} does not match the embedding ({want})")]
    DimensionMismatch { got: usize, want: usize },
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// Tag of the four classical types.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    I,
    II,
    III,
    IV,
}

/// A classical domain with its size parameters.
///
/// - `TypeI { p, q }`: p×q matrices with `I − Z̄ᵀZ > 0`;
/// - `TypeII { m }`: antisymmetric members of type I(m,m);
/// - `TypeIII { m }`: symmetric members of type I(m,m);
/// - `TypeIV { n }`: the Lie-ball realization in ℂⁿ, n ≥ 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainSpec {
    TypeI { p: usize, q: usize },
    TypeII { m: usize },
    TypeIII { m: usize },
    TypeIV { n: usize },
}

impl DomainSpec {
    pub fn validate(&self) -> Result<(), DomainError> {
        let ok = match self {
            DomainSpec::TypeI { p, q } => *p >= 1 && *q >= 1,
            DomainSpec::TypeII { m } => *m >= 2,
            DomainSpec::TypeIII { m } => *m >= 1,
            DomainSpec::TypeIV { n } => *n >= 3,
        };
        if ok {
            Ok(())
        } else {
            Err(DomainError::InvalidParams(format!("{self:?}")))
        }
    }

    pub fn kind(&self) -> DomainKind {
        match self {
            DomainSpec::TypeI { .. } => DomainKind::I,
            DomainSpec::TypeII { .. } => DomainKind::II,
            DomainSpec::TypeIII { .. } => DomainKind::III,
            DomainSpec::TypeIV { .. } => DomainKind::IV,
        }
    }

    /// Matrix shape of the ambient space (types I–III).
    pub fn matrix_shape(&self) -> Option<(usize, usize)> {
        match self {
            DomainSpec::TypeI { p, q } => Some((*p, *q)),
            DomainSpec::TypeII { m } | DomainSpec::TypeIII { m } => Some((*m, *m)),
            DomainSpec::TypeIV { .. } => None,
        }
    }
}

/// Ambient value of a domain point.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainValue {
    Matrix(DMatrix<C64>),
    Vector(DVector<C64>),
}

/// A validated point of a classical domain's ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPoint {
    spec: DomainSpec,
    value: DomainValue,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl DomainPoint {
    pub fn new(spec: DomainSpec, value: DomainValue) -> Result<Self, DomainError> {
        spec.validate()?;
        match (&spec, &value) {
            (DomainSpec::TypeIV { n }, DomainValue::Vector(v)) => {
                if v.len() != *n {
                    return Err(DomainError::ShapeMismatch(format!(
                        "expected a vector of length {n}, got {}",
                        v.len()
                    )));
                }
            }
            (DomainSpec::TypeIV { .. }, DomainValue::Matrix(_)) => {
                return Err(DomainError::ShapeMismatch(
                    "type IV points are vectors".into(),
                ));
            }
            (_, DomainValue::Vector(_)) => {
                return Err(DomainError::ShapeMismatch(
                    "matrix domains need matrix points".into(),
                ));
            }
            (_, DomainValue::Matrix(m)) => {
                let (p, q) = spec.matrix_shape().unwrap();
                if m.nrows() != p || m.ncols() != q {
                    return Err(DomainError::ShapeMismatch(format!(
                        "expected {p}x{q}, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                match spec {
                    DomainSpec::TypeII { .. } => {
                        let skew = (m + m.transpose())
                            .iter()
                            .map(|z| z.norm())
                            .fold(0.0, f64::max);
                        if skew > SYMMETRY_TOL {
                            return Err(DomainError::ShapeMismatch(format!(
                                "type II points are antisymmetric (defect {skew:.2e})"
                            )));
                        }
                    }
                    DomainSpec::TypeIII { .. } => {
                        let sym = (m - m.transpose())
                            .iter()
                            .map(|z| z.norm())
                            .fold(0.0, f64::max);
                        if sym > SYMMETRY_TOL {
                            return Err(DomainError::ShapeMismatch(format!(
                                "type III points are symmetric (defect {sym:.2e})"
                            )));
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(DomainPoint { spec, value })
    }

    pub fn matrix(spec: DomainSpec, m: DMatrix<C64>) -> Result<Self, DomainError> {
        DomainPoint::new(spec, DomainValue::Matrix(m))
    }

    pub fn vector(spec: DomainSpec, v: DVector<C64>) -> Result<Self, DomainError> {
        DomainPoint::new(spec, DomainValue::Vector(v))
    }

    /// The origin of the ambient space.
    pub fn origin(spec: DomainSpec) -> Result<Self, DomainError> {
        spec.validate()?;
        match spec {
            DomainSpec::TypeIV { n } => {
                DomainPoint::vector(spec, DVector::from_element(n, c64(0.0, 0.0)))
            }
            _ => {
                let (p, q) = spec.matrix_shape().unwrap();
                DomainPoint::matrix(spec, DMatrix::from_element(p, q, c64(0.0, 0.0)))
            }
        }
    }

    pub fn spec(&self) -> DomainSpec {
        self.spec
    }

    pub fn value(&self) -> &DomainValue {
        &self.value
    }

    fn as_matrix(&self) -> &DMatrix<C64> {
        match &self.value {
            DomainValue::Matrix(m) => m,
            DomainValue::Vector(_) => unreachable!("validated at construction"),
        }
    }

    fn as_vector(&self) -> &DVector<C64> {
        match &self.value {
            DomainValue::Vector(v) => v,
            DomainValue::Matrix(_) => unreachable!("validated at construction"),
        }
    }

    /// Membership test with a margin: positive inside, non-positive outside.
    ///
    /// Matrix types use `1 − σ_max²`; type IV uses the smaller slack of its
    /// two defining inequalities.
    pub fn membership(&self) -> (bool, f64) {
        let margin = match &self.spec {
            DomainSpec::TypeIV { .. } => {
                let v = self.as_vector();
                let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                let quad: C64 = v.iter().map(|z| z * z).sum::<C64>() * 0.5;
                (2.0 - norm2).min(1.0 + quad.norm_sqr() - norm2)
            }
            _ => {
                let z = self.as_matrix();
                1.0 - largest_singular_value_sqr(z)
            }
        };
        (margin > 0.0, margin)
    }

    /// Generic norm `N(Z)`: the polynomial whose negative logarithm is the
    /// Kähler potential. Types I/III use `det(I − Z̄ᵀZ)`, type II the positive
    /// square root of that determinant, type IV its quartic form. Exponent 1
    /// in all four normalizations.
    pub fn generic_norm(&self) -> Result<f64, DomainError> {
        let (member, margin) = self.membership();
        if !member {
            return Err(DomainError::NotMember(margin));
        }
        Ok(match &self.spec {
            DomainSpec::TypeIV { .. } => {
                let v = self.as_vector();
                let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                let quad: C64 = v.iter().map(|z| z * z).sum::<C64>() * 0.5;
                1.0 - norm2 + quad.norm_sqr()
            }
            DomainSpec::TypeII { .. } => gram_det(self.as_matrix()).max(0.0).sqrt(),
            _ => gram_det(self.as_matrix()),
        })
    }
}

fn gram_matrix(z: &DMatrix<C64>) -> DMatrix<C64> {
    let q = z.ncols();
    DMatrix::identity(q, q) - z.adjoint() * z
}

fn gram_det(z: &DMatrix<C64>) -> f64 {
    gram_matrix(z).determinant().re
}

fn largest_singular_value_sqr(z: &DMatrix<C64>) -> f64 {
    let h = z.adjoint() * z;
    let eig = nalgebra::SymmetricEigen::new(h);
    eig.eigenvalues.iter().copied().fold(0.0, f64::max)
}

/// Block embedding of `(w, z) ∈ Δ×𝔹^{q−1}` into type I(p,q): first row
/// `(w, 0, …)`, second row `(0, z₁, …, z_{q−1})`, the rest zero.
pub fn embed_type_i(p: usize, q: usize, w: C64, z: &[C64]) -> Result<DomainPoint, DomainError> {
    if p < 2 {
        return Err(DomainError::InvalidParams(
            "type I embedding needs p ≥ 2".into(),
        ));
    }
    if z.len() != q - 1 {
        return Err(DomainError::DimensionMismatch {
            got: z.len(),
            want: q - 1,
        });
    }
    let mut m = DMatrix::from_element(p, q, c64(0.0, 0.0));
    m[(0, 0)] = w;
    for (j, &v) in z.iter().enumerate() {
        m[(1, j + 1)] = v;
    }
    DomainPoint::matrix(DomainSpec::TypeI { p, q }, m)
}

/// Block embedding of `(w, z) ∈ Δ×𝔹^{m−3}` into type II(m), m ≥ 5:
/// `diag(w·J₁, G̃(z))` with `J₁ = [[0,1],[−1,0]]` and `G̃(z)` carrying `z` in
/// its first row/column.
pub fn embed_type_ii(m: usize, w: C64, z: &[C64]) -> Result<DomainPoint, DomainError> {
    if m < 5 {
        return Err(DomainError::InvalidParams(
            "type II embedding needs m ≥ 5".into(),
        ));
    }
    if z.len() != m - 3 {
        return Err(DomainError::DimensionMismatch {
            got: z.len(),
            want: m - 3,
        });
    }
    let mut out = DMatrix::from_element(m, m, c64(0.0, 0.0));
    out[(0, 1)] = w;
    out[(1, 0)] = -w;
    for (j, &v) in z.iter().enumerate() {
        out[(2, 3 + j)] = v;
        out[(3 + j, 2)] = -v;
    }
    DomainPoint::matrix(DomainSpec::TypeII { m }, out)
}

/// Diagonal join `(w, Z) ↦ diag(w, Z)` of a type III(m−1) point into
/// type III(m).
pub fn block_join_type_iii(w: C64, inner: &DomainPoint) -> Result<DomainPoint, DomainError> {
    let m_inner = match inner.spec() {
        DomainSpec::TypeIII { m } => m,
        other => {
            return Err(DomainError::ShapeMismatch(format!(
                "block join expects a type III point, got {other:?}"
            )))
        }
    };
    let z = inner.as_matrix();
    let m = m_inner + 1;
    let mut out = DMatrix::from_element(m, m, c64(0.0, 0.0));
    out[(0, 0)] = w;
    for i in 0..m_inner {
        for j in 0..m_inner {
            out[(i + 1, j + 1)] = z[(i, j)];
        }
    }
    DomainPoint::matrix(DomainSpec::TypeIII { m }, out)
}

/// The irrational disk embedding into type IV(n):
/// `w ↦ (√−1·w/4, √15·w/4, 1 − √(1 − 7w²/8), 0, …, 0)`.
///
/// `1 − 7w²/8` stays in the right half plane for `|w| ≤ 1`, so the principal
/// square root never meets its branch cut.
pub fn embed_type_iv(n: usize, w: C64) -> Result<DomainPoint, DomainError> {
    let spec = DomainSpec::TypeIV { n };
    spec.validate()?;
    let mut v = DVector::from_element(n, c64(0.0, 0.0));
    v[0] = c64(0.0, 0.25) * w;
    v[1] = c64(15.0f64.sqrt() / 4.0, 0.0) * w;
    v[2] = c64(1.0, 0.0) - (c64(1.0, 0.0) - w * w * (7.0 / 8.0)).sqrt();
    DomainPoint::vector(spec, v)
}

/// Embed a solved Δ×𝔹ⁿ isometry value into the requested domain.
pub fn embed(spec: &DomainSpec, w: C64, z: &[C64]) -> Result<DomainPoint, DomainError> {
    match spec {
        DomainSpec::TypeI { p, q } => embed_type_i(*p, *q, w, z),
        DomainSpec::TypeII { m } => embed_type_ii(*m, w, z),
        DomainSpec::TypeIV { n } => embed_type_iv(*n, w),
        DomainSpec::TypeIII { .. } => Err(DomainError::InvalidParams(
            "type III uses block_join_type_iii with an inner point".into(),
        )),
    }
}

/// Max over the grid of `|N(embed(f(w))) − (1−|w|²)|` for a type I or II
/// target fed by a solved isometry.
pub fn composite_residual(
    spec: &DomainSpec,
    iso: &DiskIsometry,
    grid: &[C64],
) -> Result<f64, DomainError> {
    let want = match spec {
        DomainSpec::TypeI { q, .. } => q - 1,
        DomainSpec::TypeII { m } => m - 3,
        _ => {
            return Err(DomainError::InvalidParams(
                "composite residual over a grid applies to types I and II".into(),
            ))
        }
    };
    if iso.ball_dim() != want {
        return Err(DomainError::DimensionMismatch {
            got: iso.ball_dim(),
            want,
        });
    }
    let mut worst: f64 = 0.0;
    for &w in grid {
        let p = iso.evaluate(w)?;
        let point = embed(spec, p.disk, &p.ball)?;
        let n = point.generic_norm()?;
        worst = worst.max((n - (1.0 - w.norm_sqr())).abs());
    }
    Ok(worst)
}

/// Max over the grid of `|N(F(w)) − (1−|w|²)|` for the type IV disk
/// embedding; the identity is exact, so this measures rounding only.
pub fn type_iv_composite_residual(n: usize, grid: &[C64]) -> Result<f64, DomainError> {
    let mut worst: f64 = 0.0;
    for &w in grid {
        let point = embed_type_iv(n, w)?;
        let norm = point.generic_norm()?;
        worst = worst.max((norm - (1.0 - w.norm_sqr())).abs());
    }
    Ok(worst)
}

/// Max over inner points and disk samples of
/// `|N(diag(w, Z)) − (1−|w|²)·N(Z)|`: the determinant identity behind the
/// type III block join.
pub fn type_iii_block_multiplicativity(
    inners: &[DomainPoint],
    disk_samples: &[C64],
) -> Result<f64, DomainError> {
    let mut worst: f64 = 0.0;
    for inner in inners {
        let n_inner = inner.generic_norm()?;
        for &w in disk_samples {
            let joined = block_join_type_iii(w, inner)?;
            let n_joined = joined.generic_norm()?;
            worst = worst.max((n_joined - (1.0 - w.norm_sqr()) * n_inner).abs());
        }
    }
    Ok(worst)
}

/// Random member of type III(m): a symmetric matrix scaled to spectral norm
/// about 0.7.
pub fn random_type_iii_member(
    m: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<DomainPoint, DomainError> {
    use rand::Rng;
    let mut z = DMatrix::from_element(m, m, c64(0.0, 0.0));
    for i in 0..m {
        for j in i..m {
            let v = c64(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            z[(i, j)] = v;
            z[(j, i)] = v;
        }
    }
    let top = largest_singular_value_sqr(&z).sqrt();
    if top > 0.0 {
        z /= c64(top / 0.7, 0.0);
    }
    DomainPoint::matrix(DomainSpec::TypeIII { m }, z)
}
